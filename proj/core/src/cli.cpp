#include "asrb/cli.hpp"

#include "asrb/checkpoint.hpp"
#include "asrb/data.hpp"
#include "asrb/metrics.hpp"
#include "asrb/recognize.hpp"
#include "asrb/train.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

namespace asrb {

namespace {

namespace fs = std::filesystem;

std::string stem_of(const std::string& path) { return fs::path(path).stem().string(); }

struct DimFlags {
  int d_enc = 64, enc_layers = 2, enc_heads = 4, enc_ffn = 256;
  int d_llm = 128, llm_layers = 4, llm_heads = 4, llm_ffn = 512;
  int vocab = 32, max_pos = 160;
  int subsample = 4;
  int adapter_layers = 2;
  double adapter_ffn_mult = 2.5;
  int enc_lora_r = 8, llm_lora_r = 16;
  double enc_lora_alpha = 16.0, llm_lora_alpha = 16.0;

  BridgeDims build() const {
    BridgeDims d;
    d.d_enc = d_enc;
    d.enc_layers = enc_layers;
    d.enc_heads = enc_heads;
    d.enc_ffn = enc_ffn;
    d.d_llm = d_llm;
    d.llm_layers = llm_layers;
    d.llm_heads = llm_heads;
    d.llm_ffn = llm_ffn;
    d.vocab = vocab;
    d.max_pos = max_pos;
    d.adapter.d_enc = d_enc;
    d.adapter.d_llm = d_llm;
    d.adapter.subsample = subsample;
    d.adapter.transformer_layers = adapter_layers;
    d.adapter.ffn_multiplier = adapter_ffn_mult;
    d.enc_lora = LoraSpec{enc_lora_r, enc_lora_alpha};
    d.llm_lora = LoraSpec{llm_lora_r, llm_lora_alpha};
    return d;
  }

  void reference_scale() {
    d_enc = 1024;
    enc_layers = 24;
    enc_heads = 16;
    enc_ffn = 4096;
    d_llm = 4096;
    llm_layers = 32;
    llm_heads = 32;
    llm_ffn = 11008;
    vocab = 32000;
    max_pos = 4096;
    subsample = 8;
    adapter_layers = 2;
    adapter_ffn_mult = 2.5;
    enc_lora_r = 8;
    llm_lora_r = 16;
  }

  void add_flags(CLI::App* cmd) {
    cmd->add_option("--d-enc", d_enc, "encoder hidden dim");
    cmd->add_option("--enc-layers", enc_layers, "encoder transformer layers");
    cmd->add_option("--enc-heads", enc_heads, "encoder attention heads");
    cmd->add_option("--enc-ffn", enc_ffn, "encoder FFN dim");
    cmd->add_option("--d-llm", d_llm, "LM hidden dim");
    cmd->add_option("--llm-layers", llm_layers, "LM transformer layers");
    cmd->add_option("--llm-heads", llm_heads, "LM attention heads");
    cmd->add_option("--llm-ffn", llm_ffn, "LM FFN dim");
    cmd->add_option("--vocab-size", vocab, "text vocabulary size (excl. BOS/EOS)");
    cmd->add_option("--max-pos", max_pos, "maximum sequence positions");
    cmd->add_option("--subsample", subsample, "adapter subsampling factor");
    cmd->add_option("--adapter-layers", adapter_layers, "adapter transformer layers");
    cmd->add_option("--adapter-ffn-mult", adapter_ffn_mult, "adapter FFN multiplier");
    cmd->add_option("--enc-lora-r", enc_lora_r, "encoder LoRA rank");
    cmd->add_option("--enc-lora-alpha", enc_lora_alpha, "encoder LoRA alpha");
    cmd->add_option("--llm-lora-r", llm_lora_r, "LM LoRA rank");
    cmd->add_option("--llm-lora-alpha", llm_lora_alpha, "LM LoRA alpha");
  }
};

MatchLossConfig parse_match_loss(const std::string& s) {
  size_t comma = s.find(',');
  if (comma == std::string::npos)
    throw CLI::ValidationError("--match-loss", "expected 'a,b', e.g. 0.01,0.04");
  MatchLossConfig cfg;
  cfg.a = std::stod(s.substr(0, comma));
  cfg.b = std::stod(s.substr(comma + 1));
  return cfg;
}

BridgeModel<float> load_model(const std::string& model_config, const std::string& checkpoint) {
  std::string scheme_name;
  uint32_t seed = 0;
  BridgeDims dims = dims_from_kv(read_kv(model_config), &scheme_name, &seed);
  BridgeModel<float> model = build_bridge<float>(dims, scheme_preset(scheme_name), seed);
  apply_checkpoint(load_checkpoint(checkpoint), model.all_parameters());
  return model;
}

struct HypRecord {
  std::string utt_id;
  std::string text;
  double score = 0.0;
  int length = 0;
};

void write_hyps(const std::string& path, const std::vector<HypRecord>& hyps,
                const std::string& config_line) {
  std::ofstream os(path);
  if (!os) throw DataError("cannot open hypotheses file " + path);
  os << "#" << config_line << "\n";
  for (const auto& h : hyps) {
    char score[32];
    std::snprintf(score, sizeof(score), "%.6f", h.score);
    os << h.utt_id << "\t" << h.text << "\t" << score << "\t" << h.length << "\n";
  }
}

std::vector<HypRecord> read_hyps(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw DataError("cannot open hypotheses file " + path);
  std::vector<HypRecord> out;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<size_t> tabs;
    for (size_t i = 0; i < line.size(); ++i)
      if (line[i] == '\t') tabs.push_back(i);
    if (tabs.size() != 3)
      throw DataError("hypotheses line is not 4 tab-separated fields: " + line);
    HypRecord h;
    h.utt_id = line.substr(0, tabs[0]);
    h.text = line.substr(tabs[0] + 1, tabs[1] - tabs[0] - 1);
    h.score = std::stod(line.substr(tabs[1] + 1, tabs[2] - tabs[1] - 1));
    h.length = std::stoi(line.substr(tabs[2] + 1));
    out.push_back(std::move(h));
  }
  return out;
}

int run_impl(int argc, const char* const* argv) {
  CLI::App app{"LLM-bridge ASR toolkit: synthetic corpora, adapter/LoRA "
               "fine-tuning, constrained beam decoding, WER/IER evaluation"};
  app.require_subcommand(1);

  // ---- synth ----
  auto* synth = app.add_subcommand("synth", "generate a synthetic corpus");
  SynthConfig sc;
  std::string synth_out, synth_name = "synth";
  uint32_t synth_seed = 1;
  synth->add_option("--out-dir", synth_out, "output directory")->required();
  synth->add_option("--name", synth_name, "corpus name");
  synth->add_option("--utt-count", sc.utt_count, "number of utterances");
  synth->add_option("--vocab-size", sc.vocab_size, "token vocabulary size");
  synth->add_option("--tokens-min", sc.tokens_min, "min tokens per utterance");
  synth->add_option("--tokens-max", sc.tokens_max, "max tokens per utterance");
  synth->add_option("--sample-rate", sc.sample_rate, "sample rate in Hz");
  synth->add_option("--samples-per-token", sc.samples_per_token, "segment length per token");
  synth->add_option("--amplitude", sc.amplitude, "tone amplitude");
  synth->add_option("--noise-sigma", sc.noise_sigma, "additive Gaussian noise sigma");
  synth->add_option("--nonspeech-fraction", sc.nonspeech_fraction,
                    "fraction of empty-transcript noise utterances");
  synth->add_option("--seed", synth_seed, "random seed");

  // ---- train ----
  auto* traincmd = app.add_subcommand("train", "train a bridge model");
  DimFlags train_dims;
  TrainConfig tc;
  std::string train_manifest, train_out, scheme_name = "s1", match_loss_arg, init_ckpt;
  bool augment_flag = false;
  traincmd->add_option("--manifest", train_manifest, "training manifest")->required();
  traincmd->add_option("--out-dir", train_out, "output directory")->required();
  traincmd->add_option("--scheme", scheme_name, "fine-tuning scheme s1..s10");
  traincmd->add_option("--steps", tc.steps, "training steps");
  traincmd->add_option("--batch-size", tc.batch_size, "batch size");
  traincmd->add_option("--lr", tc.lr, "learning rate");
  traincmd->add_option("--warmup", tc.warmup_steps, "linear warmup steps");
  traincmd->add_option("--checkpoint-every", tc.checkpoint_every, "checkpoint interval");
  traincmd->add_option("--match-loss", match_loss_arg, "matching-loss weights 'a,b'");
  traincmd->add_flag("--augment", augment_flag, "enable speed/volume augmentation");
  traincmd->add_option("--grad-clip", tc.grad_clip, "global-norm gradient clip");
  traincmd->add_option("--val-fraction", tc.val_fraction, "held-out validation fraction");
  traincmd->add_option("--seed", tc.seed, "random seed");
  traincmd->add_option("--init-checkpoint", init_ckpt, "start from this checkpoint");
  train_dims.add_flags(traincmd);

  // ---- nset-finetune ----
  auto* nset = app.add_subcommand("nset-finetune",
                                  "fine-tune a trained model with non-speech data");
  TrainConfig nc;
  nc.steps = 200;
  nc.lr = 1e-4;
  std::string nset_manifest, nset_nonspeech, nset_ckpt, nset_config, nset_out;
  double nset_ratio = 0.1;
  nset->add_option("--manifest", nset_manifest, "original training manifest")->required();
  nset->add_option("--nonspeech-manifest", nset_nonspeech, "non-speech manifest")->required();
  nset->add_option("--checkpoint", nset_ckpt, "trained checkpoint")->required();
  nset->add_option("--model-config", nset_config, "model config (key=value)")->required();
  nset->add_option("--out-dir", nset_out, "output directory")->required();
  nset->add_option("--ratio", nset_ratio, "non-speech fraction of the mixed manifest");
  nset->add_option("--steps", nc.steps, "fine-tune steps");
  nset->add_option("--lr", nc.lr, "fine-tune learning rate");
  nset->add_option("--batch-size", nc.batch_size, "batch size");
  nset->add_option("--checkpoint-every", nc.checkpoint_every, "checkpoint interval");
  nset->add_option("--warmup", nc.warmup_steps, "warmup steps");
  nset->add_option("--seed", nc.seed, "random seed");

  // ---- decode ----
  auto* decode = app.add_subcommand("decode", "beam-search decode a manifest");
  DecodeParams dp;
  std::string dec_manifest, dec_ckpt, dec_config, dec_out;
  decode->add_option("--manifest", dec_manifest, "eval manifest")->required();
  decode->add_option("--checkpoint", dec_ckpt, "model checkpoint")->required();
  decode->add_option("--model-config", dec_config, "model config (key=value)")->required();
  decode->add_option("--out", dec_out, "hypotheses output file")->required();
  decode->add_option("--beam-size", dp.beam_size, "beam size");
  decode->add_option("--max-length", dp.max_length, "maximum generated length");
  decode->add_option("--no-repeat-ngram-size", dp.nrns, "ban repeated n-grams of this size");
  decode->add_option("--length-penalty", dp.length_penalty, "length penalty exponent");

  // ---- eval ----
  auto* eval = app.add_subcommand("eval", "score hypotheses against references");
  std::string eval_refs, eval_hyps, eval_name, eval_out, eval_json;
  eval->add_option("--refs", eval_refs, "reference manifest")->required();
  eval->add_option("--hyps", eval_hyps, "hypotheses file")->required();
  eval->add_option("--name", eval_name, "test-set name in the report");
  eval->add_option("--out", eval_out, "write the report line here too");
  eval->add_option("--json-out", eval_json, "machine-readable JSONL output");

  // ---- average ----
  auto* avg = app.add_subcommand("average", "average a best window of checkpoints");
  std::string avg_records, avg_out;
  std::vector<std::string> avg_paths;
  int avg_window = 5;
  avg->add_option("--records", avg_records, "records.jsonl from training");
  avg->add_option("--checkpoints", avg_paths, "explicit checkpoint list");
  avg->add_option("--window", avg_window, "window size");
  avg->add_option("--out", avg_out, "merged checkpoint path")->required();

  // ---- count-params ----
  auto* cp = app.add_subcommand("count-params", "trainable-parameter accounting");
  DimFlags cp_dims;
  std::string cp_scheme = "s1";
  bool cp_reference = false;
  cp->add_option("--scheme", cp_scheme, "fine-tuning scheme s1..s10");
  cp->add_flag("--reference-scale", cp_reference, "use reference large-scale dimensions");
  cp_dims.add_flags(cp);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  if (*synth) {
    Manifest m = synth_corpus(sc, synth_seed, synth_out, synth_name);
    std::map<std::string, std::string> kv{
        {"command", "synth"},
        {"name", synth_name},
        {"utt_count", std::to_string(sc.utt_count)},
        {"vocab_size", std::to_string(sc.vocab_size)},
        {"tokens_min", std::to_string(sc.tokens_min)},
        {"tokens_max", std::to_string(sc.tokens_max)},
        {"sample_rate", std::to_string(sc.sample_rate)},
        {"samples_per_token", std::to_string(sc.samples_per_token)},
        {"amplitude", std::to_string(sc.amplitude)},
        {"noise_sigma", std::to_string(sc.noise_sigma)},
        {"nonspeech_fraction", std::to_string(sc.nonspeech_fraction)},
        {"seed", std::to_string(synth_seed)},
    };
    write_kv((fs::path(synth_out) / "synth_config.txt").string(), kv);
    std::cout << "wrote " << m.utterances.size() << " utterances to " << synth_out << "\n";
    return 0;
  }

  if (*traincmd) {
    FinetuneScheme scheme = scheme_preset(scheme_name);
    BridgeDims dims = train_dims.build();
    BridgeModel<float> model = build_bridge<float>(dims, scheme, tc.seed);
    if (!init_ckpt.empty()) apply_checkpoint(load_checkpoint(init_ckpt), model.all_parameters());
    if (!match_loss_arg.empty()) tc.match_loss = parse_match_loss(match_loss_arg);
    if (augment_flag) tc.augment_policy = AugmentPolicy{};
    tc.out_dir = train_out;
    Manifest m = read_manifest(train_manifest);
    std::vector<CheckpointRecord> records = train(model, m, tc);
    write_kv((fs::path(train_out) / "model_config.txt").string(),
             dims_to_kv(dims, scheme_name, tc.seed));
    std::map<std::string, std::string> kv{
        {"command", "train"},
        {"manifest", train_manifest},
        {"scheme", scheme_name},
        {"steps", std::to_string(tc.steps)},
        {"batch_size", std::to_string(tc.batch_size)},
        {"lr", std::to_string(tc.lr)},
        {"warmup", std::to_string(tc.warmup_steps)},
        {"checkpoint_every", std::to_string(tc.checkpoint_every)},
        {"match_loss", match_loss_arg.empty() ? "off" : match_loss_arg},
        {"augment", augment_flag ? "on" : "off"},
        {"seed", std::to_string(tc.seed)},
    };
    write_kv((fs::path(train_out) / "train_config.txt").string(), kv);
    std::cout << "trained " << tc.steps << " steps, " << records.size()
              << " checkpoints in " << train_out << "\n";
    return 0;
  }

  if (*nset) {
    BridgeModel<float> model = load_model(nset_config, nset_ckpt);
    nc.out_dir = nset_out;
    Manifest m = read_manifest(nset_manifest);
    Manifest ns = read_manifest(nset_nonspeech);
    std::vector<CheckpointRecord> records = nset_finetune(model, m, ns, nset_ratio, nc);
    fs::create_directories(nset_out);
    fs::copy_file(nset_config, fs::path(nset_out) / "model_config.txt",
                  fs::copy_options::overwrite_existing);
    std::map<std::string, std::string> kv{
        {"command", "nset-finetune"}, {"manifest", nset_manifest},
        {"nonspeech_manifest", nset_nonspeech}, {"checkpoint", nset_ckpt},
        {"ratio", std::to_string(nset_ratio)}, {"steps", std::to_string(nc.steps)},
        {"lr", std::to_string(nc.lr)}, {"seed", std::to_string(nc.seed)},
    };
    write_kv((fs::path(nset_out) / "nset_config.txt").string(), kv);
    std::cout << "fine-tuned " << nc.steps << " steps, " << records.size()
              << " checkpoints in " << nset_out << "\n";
    return 0;
  }

  if (*decode) {
    BridgeModel<float> model = load_model(dec_config, dec_ckpt);
    Manifest m = read_manifest(dec_manifest);
    std::vector<HypRecord> hyps;
    for (const Utterance& u : m.utterances) {
      Waveform w = read_wav(u.audio_path);
      Hypothesis best = recognize(model, w.samples, dp);
      HypRecord h;
      h.utt_id = stem_of(u.audio_path);
      for (size_t i = 0; i < best.tokens.size(); ++i) {
        if (i) h.text += ' ';
        h.text += token_word(best.tokens[i]);
      }
      h.score = best.score;
      h.length = static_cast<int>(best.tokens.size()) + 1;  // incl. EOS
      hyps.push_back(std::move(h));
    }
    std::string cfg_line = "beam_size=" + std::to_string(dp.beam_size) +
                           "\tmax_length=" + std::to_string(dp.max_length) +
                           "\tno_repeat_ngram_size=" + std::to_string(dp.nrns) +
                           "\tlength_penalty=" + std::to_string(dp.length_penalty) +
                           "\tcheckpoint=" + dec_ckpt;
    write_hyps(dec_out, hyps, cfg_line);
    std::cout << "decoded " << hyps.size() << " utterances to " << dec_out << "\n";
    return 0;
  }

  if (*eval) {
    Manifest refs = read_manifest(eval_refs);
    std::vector<HypRecord> hyps = read_hyps(eval_hyps);
    std::map<std::string, std::string> hyp_by_id;
    for (const auto& h : hyps) hyp_by_id[h.utt_id] = h.text;
    AlignmentCounts total;
    for (const Utterance& u : refs.utterances) {
      std::string id = stem_of(u.audio_path);
      auto it = hyp_by_id.find(id);
      if (it == hyp_by_id.end()) throw DataError("no hypothesis for utterance " + id);
      total += align(split_words(u.text), split_words(it->second));
    }
    std::string name = eval_name.empty() ? refs.name : eval_name;
    std::string line = format_report_line(name, total);
    std::cout << line << "\n";
    if (!eval_out.empty()) {
      std::ofstream os(eval_out);
      os << "#refs=" << eval_refs << "\thyps=" << eval_hyps << "\n" << line << "\n";
    }
    if (!eval_json.empty()) {
      std::ofstream os(eval_json);
      char buf[256];
      std::snprintf(buf, sizeof(buf),
                    "{\"set\":\"%s\",\"wer\":%.6f,\"ier\":%.6f,\"s\":%lld,\"d\":%lld,"
                    "\"i\":%lld,\"n\":%lld}",
                    name.c_str(), wer(total), ier(total), total.substitutions, total.deletions,
                    total.insertions, total.ref_len);
      os << buf << "\n";
    }
    return 0;
  }

  if (*avg) {
    std::vector<std::string> paths = avg_paths;
    if (!avg_records.empty()) {
      std::vector<CheckpointRecord> records = read_records(avg_records);
      std::vector<CheckpointRecord> window = select_best_window(records, avg_window);
      paths.clear();
      for (const auto& r : window) paths.push_back(r.path);
    }
    if (paths.empty())
      throw CLI::ValidationError("average", "give --records or --checkpoints");
    save_checkpoint_blobs(avg_out, average_checkpoints(paths));
    std::cout << "averaged " << paths.size() << " checkpoints into " << avg_out << "\n";
    return 0;
  }

  if (*cp) {
    if (cp_reference) cp_dims.reference_scale();
    FinetuneScheme scheme = scheme_preset(cp_scheme);
    BridgeDims dims = cp_dims.build();
    dims.adapter.kind = scheme.adapter_kind;
    std::map<std::string, long long> counts =
        count_params(dims, scheme.encoder_mode, scheme.llm_mode);
    std::cout << "# scheme=" << cp_scheme << " encoder=" << to_string(scheme.encoder_mode)
              << " adapter=" << to_string(scheme.adapter_kind)
              << " llm=" << to_string(scheme.llm_mode) << (cp_reference ? " reference-scale" : "")
              << "\n";
    for (const char* key : {"encoder", "adapter", "llm", "total"})
      std::cout << key << "\t" << counts[key] << "\n";
    return 0;
  }

  return 0;
}

}  // namespace

void write_kv(const std::string& path, const std::map<std::string, std::string>& kv) {
  std::ofstream os(path);
  if (!os) throw DataError("write_kv: cannot open " + path);
  for (const auto& [k, v] : kv) os << k << "=" << v << "\n";
}

std::map<std::string, std::string> read_kv(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw DataError("read_kv: cannot open " + path);
  std::map<std::string, std::string> kv;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    size_t eq = line.find('=');
    if (eq == std::string::npos) throw DataError("read_kv: malformed line '" + line + "'");
    kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  return kv;
}

std::map<std::string, std::string> dims_to_kv(const BridgeDims& d, const std::string& scheme,
                                              uint32_t seed) {
  return {
      {"scheme", scheme},
      {"seed", std::to_string(seed)},
      {"d_enc", std::to_string(d.d_enc)},
      {"enc_layers", std::to_string(d.enc_layers)},
      {"enc_heads", std::to_string(d.enc_heads)},
      {"enc_ffn", std::to_string(d.enc_ffn)},
      {"d_llm", std::to_string(d.d_llm)},
      {"llm_layers", std::to_string(d.llm_layers)},
      {"llm_heads", std::to_string(d.llm_heads)},
      {"llm_ffn", std::to_string(d.llm_ffn)},
      {"vocab", std::to_string(d.vocab)},
      {"max_pos", std::to_string(d.max_pos)},
      {"subsample", std::to_string(d.adapter.subsample)},
      {"adapter_layers", std::to_string(d.adapter.transformer_layers)},
      {"adapter_ffn_mult", std::to_string(d.adapter.ffn_multiplier)},
      {"adapter_heads", std::to_string(d.adapter.heads)},
      {"enc_lora_r", std::to_string(d.enc_lora.r)},
      {"enc_lora_alpha", std::to_string(d.enc_lora.alpha)},
      {"llm_lora_r", std::to_string(d.llm_lora.r)},
      {"llm_lora_alpha", std::to_string(d.llm_lora.alpha)},
  };
}

BridgeDims dims_from_kv(const std::map<std::string, std::string>& kv, std::string* scheme,
                        uint32_t* seed) {
  auto get = [&kv](const std::string& key) -> const std::string& {
    auto it = kv.find(key);
    if (it == kv.end()) throw DataError("model config missing key '" + key + "'");
    return it->second;
  };
  BridgeDims d;
  if (scheme) *scheme = get("scheme");
  if (seed) *seed = static_cast<uint32_t>(std::stoul(get("seed")));
  d.d_enc = std::stoi(get("d_enc"));
  d.enc_layers = std::stoi(get("enc_layers"));
  d.enc_heads = std::stoi(get("enc_heads"));
  d.enc_ffn = std::stoi(get("enc_ffn"));
  d.d_llm = std::stoi(get("d_llm"));
  d.llm_layers = std::stoi(get("llm_layers"));
  d.llm_heads = std::stoi(get("llm_heads"));
  d.llm_ffn = std::stoi(get("llm_ffn"));
  d.vocab = std::stoi(get("vocab"));
  d.max_pos = std::stoi(get("max_pos"));
  d.adapter.d_enc = d.d_enc;
  d.adapter.d_llm = d.d_llm;
  d.adapter.subsample = std::stoi(get("subsample"));
  d.adapter.transformer_layers = std::stoi(get("adapter_layers"));
  d.adapter.ffn_multiplier = std::stod(get("adapter_ffn_mult"));
  d.adapter.heads = std::stoi(get("adapter_heads"));
  d.enc_lora = LoraSpec{std::stoi(get("enc_lora_r")), std::stod(get("enc_lora_alpha"))};
  d.llm_lora = LoraSpec{std::stoi(get("llm_lora_r")), std::stod(get("llm_lora_alpha"))};
  return d;
}

int cli_run(int argc, const char* const* argv) {
  try {
    return run_impl(argc, argv);
  } catch (const CLI::ParseError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace asrb
