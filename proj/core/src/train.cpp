#include "asrb/train.hpp"

#include "asrb/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>

namespace asrb {

namespace {

namespace fs = std::filesystem;

struct LoadedUtt {
  std::vector<float> samples;
  int sample_rate = 0;
  std::vector<int> tokens;  // empty for non-speech
};

std::vector<LoadedUtt> load_corpus(const Manifest& manifest, int vocab) {
  std::vector<LoadedUtt> out;
  out.reserve(manifest.utterances.size());
  for (const Utterance& u : manifest.utterances) {
    LoadedUtt l;
    Waveform w = read_wav(u.audio_path);
    l.samples = std::move(w.samples);
    l.sample_rate = w.sample_rate;
    for (const std::string& word : split_words(u.text))
      l.tokens.push_back(parse_token_word(word, vocab));
    out.push_back(std::move(l));
  }
  return out;
}

struct LossParts {
  double ce = 0.0;
  double lm = 0.0;
};

// Builds the per-utterance graph; returns the loss tensor plus raw values.
Tensor<float> utterance_loss(Tape<float>& tape, BridgeModel<float>& model,
                             const std::vector<float>& samples, const std::vector<int>& tokens,
                             const std::optional<MatchLossConfig>& match, LossParts& parts) {
  ForwardResult<float> fr = forward_asr(tape, model, samples, tokens);
  std::vector<int> targets_with_eos = tokens;
  targets_with_eos.push_back(model.eos_id());
  Tensor<float> ce = cross_entropy(fr.logits, targets_with_eos);
  parts.ce = ce.item();
  if (!match || !match->enabled() || tokens.empty()) {
    parts.lm = 0.0;
    return ce;
  }
  Tensor<float> text_emb;
  if (match->stop_grad_embeddings) {
    // detached copy of the embedding rows
    std::vector<float> rows(tokens.size() * model.dims.d_llm);
    const auto& ev = model.lm->emb.value;
    for (size_t i = 0; i < tokens.size(); ++i)
      std::copy(ev.begin() + static_cast<size_t>(tokens[i]) * model.dims.d_llm,
                ev.begin() + static_cast<size_t>(tokens[i] + 1) * model.dims.d_llm,
                rows.begin() + i * model.dims.d_llm);
    text_emb = tape.leaf(static_cast<int>(tokens.size()), model.dims.d_llm, std::move(rows));
  } else {
    text_emb = gather_rows(fr.emb_table, tokens);
  }
  Tensor<float> attended = cross_attention(text_emb, fr.acoustic, model.dims.d_llm);
  Tensor<float> lm = matching_loss(text_emb, attended, *match);
  parts.lm = lm.item();
  return combined_loss(ce, lm);
}

double validation_loss(BridgeModel<float>& model, const std::vector<LoadedUtt>& corpus,
                       const std::vector<int>& val_idx,
                       const std::optional<MatchLossConfig>& match, double* val_ce,
                       double* val_lm) {
  double total = 0.0, ce_sum = 0.0, lm_sum = 0.0;
  for (int i : val_idx) {
    Tape<float> tape;
    LossParts parts;
    Tensor<float> loss = utterance_loss(tape, model, corpus[i].samples, corpus[i].tokens, match,
                                        parts);
    total += loss.item();
    ce_sum += parts.ce;
    lm_sum += parts.lm;
  }
  int n = std::max<int>(1, static_cast<int>(val_idx.size()));
  if (val_ce) *val_ce = ce_sum / n;
  if (val_lm) *val_lm = lm_sum / n;
  return total / n;
}

struct AdamState {
  std::vector<std::vector<float>> m, v;
  double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
  long long t = 0;

  explicit AdamState(const std::vector<Param<float>*>& params) {
    for (const Param<float>* p : params) {
      m.emplace_back(p->value.size(), 0.f);
      v.emplace_back(p->value.size(), 0.f);
    }
  }

  void step(const std::vector<Param<float>*>& params, double lr) {
    ++t;
    double bc1 = 1.0 - std::pow(beta1, static_cast<double>(t));
    double bc2 = 1.0 - std::pow(beta2, static_cast<double>(t));
    for (size_t i = 0; i < params.size(); ++i) {
      Param<float>& p = *params[i];
      for (size_t j = 0; j < p.value.size(); ++j) {
        double g = p.grad[j];
        m[i][j] = static_cast<float>(beta1 * m[i][j] + (1.0 - beta1) * g);
        v[i][j] = static_cast<float>(beta2 * v[i][j] + (1.0 - beta2) * g * g);
        double mhat = m[i][j] / bc1;
        double vhat = v[i][j] / bc2;
        p.value[j] -= static_cast<float>(lr * mhat / (std::sqrt(vhat) + eps));
      }
    }
  }
};

void clip_global_norm(const std::vector<Param<float>*>& params, double max_norm) {
  double sq = 0.0;
  for (const Param<float>* p : params)
    for (float g : p->grad) sq += static_cast<double>(g) * g;
  double norm = std::sqrt(sq);
  if (norm <= max_norm || norm == 0.0) return;
  float s = static_cast<float>(max_norm / norm);
  for (Param<float>* p : params)
    for (float& g : p->grad) g *= s;
}

}  // namespace

std::vector<CheckpointRecord> train(BridgeModel<float>& model, const Manifest& manifest,
                                    const TrainConfig& cfg) {
  if (manifest.utterances.empty()) throw ContractError("train: empty manifest");
  fs::create_directories(cfg.out_dir);

  std::vector<LoadedUtt> corpus = load_corpus(manifest, model.dims.vocab);

  // Held-out split, fixed by seed; augmentation never touches it.
  std::vector<int> order(corpus.size());
  std::iota(order.begin(), order.end(), 0);
  std::seed_seq split_seq{cfg.seed, 0x5713u};
  Rng split_rng(split_seq);
  std::shuffle(order.begin(), order.end(), split_rng);
  int n_val = std::min<int>(static_cast<int>(corpus.size()) - 1,
                            std::max<int>(1, static_cast<int>(cfg.val_fraction * corpus.size())));
  std::vector<int> val_idx(order.begin(), order.begin() + n_val);
  std::vector<int> train_idx(order.begin() + n_val, order.end());
  if (train_idx.empty()) throw ContractError("train: no training utterances after split");

  std::vector<Param<float>*> trainable = model.trainable_parameters();
  AdamState adam(trainable);

  std::seed_seq batch_seq{cfg.seed, 0xBA7Cu};
  Rng batch_rng(batch_seq);
  std::uniform_int_distribution<size_t> pick(0, train_idx.size() - 1);

  std::ofstream log;
  if (cfg.write_logs) log.open((fs::path(cfg.out_dir) / "train_log.jsonl").string());

  std::vector<CheckpointRecord> records;
  for (int step = 1; step <= cfg.steps; ++step) {
    model.zero_grads();
    double batch_loss = 0.0, batch_ce = 0.0, batch_lm = 0.0;
    for (int slot = 0; slot < cfg.batch_size; ++slot) {
      const LoadedUtt& u = corpus[train_idx[pick(batch_rng)]];
      std::vector<float> samples = u.samples;
      if (cfg.augment_policy) {
        std::seed_seq aug_seq{cfg.seed, static_cast<uint32_t>(step),
                              static_cast<uint32_t>(slot), 0xA46u};
        Rng aug_rng(aug_seq);
        Waveform w{samples, u.sample_rate};
        samples = augment(w, *cfg.augment_policy, aug_rng).samples;
      }
      Tape<float> tape;
      LossParts parts;
      Tensor<float> loss = utterance_loss(tape, model, samples, u.tokens, cfg.match_loss, parts);
      double lv = loss.item();
      if (!std::isfinite(lv))
        throw ContractError("train: non-finite loss at step " + std::to_string(step) +
                            " (lr=" + std::to_string(cfg.lr) + ")");
      tape.backward(loss);
      batch_loss += lv;
      batch_ce += parts.ce;
      batch_lm += parts.lm;
    }
    float inv_batch = 1.0f / cfg.batch_size;
    for (Param<float>* p : trainable)
      for (float& g : p->grad) g *= inv_batch;
    clip_global_norm(trainable, cfg.grad_clip);
    double lr_t = cfg.lr;
    if (cfg.warmup_steps > 0 && step < cfg.warmup_steps)
      lr_t = cfg.lr * step / cfg.warmup_steps;
    adam.step(trainable, lr_t);

    if (log)
      log << "{\"step\":" << step << ",\"train_loss\":" << batch_loss / cfg.batch_size
          << ",\"ce\":" << batch_ce / cfg.batch_size << ",\"lm\":" << batch_lm / cfg.batch_size
          << ",\"lr\":" << lr_t << "}\n";

    if (cfg.checkpoint_every > 0 && step % cfg.checkpoint_every == 0) {
      double val_ce = 0.0, val_lm = 0.0;
      double vloss = validation_loss(model, corpus, val_idx, cfg.match_loss, &val_ce, &val_lm);
      CheckpointRecord rec;
      rec.step = step;
      rec.path = (fs::path(cfg.out_dir) / ("ckpt_" + std::to_string(step) + ".bin")).string();
      rec.validation_loss = vloss;
      save_checkpoint(rec.path, model.all_parameters());
      records.push_back(rec);
      if (log)
        log << "{\"step\":" << step << ",\"val_ce\":" << val_ce << ",\"val_lm\":" << val_lm
            << "}\n";
    }
  }
  if (cfg.write_logs)
    write_records((fs::path(cfg.out_dir) / "records.jsonl").string(), records);
  return records;
}

std::vector<CheckpointRecord> select_best_window(const std::vector<CheckpointRecord>& records,
                                                 int k) {
  if (k < 1 || static_cast<int>(records.size()) < k)
    throw ContractError("select_best_window: need at least " + std::to_string(k) +
                        " checkpoints, have " + std::to_string(records.size()));
  int best_start = 0;
  double best_mean = std::numeric_limits<double>::infinity();
  for (int start = 0; start + k <= static_cast<int>(records.size()); ++start) {
    double mean = 0.0;
    for (int i = 0; i < k; ++i) mean += records[start + i].validation_loss;
    mean /= k;
    if (mean < best_mean) {  // strict: earliest window wins ties
      best_mean = mean;
      best_start = start;
    }
  }
  return std::vector<CheckpointRecord>(records.begin() + best_start,
                                       records.begin() + best_start + k);
}

std::vector<CheckpointRecord> nset_finetune(BridgeModel<float>& model,
                                            const Manifest& train_manifest,
                                            const Manifest& nonspeech_manifest, double ratio,
                                            const TrainConfig& cfg) {
  Manifest mixed = mix_nset(train_manifest, nonspeech_manifest, ratio, cfg.seed);
  return train(model, mixed, cfg);
}

void write_records(const std::string& path, const std::vector<CheckpointRecord>& records) {
  std::ofstream os(path);
  if (!os) throw ContractError("write_records: cannot open " + path);
  for (const auto& r : records)
    os << "{\"step\":" << r.step << ",\"path\":\"" << r.path
       << "\",\"validation_loss\":" << r.validation_loss << "}\n";
}

std::vector<CheckpointRecord> read_records(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ContractError("read_records: cannot open " + path);
  std::vector<CheckpointRecord> out;
  std::string line;
  auto field = [](const std::string& l, const std::string& key) {
    size_t p = l.find("\"" + key + "\":");
    if (p == std::string::npos)
      throw ContractError("read_records: missing field '" + key + "' in: " + l);
    return p + key.size() + 3;
  };
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    CheckpointRecord r;
    r.step = std::stoi(line.substr(field(line, "step")));
    size_t p = field(line, "path");
    size_t q = line.find('"', p + 1);
    r.path = line.substr(p + 1, q - p - 1);
    r.validation_loss = std::stod(line.substr(field(line, "validation_loss")));
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace asrb
