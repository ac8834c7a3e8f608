#pragma once

// The bridge: waveform encoder -> adapter -> decoder-only LM, with a
// per-module fine-tune mode and next-token cross-entropy over the text
// positions. Adapter outputs are spliced in as soft prefix embeddings
// before BOS.

#include "asrb/layers.hpp"
#include "asrb/tensor.hpp"

#include <optional>

namespace asrb {

struct FinetuneScheme {
  FinetuneMode encoder_mode = FinetuneMode::Frozen;
  AdapterKind adapter_kind = AdapterKind::Conv1dMLP;
  FinetuneMode llm_mode = FinetuneMode::Frozen;
};

// Named presets s1..s10.
inline FinetuneScheme scheme_preset(const std::string& name) {
  using M = FinetuneMode;
  using A = AdapterKind;
  static const std::map<std::string, FinetuneScheme> presets = {
      {"s1", {M::Frozen, A::Conv1dMLP, M::Frozen}},
      {"s2", {M::Frozen, A::Conv1dMLP, M::LoRa}},
      {"s3", {M::LoRa, A::Conv1dMLP, M::Frozen}},
      {"s4", {M::LoRa, A::Conv1dMLP, M::LoRa}},
      {"s5", {M::Full, A::Conv1dMLP, M::Frozen}},
      {"s6", {M::Full, A::Conv1dMLP, M::LoRa}},
      {"s7", {M::Frozen, A::DwsMLP, M::Frozen}},
      {"s8", {M::Frozen, A::Conv1dTransformer, M::Frozen}},
      {"s9", {M::LoRa, A::DwsMLP, M::LoRa}},
      {"s10", {M::LoRa, A::Conv1dTransformer, M::LoRa}},
  };
  auto it = presets.find(name);
  if (it == presets.end()) throw ContractError("unknown scheme preset: " + name);
  return it->second;
}

template <typename T>
struct WaveEncoder {
  Param<T> conv1_w, conv1_b;  // 1 -> d_enc
  Param<T> conv2_w, conv2_b;  // d_enc -> d_enc
  std::vector<TransformerBlock<T>> blocks;
  Param<T> ln_g, ln_b;
  BridgeDims dims;

  WaveEncoder(const BridgeDims& d, Rng& rng)
      : conv1_w("encoder.front1.w", d.d_enc, d.front_kernel1),
        conv1_b("encoder.front1.b", 1, d.d_enc),
        conv2_w("encoder.front2.w", d.d_enc, d.d_enc * d.front_kernel2),
        conv2_b("encoder.front2.b", 1, d.d_enc),
        ln_g("encoder.ln.g", 1, d.d_enc), ln_b("encoder.ln.b", 1, d.d_enc), dims(d) {
    init_uniform(conv1_w, d.front_kernel1, rng);
    init_zero(conv1_b);
    init_uniform(conv2_w, d.d_enc * d.front_kernel2, rng);
    init_zero(conv2_b);
    for (int i = 0; i < d.enc_layers; ++i)
      blocks.emplace_back("encoder.block" + std::to_string(i), d.d_enc, d.enc_heads, d.enc_ffn,
                          rng);
    init_ones(ln_g);
  }

  // waveform: [N x 1] -> frames [F x d_enc]
  Tensor<T> forward(Tape<T>& tp, Tensor<T> waveform) {
    Conv1dSpec s1{1, dims.d_enc, dims.front_kernel1, dims.front_stride1, true};
    Conv1dSpec s2{dims.d_enc, dims.d_enc, dims.front_kernel2, dims.front_stride2, true};
    Tensor<T> h = gelu(conv1d_forward(s1, waveform, tp.param(conv1_w), tp.param(conv1_b)));
    h = gelu(conv1d_forward(s2, h, tp.param(conv2_w), tp.param(conv2_b)));
    h = add(h, sinusoidal_positions<T>(tp, h.rows(), dims.d_enc));
    Tensor<T> no_mask;
    for (auto& blk : blocks) h = blk.forward(tp, h, no_mask);
    return layer_norm_rows(h, tp.param(ln_g), tp.param(ln_b));
  }

  void collect(std::vector<Param<T>*>& out) {
    out.push_back(&conv1_w);
    out.push_back(&conv1_b);
    out.push_back(&conv2_w);
    out.push_back(&conv2_b);
    for (auto& blk : blocks) blk.collect(out);
    out.push_back(&ln_g);
    out.push_back(&ln_b);
  }
};

template <typename T>
struct DecoderLM {
  Param<T> emb;  // [vocab_total x d_llm]; also the (tied) output head
  Param<T> pos;  // [max_pos x d_llm]
  std::vector<TransformerBlock<T>> blocks;
  Param<T> ln_g, ln_b;
  BridgeDims dims;

  DecoderLM(const BridgeDims& d, Rng& rng)
      : emb("llm.emb", d.vocab_total(), d.d_llm), pos("llm.pos", d.max_pos, d.d_llm),
        ln_g("llm.ln.g", 1, d.d_llm), ln_b("llm.ln.b", 1, d.d_llm), dims(d) {
    init_uniform(emb, d.d_llm, rng);
    init_uniform(pos, d.d_llm, rng);
    for (int i = 0; i < d.llm_layers; ++i)
      blocks.emplace_back("llm.block" + std::to_string(i), d.d_llm, d.llm_heads, d.llm_ffn,
                          rng);
    init_ones(ln_g);
  }

  void collect(std::vector<Param<T>*>& out) {
    out.push_back(&emb);
    out.push_back(&pos);
    for (auto& blk : blocks) blk.collect(out);
    out.push_back(&ln_g);
    out.push_back(&ln_b);
  }
};

template <typename T>
struct ForwardResult {
  Tensor<T> logits;       // [(|Y|+1) x vocab_total]
  Tensor<T> acoustic;     // adapter output X1, [T_a x d_llm]
  Tensor<T> emb_table;    // the LM embedding table leaf (tied with the head)
  int prefix_len = 0;     // T_a
};

template <typename T>
struct BridgeModel {
  BridgeDims dims;
  FinetuneScheme scheme;
  std::unique_ptr<WaveEncoder<T>> encoder;
  std::unique_ptr<AdapterBase<T>> adapter;
  std::unique_ptr<DecoderLM<T>> lm;

  int bos_id() const { return dims.vocab; }
  int eos_id() const { return dims.vocab + 1; }

  // Deterministic registration order: encoder, adapter, llm.
  std::vector<Param<T>*> all_parameters() {
    std::vector<Param<T>*> out;
    encoder->collect(out);
    adapter->collect(out);
    lm->collect(out);
    return out;
  }

  std::vector<Param<T>*> trainable_parameters() {
    std::vector<Param<T>*> out;
    for (Param<T>* p : all_parameters())
      if (p->trainable) out.push_back(p);
    return out;
  }

  void zero_grads() {
    for (Param<T>* p : all_parameters()) p->zero_grad();
  }
};

template <typename T>
BridgeModel<T> build_bridge(BridgeDims dims, const FinetuneScheme& scheme, uint32_t seed) {
  if (scheme.llm_mode == FinetuneMode::Full)
    throw ContractError("unsupported scheme: llm full fine-tuning is not available");
  dims.adapter.kind = scheme.adapter_kind;
  dims.adapter.d_enc = dims.d_enc;
  dims.adapter.d_llm = dims.d_llm;

  BridgeModel<T> m;
  m.dims = dims;
  m.scheme = scheme;

  // Independent streams so base weights do not depend on LoRA placement.
  std::seed_seq enc_seq{seed, 0xE0u};
  std::seed_seq ada_seq{seed, 0xADu};
  std::seed_seq llm_seq{seed, 0x11u};
  std::seed_seq lora_seq{seed, 0x10u};
  Rng enc_rng(enc_seq), ada_rng(ada_seq), llm_rng(llm_seq), lora_rng(lora_seq);

  m.encoder = std::make_unique<WaveEncoder<T>>(dims, enc_rng);
  m.adapter = make_adapter<T>(dims.adapter, ada_rng);
  m.lm = std::make_unique<DecoderLM<T>>(dims, llm_rng);

  if (scheme.encoder_mode == FinetuneMode::LoRa) {
    for (size_t i = 0; i < m.encoder->blocks.size(); ++i)
      m.encoder->blocks[i].attach_lora("encoder.block" + std::to_string(i), LoraTargets::QV,
                                       dims.enc_lora, lora_rng);
  }
  if (scheme.llm_mode == FinetuneMode::LoRa) {
    for (size_t i = 0; i < m.lm->blocks.size(); ++i)
      m.lm->blocks[i].attach_lora("llm.block" + std::to_string(i), LoraTargets::QKV,
                                  dims.llm_lora, lora_rng);
  }

  // Trainability per scheme. LoRA pairs default to trainable; bases freeze
  // unless the module is fully fine-tuned. The adapter always trains.
  bool enc_full = scheme.encoder_mode == FinetuneMode::Full;
  std::vector<Param<T>*> enc_params;
  m.encoder->collect(enc_params);
  for (Param<T>* p : enc_params) {
    bool is_lora = p->name.find(".lora_") != std::string::npos;
    p->trainable = is_lora ? true : enc_full;
  }
  std::vector<Param<T>*> llm_params;
  m.lm->collect(llm_params);
  for (Param<T>* p : llm_params) {
    bool is_lora = p->name.find(".lora_") != std::string::npos;
    p->trainable = is_lora;
  }
  return m;
}

// Prefix-LM attention mask: the audio prefix is fully visible everywhere
// (and bidirectional internally); text positions are causal.
template <typename T>
Tensor<T> prefix_lm_mask(Tape<T>& tp, int total_len, int prefix_len) {
  const T ninf = -std::numeric_limits<T>::infinity();
  std::vector<T> v(static_cast<size_t>(total_len) * total_len, T(0));
  for (int i = 0; i < total_len; ++i)
    for (int j = 0; j < total_len; ++j)
      if (!(j < prefix_len || j <= i)) v[i * total_len + j] = ninf;
  return tp.leaf(total_len, total_len, std::move(v), false);
}

// Runs the full ASR forward pass. `targets` must not contain BOS/EOS; the
// logits predict targets ++ [EOS] at the text positions.
template <typename T>
ForwardResult<T> forward_asr(Tape<T>& tp, BridgeModel<T>& m, const std::vector<T>& waveform,
                             const std::vector<int>& targets) {
  if (waveform.empty()) throw ContractError("forward_asr: empty waveform");
  for (int t : targets)
    if (t < 0 || t >= m.dims.vocab)
      throw ContractError("forward_asr: unknown token id " + std::to_string(t));

  Tensor<T> wav = tp.leaf(static_cast<int>(waveform.size()), 1, waveform, false);
  Tensor<T> frames = m.encoder->forward(tp, wav);
  Tensor<T> x1 = m.adapter->forward(tp, frames);
  int t_a = x1.rows();

  Tensor<T> emb = tp.param(m.lm->emb);
  std::vector<int> text_ids;
  text_ids.push_back(m.bos_id());
  text_ids.insert(text_ids.end(), targets.begin(), targets.end());
  Tensor<T> text_emb = gather_rows(emb, text_ids);

  Tensor<T> h = concat_rows<T>({x1, text_emb});
  int total = h.rows();
  if (total > m.dims.max_pos)
    throw ContractError("forward_asr: sequence length " + std::to_string(total) +
                        " exceeds max positions " + std::to_string(m.dims.max_pos));
  Tensor<T> pos = slice_rows(tp.param(m.lm->pos), 0, total);
  h = add(h, pos);

  Tensor<T> mask = prefix_lm_mask<T>(tp, total, t_a);
  for (auto& blk : m.lm->blocks) h = blk.forward(tp, h, mask);
  h = layer_norm_rows(h, tp.param(m.lm->ln_g), tp.param(m.lm->ln_b));

  // Text positions only: BOS predicts y1, ..., the last target predicts EOS.
  Tensor<T> text_h = slice_rows(h, t_a, static_cast<int>(targets.size()) + 1);
  Tensor<T> logits = matmul_bt(text_h, emb);  // tied head

  return ForwardResult<T>{logits, x1, emb, t_a};
}

// Mean next-token cross-entropy; `targets_with_eos` = targets ++ [EOS].
template <typename T>
Tensor<T> cross_entropy(Tensor<T> logits, const std::vector<int>& targets_with_eos) {
  return cross_entropy_mean(logits, targets_with_eos);
}

}  // namespace asrb
