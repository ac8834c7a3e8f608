#pragma once

// Bridges a trained model to the beam-search decoder: encodes the waveform
// once, then exposes a prefix -> log-distribution step scorer over the LM.

#include "asrb/decode.hpp"
#include "asrb/model.hpp"

#include <memory>

namespace asrb {

// Runs encoder + adapter once and returns the acoustic prefix values.
inline std::vector<float> encode_acoustic(BridgeModel<float>& model,
                                          const std::vector<float>& waveform, int* t_a) {
  Tape<float> tape;
  Tensor<float> wav = tape.leaf(static_cast<int>(waveform.size()), 1, waveform);
  Tensor<float> frames = model.encoder->forward(tape, wav);
  Tensor<float> x1 = model.adapter->forward(tape, frames);
  *t_a = x1.rows();
  return x1.value();
}

// The returned scorer yields a log-distribution over the full vocab
// (BOS is masked out); prefixes are generated tokens without BOS.
inline StepScorer make_scorer(BridgeModel<float>& model, const std::vector<float>& waveform) {
  int t_a = 0;
  auto x1 = std::make_shared<std::vector<float>>(encode_acoustic(model, waveform, &t_a));
  BridgeModel<float>* m = &model;
  int d_llm = model.dims.d_llm;
  return [m, x1, t_a, d_llm](const std::vector<int>& prefix) {
    Tape<float> tape;
    Tensor<float> acoustic = tape.leaf(t_a, d_llm, *x1);
    Tensor<float> emb = tape.param(m->lm->emb);
    std::vector<int> ids;
    ids.push_back(m->bos_id());
    ids.insert(ids.end(), prefix.begin(), prefix.end());
    Tensor<float> h = concat_rows<float>({acoustic, gather_rows(emb, ids)});
    int total = h.rows();
    if (total > m->dims.max_pos)
      throw ContractError("scorer: prefix overruns max positions " +
                          std::to_string(m->dims.max_pos));
    h = add(h, slice_rows(tape.param(m->lm->pos), 0, total));
    Tensor<float> mask = prefix_lm_mask<float>(tape, total, t_a);
    for (auto& blk : m->lm->blocks) h = blk.forward(tape, h, mask);
    h = layer_norm_rows(h, tape.param(m->lm->ln_g), tape.param(m->lm->ln_b));
    Tensor<float> logits = matmul_bt(slice_rows(h, total - 1, 1), emb);

    const auto& lv = logits.value();
    std::vector<double> lp(lv.begin(), lv.end());
    lp[m->bos_id()] = -std::numeric_limits<double>::infinity();
    double mx = -std::numeric_limits<double>::infinity();
    for (double v : lp) mx = std::max(mx, v);
    double sum = 0.0;
    for (double v : lp)
      if (v != -std::numeric_limits<double>::infinity()) sum += std::exp(v - mx);
    double lse = mx + std::log(sum);
    for (double& v : lp)
      if (v != -std::numeric_limits<double>::infinity()) v -= lse;
    return lp;
  };
}

// Top hypothesis for one waveform; EOS is stripped from the token sequence.
inline Hypothesis recognize(BridgeModel<float>& model, const std::vector<float>& waveform,
                            DecodeParams params) {
  params.eos_id = model.eos_id();
  std::vector<Hypothesis> hyps = beam_search(make_scorer(model, waveform), params);
  Hypothesis best = hyps.front();
  if (!best.tokens.empty() && best.tokens.back() == model.eos_id()) best.tokens.pop_back();
  return best;
}

}  // namespace asrb
