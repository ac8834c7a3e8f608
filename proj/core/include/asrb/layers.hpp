#pragma once

// Neural building blocks: strided 1D convolutions, depthwise separable
// convolutions, linear layers with optional low-rank (LoRA) deltas,
// pre-norm transformer blocks, the three adapter variants, and closed-form
// trainable-parameter accounting.

#include "asrb/tensor.hpp"

#include <map>
#include <memory>
#include <random>

namespace asrb {

using Rng = std::mt19937;

enum class FinetuneMode { Frozen, LoRa, Full };
enum class AdapterKind { Conv1dMLP, DwsMLP, Conv1dTransformer };

inline const char* to_string(FinetuneMode m) {
  switch (m) {
    case FinetuneMode::Frozen: return "frozen";
    case FinetuneMode::LoRa: return "lora";
    case FinetuneMode::Full: return "full";
  }
  return "?";
}

inline const char* to_string(AdapterKind k) {
  switch (k) {
    case AdapterKind::Conv1dMLP: return "conv1d_mlp";
    case AdapterKind::DwsMLP: return "dws_mlp";
    case AdapterKind::Conv1dTransformer: return "conv1d_transformer";
  }
  return "?";
}

struct Conv1dSpec {
  int in_channels = 1;
  int out_channels = 1;
  int kernel = 1;
  int stride = 1;
  bool bias = true;

  int out_len(int in_len) const {
    if (in_len < kernel) {
      throw ContractError("conv1d: input length " + std::to_string(in_len) +
                          " shorter than kernel " + std::to_string(kernel));
    }
    return (in_len - kernel) / stride + 1;
  }
};

struct LoraSpec {
  int r = 8;
  double alpha = 16.0;

  double scaling() const { return alpha / r; }
};

struct AdapterConfig {
  AdapterKind kind = AdapterKind::Conv1dMLP;
  int d_enc = 64;
  int d_llm = 128;
  int subsample = 4;       // kernel == stride == subsample
  int transformer_layers = 2;        // Conv1dTransformer only
  double ffn_multiplier = 2.5;       // Conv1dTransformer only
  int heads = 4;                     // Conv1dTransformer only
  bool positional = false;           // sinusoidal positions after subsampling

  int ffn_dim() const { return static_cast<int>(std::lround(ffn_multiplier * d_llm)); }
};

// ---------------------------------------------------------------------------
// initialization
// ---------------------------------------------------------------------------

template <typename T>
void init_uniform(Param<T>& p, int fan_in, Rng& rng) {
  T bound = T(1) / std::sqrt(static_cast<T>(fan_in));
  std::uniform_real_distribution<double> dist(-double(bound), double(bound));
  for (auto& v : p.value) v = static_cast<T>(dist(rng));
}

template <typename T>
void init_zero(Param<T>& p) {
  std::fill(p.value.begin(), p.value.end(), T(0));
}

template <typename T>
void init_ones(Param<T>& p) {
  std::fill(p.value.begin(), p.value.end(), T(1));
}

// ---------------------------------------------------------------------------
// convolution ops (recorded on the tape)
// ---------------------------------------------------------------------------

// x: [L x C_in], w: [C_out x C_in*k] (row-major taps, channel-major then tap),
// b: [1 x C_out] or invalid tensor for no bias. Valid (no padding) strided
// cross-correlation.
template <typename T>
Tensor<T> conv1d_forward(const Conv1dSpec& spec, Tensor<T> x, Tensor<T> w, Tensor<T> b) {
  if (x.cols() != spec.in_channels) {
    throw ShapeError("conv1d: input " + shape_str(x.rows(), x.cols()) + " expects " +
                     std::to_string(spec.in_channels) + " channels");
  }
  int L = x.rows();
  int Lp = spec.out_len(L);
  int k = spec.kernel, s = spec.stride, ci = spec.in_channels, co = spec.out_channels;
  Tape<T>& tp = *x.tape;
  bool rg = tp.nodes[x.node].requires_grad || tp.nodes[w.node].requires_grad ||
            (b.valid() && tp.nodes[b.node].requires_grad);
  Tensor<T> out = tp.make_node(Lp, co, rg);
  const auto& xv = tp.nodes[x.node].value;
  const auto& wv = tp.nodes[w.node].value;
  auto& ov = tp.nodes[out.node].value;
  for (int t = 0; t < Lp; ++t) {
    for (int o = 0; o < co; ++o) {
      T acc = T(0);
      for (int c = 0; c < ci; ++c)
        for (int j = 0; j < k; ++j)
          acc += wv[o * ci * k + c * k + j] * xv[(t * s + j) * ci + c];
      ov[t * co + o] = acc;
    }
  }
  if (b.valid()) {
    const auto& bv = tp.nodes[b.node].value;
    for (int t = 0; t < Lp; ++t)
      for (int o = 0; o < co; ++o) ov[t * co + o] += bv[o];
  }
  if (rg) {
    int xi = x.node, wi = w.node, bi = b.valid() ? b.node : -1, oi = out.node;
    tp.nodes[out.node].backward = [xi, wi, bi, oi, k, s, ci, co, Lp](Tape<T>& t) {
      const auto& g = t.nodes[oi].grad;
      const auto& xv2 = t.nodes[xi].value;
      const auto& wv2 = t.nodes[wi].value;
      for (int tt = 0; tt < Lp; ++tt) {
        for (int o = 0; o < co; ++o) {
          T go = g[tt * co + o];
          if (go == T(0)) continue;
          for (int c = 0; c < ci; ++c)
            for (int j = 0; j < k; ++j) {
              if (t.nodes[wi].requires_grad)
                t.nodes[wi].grad[o * ci * k + c * k + j] += go * xv2[(tt * s + j) * ci + c];
              if (t.nodes[xi].requires_grad)
                t.nodes[xi].grad[(tt * s + j) * ci + c] += go * wv2[o * ci * k + c * k + j];
            }
          if (bi >= 0 && t.nodes[bi].requires_grad) t.nodes[bi].grad[o] += go;
        }
      }
    };
  }
  return out;
}

// Depthwise stage of a separable convolution: one filter per input channel.
// x: [L x C], dw: [C x k], db: [1 x C] or invalid.
template <typename T>
Tensor<T> depthwise_conv1d_forward(int kernel, int stride, Tensor<T> x, Tensor<T> dw,
                                   Tensor<T> db) {
  int C = x.cols();
  if (dw.rows() != C || dw.cols() != kernel) {
    throw ShapeError("depthwise_conv1d: weights " + shape_str(dw.rows(), dw.cols()) +
                     " incompatible with " + std::to_string(C) + " channels, kernel " +
                     std::to_string(kernel));
  }
  Conv1dSpec probe{C, C, kernel, stride, false};
  int L = x.rows();
  int Lp = probe.out_len(L);
  Tape<T>& tp = *x.tape;
  bool rg = tp.nodes[x.node].requires_grad || tp.nodes[dw.node].requires_grad ||
            (db.valid() && tp.nodes[db.node].requires_grad);
  Tensor<T> out = tp.make_node(Lp, C, rg);
  const auto& xv = tp.nodes[x.node].value;
  const auto& wv = tp.nodes[dw.node].value;
  auto& ov = tp.nodes[out.node].value;
  for (int t = 0; t < Lp; ++t)
    for (int c = 0; c < C; ++c) {
      T acc = T(0);
      for (int j = 0; j < kernel; ++j) acc += wv[c * kernel + j] * xv[(t * stride + j) * C + c];
      ov[t * C + c] = acc;
    }
  if (db.valid()) {
    const auto& bv = tp.nodes[db.node].value;
    for (int t = 0; t < Lp; ++t)
      for (int c = 0; c < C; ++c) ov[t * C + c] += bv[c];
  }
  if (rg) {
    int xi = x.node, wi = dw.node, bi = db.valid() ? db.node : -1, oi = out.node;
    tp.nodes[out.node].backward = [xi, wi, bi, oi, kernel, stride, C, Lp](Tape<T>& t) {
      const auto& g = t.nodes[oi].grad;
      const auto& xv2 = t.nodes[xi].value;
      const auto& wv2 = t.nodes[wi].value;
      for (int tt = 0; tt < Lp; ++tt)
        for (int c = 0; c < C; ++c) {
          T go = g[tt * C + c];
          if (go == T(0)) continue;
          for (int j = 0; j < kernel; ++j) {
            if (t.nodes[wi].requires_grad)
              t.nodes[wi].grad[c * kernel + j] += go * xv2[(tt * stride + j) * C + c];
            if (t.nodes[xi].requires_grad)
              t.nodes[xi].grad[(tt * stride + j) * C + c] += go * wv2[c * kernel + j];
          }
          if (bi >= 0 && t.nodes[bi].requires_grad) t.nodes[bi].grad[c] += go;
        }
    };
  }
  return out;
}

// ---------------------------------------------------------------------------
// linear + LoRA
// ---------------------------------------------------------------------------

template <typename T>
struct LinearLayer {
  Param<T> w;  // [d_out x d_in]
  Param<T> b;  // [1 x d_out]
  int d_in = 0, d_out = 0;

  LinearLayer() = default;
  LinearLayer(const std::string& name, int din, int dout, Rng& rng)
      : w(name + ".w", dout, din), b(name + ".b", 1, dout), d_in(din), d_out(dout) {
    init_uniform(w, din, rng);
    init_zero(b);
  }

  Tensor<T> forward(Tape<T>& tp, Tensor<T> x) {
    return add_row(matmul_bt(x, tp.param(w)), tp.param(b));
  }

  void collect(std::vector<Param<T>*>& out) {
    out.push_back(&w);
    out.push_back(&b);
  }
};

template <typename T>
struct LoraPair {
  Param<T> a;  // [r x d_in]
  Param<T> b;  // [d_out x r]
  LoraSpec spec;

  LoraPair() = default;
  LoraPair(const std::string& name, int d_in, int d_out, LoraSpec s, Rng& rng)
      : a(name + ".lora_a", s.r, d_in), b(name + ".lora_b", d_out, s.r), spec(s) {
    if (s.r > std::min(d_in, d_out)) {
      throw ContractError("lora rank " + std::to_string(s.r) + " exceeds min dim of " +
                          shape_str(d_out, d_in));
    }
    init_uniform(a, d_in, rng);
    init_zero(b);  // keeps the wrapped layer's function unchanged at step 0
  }

  void collect(std::vector<Param<T>*>& out) {
    out.push_back(&a);
    out.push_back(&b);
  }
};

// y = x W^T + bias + (alpha/r) * (x A^T) B^T
template <typename T>
Tensor<T> lora_forward(Tape<T>& tp, Tensor<T> x, Tensor<T> w, Tensor<T> bias, Tensor<T> a,
                       Tensor<T> b, T scaling) {
  Tensor<T> base = matmul_bt(x, w);
  if (bias.valid()) base = add_row(base, bias);
  Tensor<T> delta = matmul_bt(matmul_bt(x, a), b);
  return add(base, scale(delta, scaling));
}

// Merged weight W' = W + (alpha/r) B A, as a plain buffer.
template <typename T>
std::vector<T> lora_merge(const Param<T>& w, const LoraPair<T>& lora) {
  std::vector<T> merged = w.value;
  int d_out = w.rows, d_in = w.cols, r = lora.spec.r;
  T s = static_cast<T>(lora.spec.scaling());
  for (int o = 0; o < d_out; ++o)
    for (int i = 0; i < d_in; ++i) {
      T acc = T(0);
      for (int j = 0; j < r; ++j) acc += lora.b.value[o * r + j] * lora.a.value[j * d_in + i];
      merged[o * d_in + i] += s * acc;
    }
  return merged;
}

// Linear layer with an optional LoRA delta.
template <typename T>
struct LoraLinear {
  LinearLayer<T> base;
  std::unique_ptr<LoraPair<T>> lora;

  LoraLinear() = default;
  LoraLinear(const std::string& name, int d_in, int d_out, Rng& rng)
      : base(name, d_in, d_out, rng) {}

  void attach_lora(const std::string& name, LoraSpec spec, Rng& rng) {
    lora = std::make_unique<LoraPair<T>>(name, base.d_in, base.d_out, spec, rng);
  }

  Tensor<T> forward(Tape<T>& tp, Tensor<T> x) {
    if (!lora) return base.forward(tp, x);
    return lora_forward(tp, x, tp.param(base.w), tp.param(base.b), tp.param(lora->a),
                        tp.param(lora->b), static_cast<T>(lora->spec.scaling()));
  }

  void collect(std::vector<Param<T>*>& out) {
    base.collect(out);
    if (lora) lora->collect(out);
  }
};

// ---------------------------------------------------------------------------
// transformer block (pre-norm, multi-head scaled dot-product attention)
// ---------------------------------------------------------------------------

enum class LoraTargets { None, QV, QKV };

template <typename T>
struct TransformerBlock {
  Param<T> ln1_g, ln1_b, ln2_g, ln2_b;
  LoraLinear<T> wq, wk, wv, wo;
  LinearLayer<T> ffn1, ffn2;
  int d = 0, heads = 1;

  TransformerBlock() = default;
  TransformerBlock(const std::string& name, int dim, int n_heads, int ffn, Rng& rng)
      : ln1_g(name + ".ln1.g", 1, dim), ln1_b(name + ".ln1.b", 1, dim),
        ln2_g(name + ".ln2.g", 1, dim), ln2_b(name + ".ln2.b", 1, dim),
        wq(name + ".attn.q", dim, dim, rng), wk(name + ".attn.k", dim, dim, rng),
        wv(name + ".attn.v", dim, dim, rng), wo(name + ".attn.o", dim, dim, rng),
        ffn1(name + ".ffn1", dim, ffn, rng), ffn2(name + ".ffn2", ffn, dim, rng),
        d(dim), heads(n_heads) {
    if (dim % n_heads != 0)
      throw ContractError("transformer: dim " + std::to_string(dim) +
                          " not divisible by heads " + std::to_string(n_heads));
    init_ones(ln1_g);
    init_ones(ln2_g);
  }

  void attach_lora(const std::string& name, LoraTargets targets, LoraSpec spec, Rng& rng) {
    if (targets == LoraTargets::None) return;
    wq.attach_lora(name + ".attn.q", spec, rng);
    if (targets == LoraTargets::QKV) wk.attach_lora(name + ".attn.k", spec, rng);
    wv.attach_lora(name + ".attn.v", spec, rng);
  }

  // mask: [T x T] additive mask (0 or -inf), or invalid tensor for none.
  Tensor<T> forward(Tape<T>& tp, Tensor<T> x, Tensor<T> mask) {
    Tensor<T> h = layer_norm_rows(x, tp.param(ln1_g), tp.param(ln1_b));
    Tensor<T> q = wq.forward(tp, h);
    Tensor<T> k = wk.forward(tp, h);
    Tensor<T> v = wv.forward(tp, h);
    int dh = d / heads;
    std::vector<Tensor<T>> head_out;
    head_out.reserve(heads);
    T inv_sqrt_dh = T(1) / std::sqrt(static_cast<T>(dh));
    for (int hh = 0; hh < heads; ++hh) {
      Tensor<T> qh = slice_cols(q, hh * dh, dh);
      Tensor<T> kh = slice_cols(k, hh * dh, dh);
      Tensor<T> vh = slice_cols(v, hh * dh, dh);
      Tensor<T> scores = scale(matmul_bt(qh, kh), inv_sqrt_dh);
      if (mask.valid()) scores = add(scores, mask);
      head_out.push_back(matmul(softmax_rows(scores), vh));
    }
    Tensor<T> attn = wo.forward(tp, concat_cols(head_out));
    Tensor<T> x1 = add(x, attn);
    Tensor<T> h2 = layer_norm_rows(x1, tp.param(ln2_g), tp.param(ln2_b));
    Tensor<T> f = ffn2.forward(tp, gelu(ffn1.forward(tp, h2)));
    return add(x1, f);
  }

  void collect(std::vector<Param<T>*>& out) {
    out.push_back(&ln1_g);
    out.push_back(&ln1_b);
    wq.collect(out);
    wk.collect(out);
    wv.collect(out);
    wo.collect(out);
    out.push_back(&ln2_g);
    out.push_back(&ln2_b);
    ffn1.collect(out);
    ffn2.collect(out);
  }
};

// Sinusoidal position matrix [len x d] as a constant leaf.
template <typename T>
Tensor<T> sinusoidal_positions(Tape<T>& tp, int len, int d) {
  std::vector<T> v(static_cast<size_t>(len) * d);
  for (int p = 0; p < len; ++p)
    for (int i = 0; i < d; ++i) {
      double angle = p / std::pow(10000.0, 2.0 * (i / 2) / d);
      v[p * d + i] = static_cast<T>((i % 2 == 0) ? std::sin(angle) : std::cos(angle));
    }
  return tp.leaf(len, d, std::move(v), false);
}

// ---------------------------------------------------------------------------
// adapters
// ---------------------------------------------------------------------------

template <typename T>
struct AdapterBase {
  AdapterConfig cfg;
  virtual ~AdapterBase() = default;
  virtual Tensor<T> forward(Tape<T>& tp, Tensor<T> enc_out) = 0;
  virtual void collect(std::vector<Param<T>*>& out) = 0;
};

template <typename T>
struct Conv1dMLPAdapter : AdapterBase<T> {
  Param<T> conv_w, conv_b;
  LinearLayer<T> proj;

  Conv1dMLPAdapter(const AdapterConfig& c, Rng& rng)
      : conv_w("adapter.conv.w", c.d_llm, c.d_enc * c.subsample),
        conv_b("adapter.conv.b", 1, c.d_llm),
        proj("adapter.proj", c.d_llm, c.d_llm, rng) {
    this->cfg = c;
    init_uniform(conv_w, c.d_enc * c.subsample, rng);
    init_zero(conv_b);
  }

  Tensor<T> forward(Tape<T>& tp, Tensor<T> enc_out) override {
    const auto& c = this->cfg;
    Conv1dSpec spec{c.d_enc, c.d_llm, c.subsample, c.subsample, true};
    Tensor<T> h = conv1d_forward(spec, enc_out, tp.param(conv_w), tp.param(conv_b));
    return proj.forward(tp, gelu(h));
  }

  void collect(std::vector<Param<T>*>& out) override {
    out.push_back(&conv_w);
    out.push_back(&conv_b);
    proj.collect(out);
  }
};

template <typename T>
struct DwsMLPAdapter : AdapterBase<T> {
  Param<T> dw, db;        // depthwise: [d_enc x k]
  LinearLayer<T> pw;      // pointwise 1x1: d_enc -> d_llm
  LinearLayer<T> proj;

  DwsMLPAdapter(const AdapterConfig& c, Rng& rng)
      : dw("adapter.dw.w", c.d_enc, c.subsample), db("adapter.dw.b", 1, c.d_enc),
        pw("adapter.pw", c.d_enc, c.d_llm, rng),
        proj("adapter.proj", c.d_llm, c.d_llm, rng) {
    this->cfg = c;
    init_uniform(dw, c.subsample, rng);
    init_zero(db);
  }

  Tensor<T> forward(Tape<T>& tp, Tensor<T> enc_out) override {
    const auto& c = this->cfg;
    Tensor<T> h = depthwise_conv1d_forward(c.subsample, c.subsample, enc_out, tp.param(dw),
                                           tp.param(db));
    h = pw.forward(tp, h);
    return proj.forward(tp, gelu(h));
  }

  void collect(std::vector<Param<T>*>& out) override {
    out.push_back(&dw);
    out.push_back(&db);
    pw.collect(out);
    proj.collect(out);
  }
};

template <typename T>
struct Conv1dTransformerAdapter : AdapterBase<T> {
  Param<T> conv_w, conv_b;
  LinearLayer<T> proj;
  std::vector<TransformerBlock<T>> blocks;
  Param<T> ln_g, ln_b;

  Conv1dTransformerAdapter(const AdapterConfig& c, Rng& rng)
      : conv_w("adapter.conv.w", c.d_llm, c.d_enc * c.subsample),
        conv_b("adapter.conv.b", 1, c.d_llm),
        proj("adapter.proj", c.d_llm, c.d_llm, rng),
        ln_g("adapter.ln.g", 1, c.d_llm), ln_b("adapter.ln.b", 1, c.d_llm) {
    this->cfg = c;
    init_uniform(conv_w, c.d_enc * c.subsample, rng);
    init_zero(conv_b);
    for (int i = 0; i < c.transformer_layers; ++i)
      blocks.emplace_back("adapter.block" + std::to_string(i), c.d_llm, c.heads, c.ffn_dim(),
                          rng);
    init_ones(ln_g);
  }

  Tensor<T> forward(Tape<T>& tp, Tensor<T> enc_out) override {
    const auto& c = this->cfg;
    Conv1dSpec spec{c.d_enc, c.d_llm, c.subsample, c.subsample, true};
    Tensor<T> h = conv1d_forward(spec, enc_out, tp.param(conv_w), tp.param(conv_b));
    h = proj.forward(tp, gelu(h));
    if (c.positional) h = add(h, sinusoidal_positions<T>(tp, h.rows(), c.d_llm));
    Tensor<T> no_mask;
    for (auto& blk : blocks) h = blk.forward(tp, h, no_mask);
    return layer_norm_rows(h, tp.param(ln_g), tp.param(ln_b));
  }

  void collect(std::vector<Param<T>*>& out) override {
    out.push_back(&conv_w);
    out.push_back(&conv_b);
    proj.collect(out);
    for (auto& blk : blocks) blk.collect(out);
    out.push_back(&ln_g);
    out.push_back(&ln_b);
  }
};

template <typename T>
std::unique_ptr<AdapterBase<T>> make_adapter(const AdapterConfig& cfg, Rng& rng) {
  switch (cfg.kind) {
    case AdapterKind::Conv1dMLP: return std::make_unique<Conv1dMLPAdapter<T>>(cfg, rng);
    case AdapterKind::DwsMLP: return std::make_unique<DwsMLPAdapter<T>>(cfg, rng);
    case AdapterKind::Conv1dTransformer:
      return std::make_unique<Conv1dTransformerAdapter<T>>(cfg, rng);
  }
  throw ContractError("unknown adapter kind");
}

// ---------------------------------------------------------------------------
// parameter accounting (closed-form, works at any scale without allocation)
// ---------------------------------------------------------------------------

struct BridgeDims {
  // encoder
  int d_enc = 64;
  int enc_layers = 2;
  int enc_heads = 4;
  int enc_ffn = 256;
  int front_kernel1 = 8, front_stride1 = 4;
  int front_kernel2 = 4, front_stride2 = 2;
  // LLM
  int d_llm = 128;
  int llm_layers = 4;
  int llm_heads = 4;
  int llm_ffn = 512;
  int vocab = 32;   // text tokens, excluding BOS/EOS
  int max_pos = 128;
  // adapter
  AdapterConfig adapter;
  // LoRA placements
  LoraSpec enc_lora{8, 16.0};
  LoraSpec llm_lora{16, 16.0};

  int vocab_total() const { return vocab + 2; }  // + BOS + EOS
};

inline long long linear_param_count(int d_in, int d_out, bool bias = true) {
  return static_cast<long long>(d_in) * d_out + (bias ? d_out : 0);
}

inline long long conv1d_param_count(int c_in, int c_out, int kernel, bool bias = true) {
  return static_cast<long long>(c_out) * c_in * kernel + (bias ? c_out : 0);
}

inline long long block_param_count(int d, int ffn) {
  long long ln = 4LL * d;  // two layer norms, gain + bias each
  long long attn = 4LL * linear_param_count(d, d);
  long long mlp = linear_param_count(d, ffn) + linear_param_count(ffn, d);
  return ln + attn + mlp;
}

inline long long lora_param_count(int layers, int targets, int r, int d) {
  return static_cast<long long>(layers) * targets * r * (2LL * d);
}

inline long long adapter_param_count(const AdapterConfig& c) {
  switch (c.kind) {
    case AdapterKind::Conv1dMLP:
      return conv1d_param_count(c.d_enc, c.d_llm, c.subsample) +
             linear_param_count(c.d_llm, c.d_llm);
    case AdapterKind::DwsMLP:
      return static_cast<long long>(c.d_enc) * c.subsample + c.d_enc +  // depthwise + bias
             linear_param_count(c.d_enc, c.d_llm) +                     // pointwise
             linear_param_count(c.d_llm, c.d_llm);
    case AdapterKind::Conv1dTransformer:
      return conv1d_param_count(c.d_enc, c.d_llm, c.subsample) +
             linear_param_count(c.d_llm, c.d_llm) +
             static_cast<long long>(c.transformer_layers) * block_param_count(c.d_llm, c.ffn_dim()) +
             2LL * c.d_llm;  // final layer norm
  }
  return 0;
}

inline long long encoder_full_param_count(const BridgeDims& d) {
  long long front = conv1d_param_count(1, d.d_enc, d.front_kernel1) +
                    conv1d_param_count(d.d_enc, d.d_enc, d.front_kernel2);
  long long stack = static_cast<long long>(d.enc_layers) * block_param_count(d.d_enc, d.enc_ffn);
  return front + stack + 2LL * d.d_enc;  // + final layer norm
}

inline long long llm_full_param_count(const BridgeDims& d) {
  long long emb = static_cast<long long>(d.vocab_total()) * d.d_llm;  // tied output head
  long long pos = static_cast<long long>(d.max_pos) * d.d_llm;
  long long stack = static_cast<long long>(d.llm_layers) * block_param_count(d.d_llm, d.llm_ffn);
  return emb + pos + stack + 2LL * d.d_llm;
}

// Trainable parameters per component under the given fine-tune modes.
// Frozen components contribute 0; the adapter always trains.
inline std::map<std::string, long long> count_params(const BridgeDims& dims,
                                                     FinetuneMode encoder_mode,
                                                     FinetuneMode llm_mode) {
  if (llm_mode == FinetuneMode::Full)
    throw ContractError("llm full fine-tuning is not supported");
  std::map<std::string, long long> out;
  switch (encoder_mode) {
    case FinetuneMode::Frozen: out["encoder"] = 0; break;
    case FinetuneMode::LoRa:
      out["encoder"] = lora_param_count(dims.enc_layers, 2, dims.enc_lora.r, dims.d_enc);
      break;
    case FinetuneMode::Full: out["encoder"] = encoder_full_param_count(dims); break;
  }
  out["adapter"] = adapter_param_count(dims.adapter);
  out["llm"] = (llm_mode == FinetuneMode::LoRa)
                   ? lora_param_count(dims.llm_layers, 3, dims.llm_lora.r, dims.d_llm)
                   : 0;
  out["total"] = out["encoder"] + out["adapter"] + out["llm"];
  return out;
}

}  // namespace asrb
