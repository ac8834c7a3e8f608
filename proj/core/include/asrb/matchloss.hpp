#pragma once

// Modality matching loss: dot-product cross attention from text embeddings
// to adapter outputs, then weighted MSE + cosine distance.

#include "asrb/tensor.hpp"

namespace asrb {

struct MatchLossConfig {
  double a = 0.01;  // MSE weight
  double b = 0.04;  // cosine-distance weight
  bool stop_grad_embeddings = false;

  bool enabled() const { return a != 0.0 || b != 0.0; }
};

// H = softmax(E X1^T / sqrt(d_llm)) X1 with no learned projections.
// Each row of H is a convex combination of the rows of X1.
template <typename T>
Tensor<T> cross_attention(Tensor<T> text_emb, Tensor<T> acoustic, int d_llm) {
  if (text_emb.rows() == 0 || acoustic.rows() == 0) {
    throw ContractError("cross_attention: degenerate input, |Y|=" +
                        std::to_string(text_emb.rows()) + " T_a=" +
                        std::to_string(acoustic.rows()));
  }
  if (text_emb.cols() != d_llm || acoustic.cols() != d_llm) {
    throw ShapeError("cross_attention: operands " +
                     shape_str(text_emb.rows(), text_emb.cols()) + ", " +
                     shape_str(acoustic.rows(), acoustic.cols()) + " expect width " +
                     std::to_string(d_llm));
  }
  T inv_sqrt_d = T(1) / std::sqrt(static_cast<T>(d_llm));
  Tensor<T> scores = scale(matmul_bt(text_emb, acoustic), inv_sqrt_d);
  return matmul(softmax_rows(scores), acoustic);
}

// L_m = a * MSE(E, H) + b * Cosine(E, H). MSE is the mean over all elements;
// the cosine term is the per-row 1 - cos similarity averaged over rows.
template <typename T>
Tensor<T> matching_loss(Tensor<T> text_emb, Tensor<T> attended, const MatchLossConfig& cfg) {
  detail::check_same_shape(text_emb, attended, "matching_loss");
  Tensor<T> mse = mse_mean(text_emb, attended);
  Tensor<T> cos = cosine_dist_mean(text_emb, attended);
  return add(scale(mse, static_cast<T>(cfg.a)), scale(cos, static_cast<T>(cfg.b)));
}

template <typename T>
Tensor<T> combined_loss(Tensor<T> cross_entropy, Tensor<T> match) {
  return add(cross_entropy, match);
}

}  // namespace asrb
