#pragma once

// Shared helpers for the unit and acceptance suites: finite-difference
// gradient checking in f64 and small random-input utilities.

#include "asrb/tensor.hpp"

#include <functional>
#include <random>
#include <string>
#include <vector>

namespace asrb::testutil {

// Builds a scalar loss from differentiable leaves (one per requested shape).
using LossBuilder =
    std::function<Tensor<double>(Tape<double>&, const std::vector<Tensor<double>>&)>;

struct GradCheckResult {
  double max_rel_err = 0.0;
  std::string where;
};

inline double rel_err(double analytic, double numeric) {
  double denom = std::max({1.0, std::abs(analytic), std::abs(numeric)});
  return std::abs(analytic - numeric) / denom;
}

// Central finite differences, step 1e-5 in f64, against the tape gradients.
inline GradCheckResult grad_check(const std::vector<std::pair<int, int>>& shapes,
                                  const LossBuilder& build, std::mt19937& rng,
                                  double lo = -2.0, double hi = 2.0) {
  std::uniform_real_distribution<double> dist(lo, hi);
  std::vector<std::vector<double>> inputs;
  for (auto [r, c] : shapes) {
    std::vector<double> v(static_cast<size_t>(r) * c);
    for (double& x : v) x = dist(rng);
    inputs.push_back(std::move(v));
  }

  auto eval = [&](const std::vector<std::vector<double>>& vals) {
    Tape<double> tape;
    std::vector<Tensor<double>> leaves;
    for (size_t i = 0; i < shapes.size(); ++i)
      leaves.push_back(tape.leaf(shapes[i].first, shapes[i].second, vals[i], true));
    return build(tape, leaves).item();
  };

  // Analytic gradients.
  Tape<double> tape;
  std::vector<Tensor<double>> leaves;
  for (size_t i = 0; i < shapes.size(); ++i)
    leaves.push_back(tape.leaf(shapes[i].first, shapes[i].second, inputs[i], true));
  Tensor<double> loss = build(tape, leaves);
  tape.backward(loss);

  const double h = 1e-5;
  GradCheckResult res;
  for (size_t i = 0; i < shapes.size(); ++i) {
    const auto& ana = leaves[i].grad();
    for (size_t j = 0; j < inputs[i].size(); ++j) {
      auto plus = inputs;
      auto minus = inputs;
      plus[i][j] += h;
      minus[i][j] -= h;
      double fd = (eval(plus) - eval(minus)) / (2.0 * h);
      double e = rel_err(ana[j], fd);
      if (e > res.max_rel_err) {
        res.max_rel_err = e;
        res.where = "input " + std::to_string(i) + " element " + std::to_string(j);
      }
    }
  }
  return res;
}

inline std::vector<double> random_vec(size_t n, std::mt19937& rng, double lo = -2.0,
                                      double hi = 2.0) {
  std::uniform_real_distribution<double> dist(lo, hi);
  std::vector<double> v(n);
  for (double& x : v) x = dist(rng);
  return v;
}

inline std::vector<float> random_vecf(size_t n, std::mt19937& rng, double lo = -2.0,
                                      double hi = 2.0) {
  std::uniform_real_distribution<double> dist(lo, hi);
  std::vector<float> v(n);
  for (float& x : v) x = static_cast<float>(dist(rng));
  return v;
}

}  // namespace asrb::testutil
