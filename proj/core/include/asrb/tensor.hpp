#pragma once

// Dense 2D tensors with reverse-mode gradients on a per-graph tape.
// All buffers are row-major. Ops are recorded in creation order, which is
// already a topological order, so backward() is a single reverse sweep.

#include <Eigen/Core>

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace asrb {

class ShapeError : public std::runtime_error {
 public:
  explicit ShapeError(const std::string& msg) : std::runtime_error(msg) {}
};

class ContractError : public std::runtime_error {
 public:
  explicit ContractError(const std::string& msg) : std::runtime_error(msg) {}
};

inline std::string shape_str(int rows, int cols) {
  std::ostringstream os;
  os << "[" << rows << "x" << cols << "]";
  return os.str();
}

// A named, persistent parameter. Lives outside any tape; gradients from
// backward passes accumulate into `grad` until the caller zeroes them.
template <typename T>
struct Param {
  std::string name;
  int rows = 0;
  int cols = 0;
  std::vector<T> value;
  std::vector<T> grad;
  bool trainable = true;

  Param() = default;
  Param(std::string n, int r, int c)
      : name(std::move(n)), rows(r), cols(c),
        value(static_cast<size_t>(r) * c, T(0)),
        grad(static_cast<size_t>(r) * c, T(0)) {}

  size_t size() const { return value.size(); }
  void zero_grad() { std::fill(grad.begin(), grad.end(), T(0)); }
};

template <typename T>
class Tape;

// Lightweight handle into a tape.
template <typename T>
struct Tensor {
  Tape<T>* tape = nullptr;
  int node = -1;

  bool valid() const { return tape != nullptr && node >= 0; }
  int rows() const;
  int cols() const;
  size_t size() const { return static_cast<size_t>(rows()) * cols(); }
  const std::vector<T>& value() const;
  const std::vector<T>& grad() const;
  T item() const;
};

template <typename T>
struct TapeNode {
  int rows = 0;
  int cols = 0;
  std::vector<T> value;
  std::vector<T> grad;
  bool requires_grad = false;
  std::function<void(Tape<T>&)> backward;  // pushes this node's grad to inputs
  Param<T>* param = nullptr;               // set for parameter leaves
};

template <typename T>
class Tape {
 public:
  std::vector<TapeNode<T>> nodes;

  Tensor<T> make_node(int rows, int cols, bool requires_grad) {
    TapeNode<T> n;
    n.rows = rows;
    n.cols = cols;
    n.value.assign(static_cast<size_t>(rows) * cols, T(0));
    n.grad.assign(static_cast<size_t>(rows) * cols, T(0));
    n.requires_grad = requires_grad;
    nodes.push_back(std::move(n));
    return Tensor<T>{this, static_cast<int>(nodes.size()) - 1};
  }

  Tensor<T> leaf(int rows, int cols, std::vector<T> v, bool requires_grad = false) {
    if (v.size() != static_cast<size_t>(rows) * cols) {
      throw ShapeError("leaf data size " + std::to_string(v.size()) +
                       " does not match shape " + shape_str(rows, cols));
    }
    Tensor<T> t = make_node(rows, cols, requires_grad);
    nodes[t.node].value = std::move(v);
    return t;
  }

  Tensor<T> zeros(int rows, int cols, bool requires_grad = false) {
    return make_node(rows, cols, requires_grad);
  }

  // Parameter leaf: value copied in, gradient routed back into p.grad.
  Tensor<T> param(Param<T>& p) {
    Tensor<T> t = make_node(p.rows, p.cols, p.trainable);
    nodes[t.node].value = p.value;
    nodes[t.node].param = &p;
    if (p.trainable) {
      int idx = t.node;
      nodes[t.node].backward = [idx](Tape<T>& tape) {
        TapeNode<T>& n = tape.nodes[idx];
        for (size_t i = 0; i < n.grad.size(); ++i) n.param->grad[i] += n.grad[i];
      };
    }
    return t;
  }

  void backward(Tensor<T> loss) {
    if (loss.tape != this) throw ContractError("loss tensor belongs to another tape");
    TapeNode<T>& ln = nodes[loss.node];
    if (ln.rows * ln.cols != 1) {
      throw ContractError("backward requires a scalar loss, got " +
                          shape_str(ln.rows, ln.cols));
    }
    ln.grad[0] += T(1);
    for (int i = loss.node; i >= 0; --i) {
      if (nodes[i].requires_grad && nodes[i].backward) nodes[i].backward(*this);
    }
  }
};

template <typename T>
int Tensor<T>::rows() const { return tape->nodes[node].rows; }
template <typename T>
int Tensor<T>::cols() const { return tape->nodes[node].cols; }
template <typename T>
const std::vector<T>& Tensor<T>::value() const { return tape->nodes[node].value; }
template <typename T>
const std::vector<T>& Tensor<T>::grad() const { return tape->nodes[node].grad; }
template <typename T>
T Tensor<T>::item() const {
  if (size() != 1) throw ContractError("item() on non-scalar " + shape_str(rows(), cols()));
  return value()[0];
}

namespace detail {

template <typename T>
using MatMap = Eigen::Map<Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
template <typename T>
using CMatMap = Eigen::Map<const Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;

template <typename T>
MatMap<T> as_mat(TapeNode<T>& n, bool grad = false) {
  return MatMap<T>(grad ? n.grad.data() : n.value.data(), n.rows, n.cols);
}
template <typename T>
CMatMap<T> as_cmat(const TapeNode<T>& n, bool grad = false) {
  return CMatMap<T>(grad ? n.grad.data() : n.value.data(), n.rows, n.cols);
}

template <typename T>
void check_same_tape(const Tensor<T>& a, const Tensor<T>& b) {
  if (a.tape != b.tape) throw ContractError("operands belong to different tapes");
}

template <typename T>
void check_same_shape(const Tensor<T>& a, const Tensor<T>& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ShapeError(std::string(op) + ": shape mismatch " +
                     shape_str(a.rows(), a.cols()) + " vs " + shape_str(b.rows(), b.cols()));
  }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// elementwise and linear-algebra ops
// ---------------------------------------------------------------------------

template <typename T>
Tensor<T> add(Tensor<T> a, Tensor<T> b) {
  detail::check_same_tape(a, b);
  detail::check_same_shape(a, b, "add");
  Tape<T>& tp = *a.tape;
  bool rg = tp.nodes[a.node].requires_grad || tp.nodes[b.node].requires_grad;
  Tensor<T> out = tp.make_node(a.rows(), a.cols(), rg);
  auto& ov = tp.nodes[out.node].value;
  const auto& av = tp.nodes[a.node].value;
  const auto& bv = tp.nodes[b.node].value;
  for (size_t i = 0; i < ov.size(); ++i) ov[i] = av[i] + bv[i];
  if (rg) {
    int ai = a.node, bi = b.node, oi = out.node;
    tp.nodes[out.node].backward = [ai, bi, oi](Tape<T>& t) {
      const auto& g = t.nodes[oi].grad;
      if (t.nodes[ai].requires_grad)
        for (size_t i = 0; i < g.size(); ++i) t.nodes[ai].grad[i] += g[i];
      if (t.nodes[bi].requires_grad)
        for (size_t i = 0; i < g.size(); ++i) t.nodes[bi].grad[i] += g[i];
    };
  }
  return out;
}

template <typename T>
Tensor<T> sub(Tensor<T> a, Tensor<T> b) {
  detail::check_same_tape(a, b);
  detail::check_same_shape(a, b, "sub");
  Tape<T>& tp = *a.tape;
  bool rg = tp.nodes[a.node].requires_grad || tp.nodes[b.node].requires_grad;
  Tensor<T> out = tp.make_node(a.rows(), a.cols(), rg);
  auto& ov = tp.nodes[out.node].value;
  const auto& av = tp.nodes[a.node].value;
  const auto& bv = tp.nodes[b.node].value;
  for (size_t i = 0; i < ov.size(); ++i) ov[i] = av[i] - bv[i];
  if (rg) {
    int ai = a.node, bi = b.node, oi = out.node;
    tp.nodes[out.node].backward = [ai, bi, oi](Tape<T>& t) {
      const auto& g = t.nodes[oi].grad;
      if (t.nodes[ai].requires_grad)
        for (size_t i = 0; i < g.size(); ++i) t.nodes[ai].grad[i] += g[i];
      if (t.nodes[bi].requires_grad)
        for (size_t i = 0; i < g.size(); ++i) t.nodes[bi].grad[i] -= g[i];
    };
  }
  return out;
}

template <typename T>
Tensor<T> mul(Tensor<T> a, Tensor<T> b) {
  detail::check_same_tape(a, b);
  detail::check_same_shape(a, b, "mul");
  Tape<T>& tp = *a.tape;
  bool rg = tp.nodes[a.node].requires_grad || tp.nodes[b.node].requires_grad;
  Tensor<T> out = tp.make_node(a.rows(), a.cols(), rg);
  auto& ov = tp.nodes[out.node].value;
  const auto& av = tp.nodes[a.node].value;
  const auto& bv = tp.nodes[b.node].value;
  for (size_t i = 0; i < ov.size(); ++i) ov[i] = av[i] * bv[i];
  if (rg) {
    int ai = a.node, bi = b.node, oi = out.node;
    tp.nodes[out.node].backward = [ai, bi, oi](Tape<T>& t) {
      const auto& g = t.nodes[oi].grad;
      const auto& av2 = t.nodes[ai].value;
      const auto& bv2 = t.nodes[bi].value;
      if (t.nodes[ai].requires_grad)
        for (size_t i = 0; i < g.size(); ++i) t.nodes[ai].grad[i] += g[i] * bv2[i];
      if (t.nodes[bi].requires_grad)
        for (size_t i = 0; i < g.size(); ++i) t.nodes[bi].grad[i] += g[i] * av2[i];
    };
  }
  return out;
}

template <typename T>
Tensor<T> scale(Tensor<T> a, T c) {
  Tape<T>& tp = *a.tape;
  bool rg = tp.nodes[a.node].requires_grad;
  Tensor<T> out = tp.make_node(a.rows(), a.cols(), rg);
  auto& ov = tp.nodes[out.node].value;
  const auto& av = tp.nodes[a.node].value;
  for (size_t i = 0; i < ov.size(); ++i) ov[i] = av[i] * c;
  if (rg) {
    int ai = a.node, oi = out.node;
    tp.nodes[out.node].backward = [ai, oi, c](Tape<T>& t) {
      const auto& g = t.nodes[oi].grad;
      for (size_t i = 0; i < g.size(); ++i) t.nodes[ai].grad[i] += g[i] * c;
    };
  }
  return out;
}

// C = A * B
template <typename T>
Tensor<T> matmul(Tensor<T> a, Tensor<T> b) {
  detail::check_same_tape(a, b);
  if (a.cols() != b.rows()) {
    throw ShapeError("matmul: inner dimensions disagree " +
                     shape_str(a.rows(), a.cols()) + " * " + shape_str(b.rows(), b.cols()));
  }
  Tape<T>& tp = *a.tape;
  bool rg = tp.nodes[a.node].requires_grad || tp.nodes[b.node].requires_grad;
  Tensor<T> out = tp.make_node(a.rows(), b.cols(), rg);
  detail::as_mat(tp.nodes[out.node]).noalias() =
      detail::as_cmat(tp.nodes[a.node]) * detail::as_cmat(tp.nodes[b.node]);
  if (rg) {
    int ai = a.node, bi = b.node, oi = out.node;
    tp.nodes[out.node].backward = [ai, bi, oi](Tape<T>& t) {
      auto gO = detail::as_cmat(t.nodes[oi], true);
      if (t.nodes[ai].requires_grad)
        detail::as_mat(t.nodes[ai], true).noalias() +=
            gO * detail::as_cmat(t.nodes[bi]).transpose();
      if (t.nodes[bi].requires_grad)
        detail::as_mat(t.nodes[bi], true).noalias() +=
            detail::as_cmat(t.nodes[ai]).transpose() * gO;
    };
  }
  return out;
}

// C = A * B^T  (B given as [n x k], A as [m x k])
template <typename T>
Tensor<T> matmul_bt(Tensor<T> a, Tensor<T> b) {
  detail::check_same_tape(a, b);
  if (a.cols() != b.cols()) {
    throw ShapeError("matmul_bt: inner dimensions disagree " +
                     shape_str(a.rows(), a.cols()) + " * " + shape_str(b.rows(), b.cols()) + "^T");
  }
  Tape<T>& tp = *a.tape;
  bool rg = tp.nodes[a.node].requires_grad || tp.nodes[b.node].requires_grad;
  Tensor<T> out = tp.make_node(a.rows(), b.rows(), rg);
  detail::as_mat(tp.nodes[out.node]).noalias() =
      detail::as_cmat(tp.nodes[a.node]) * detail::as_cmat(tp.nodes[b.node]).transpose();
  if (rg) {
    int ai = a.node, bi = b.node, oi = out.node;
    tp.nodes[out.node].backward = [ai, bi, oi](Tape<T>& t) {
      auto gO = detail::as_cmat(t.nodes[oi], true);
      if (t.nodes[ai].requires_grad)
        detail::as_mat(t.nodes[ai], true).noalias() += gO * detail::as_cmat(t.nodes[bi]);
      if (t.nodes[bi].requires_grad)
        detail::as_mat(t.nodes[bi], true).noalias() +=
            gO.transpose() * detail::as_cmat(t.nodes[ai]);
    };
  }
  return out;
}

template <typename T>
Tensor<T> transpose(Tensor<T> a) {
  Tape<T>& tp = *a.tape;
  bool rg = tp.nodes[a.node].requires_grad;
  Tensor<T> out = tp.make_node(a.cols(), a.rows(), rg);
  detail::as_mat(tp.nodes[out.node]) = detail::as_cmat(tp.nodes[a.node]).transpose();
  if (rg) {
    int ai = a.node, oi = out.node;
    tp.nodes[out.node].backward = [ai, oi](Tape<T>& t) {
      detail::as_mat(t.nodes[ai], true) += detail::as_cmat(t.nodes[oi], true).transpose();
    };
  }
  return out;
}

// Adds a [1 x n] bias row to every row of a [m x n] matrix.
template <typename T>
Tensor<T> add_row(Tensor<T> a, Tensor<T> bias) {
  detail::check_same_tape(a, bias);
  if (bias.rows() != 1 || bias.cols() != a.cols()) {
    throw ShapeError("add_row: bias " + shape_str(bias.rows(), bias.cols()) +
                     " incompatible with " + shape_str(a.rows(), a.cols()));
  }
  Tape<T>& tp = *a.tape;
  bool rg = tp.nodes[a.node].requires_grad || tp.nodes[bias.node].requires_grad;
  Tensor<T> out = tp.make_node(a.rows(), a.cols(), rg);
  const auto& av = tp.nodes[a.node].value;
  const auto& bv = tp.nodes[bias.node].value;
  auto& ov = tp.nodes[out.node].value;
  int n = a.cols();
  for (int r = 0; r < a.rows(); ++r)
    for (int c = 0; c < n; ++c) ov[r * n + c] = av[r * n + c] + bv[c];
  if (rg) {
    int ai = a.node, bi = bias.node, oi = out.node;
    tp.nodes[out.node].backward = [ai, bi, oi, n](Tape<T>& t) {
      const auto& g = t.nodes[oi].grad;
      int m = t.nodes[oi].rows;
      if (t.nodes[ai].requires_grad)
        for (size_t i = 0; i < g.size(); ++i) t.nodes[ai].grad[i] += g[i];
      if (t.nodes[bi].requires_grad)
        for (int r = 0; r < m; ++r)
          for (int c = 0; c < n; ++c) t.nodes[bi].grad[c] += g[r * n + c];
    };
  }
  return out;
}

// Row-wise softmax with max subtraction. -inf entries are masking sentinels
// and map to exactly 0; an all-(-inf) row has no valid distribution.
template <typename T>
Tensor<T> softmax_rows(Tensor<T> a) {
  Tape<T>& tp = *a.tape;
  bool rg = tp.nodes[a.node].requires_grad;
  Tensor<T> out = tp.make_node(a.rows(), a.cols(), rg);
  const auto& av = tp.nodes[a.node].value;
  auto& ov = tp.nodes[out.node].value;
  int m = a.rows(), n = a.cols();
  const T ninf = -std::numeric_limits<T>::infinity();
  for (int r = 0; r < m; ++r) {
    T mx = ninf;
    for (int c = 0; c < n; ++c) mx = std::max(mx, av[r * n + c]);
    if (mx == ninf) {
      throw ContractError("softmax_rows: row " + std::to_string(r) +
                          " is all -inf (degenerate distribution)");
    }
    T sum = T(0);
    for (int c = 0; c < n; ++c) {
      T e = (av[r * n + c] == ninf) ? T(0) : std::exp(av[r * n + c] - mx);
      ov[r * n + c] = e;
      sum += e;
    }
    for (int c = 0; c < n; ++c) ov[r * n + c] /= sum;
  }
  if (rg) {
    int ai = a.node, oi = out.node;
    tp.nodes[out.node].backward = [ai, oi](Tape<T>& t) {
      const auto& y = t.nodes[oi].value;
      const auto& g = t.nodes[oi].grad;
      auto& ga = t.nodes[ai].grad;
      int m2 = t.nodes[oi].rows, n2 = t.nodes[oi].cols;
      for (int r = 0; r < m2; ++r) {
        T dot = T(0);
        for (int c = 0; c < n2; ++c) dot += g[r * n2 + c] * y[r * n2 + c];
        for (int c = 0; c < n2; ++c)
          ga[r * n2 + c] += y[r * n2 + c] * (g[r * n2 + c] - dot);
      }
    };
  }
  return out;
}

// Exact GeLU: x * Phi(x) with Phi the standard normal CDF (erf form).
template <typename T>
Tensor<T> gelu(Tensor<T> a) {
  Tape<T>& tp = *a.tape;
  bool rg = tp.nodes[a.node].requires_grad;
  Tensor<T> out = tp.make_node(a.rows(), a.cols(), rg);
  const auto& av = tp.nodes[a.node].value;
  auto& ov = tp.nodes[out.node].value;
  const T inv_sqrt2 = T(1) / std::sqrt(T(2));
  for (size_t i = 0; i < ov.size(); ++i) {
    T phi = T(0.5) * (T(1) + std::erf(av[i] * inv_sqrt2));
    ov[i] = av[i] * phi;
  }
  if (rg) {
    int ai = a.node, oi = out.node;
    tp.nodes[out.node].backward = [ai, oi, inv_sqrt2](Tape<T>& t) {
      const auto& x = t.nodes[ai].value;
      const auto& g = t.nodes[oi].grad;
      auto& ga = t.nodes[ai].grad;
      const T inv_sqrt2pi = T(1) / std::sqrt(T(2) * T(M_PI));
      for (size_t i = 0; i < g.size(); ++i) {
        T phi = T(0.5) * (T(1) + std::erf(x[i] * inv_sqrt2));
        T pdf = inv_sqrt2pi * std::exp(-T(0.5) * x[i] * x[i]);
        ga[i] += g[i] * (phi + x[i] * pdf);
      }
    };
  }
  return out;
}

template <typename T>
Tensor<T> sum_all(Tensor<T> a) {
  Tape<T>& tp = *a.tape;
  bool rg = tp.nodes[a.node].requires_grad;
  Tensor<T> out = tp.make_node(1, 1, rg);
  const auto& av = tp.nodes[a.node].value;
  T s = T(0);
  for (T v : av) s += v;
  tp.nodes[out.node].value[0] = s;
  if (rg) {
    int ai = a.node, oi = out.node;
    tp.nodes[out.node].backward = [ai, oi](Tape<T>& t) {
      T g = t.nodes[oi].grad[0];
      for (auto& gv : t.nodes[ai].grad) gv += g;
    };
  }
  return out;
}

template <typename T>
Tensor<T> mean_all(Tensor<T> a) {
  return scale(sum_all(a), T(1) / static_cast<T>(a.size()));
}

template <typename T>
Tensor<T> slice_rows(Tensor<T> a, int r0, int count) {
  if (r0 < 0 || count < 0 || r0 + count > a.rows()) {
    throw ShapeError("slice_rows: [" + std::to_string(r0) + ", " +
                     std::to_string(r0 + count) + ") out of " + shape_str(a.rows(), a.cols()));
  }
  Tape<T>& tp = *a.tape;
  bool rg = tp.nodes[a.node].requires_grad;
  int n = a.cols();
  Tensor<T> out = tp.make_node(count, n, rg);
  const auto& av = tp.nodes[a.node].value;
  auto& ov = tp.nodes[out.node].value;
  std::copy(av.begin() + static_cast<size_t>(r0) * n,
            av.begin() + static_cast<size_t>(r0 + count) * n, ov.begin());
  if (rg) {
    int ai = a.node, oi = out.node;
    tp.nodes[out.node].backward = [ai, oi, r0, n](Tape<T>& t) {
      const auto& g = t.nodes[oi].grad;
      auto& ga = t.nodes[ai].grad;
      for (size_t i = 0; i < g.size(); ++i) ga[static_cast<size_t>(r0) * n + i] += g[i];
    };
  }
  return out;
}

template <typename T>
Tensor<T> slice_cols(Tensor<T> a, int c0, int count) {
  if (c0 < 0 || count < 0 || c0 + count > a.cols()) {
    throw ShapeError("slice_cols: [" + std::to_string(c0) + ", " +
                     std::to_string(c0 + count) + ") out of " + shape_str(a.rows(), a.cols()));
  }
  Tape<T>& tp = *a.tape;
  bool rg = tp.nodes[a.node].requires_grad;
  int m = a.rows(), n = a.cols();
  Tensor<T> out = tp.make_node(m, count, rg);
  const auto& av = tp.nodes[a.node].value;
  auto& ov = tp.nodes[out.node].value;
  for (int r = 0; r < m; ++r)
    for (int c = 0; c < count; ++c) ov[r * count + c] = av[r * n + c0 + c];
  if (rg) {
    int ai = a.node, oi = out.node;
    tp.nodes[out.node].backward = [ai, oi, c0, n, count](Tape<T>& t) {
      const auto& g = t.nodes[oi].grad;
      auto& ga = t.nodes[ai].grad;
      int m2 = t.nodes[oi].rows;
      for (int r = 0; r < m2; ++r)
        for (int c = 0; c < count; ++c) ga[r * n + c0 + c] += g[r * count + c];
    };
  }
  return out;
}

template <typename T>
Tensor<T> concat_rows(const std::vector<Tensor<T>>& parts) {
  if (parts.empty()) throw ContractError("concat_rows: empty input list");
  Tape<T>& tp = *parts[0].tape;
  int n = parts[0].cols();
  int m = 0;
  bool rg = false;
  for (const auto& p : parts) {
    detail::check_same_tape(parts[0], p);
    if (p.cols() != n)
      throw ShapeError("concat_rows: column mismatch " + shape_str(p.rows(), p.cols()));
    m += p.rows();
    rg = rg || tp.nodes[p.node].requires_grad;
  }
  Tensor<T> out = tp.make_node(m, n, rg);
  auto& ov = tp.nodes[out.node].value;
  size_t off = 0;
  std::vector<int> idx;
  for (const auto& p : parts) {
    const auto& pv = tp.nodes[p.node].value;
    std::copy(pv.begin(), pv.end(), ov.begin() + off);
    off += pv.size();
    idx.push_back(p.node);
  }
  if (rg) {
    int oi = out.node;
    tp.nodes[out.node].backward = [idx, oi](Tape<T>& t) {
      const auto& g = t.nodes[oi].grad;
      size_t off2 = 0;
      for (int pi : idx) {
        auto& pn = t.nodes[pi];
        if (pn.requires_grad)
          for (size_t i = 0; i < pn.grad.size(); ++i) pn.grad[i] += g[off2 + i];
        off2 += pn.value.size();
      }
    };
  }
  return out;
}

template <typename T>
Tensor<T> concat_cols(const std::vector<Tensor<T>>& parts) {
  if (parts.empty()) throw ContractError("concat_cols: empty input list");
  Tape<T>& tp = *parts[0].tape;
  int m = parts[0].rows();
  int n = 0;
  bool rg = false;
  for (const auto& p : parts) {
    detail::check_same_tape(parts[0], p);
    if (p.rows() != m)
      throw ShapeError("concat_cols: row mismatch " + shape_str(p.rows(), p.cols()));
    n += p.cols();
    rg = rg || tp.nodes[p.node].requires_grad;
  }
  Tensor<T> out = tp.make_node(m, n, rg);
  auto& ov = tp.nodes[out.node].value;
  int coff = 0;
  std::vector<std::pair<int, int>> idx;  // node, col offset
  for (const auto& p : parts) {
    const auto& pv = tp.nodes[p.node].value;
    int pc = p.cols();
    for (int r = 0; r < m; ++r)
      for (int c = 0; c < pc; ++c) ov[r * n + coff + c] = pv[r * pc + c];
    idx.emplace_back(p.node, coff);
    coff += pc;
  }
  if (rg) {
    int oi = out.node;
    tp.nodes[out.node].backward = [idx, oi, n](Tape<T>& t) {
      const auto& g = t.nodes[oi].grad;
      int m2 = t.nodes[oi].rows;
      for (auto [pi, co] : idx) {
        auto& pn = t.nodes[pi];
        if (!pn.requires_grad) continue;
        int pc = pn.cols;
        for (int r = 0; r < m2; ++r)
          for (int c = 0; c < pc; ++c) pn.grad[r * pc + c] += g[r * n + co + c];
      }
    };
  }
  return out;
}

// Gather rows of a table by index (embedding lookup). Backward scatter-adds.
template <typename T>
Tensor<T> gather_rows(Tensor<T> table, const std::vector<int>& ids) {
  Tape<T>& tp = *table.tape;
  int n = table.cols();
  for (int id : ids) {
    if (id < 0 || id >= table.rows()) {
      throw ContractError("gather_rows: index " + std::to_string(id) + " out of " +
                          std::to_string(table.rows()) + " rows");
    }
  }
  bool rg = tp.nodes[table.node].requires_grad;
  Tensor<T> out = tp.make_node(static_cast<int>(ids.size()), n, rg);
  const auto& tv = tp.nodes[table.node].value;
  auto& ov = tp.nodes[out.node].value;
  for (size_t r = 0; r < ids.size(); ++r)
    std::copy(tv.begin() + static_cast<size_t>(ids[r]) * n,
              tv.begin() + static_cast<size_t>(ids[r] + 1) * n, ov.begin() + r * n);
  if (rg) {
    int ti = table.node, oi = out.node;
    tp.nodes[out.node].backward = [ti, oi, ids, n](Tape<T>& t) {
      const auto& g = t.nodes[oi].grad;
      auto& gt = t.nodes[ti].grad;
      for (size_t r = 0; r < ids.size(); ++r)
        for (int c = 0; c < n; ++c) gt[static_cast<size_t>(ids[r]) * n + c] += g[r * n + c];
    };
  }
  return out;
}

// Per-row layer norm with learned gain/bias rows [1 x n].
template <typename T>
Tensor<T> layer_norm_rows(Tensor<T> x, Tensor<T> gain, Tensor<T> bias, T eps = T(1e-5)) {
  detail::check_same_tape(x, gain);
  detail::check_same_tape(x, bias);
  int m = x.rows(), n = x.cols();
  if (gain.rows() != 1 || gain.cols() != n || bias.rows() != 1 || bias.cols() != n)
    throw ShapeError("layer_norm_rows: gain/bias must be [1x" + std::to_string(n) + "]");
  Tape<T>& tp = *x.tape;
  bool rg = tp.nodes[x.node].requires_grad || tp.nodes[gain.node].requires_grad ||
            tp.nodes[bias.node].requires_grad;
  Tensor<T> out = tp.make_node(m, n, rg);
  const auto& xv = tp.nodes[x.node].value;
  const auto& gv = tp.nodes[gain.node].value;
  const auto& bv = tp.nodes[bias.node].value;
  auto& ov = tp.nodes[out.node].value;
  std::vector<T> inv_std(m), mean(m);
  for (int r = 0; r < m; ++r) {
    T mu = T(0);
    for (int c = 0; c < n; ++c) mu += xv[r * n + c];
    mu /= n;
    T var = T(0);
    for (int c = 0; c < n; ++c) {
      T d = xv[r * n + c] - mu;
      var += d * d;
    }
    var /= n;
    T is = T(1) / std::sqrt(var + eps);
    mean[r] = mu;
    inv_std[r] = is;
    for (int c = 0; c < n; ++c)
      ov[r * n + c] = (xv[r * n + c] - mu) * is * gv[c] + bv[c];
  }
  if (rg) {
    int xi = x.node, gi = gain.node, bi = bias.node, oi = out.node;
    tp.nodes[out.node].backward = [xi, gi, bi, oi, mean, inv_std, n](Tape<T>& t) {
      const auto& xv2 = t.nodes[xi].value;
      const auto& gv2 = t.nodes[gi].value;
      const auto& g = t.nodes[oi].grad;
      int m2 = t.nodes[oi].rows;
      for (int r = 0; r < m2; ++r) {
        T is = inv_std[r], mu = mean[r];
        // xhat = (x - mu) * is ; dy/dxhat = gain
        T sum_gh = T(0), sum_gh_xhat = T(0);
        for (int c = 0; c < n; ++c) {
          T xhat = (xv2[r * n + c] - mu) * is;
          T gh = g[r * n + c] * gv2[c];
          sum_gh += gh;
          sum_gh_xhat += gh * xhat;
        }
        for (int c = 0; c < n; ++c) {
          T xhat = (xv2[r * n + c] - mu) * is;
          T gh = g[r * n + c] * gv2[c];
          if (t.nodes[xi].requires_grad)
            t.nodes[xi].grad[r * n + c] +=
                is * (gh - sum_gh / n - xhat * sum_gh_xhat / n);
          if (t.nodes[gi].requires_grad)
            t.nodes[gi].grad[c] += g[r * n + c] * xhat;
          if (t.nodes[bi].requires_grad) t.nodes[bi].grad[c] += g[r * n + c];
        }
      }
    };
  }
  return out;
}

// Mean of -log softmax(logits)[target] over rows (fused softmax + NLL).
template <typename T>
Tensor<T> cross_entropy_mean(Tensor<T> logits, const std::vector<int>& targets) {
  int m = logits.rows(), n = logits.cols();
  if (static_cast<int>(targets.size()) != m) {
    throw ShapeError("cross_entropy_mean: " + std::to_string(targets.size()) +
                     " targets for " + std::to_string(m) + " logit rows");
  }
  for (int tgt : targets)
    if (tgt < 0 || tgt >= n)
      throw ContractError("cross_entropy_mean: target " + std::to_string(tgt) +
                          " out of vocab " + std::to_string(n));
  Tape<T>& tp = *logits.tape;
  bool rg = tp.nodes[logits.node].requires_grad;
  Tensor<T> out = tp.make_node(1, 1, rg);
  const auto& lv = tp.nodes[logits.node].value;
  T loss = T(0);
  for (int r = 0; r < m; ++r) {
    T mx = lv[r * n];
    for (int c = 1; c < n; ++c) mx = std::max(mx, lv[r * n + c]);
    T lse = T(0);
    for (int c = 0; c < n; ++c) lse += std::exp(lv[r * n + c] - mx);
    lse = mx + std::log(lse);
    loss += lse - lv[r * n + targets[r]];
  }
  tp.nodes[out.node].value[0] = loss / m;
  if (rg) {
    int li = logits.node, oi = out.node;
    tp.nodes[out.node].backward = [li, oi, targets, m, n](Tape<T>& t) {
      T g = t.nodes[oi].grad[0] / m;
      const auto& lv2 = t.nodes[li].value;
      auto& gl = t.nodes[li].grad;
      for (int r = 0; r < m; ++r) {
        T mx = lv2[r * n];
        for (int c = 1; c < n; ++c) mx = std::max(mx, lv2[r * n + c]);
        T sum = T(0);
        for (int c = 0; c < n; ++c) sum += std::exp(lv2[r * n + c] - mx);
        for (int c = 0; c < n; ++c) {
          T p = std::exp(lv2[r * n + c] - mx) / sum;
          gl[r * n + c] += g * (p - (c == targets[r] ? T(1) : T(0)));
        }
      }
    };
  }
  return out;
}

// Mean over all elements of (a - b)^2.
template <typename T>
Tensor<T> mse_mean(Tensor<T> a, Tensor<T> b) {
  detail::check_same_shape(a, b, "mse_mean");
  Tensor<T> d = sub(a, b);
  return mean_all(mul(d, d));
}

// Mean over rows of (1 - cos(a_row, b_row)); rows with a near-zero norm on
// either side contribute 0.
template <typename T>
Tensor<T> cosine_dist_mean(Tensor<T> a, Tensor<T> b, T norm_eps = T(1e-8)) {
  detail::check_same_tape(a, b);
  detail::check_same_shape(a, b, "cosine_dist_mean");
  Tape<T>& tp = *a.tape;
  int m = a.rows(), n = a.cols();
  bool rg = tp.nodes[a.node].requires_grad || tp.nodes[b.node].requires_grad;
  Tensor<T> out = tp.make_node(1, 1, rg);
  const auto& av = tp.nodes[a.node].value;
  const auto& bv = tp.nodes[b.node].value;
  T total = T(0);
  for (int r = 0; r < m; ++r) {
    T na = T(0), nb = T(0), dot = T(0);
    for (int c = 0; c < n; ++c) {
      na += av[r * n + c] * av[r * n + c];
      nb += bv[r * n + c] * bv[r * n + c];
      dot += av[r * n + c] * bv[r * n + c];
    }
    na = std::sqrt(na);
    nb = std::sqrt(nb);
    if (na < norm_eps || nb < norm_eps) continue;
    total += T(1) - dot / (na * nb);
  }
  tp.nodes[out.node].value[0] = total / m;
  if (rg) {
    int ai = a.node, bi = b.node, oi = out.node;
    tp.nodes[out.node].backward = [ai, bi, oi, m, n, norm_eps](Tape<T>& t) {
      T g = t.nodes[oi].grad[0] / m;
      const auto& av2 = t.nodes[ai].value;
      const auto& bv2 = t.nodes[bi].value;
      for (int r = 0; r < m; ++r) {
        T na = T(0), nb = T(0), dot = T(0);
        for (int c = 0; c < n; ++c) {
          na += av2[r * n + c] * av2[r * n + c];
          nb += bv2[r * n + c] * bv2[r * n + c];
          dot += av2[r * n + c] * bv2[r * n + c];
        }
        na = std::sqrt(na);
        nb = std::sqrt(nb);
        if (na < norm_eps || nb < norm_eps) continue;
        // d(1 - dot/(na nb))/da = -(b/(na nb) - dot a/(na^3 nb))
        for (int c = 0; c < n; ++c) {
          if (t.nodes[ai].requires_grad)
            t.nodes[ai].grad[r * n + c] +=
                g * (-(bv2[r * n + c] / (na * nb)) +
                     dot * av2[r * n + c] / (na * na * na * nb));
          if (t.nodes[bi].requires_grad)
            t.nodes[bi].grad[r * n + c] +=
                g * (-(av2[r * n + c] / (na * nb)) +
                     dot * bv2[r * n + c] / (nb * nb * nb * na));
        }
      }
    };
  }
  return out;
}

}  // namespace asrb
