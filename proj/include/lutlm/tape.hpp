// Copyright (c) 2026 The lutlm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "lutlm/tensor.hpp"

namespace lutlm {

template <typename Scalar>
class Tape;

// Handle to one recorded value on a tape. Cheap to copy; the tape owns the
// storage. A Var is only valid for the lifetime of its tape.
template <typename Scalar>
struct Var {
  Tape<Scalar>* tape = nullptr;
  int id = -1;

  const Mat<Scalar>& value() const { return tape->value(id); }
  Index rows() const { return value().rows(); }
  Index cols() const { return value().cols(); }
};

// Reverse-mode computation record. Each differentiable primitive appends one
// node holding its result and a pull-back closure; backward() replays the
// record once, in reverse creation order (a valid topological order because
// nodes only reference earlier nodes). Gradients accumulate additively, so a
// value feeding several consumers receives the sum of all path gradients.
//
// A tape belongs to a single training step and is single-threaded. Recorded
// values are immutable once created.
template <typename Scalar>
class Tape {
 public:
  explicit Tape(bool check_finite = true) : check_finite_(check_finite) {}

  int size() const { return static_cast<int>(nodes_.size()); }

  const Mat<Scalar>& value(int id) const { return nodes_[static_cast<std::size_t>(id)].value; }

  // Gradient of the most recent backward() result with respect to node `id`.
  const Mat<Scalar>& grad(int id) const { return nodes_[static_cast<std::size_t>(id)].grad; }

  Var<Scalar> leaf(Mat<Scalar> value, const char* name = "leaf") {
    return emplace(std::move(value), name, nullptr);
  }

  Var<Scalar> constant(Mat<Scalar> value, const char* name = "constant") {
    Var<Scalar> v = emplace(std::move(value), name, nullptr);
    nodes_[static_cast<std::size_t>(v.id)].constant = true;
    return v;
  }

  Var<Scalar> scalar(Scalar x, const char* name = "scalar") {
    Mat<Scalar> m(1, 1);
    m(0, 0) = x;
    return leaf(std::move(m), name);
  }

  // Runs the chain rule backward from a scalar result. Every recorded
  // application is visited exactly once.
  void backward(Var<Scalar> loss) {
    if (loss.tape != this) throw NumericError("backward: var from another tape");
    const Mat<Scalar>& lv = value(loss.id);
    if (lv.rows() != 1 || lv.cols() != 1) {
      throw NumericError("backward: loss must be scalar, got " + shape_str(lv));
    }
    if (!std::isfinite(static_cast<double>(lv(0, 0)))) {
      throw NumericError("backward: loss is not finite");
    }
    for (auto& n : nodes_) n.grad.setZero(n.value.rows(), n.value.cols());
    nodes_[static_cast<std::size_t>(loss.id)].grad(0, 0) = Scalar(1);
    for (int i = loss.id; i >= 0; --i) {
      Node& n = nodes_[static_cast<std::size_t>(i)];
      if (!n.pull) continue;
      n.pull(n.grad);
      if (check_finite_ && !n.grad.allFinite()) {
        throw NumericError(std::string("non-finite gradient at primitive '") + n.op + "'");
      }
    }
  }

  bool checks_finite() const { return check_finite_; }

  // -- op plumbing ---------------------------------------------------------

  using Pull = std::function<void(const Mat<Scalar>&)>;

  Var<Scalar> emplace(Mat<Scalar> value, const char* op, Pull pull) {
    if (check_finite_) require_finite(value, op);
    nodes_.push_back(Node{std::move(value), Mat<Scalar>(), std::move(pull), op, false});
    return Var<Scalar>{this, static_cast<int>(nodes_.size()) - 1};
  }

  Mat<Scalar>& grad_ref(int id) { return nodes_[static_cast<std::size_t>(id)].grad; }
  bool is_constant(int id) const { return nodes_[static_cast<std::size_t>(id)].constant; }

 private:
  struct Node {
    Mat<Scalar> value;
    Mat<Scalar> grad;
    Pull pull;  // adds this node's contribution into its parents' grads
    const char* op;
    bool constant;
  };

  std::vector<Node> nodes_;
  bool check_finite_;
};

namespace detail {

template <typename Scalar>
Tape<Scalar>& same_tape(Var<Scalar> a, Var<Scalar> b, const char* op) {
  if (a.tape == nullptr || a.tape != b.tape) {
    throw NumericError(std::string(op) + ": operands recorded on different tapes");
  }
  return *a.tape;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Differentiable primitives. Free functions so expressions compose naturally:
//   auto y = layer_norm_rows(add(x, matmul(x, w)), gain, shift, eps);
// ---------------------------------------------------------------------------

template <typename Scalar>
Var<Scalar> add(Var<Scalar> a, Var<Scalar> b) {
  Tape<Scalar>& t = detail::same_tape(a, b, "add");
  require_same_shape(a.value(), b.value(), "add");
  Mat<Scalar> out = a.value() + b.value();
  return t.emplace(std::move(out), "add", [&t, a, b](const Mat<Scalar>& g) {
    t.grad_ref(a.id) += g;
    t.grad_ref(b.id) += g;
  });
}

// n-ary sum of same-shaped values; one node regardless of operand count.
template <typename Scalar>
Var<Scalar> add_n(const std::vector<Var<Scalar>>& xs) {
  if (xs.empty()) throw NumericError("add_n: empty operand list");
  Tape<Scalar>& t = *xs[0].tape;
  Mat<Scalar> out = xs[0].value();
  for (std::size_t i = 1; i < xs.size(); ++i) {
    detail::same_tape(xs[0], xs[i], "add_n");
    require_same_shape(out, xs[i].value(), "add_n");
    out += xs[i].value();
  }
  return t.emplace(std::move(out), "add_n", [&t, xs](const Mat<Scalar>& g) {
    for (const auto& x : xs) t.grad_ref(x.id) += g;
  });
}

template <typename Scalar>
Var<Scalar> sub(Var<Scalar> a, Var<Scalar> b) {
  Tape<Scalar>& t = detail::same_tape(a, b, "sub");
  require_same_shape(a.value(), b.value(), "sub");
  Mat<Scalar> out = a.value() - b.value();
  return t.emplace(std::move(out), "sub", [&t, a, b](const Mat<Scalar>& g) {
    t.grad_ref(a.id) += g;
    t.grad_ref(b.id) -= g;
  });
}

template <typename Scalar>
Var<Scalar> mul(Var<Scalar> a, Var<Scalar> b) {
  Tape<Scalar>& t = detail::same_tape(a, b, "mul");
  require_same_shape(a.value(), b.value(), "mul");
  Mat<Scalar> out = a.value().cwiseProduct(b.value());
  return t.emplace(std::move(out), "mul", [&t, a, b](const Mat<Scalar>& g) {
    t.grad_ref(a.id) += g.cwiseProduct(b.value());
    t.grad_ref(b.id) += g.cwiseProduct(a.value());
  });
}

template <typename Scalar>
Var<Scalar> scale(Var<Scalar> a, Scalar c) {
  Tape<Scalar>& t = *a.tape;
  Mat<Scalar> out = a.value() * c;
  return t.emplace(std::move(out), "scale", [&t, a, c](const Mat<Scalar>& g) {
    t.grad_ref(a.id) += g * c;
  });
}

template <typename Scalar>
Var<Scalar> add_const(Var<Scalar> a, const Mat<Scalar>& c) {
  Tape<Scalar>& t = *a.tape;
  require_same_shape(a.value(), c, "add_const");
  Mat<Scalar> out = a.value() + c;
  return t.emplace(std::move(out), "add_const", [&t, a](const Mat<Scalar>& g) {
    t.grad_ref(a.id) += g;
  });
}

template <typename Scalar>
Var<Scalar> matmul(Var<Scalar> a, Var<Scalar> b) {
  Tape<Scalar>& t = detail::same_tape(a, b, "matmul");
  if (a.cols() != b.rows()) {
    throw ShapeError("matmul: inner extents differ " + shape_str(a.value()) + " * " + shape_str(b.value()));
  }
  Mat<Scalar> out = a.value() * b.value();
  return t.emplace(std::move(out), "matmul", [&t, a, b](const Mat<Scalar>& g) {
    t.grad_ref(a.id).noalias() += g * b.value().transpose();
    t.grad_ref(b.id).noalias() += a.value().transpose() * g;
  });
}

// a * b^T without materializing the transpose.
template <typename Scalar>
Var<Scalar> matmul_nt(Var<Scalar> a, Var<Scalar> b) {
  Tape<Scalar>& t = detail::same_tape(a, b, "matmul_nt");
  if (a.cols() != b.cols()) {
    throw ShapeError("matmul_nt: inner extents differ " + shape_str(a.value()) + " * " +
                     shape_str(b.value()) + "^T");
  }
  Mat<Scalar> out = a.value() * b.value().transpose();
  return t.emplace(std::move(out), "matmul_nt", [&t, a, b](const Mat<Scalar>& g) {
    t.grad_ref(a.id).noalias() += g * b.value();
    t.grad_ref(b.id).noalias() += g.transpose() * a.value();
  });
}

// The one permitted broadcast: applying a 1xC vector along the trailing
// dimension of an RxC value.
template <typename Scalar>
Var<Scalar> add_rowvec(Var<Scalar> a, Var<Scalar> v) {
  Tape<Scalar>& t = detail::same_tape(a, v, "add_rowvec");
  if (v.rows() != 1 || v.cols() != a.cols()) {
    throw ShapeError("add_rowvec: vector " + shape_str(v.value()) + " does not match trailing extent of " +
                     shape_str(a.value()));
  }
  Mat<Scalar> out = a.value().rowwise() + v.value().row(0);
  return t.emplace(std::move(out), "add_rowvec", [&t, a, v](const Mat<Scalar>& g) {
    t.grad_ref(a.id) += g;
    t.grad_ref(v.id).row(0) += g.colwise().sum();
  });
}

template <typename Scalar>
Var<Scalar> add_rowvec_const(Var<Scalar> a, const Mat<Scalar>& v) {
  Tape<Scalar>& t = *a.tape;
  if (v.rows() != 1 || v.cols() != a.cols()) {
    throw ShapeError("add_rowvec_const: vector " + shape_str(v) + " does not match trailing extent of " +
                     shape_str(a.value()));
  }
  Mat<Scalar> out = a.value().rowwise() + v.row(0);
  return t.emplace(std::move(out), "add_rowvec_const", [&t, a](const Mat<Scalar>& g) {
    t.grad_ref(a.id) += g;
  });
}

// Broadcast a 1x1 value over every entry.
template <typename Scalar>
Var<Scalar> add_scalar(Var<Scalar> a, Var<Scalar> s) {
  Tape<Scalar>& t = detail::same_tape(a, s, "add_scalar");
  if (s.rows() != 1 || s.cols() != 1) throw ShapeError("add_scalar: addend must be 1x1");
  Mat<Scalar> out = a.value().array() + s.value()(0, 0);
  return t.emplace(std::move(out), "add_scalar", [&t, a, s](const Mat<Scalar>& g) {
    t.grad_ref(a.id) += g;
    t.grad_ref(s.id)(0, 0) += g.sum();
  });
}

// Row i of the output scaled by w(i); w is Rx1.
template <typename Scalar>
Var<Scalar> scale_rows(Var<Scalar> a, Var<Scalar> w) {
  Tape<Scalar>& t = detail::same_tape(a, w, "scale_rows");
  if (w.cols() != 1 || w.rows() != a.rows()) {
    throw ShapeError("scale_rows: weight " + shape_str(w.value()) + " does not match rows of " +
                     shape_str(a.value()));
  }
  Mat<Scalar> out = a.value().array().colwise() * w.value().col(0).array();
  return t.emplace(std::move(out), "scale_rows", [&t, a, w](const Mat<Scalar>& g) {
    t.grad_ref(a.id).array() += g.array().colwise() * w.value().col(0).array();
    t.grad_ref(w.id).col(0) += g.cwiseProduct(a.value()).rowwise().sum();
  });
}

template <typename Scalar>
Var<Scalar> gelu(Var<Scalar> a) {
  Tape<Scalar>& t = *a.tape;
  const auto x = a.value().array();
  Mat<Scalar> out =
      (Scalar(0.5) * x * (Scalar(1) + (x * Scalar(M_SQRT1_2)).erf())).matrix();
  return t.emplace(std::move(out), "gelu", [&t, a](const Mat<Scalar>& g) {
    const auto x2 = a.value().array();
    const auto cdf = Scalar(0.5) * (Scalar(1) + (x2 * Scalar(M_SQRT1_2)).erf());
    const auto pdf = (-(x2 * x2) * Scalar(0.5)).exp() * Scalar(1.0 / std::sqrt(2.0 * M_PI));
    t.grad_ref(a.id).array() += g.array() * (cdf + x2 * pdf);
  });
}

template <typename Scalar>
Var<Scalar> sigmoid(Var<Scalar> a) {
  Tape<Scalar>& t = *a.tape;
  Mat<Scalar> out = (Scalar(1) / (Scalar(1) + (-a.value().array()).exp())).matrix();
  return t.emplace(std::move(out), "sigmoid", [&t, a, out](const Mat<Scalar>& g) {
    t.grad_ref(a.id).array() += g.array() * out.array() * (Scalar(1) - out.array());
  });
}

template <typename Scalar>
Var<Scalar> tanh_op(Var<Scalar> a) {
  Tape<Scalar>& t = *a.tape;
  Mat<Scalar> out = a.value().array().tanh().matrix();
  return t.emplace(std::move(out), "tanh", [&t, a, out](const Mat<Scalar>& g) {
    t.grad_ref(a.id).array() += g.array() * (Scalar(1) - out.array().square());
  });
}

template <typename Scalar>
Var<Scalar> log_op(Var<Scalar> a) {
  Tape<Scalar>& t = *a.tape;
  if ((a.value().array() <= Scalar(0)).any()) {
    throw NumericError("log: non-positive operand");
  }
  Mat<Scalar> out = a.value().array().log().matrix();
  return t.emplace(std::move(out), "log", [&t, a](const Mat<Scalar>& g) {
    t.grad_ref(a.id).array() += g.array() / a.value().array();
  });
}

// Square root with a clamped pull-back so a zero operand (e.g. the distance
// between identical distributions) yields value 0 and a finite gradient.
template <typename Scalar>
Var<Scalar> sqrt_op(Var<Scalar> a) {
  Tape<Scalar>& t = *a.tape;
  if ((a.value().array() < Scalar(0)).any()) {
    throw NumericError("sqrt: negative operand");
  }
  Mat<Scalar> out = a.value().array().sqrt().matrix();
  return t.emplace(std::move(out), "sqrt", [&t, a, out](const Mat<Scalar>& g) {
    const auto denom = out.array().max(Scalar(1e-12));
    t.grad_ref(a.id).array() += g.array() * Scalar(0.5) / denom;
  });
}

// Row-wise softmax, guarded by max subtraction so entries with magnitude up
// to ~1e4 (Eq. 1 style unbounded bias sums) do not overflow.
template <typename Scalar>
Var<Scalar> softmax_rows(Var<Scalar> a) {
  Tape<Scalar>& t = *a.tape;
  if (a.cols() == 0) throw ShapeError("softmax: empty axis");
  Mat<Scalar> out = a.value();
  for (Index r = 0; r < out.rows(); ++r) {
    const Scalar m = out.row(r).maxCoeff();
    out.row(r) = (out.row(r).array() - m).exp();
    out.row(r) /= out.row(r).sum();
  }
  return t.emplace(std::move(out), "softmax", [&t, a, out](const Mat<Scalar>& g) {
    Mat<Scalar>& ga = t.grad_ref(a.id);
    for (Index r = 0; r < out.rows(); ++r) {
      const Scalar dot = g.row(r).cwiseProduct(out.row(r)).sum();
      ga.row(r).array() += (g.row(r).array() - dot) * out.row(r).array();
    }
  });
}

// Per-row normalization: (x - mean) / sqrt(var + eps), scaled by gain (1xC)
// and shifted by shift (1xC). Variance is the biased estimate.
template <typename Scalar>
Var<Scalar> layer_norm_rows(Var<Scalar> a, Var<Scalar> gain, Var<Scalar> shift, Scalar eps) {
  Tape<Scalar>& t = detail::same_tape(a, gain, "layer_norm");
  detail::same_tape(a, shift, "layer_norm");
  if (eps <= Scalar(0)) throw NumericError("layer_norm: epsilon must be positive");
  const Index C = a.cols();
  if (gain.rows() != 1 || gain.cols() != C || shift.rows() != 1 || shift.cols() != C) {
    throw ShapeError("layer_norm: gain/shift must be 1x" + std::to_string(C));
  }
  const Mat<Scalar>& x = a.value();
  Mat<Scalar> xhat(x.rows(), C);
  Mat<Scalar> inv_sigma(x.rows(), 1);
  for (Index r = 0; r < x.rows(); ++r) {
    const Scalar mean = x.row(r).mean();
    const Scalar var = (x.row(r).array() - mean).square().mean();
    const Scalar is = Scalar(1) / std::sqrt(var + eps);
    inv_sigma(r, 0) = is;
    xhat.row(r) = (x.row(r).array() - mean) * is;
  }
  Mat<Scalar> out = (xhat.array().rowwise() * gain.value().row(0).array()).matrix();
  out.rowwise() += shift.value().row(0);
  return t.emplace(std::move(out), "layer_norm",
                   [&t, a, gain, shift, xhat, inv_sigma](const Mat<Scalar>& g) {
                     const Index C2 = xhat.cols();
                     Mat<Scalar>& ga = t.grad_ref(a.id);
                     for (Index r = 0; r < xhat.rows(); ++r) {
                       const auto u = (g.row(r).array() * gain.value().row(0).array()).eval();
                       const Scalar mu = u.mean();
                       const Scalar mx = (u * xhat.row(r).array()).mean();
                       ga.row(r).array() +=
                           (u - mu - xhat.row(r).array() * mx) * inv_sigma(r, 0);
                     }
                     t.grad_ref(gain.id).row(0) += g.cwiseProduct(xhat).colwise().sum();
                     t.grad_ref(shift.id).row(0) += g.colwise().sum();
                     (void)C2;
                   });
}

// Gathers rows of `table` at `ids`; used for embedding lookup, masked-state
// selection and [CLS] extraction. Duplicate ids accumulate in the pull-back.
template <typename Scalar>
Var<Scalar> select_rows(Var<Scalar> table, std::vector<Index> ids) {
  Tape<Scalar>& t = *table.tape;
  const Mat<Scalar>& tb = table.value();
  Mat<Scalar> out(static_cast<Index>(ids.size()), tb.cols());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] < 0 || ids[i] >= tb.rows()) {
      throw ShapeError("select_rows: id " + std::to_string(ids[i]) + " out of range [0," +
                       std::to_string(tb.rows()) + ")");
    }
    out.row(static_cast<Index>(i)) = tb.row(ids[i]);
  }
  return t.emplace(std::move(out), "select_rows",
                   [&t, table, ids = std::move(ids)](const Mat<Scalar>& g) {
                     Mat<Scalar>& gt = t.grad_ref(table.id);
                     for (std::size_t i = 0; i < ids.size(); ++i) {
                       gt.row(ids[i]) += g.row(static_cast<Index>(i));
                     }
                   });
}

// Column-sum gather for the latent category scores: out(0, i) = sum over the
// id multiset of B(i, id), multiplicity included.
template <typename Scalar>
Var<Scalar> gather_cols_sum(Var<Scalar> b, std::vector<Index> ids) {
  Tape<Scalar>& t = *b.tape;
  const Mat<Scalar>& bv = b.value();
  Mat<Scalar> out = Mat<Scalar>::Zero(1, bv.rows());
  for (Index id : ids) {
    if (id < 0 || id >= bv.cols()) {
      throw ShapeError("gather_cols_sum: id " + std::to_string(id) + " out of range [0," +
                       std::to_string(bv.cols()) + ")");
    }
    out.row(0) += bv.col(id).transpose();
  }
  return t.emplace(std::move(out), "gather_cols_sum",
                   [&t, b, ids = std::move(ids)](const Mat<Scalar>& g) {
                     Mat<Scalar>& gb = t.grad_ref(b.id);
                     for (Index id : ids) {
                       gb.col(id) += g.row(0).transpose();
                     }
                   });
}

template <typename Scalar>
Var<Scalar> slice_cols(Var<Scalar> a, Index start, Index n) {
  Tape<Scalar>& t = *a.tape;
  if (start < 0 || n < 0 || start + n > a.cols()) {
    throw ShapeError("slice_cols: range [" + std::to_string(start) + "," + std::to_string(start + n) +
                     ") exceeds " + shape_str(a.value()));
  }
  Mat<Scalar> out = a.value().middleCols(start, n);
  return t.emplace(std::move(out), "slice_cols", [&t, a, start, n](const Mat<Scalar>& g) {
    t.grad_ref(a.id).middleCols(start, n) += g;
  });
}

template <typename Scalar>
Var<Scalar> concat_cols(const std::vector<Var<Scalar>>& xs) {
  if (xs.empty()) throw NumericError("concat_cols: empty operand list");
  Tape<Scalar>& t = *xs[0].tape;
  const Index rows = xs[0].rows();
  Index cols = 0;
  for (const auto& x : xs) {
    detail::same_tape(xs[0], x, "concat_cols");
    if (x.rows() != rows) throw ShapeError("concat_cols: row extents differ");
    cols += x.cols();
  }
  Mat<Scalar> out(rows, cols);
  Index at = 0;
  for (const auto& x : xs) {
    out.middleCols(at, x.cols()) = x.value();
    at += x.cols();
  }
  return t.emplace(std::move(out), "concat_cols", [&t, xs](const Mat<Scalar>& g) {
    Index at2 = 0;
    for (const auto& x : xs) {
      t.grad_ref(x.id) += g.middleCols(at2, x.cols());
      at2 += x.cols();
    }
  });
}

template <typename Scalar>
Var<Scalar> sum_all(Var<Scalar> a) {
  Tape<Scalar>& t = *a.tape;
  Mat<Scalar> out(1, 1);
  out(0, 0) = a.value().sum();
  return t.emplace(std::move(out), "sum_all", [&t, a](const Mat<Scalar>& g) {
    t.grad_ref(a.id).array() += g(0, 0);
  });
}

template <typename Scalar>
Var<Scalar> mean_all(Var<Scalar> a) {
  return scale(sum_all(a), Scalar(1) / static_cast<Scalar>(a.rows() * a.cols()));
}

// Weighted sum against fixed (non-trainable) weights; the workhorse for the
// loss-weight and masking reductions.
template <typename Scalar>
Var<Scalar> dot_const(Var<Scalar> a, const Mat<Scalar>& w) {
  Tape<Scalar>& t = *a.tape;
  require_same_shape(a.value(), w, "dot_const");
  Mat<Scalar> out(1, 1);
  out(0, 0) = a.value().cwiseProduct(w).sum();
  return t.emplace(std::move(out), "dot_const", [&t, a, w](const Mat<Scalar>& g) {
    t.grad_ref(a.id) += g(0, 0) * w;
  });
}

// Mean over entries where mask is nonzero. Mask entries are 0/1 constants.
template <typename Scalar>
Var<Scalar> masked_mean(Var<Scalar> a, const Mat<Scalar>& mask) {
  require_same_shape(a.value(), mask, "masked_mean");
  const Scalar denom = mask.sum();
  if (denom <= Scalar(0)) throw NumericError("masked_mean: empty mask");
  return scale(dot_const(a, mask), Scalar(1) / denom);
}

// Per-row cross-entropy from logits: out(r, 0) = logsumexp(row r) - row_r[label_r].
// Max-subtracted, so logits of magnitude up to ~1e4 stay finite.
template <typename Scalar>
Var<Scalar> cross_entropy_rows(Var<Scalar> logits, std::vector<Index> labels) {
  Tape<Scalar>& t = *logits.tape;
  const Mat<Scalar>& x = logits.value();
  if (static_cast<Index>(labels.size()) != x.rows()) {
    throw ShapeError("cross_entropy: label count " + std::to_string(labels.size()) +
                     " does not match rows of " + shape_str(x));
  }
  Mat<Scalar> probs(x.rows(), x.cols());
  Mat<Scalar> out(x.rows(), 1);
  for (Index r = 0; r < x.rows(); ++r) {
    const Index lab = labels[static_cast<std::size_t>(r)];
    if (lab < 0 || lab >= x.cols()) {
      throw ShapeError("cross_entropy: label " + std::to_string(lab) + " out of range");
    }
    const Scalar m = x.row(r).maxCoeff();
    const auto e = (x.row(r).array() - m).exp().eval();
    const Scalar z = e.sum();
    probs.row(r) = (e / z).matrix();
    out(r, 0) = std::log(z) + m - x(r, lab);
  }
  return t.emplace(std::move(out), "cross_entropy",
                   [&t, logits, labels = std::move(labels), probs](const Mat<Scalar>& g) {
                     Mat<Scalar>& gl = t.grad_ref(logits.id);
                     for (Index r = 0; r < probs.rows(); ++r) {
                       gl.row(r) += g(r, 0) * probs.row(r);
                       gl(r, labels[static_cast<std::size_t>(r)]) -= g(r, 0);
                     }
                   });
}

}  // namespace lutlm
