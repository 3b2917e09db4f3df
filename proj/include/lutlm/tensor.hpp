// Copyright (c) 2026 The lutlm Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace lutlm {

// Dense 2-D value type used throughout. Vectors are 1xN or Nx1 matrices;
// scalars are 1x1. Shapes are fixed at construction and every exported
// operation validates its operands, so a shape mismatch fails loudly
// instead of broadcasting.
template <typename Scalar>
using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

using Index = Eigen::Index;

struct Shape {
  Index rows = 0;
  Index cols = 0;
  bool operator==(const Shape&) const = default;
};

inline std::string shape_str(Index r, Index c) {
  return "(" + std::to_string(r) + "x" + std::to_string(c) + ")";
}

template <typename Scalar>
std::string shape_str(const Mat<Scalar>& m) {
  return shape_str(m.rows(), m.cols());
}

class ShapeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

template <typename Scalar>
void require_same_shape(const Mat<Scalar>& a, const Mat<Scalar>& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ShapeError(std::string(op) + ": shape mismatch " + shape_str(a) + " vs " + shape_str(b));
  }
}

template <typename Scalar>
void require_finite(const Mat<Scalar>& m, const char* op) {
  if (!m.allFinite()) {
    throw NumericError(std::string("non-finite values produced by primitive '") + op + "'");
  }
}

}  // namespace lutlm
