/*
 *   Copyright 2026 The thyper Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

/**
 * @file tensor.hpp
 *
 * Third-order tensors stored slice-major. A tensor of shape rows x cols x
 * n_slices keeps its frontal slices stacked vertically in a single
 * (n_slices * rows) x cols matrix, which is exactly unfold(t).
 */

#pragma once

#include <Eigen/Dense>

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "thyper/error.hpp"

namespace thyper {

using Index = Eigen::Index;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

class Tensor3 {
 public:
  Tensor3() = default;

  /// Zero tensor.
  Tensor3(Index rows, Index cols, Index n_slices)
      : rows_(rows), cols_(cols), n_slices_(n_slices), data_(Matrix::Zero(rows * n_slices, cols)) {
    if (rows < 0 || cols < 0 || n_slices < 1) {
      throw DimensionError("Tensor3: invalid shape " + shape_string(rows, cols, n_slices));
    }
  }

  /// Wraps an unfolded (n_slices * rows) x cols matrix.
  Tensor3(Matrix unfolded, Index rows, Index n_slices, bool symmetrized = false)
      : rows_(rows), cols_(unfolded.cols()), n_slices_(n_slices), data_(std::move(unfolded)) {
    if (rows < 0 || n_slices < 1 || data_.rows() != rows * n_slices) {
      throw DimensionError("Tensor3: unfolded matrix with " + std::to_string(data_.rows()) +
                           " rows does not split into " + std::to_string(n_slices) + " slices of " +
                           std::to_string(rows) + " rows");
    }
    set_symmetrized(symmetrized);
  }

  static Tensor3 from_slices(const std::vector<Matrix>& slices, bool symmetrized = false) {
    if (slices.empty()) throw DimensionError("Tensor3: no slices");
    const Index r = slices.front().rows();
    const Index c = slices.front().cols();
    Matrix m(r * static_cast<Index>(slices.size()), c);
    for (std::size_t k = 0; k < slices.size(); ++k) {
      if (slices[k].rows() != r || slices[k].cols() != c) {
        throw DimensionError("Tensor3: slice " + std::to_string(k) + " has a different shape");
      }
      m.middleRows(static_cast<Index>(k) * r, r) = slices[k];
    }
    return Tensor3(std::move(m), r, static_cast<Index>(slices.size()), symmetrized);
  }

  Index rows() const noexcept { return rows_; }
  Index cols() const noexcept { return cols_; }
  Index n_slices() const noexcept { return n_slices_; }

  auto slice(Index k) { return data_.middleRows(k * rows_, rows_); }
  auto slice(Index k) const { return data_.middleRows(k * rows_, rows_); }

  double& operator()(Index i, Index j, Index k) { return data_(k * rows_ + i, j); }
  double operator()(Index i, Index j, Index k) const { return data_(k * rows_ + i, j); }

  /// The stacked (n_slices * rows) x cols matrix.
  const Matrix& unfolded() const noexcept { return data_; }
  Matrix& unfolded() noexcept { return data_; }

  /// Set only by symmetrize() and by operations that provably keep the
  /// reflection structure (linear combinations, slice-wise maps).
  bool symmetrized() const noexcept { return symmetrized_; }
  void set_symmetrized(bool flag) {
    if (flag && n_slices_ % 2 == 0) {
      throw DimensionError("Tensor3: a symmetrized tensor needs an odd slice count, got " +
                           std::to_string(n_slices_));
    }
    symmetrized_ = flag;
  }

  double max_abs() const { return data_.size() ? data_.cwiseAbs().maxCoeff() : 0.0; }

  bool same_shape(const Tensor3& o) const noexcept {
    return rows_ == o.rows_ && cols_ == o.cols_ && n_slices_ == o.n_slices_;
  }

  /// Zero first slice and slice k equal to slice n_slices - k.
  bool has_reflection_structure(double tol = 0.0) const {
    if (n_slices_ % 2 == 0) return false;
    if (slice(0).size() && slice(0).cwiseAbs().maxCoeff() > tol) return false;
    for (Index k = 1; k <= (n_slices_ - 1) / 2; ++k) {
      if (slice(k).size() && (slice(k) - slice(n_slices_ - k)).cwiseAbs().maxCoeff() > tol) return false;
    }
    return true;
  }

  std::string shape() const { return shape_string(rows_, cols_, n_slices_); }

  Tensor3& operator+=(const Tensor3& o) {
    require_same_shape(o, "+=");
    data_ += o.data_;
    symmetrized_ = symmetrized_ && o.symmetrized_;
    return *this;
  }
  Tensor3& operator-=(const Tensor3& o) {
    require_same_shape(o, "-=");
    data_ -= o.data_;
    symmetrized_ = symmetrized_ && o.symmetrized_;
    return *this;
  }
  Tensor3& operator*=(double s) {
    data_ *= s;
    return *this;
  }

  friend Tensor3 operator+(Tensor3 a, const Tensor3& b) { return a += b; }
  friend Tensor3 operator-(Tensor3 a, const Tensor3& b) { return a -= b; }
  friend Tensor3 operator*(Tensor3 a, double s) { return a *= s; }
  friend Tensor3 operator*(double s, Tensor3 a) { return a *= s; }

  friend bool operator==(const Tensor3& a, const Tensor3& b) {
    return a.same_shape(b) && a.data_ == b.data_;
  }

  void require_same_shape(const Tensor3& o, const char* op) const {
    if (!same_shape(o)) {
      throw DimensionError(std::string("Tensor3 ") + op + ": shape " + shape() + " vs " + o.shape());
    }
  }

 private:
  static std::string shape_string(Index r, Index c, Index n) {
    return std::to_string(r) + "x" + std::to_string(c) + "x" + std::to_string(n);
  }

  Index rows_ = 0;
  Index cols_ = 0;
  Index n_slices_ = 1;
  Matrix data_;
  bool symmetrized_ = false;
};

inline double max_abs_diff(const Tensor3& a, const Tensor3& b) {
  a.require_same_shape(b, "max_abs_diff");
  return a.unfolded().size() ? (a.unfolded() - b.unfolded()).cwiseAbs().maxCoeff() : 0.0;
}

/// A 1 x 1 x n tensor: the scalar-like element of the t-algebra.
class Tube {
 public:
  Tube() = default;
  explicit Tube(Vector values) : values_(std::move(values)) {}

  static Tube from_tensor(const Tensor3& t) {
    if (t.rows() != 1 || t.cols() != 1) throw DimensionError("Tube: tensor is " + t.shape());
    return Tube(t.unfolded().col(0));
  }

  Index size() const noexcept { return values_.size(); }
  double operator[](Index k) const { return values_[k]; }
  const Vector& values() const noexcept { return values_; }

  /// First entry; for Y^T * Z it is the Frobenius inner product <Y, Z>.
  double leading() const { return values_.size() ? values_[0] : 0.0; }
  double total() const { return values_.sum(); }

 private:
  Vector values_;
};

// -- fold / unfold / bcirc ---------------------------------------------------

inline Matrix unfold(const Tensor3& t) { return t.unfolded(); }

inline Tensor3 fold(const Matrix& m, Index rows, Index n_slices) {
  if (n_slices < 1 || m.rows() % n_slices != 0 || m.rows() / n_slices != rows) {
    throw DimensionError("fold: " + std::to_string(m.rows()) + " rows cannot be folded into " +
                         std::to_string(n_slices) + " slices of " + std::to_string(rows) + " rows");
  }
  return Tensor3(m, rows, n_slices);
}

/// Block (i, j) of the result is slice (i - j) mod n. Only tests and the
/// bcirc-defined oracles materialize this; it is O(n^2 rows cols) memory.
inline Matrix bcirc(const Tensor3& t) {
  const Index n = t.n_slices();
  const Index r = t.rows();
  const Index c = t.cols();
  Matrix m(n * r, n * c);
  for (Index j = 0; j < n; ++j) {
    for (Index i = 0; i < n; ++i) {
      m.block(i * r, j * c, r, c) = t.slice(((i - j) % n + n) % n);
    }
  }
  return m;
}

// -- JSON dump format ---------------------------------------------------------
//
// { "n_rows": R, "n_cols": C, "n_slices": S, "symmetrized": bool,
//   "slices": [ slice_0_rows..., ... ] }  with slices[k][i][j].

inline nlohmann::json to_json(const Tensor3& t) {
  nlohmann::json slices = nlohmann::json::array();
  for (Index k = 0; k < t.n_slices(); ++k) {
    nlohmann::json rows = nlohmann::json::array();
    for (Index i = 0; i < t.rows(); ++i) {
      nlohmann::json row = nlohmann::json::array();
      for (Index j = 0; j < t.cols(); ++j) row.push_back(t(i, j, k));
      rows.push_back(std::move(row));
    }
    slices.push_back(std::move(rows));
  }
  return {{"n_rows", t.rows()},
          {"n_cols", t.cols()},
          {"n_slices", t.n_slices()},
          {"symmetrized", t.symmetrized()},
          {"slices", std::move(slices)}};
}

inline Tensor3 tensor_from_json(const nlohmann::json& j) {
  const Index r = j.at("n_rows").get<Index>();
  const Index c = j.at("n_cols").get<Index>();
  const Index n = j.at("n_slices").get<Index>();
  const auto& slices = j.at("slices");
  if (static_cast<Index>(slices.size()) != n) throw DimensionError("tensor json: slice count mismatch");
  Tensor3 t(r, c, n);
  for (Index k = 0; k < n; ++k) {
    const auto& rows = slices.at(k);
    if (static_cast<Index>(rows.size()) != r) throw DimensionError("tensor json: row count mismatch");
    for (Index i = 0; i < r; ++i) {
      const auto& row = rows.at(i);
      if (static_cast<Index>(row.size()) != c) throw DimensionError("tensor json: column count mismatch");
      for (Index j2 = 0; j2 < c; ++j2) t(i, j2, k) = row.at(j2).get<double>();
    }
  }
  t.set_symmetrized(j.value("symmetrized", false));
  return t;
}

}  // namespace thyper
