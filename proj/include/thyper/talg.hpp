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
 * @file talg.hpp
 *
 * t-product algebra on third-order tensors: result slice k of a * b is
 * sum_j a_j b_{(k - j) mod n}, i.e. fold(bcirc(a) unfold(b)). The direct
 * path evaluates that convolution; the Fourier path multiplies per
 * frequency, where bcirc(a) is block diagonal.
 */

#pragma once

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include <optional>

#include "thyper/fourier.hpp"

namespace thyper {

enum class ProductPath { Auto, Direct, Fourier };

/// Auto dispatch uses the Fourier path from this many slices on.
inline constexpr Index kFourierThreshold = 8;

namespace detail {

inline void require_product_shapes(const Tensor3& a, const Tensor3& b, const char* who) {
  if (a.cols() != b.rows() || a.n_slices() != b.n_slices()) {
    throw DimensionError(std::string(who) + ": cannot multiply " + a.shape() + " by " + b.shape());
  }
}

inline bool resolve_fourier(ProductPath path, Index n_slices) {
  switch (path) {
    case ProductPath::Direct: return false;
    case ProductPath::Fourier: return true;
    case ProductPath::Auto: break;
  }
  return n_slices >= kFourierThreshold;
}

}  // namespace detail

inline Tensor3 t_product_direct(const Tensor3& a, const Tensor3& b) {
  detail::require_product_shapes(a, b, "t_product");
  const Index n = a.n_slices();
  const Index rows = a.rows();
  const Index inner = a.cols();
  const Index cols = b.cols();

  // b laid out as inner x (n * cols) so that each a-slice hits every
  // b-slice in one product.
  Matrix wide_b(inner, n * cols);
  for (Index m = 0; m < n; ++m) wide_b.middleCols(m * cols, cols) = b.slice(m);

  Matrix wide_c = Matrix::Zero(rows, n * cols);
  Matrix partial(rows, n * cols);
  for (Index j = 0; j < n; ++j) {
    const auto aj = a.slice(j);
    if (aj.size() == 0 || aj.cwiseAbs().maxCoeff() == 0.0) continue;
    partial.noalias() = aj * wide_b;
    // b-slice m lands on result slice (j + m) mod n.
    wide_c.middleCols(j * cols, (n - j) * cols) += partial.leftCols((n - j) * cols);
    if (j > 0) wide_c.leftCols(j * cols) += partial.rightCols(j * cols);
  }

  Tensor3 c(rows, cols, n);
  for (Index k = 0; k < n; ++k) c.slice(k) = wide_c.middleCols(k * cols, cols);
  return c;
}

inline Tensor3 t_product_fft(const Tensor3& a, const Tensor3& b) {
  detail::require_product_shapes(a, b, "t_product_fft");
  const SliceSpectrum sa = forward_spectrum(a);
  SliceSpectrum sb = forward_spectrum(b);
  SliceSpectrum sc{a.rows(), b.cols(), a.n_slices(), {}};
  sc.bins.reserve(sa.bins.size());
  for (std::size_t f = 0; f < sa.bins.size(); ++f) sc.bins.emplace_back(sa.bins[f] * sb.bins[f]);
  return inverse_spectrum(sc);
}

inline Tensor3 t_product(const Tensor3& a, const Tensor3& b, ProductPath path = ProductPath::Auto) {
  return detail::resolve_fourier(path, a.n_slices()) ? t_product_fft(a, b) : t_product_direct(a, b);
}

/// Transposes every slice, keeps slice 0 and reverses slices 1..n-1.
inline Tensor3 t_transpose(const Tensor3& t) {
  const Index n = t.n_slices();
  Tensor3 out(t.cols(), t.rows(), n);
  for (Index k = 0; k < n; ++k) out.slice(k) = t.slice((n - k) % n).transpose();
  out.set_symmetrized(t.symmetrized());
  return out;
}

inline Tensor3 identity_tensor(Index n, Index n_slices) {
  Tensor3 t(n, n, n_slices);
  t.slice(0).setIdentity();
  return t;
}

inline SliceSpectrum transposed_spectrum(const SliceSpectrum& s) {
  SliceSpectrum out{s.cols, s.rows, s.n_slices, {}};
  out.bins.reserve(s.bins.size());
  for (const auto& b : s.bins) out.bins.emplace_back(b.adjoint());
  return out;
}

/// Minimum reciprocal condition estimate accepted by t_solve.
inline constexpr double kSingularRcond = 1e-13;

/// Returns y with t_product(a, y) = x, solving one system per frequency.
inline Tensor3 t_solve(const Tensor3& a, const Tensor3& x) {
  if (a.rows() != a.cols()) throw DimensionError("t_solve: operator must be square, got " + a.shape());
  detail::require_product_shapes(a, x, "t_solve");
  const SliceSpectrum sa = forward_spectrum(a);
  const SliceSpectrum sx = forward_spectrum(x);
  SliceSpectrum sy{x.rows(), x.cols(), x.n_slices(), {}};
  sy.bins.reserve(sa.bins.size());
  for (std::size_t f = 0; f < sa.bins.size(); ++f) {
    Eigen::PartialPivLU<ComplexMatrix> lu(sa.bins[f]);
    const double rcond = a.rows() ? lu.rcond() : 1.0;
    if (!(rcond >= kSingularRcond)) throw SingularError(f, rcond);
    sy.bins.emplace_back(lu.solve(sx.bins[f]));
  }
  return inverse_spectrum(sy);
}

/// max over frequencies of the row-sum (infinity) norm of a's spectrum.
/// Bounds the per-frequency spectral radius, and for nonnegative a equals
/// the infinity norm of bcirc(a).
inline double frequency_norm_bound(const Tensor3& a) {
  double bound = 0.0;
  for (const auto& bin : forward_spectrum(a).bins) {
    if (bin.size()) bound = std::max(bound, bin.cwiseAbs().rowwise().sum().maxCoeff());
  }
  return bound;
}

inline double spectral_radius(const Tensor3& a) {
  if (a.rows() != a.cols()) throw DimensionError("spectral_radius: operator must be square");
  double rho = 0.0;
  for (const auto& bin : forward_spectrum(a).bins) {
    if (!bin.size()) continue;
    Eigen::ComplexEigenSolver<ComplexMatrix> es(bin, false);
    rho = std::max(rho, es.eigenvalues().cwiseAbs().maxCoeff());
  }
  return rho;
}

/**
 * A fixed left operand applied to many right operands, e.g. a shift
 * tensor inside an iteration. Caches whichever representation the chosen
 * path needs.
 */
class ShiftOperator {
 public:
  ShiftOperator() = default;
  explicit ShiftOperator(Tensor3 a, ProductPath path = ProductPath::Auto)
      : a_(std::move(a)), fourier_(detail::resolve_fourier(path, a_.n_slices())) {
    if (a_.rows() != a_.cols()) throw DimensionError("ShiftOperator: operator must be square, got " + a_.shape());
    if (fourier_) {
      spectrum_ = forward_spectrum(a_);
      spectrum_t_ = transposed_spectrum(*spectrum_);
    } else {
      a_t_ = t_transpose(a_);
    }
  }

  const Tensor3& tensor() const noexcept { return a_; }
  Index dim() const noexcept { return a_.rows(); }
  Index n_slices() const noexcept { return a_.n_slices(); }

  Tensor3 apply(const Tensor3& b) const { return fourier_ ? apply_spectrum(*spectrum_, b) : t_product_direct(a_, b); }

  /// t_transpose(a) * b, the adjoint of apply.
  Tensor3 apply_transpose(const Tensor3& b) const {
    return fourier_ ? apply_spectrum(*spectrum_t_, b) : t_product_direct(*a_t_, b);
  }

 private:
  Tensor3 apply_spectrum(const SliceSpectrum& sa, const Tensor3& b) const {
    detail::require_product_shapes(a_, b, "ShiftOperator");
    const SliceSpectrum sb = forward_spectrum(b);
    SliceSpectrum sc{a_.rows(), b.cols(), b.n_slices(), {}};
    sc.bins.reserve(sb.bins.size());
    for (std::size_t f = 0; f < sb.bins.size(); ++f) sc.bins.emplace_back(sa.bins[f] * sb.bins[f]);
    return inverse_spectrum(sc);
  }

  Tensor3 a_;
  bool fourier_ = false;
  std::optional<Tensor3> a_t_;
  std::optional<SliceSpectrum> spectrum_;
  std::optional<SliceSpectrum> spectrum_t_;
};

}  // namespace thyper
