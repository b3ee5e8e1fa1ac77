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
 * @file denoise.hpp
 *
 * Hypergraph signal denoising: the tube-valued objective
 *
 *   J(Y) = (Y - X)^T * (Y - X) + b Y^T * L * Y,   L = I - A_s,
 *
 * its leading-block gradient, the one-step update that coincides with
 * signal shifting, and the K-step iteration
 *
 *   Y_k = (1 - 2b - 2bc) Y_{k-1} + 2b X + 2bc A_s * Y_{k-1},   Y_0 = X.
 *
 * The iteration is a gradient step of size b on the objective whose
 * regularization weight is c, so it converges to fixed_point(X, A_s, c).
 */

#pragma once

#include <optional>

#include "thyper/builder.hpp"

namespace thyper {

struct DenoiseConfig {
  double b = 0.5;
  double c = 0.2;
  int iterations = 10;
  double tol = 1e-10;
  /// When set, b = alpha / 2 and c = (1 - alpha) / alpha, which turns the
  /// iteration into Y_k = alpha X + (1 - alpha) A_s * Y_{k-1}.
  std::optional<double> alpha;

  /// Validated copy with alpha folded into (b, c).
  DenoiseConfig resolved() const {
    DenoiseConfig r = *this;
    if (alpha) {
      const double a = *alpha;
      if (!(a > 0.0 && a <= 1.0)) throw std::invalid_argument("DenoiseConfig: alpha must be in (0, 1]");
      r.b = a / 2.0;
      r.c = (1.0 - a) / a;
    }
    if (!(r.b > 0.0)) throw std::invalid_argument("DenoiseConfig: b must be positive");
    if (!(r.c >= 0.0)) throw std::invalid_argument("DenoiseConfig: c must be nonnegative");
    if (r.iterations < 0) throw std::invalid_argument("DenoiseConfig: iterations must be nonnegative");
    if (!(r.tol > 0.0)) throw std::invalid_argument("DenoiseConfig: tol must be positive");
    return r;
  }
};

/// |1 - 2b - 2bc| + 2bc; the iteration contracts (in max-abs) when < 1
/// because bcirc(A_s) has unit row sums.
inline double contraction_bound(double b, double c) { return std::abs(1.0 - 2.0 * b - 2.0 * b * c) + 2.0 * b * c; }

namespace detail {

inline void require_signal_pair(const Tensor3& y, const Tensor3& x, const Tensor3& l, const char* who) {
  if (!y.same_shape(x)) throw DimensionError(std::string(who) + ": y " + y.shape() + " vs x " + x.shape());
  if (l.rows() != y.rows() || l.cols() != y.rows() || l.n_slices() != y.n_slices()) {
    throw DimensionError(std::string(who) + ": Laplacian " + l.shape() + " does not act on " + y.shape());
  }
}

inline double frobenius_inner(const Tensor3& a, const Tensor3& b) {
  return a.unfolded().cwiseProduct(b.unfolded()).sum();
}

}  // namespace detail

/// The 1 x 1 x N_s tube J; single-feature signals only.
inline Tube objective(const Tensor3& y, const Tensor3& x, const Tensor3& l, double b) {
  detail::require_signal_pair(y, x, l, "objective");
  if (y.cols() != 1) throw DimensionError("objective: expects one feature column, got " + y.shape());
  const Tensor3 r = y - x;
  Tensor3 j = t_product(t_transpose(r), r);
  j += b * t_product(t_transpose(y), t_product(l, y));
  return Tube::from_tensor(j);
}

/**
 * First tube entry of J, ||Y - X||_F^2 + w <Y, L * Y>, summed over feature
 * columns. Reported as the iteration's (non-normative) scalar monitor.
 */
inline double leading_monitor(const Tensor3& y, const Tensor3& x, const Tensor3& l, double w) {
  detail::require_signal_pair(y, x, l, "leading_monitor");
  const Tensor3 r = y - x;
  return detail::frobenius_inner(r, r) + w * detail::frobenius_inner(y, t_product(l, y));
}

/// First block column of dJ/dY: 2 (Y - X) + 2b L * Y.
inline Tensor3 gradient_leading(const Tensor3& y, const Tensor3& x, const Tensor3& l, double b) {
  detail::require_signal_pair(y, x, l, "gradient_leading");
  Tensor3 g = 2.0 * (y - x);
  g += (2.0 * b) * t_product(l, y);
  return g;
}

/// Exact gradient of leading_monitor: 2 (Y - X) + b (L + L^T) * Y. Equals
/// gradient_leading when L is t-symmetric.
inline Tensor3 leading_monitor_gradient(const Tensor3& y, const Tensor3& x, const Tensor3& l, double b) {
  detail::require_signal_pair(y, x, l, "leading_monitor_gradient");
  Tensor3 g = 2.0 * (y - x);
  g += b * (t_product(l, y) + t_product(t_transpose(l), y));
  return g;
}

/// (1 - 2bc) X + 2bc A_s * X. With c = 1 / (2b) this is A_s * X.
inline Tensor3 one_step(const Tensor3& x, const Tensor3& a_s, double b, double c) {
  const double w = 2.0 * b * c;
  Tensor3 y = t_product(a_s, x);
  if (w == 1.0) return y;
  y *= w;
  y += (1.0 - w) * x;
  return y;
}

struct DenoiseStep {
  int step = 0;
  double monitor = 0.0;
  double delta = 0.0;  // max-abs change from the previous iterate
};

struct DenoiseResult {
  Tensor3 signal;
  std::vector<DenoiseStep> trace;  // trace[0] is the starting point Y_0 = X
  bool converged = false;          // stopped on tol before the iteration budget
};

inline DenoiseResult iterate(const Tensor3& x, const ShiftOperator& a_s, const DenoiseConfig& config) {
  const DenoiseConfig cfg = config.resolved();
  if (a_s.dim() != x.rows() || a_s.n_slices() != x.n_slices()) {
    throw DimensionError("iterate: operator of size " + std::to_string(a_s.dim()) + " does not act on " + x.shape());
  }
  const double keep = 1.0 - 2.0 * cfg.b - 2.0 * cfg.b * cfg.c;
  const double pull = 2.0 * cfg.b;
  const double shift = 2.0 * cfg.b * cfg.c;
  const double limit = 1e6 * std::max(x.max_abs(), std::numeric_limits<double>::min());

  // monitor(Y) = ||Y - X||^2 + c (<Y, Y> - <Y, A_s * Y>), reusing A_s * Y.
  auto monitor = [&](const Tensor3& y, const Tensor3& ay) {
    const Tensor3 r = y - x;
    return detail::frobenius_inner(r, r) + cfg.c * (detail::frobenius_inner(y, y) - detail::frobenius_inner(y, ay));
  };

  DenoiseResult out;
  out.signal = x;
  Tensor3 ay = a_s.apply(out.signal);
  out.trace.push_back({0, monitor(out.signal, ay), 0.0});
  for (int k = 1; k <= cfg.iterations; ++k) {
    Tensor3 next = keep * out.signal;
    next += pull * x;
    next += shift * ay;
    const double delta = max_abs_diff(next, out.signal);
    out.signal = std::move(next);
    if (!(out.signal.max_abs() <= limit)) {
      throw DivergenceError("iterate: diverged at step " + std::to_string(k) + "; contraction bound |1-2b-2bc|+2bc = " +
                            std::to_string(contraction_bound(cfg.b, cfg.c)));
    }
    ay = a_s.apply(out.signal);
    out.trace.push_back({k, monitor(out.signal, ay), delta});
    if (delta < cfg.tol) {
      out.converged = true;
      break;
    }
  }
  return out;
}

inline DenoiseResult iterate(const Tensor3& x, const Tensor3& a_s, const DenoiseConfig& config) {
  return iterate(x, ShiftOperator(a_s), config);
}

/// Solves (I + w L) * Y = X, the stationary point of the objective with
/// regularization weight w.
inline Tensor3 fixed_point(const Tensor3& x, const Tensor3& a_s, double w) {
  if (!(w > 0.0)) throw std::invalid_argument("fixed_point: weight must be positive");
  Tensor3 op = identity_tensor(a_s.rows(), a_s.n_slices());
  op += w * laplacian(a_s);
  try {
    return t_solve(op, x);
  } catch (const SingularError& e) {
    throw InternalError(std::string("fixed_point: I + wL is singular (") + e.what() + ")");
  }
}

}  // namespace thyper
