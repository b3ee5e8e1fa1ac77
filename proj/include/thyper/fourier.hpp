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
 * @file fourier.hpp
 *
 * Real DFT along the slice index of a Tensor3, backed by FFTW. Only the
 * non-redundant half spectrum (n / 2 + 1 bins) is kept; the inverse maps it
 * back to a real tensor.
 */

#pragma once

#include <fftw3.h>

#include <complex>
#include <memory>
#include <mutex>
#include <vector>

#include "thyper/tensor.hpp"

namespace thyper {

using ComplexMatrix = Eigen::MatrixXcd;

/// Frequency-domain view of a tensor: bins[f] is the rows x cols matrix
/// sum_k slice_k * exp(-2 pi i f k / n).
struct SliceSpectrum {
  Index rows = 0;
  Index cols = 0;
  Index n_slices = 1;
  std::vector<ComplexMatrix> bins;

  Index n_bins() const noexcept { return static_cast<Index>(bins.size()); }
};

namespace detail {

// The FFTW planner is not re-entrant; execution on distinct arrays is.
inline std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftwDeleter {
  void operator()(void* p) const noexcept { fftw_free(p); }
};

template <typename T>
using FftwBuffer = std::unique_ptr<T[], FftwDeleter>;

template <typename T>
FftwBuffer<T> fftw_buffer(std::size_t n) {
  auto* p = static_cast<T*>(fftw_malloc(sizeof(T) * (n ? n : 1)));
  if (!p) throw std::bad_alloc();
  return FftwBuffer<T>(p);
}

class FftwPlan {
 public:
  explicit FftwPlan(fftw_plan p) : plan_(p) {
    if (!plan_) throw InternalError("FFTW failed to create a plan");
  }
  FftwPlan(const FftwPlan&) = delete;
  FftwPlan& operator=(const FftwPlan&) = delete;
  ~FftwPlan() {
    std::lock_guard lock(fftw_planner_mutex());
    fftw_destroy_plan(plan_);
  }
  void execute() const { fftw_execute(plan_); }

 private:
  fftw_plan plan_;
};

inline Index half_spectrum_size(Index n) { return n / 2 + 1; }

}  // namespace detail

inline SliceSpectrum forward_spectrum(const Tensor3& t) {
  const Index n = t.n_slices();
  const Index r = t.rows();
  const Index c = t.cols();
  const Index h = detail::half_spectrum_size(n);
  SliceSpectrum s{r, c, n, std::vector<ComplexMatrix>(static_cast<std::size_t>(h), ComplexMatrix::Zero(r, c))};
  const Index entries = r * c;
  if (entries == 0) return s;

  // Transform e of slice k sits at in[k * entries + e]; bin f of the output
  // is then one contiguous column-major rows x cols block.
  auto in = detail::fftw_buffer<double>(static_cast<std::size_t>(entries * n));
  auto out = detail::fftw_buffer<fftw_complex>(static_cast<std::size_t>(entries * h));
  for (Index k = 0; k < n; ++k) {
    Eigen::Map<Matrix>(in.get() + k * entries, r, c) = t.slice(k);
  }
  std::unique_ptr<detail::FftwPlan> plan;
  {
    std::lock_guard lock(detail::fftw_planner_mutex());
    int len = static_cast<int>(n);
    const int e = static_cast<int>(entries);
    plan = std::make_unique<detail::FftwPlan>(
        fftw_plan_many_dft_r2c(1, &len, e, in.get(), nullptr, e, 1, out.get(), nullptr, e, 1, FFTW_ESTIMATE));
  }
  plan->execute();
  const auto* z = reinterpret_cast<const std::complex<double>*>(out.get());
  for (Index f = 0; f < h; ++f) s.bins[static_cast<std::size_t>(f)] = Eigen::Map<const ComplexMatrix>(z + f * entries, r, c);
  return s;
}

/// Bins that must be real for a real inverse (f = 0, and f = n/2 for even
/// n) are checked against `imag_tol` relative to the spectrum scale.
inline Tensor3 inverse_spectrum(const SliceSpectrum& s, double imag_tol = 1e-9) {
  const Index n = s.n_slices;
  const Index r = s.rows;
  const Index c = s.cols;
  const Index h = detail::half_spectrum_size(n);
  if (s.n_bins() != h) throw DimensionError("inverse_spectrum: expected " + std::to_string(h) + " bins");
  Tensor3 t(r, c, n);
  const Index entries = r * c;
  if (entries == 0) return t;

  double scale = 0.0;
  for (const auto& b : s.bins) scale = std::max(scale, b.cwiseAbs().maxCoeff());
  auto check_real = [&](Index f) {
    const double im = s.bins[static_cast<std::size_t>(f)].imag().cwiseAbs().maxCoeff();
    if (im > imag_tol * std::max(1.0, scale)) {
      throw InternalError("inverse_spectrum: imaginary residue " + std::to_string(im) + " in bin " +
                          std::to_string(f));
    }
  };
  check_real(0);
  if (n % 2 == 0) check_real(n / 2);

  auto in = detail::fftw_buffer<fftw_complex>(static_cast<std::size_t>(entries * h));
  auto out = detail::fftw_buffer<double>(static_cast<std::size_t>(entries * n));
  auto* z = reinterpret_cast<std::complex<double>*>(in.get());
  for (Index f = 0; f < h; ++f) Eigen::Map<ComplexMatrix>(z + f * entries, r, c) = s.bins[static_cast<std::size_t>(f)];
  std::unique_ptr<detail::FftwPlan> plan;
  {
    std::lock_guard lock(detail::fftw_planner_mutex());
    int len = static_cast<int>(n);
    const int e = static_cast<int>(entries);
    plan = std::make_unique<detail::FftwPlan>(
        fftw_plan_many_dft_c2r(1, &len, e, in.get(), nullptr, e, 1, out.get(), nullptr, e, 1, FFTW_ESTIMATE));
  }
  plan->execute();
  const double inv_n = 1.0 / static_cast<double>(n);
  for (Index k = 0; k < n; ++k) t.slice(k) = inv_n * Eigen::Map<const Matrix>(out.get() + k * entries, r, c);
  return t;
}

}  // namespace thyper
