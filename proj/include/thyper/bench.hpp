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
 * @file bench.hpp
 *
 * Direct versus Fourier t-product timing. Each size multiplies an
 * N x N x (2N + 1) operator by an N x cols x (2N + 1) signal, checks the
 * two paths agree, and reports min and median wall time over repeats.
 */

#pragma once

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <string>
#include <vector>

#include "thyper/rng.hpp"
#include "thyper/talg.hpp"

namespace thyper {

struct BenchOptions {
  std::vector<Index> sizes{16, 32, 64, 128};
  Index cols = 8;
  int repeat = 3;
  std::uint64_t seed = 0;
  double agreement_tol = 1e-10;
};

struct BenchRow {
  Index n = 0;
  Index n_slices = 0;
  std::string path;
  int repeats = 0;
  double min_ms = 0.0;
  double median_ms = 0.0;
  double max_abs_diff = 0.0;  // direct vs Fourier result
};

namespace detail {

inline Tensor3 uniform_tensor(Rng& rng, Index r, Index c, Index n) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Tensor3 t(r, c, n);
  for (Index i = 0; i < t.unfolded().size(); ++i) t.unfolded().data()[i] = u(rng);
  return t;
}

template <class F>
std::vector<double> time_ms(int repeat, F&& f) {
  std::vector<double> out;
  for (int i = 0; i < repeat; ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    f();
    out.push_back(std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count());
  }
  std::sort(out.begin(), out.end());
  return out;
}

inline double median_sorted(const std::vector<double>& v) {
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

}  // namespace detail

/// Two rows per size (direct, fourier). Throws InternalError if the paths
/// disagree beyond opt.agreement_tol.
inline std::vector<BenchRow> bench_tproduct(const BenchOptions& opt) {
  if (opt.repeat < 1 || opt.cols < 1) throw std::invalid_argument("bench: repeat and cols must be positive");
  std::vector<BenchRow> rows;
  Rng rng = substream(opt.seed, "bench");
  for (Index n : opt.sizes) {
    if (n < 1) throw std::invalid_argument("bench: sizes must be positive");
    const Index ns = 2 * n + 1;
    const Tensor3 a = detail::uniform_tensor(rng, n, n, ns);
    const Tensor3 b = detail::uniform_tensor(rng, n, opt.cols, ns);
    Tensor3 direct, fourier;
    const auto td = detail::time_ms(opt.repeat, [&] { direct = t_product_direct(a, b); });
    const auto tf = detail::time_ms(opt.repeat, [&] { fourier = t_product_fft(a, b); });
    const double diff = max_abs_diff(direct, fourier);
    if (!(diff <= opt.agreement_tol)) {
      throw InternalError("bench: direct and Fourier results differ by " + std::to_string(diff) + " at N = " +
                          std::to_string(n));
    }
    rows.push_back({n, ns, "direct", opt.repeat, td.front(), detail::median_sorted(td), diff});
    rows.push_back({n, ns, "fourier", opt.repeat, tf.front(), detail::median_sorted(tf), diff});
  }
  return rows;
}

inline std::string bench_csv(const std::vector<BenchRow>& rows) {
  std::string out = "N,n_slices,path,repeats,min_ms,median_ms,max_abs_diff\n";
  char buf[256];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%ld,%ld,%s,%d,%.4f,%.4f,%.3e\n", static_cast<long>(r.n), static_cast<long>(r.n_slices),
                  r.path.c_str(), r.repeats, r.min_ms, r.median_ms, r.max_abs_diff);
    out += buf;
  }
  return out;
}

}  // namespace thyper
