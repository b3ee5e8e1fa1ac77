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
 * @file builder.hpp
 *
 * Normalized adjacency tensor and signal tensor of an order-M hypergraph,
 * their flattening to third order, slice-reflection symmetrization, and the
 * Laplacian tensor.
 *
 * For a hyperedge e of cardinality c, every length-M index sequence over
 * e's nodes in which each node of e appears at least once gets weight
 * (1 / d(p1)) * c / alpha(c, M), where alpha(c, M) counts those sequences.
 * Weights from different hyperedges landing on the same index add up.
 */

#pragma once

#include <cstdint>
#include <map>
#include <span>

#include "thyper/hypergraph.hpp"
#include "thyper/talg.hpp"

namespace thyper {

namespace detail {

inline std::uint64_t checked_mul(std::uint64_t a, std::uint64_t b) {
  if (a != 0 && b > std::numeric_limits<std::uint64_t>::max() / a) {
    throw std::overflow_error("multinomial_alpha: result exceeds 64 bits");
  }
  return a * b;
}

inline std::uint64_t binomial(std::uint64_t n, std::uint64_t k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  std::uint64_t r = 1;
  for (std::uint64_t i = 1; i <= k; ++i) r = checked_mul(r, n - k + i) / i;
  return r;
}

// Sum over compositions (r_1..r_parts) of `total` with r_i >= 1 of the
// multinomial coefficient, built up as a product of binomials.
inline std::uint64_t composition_sum(int parts, int total) {
  if (parts == 0) return total == 0 ? 1 : 0;
  std::uint64_t sum = 0;
  for (int r = 1; r <= total - (parts - 1); ++r) {
    const std::uint64_t rest = composition_sum(parts - 1, total - r);
    if (rest == 0) continue;
    const std::uint64_t term = checked_mul(binomial(static_cast<std::uint64_t>(total), static_cast<std::uint64_t>(r)), rest);
    if (sum > std::numeric_limits<std::uint64_t>::max() - term) throw std::overflow_error("multinomial_alpha: overflow");
    sum += term;
  }
  return sum;
}

}  // namespace detail

/// Sum of multinomial coefficients M! / (r_1! ... r_c!) over r_i >= 1 with
/// sum r_i = M, i.e. the number of length-M sequences covering c symbols.
inline std::uint64_t multinomial_alpha(int c, int m) {
  if (c < 1 || m < 1 || c > m) {
    throw std::invalid_argument("multinomial_alpha: need 1 <= c <= M, got c=" + std::to_string(c) +
                                " M=" + std::to_string(m));
  }
  return detail::composition_sum(c, m);
}

// -- adjacency ---------------------------------------------------------------

/// Unsymmetrized order-M adjacency tensor as a sorted sparse map.
struct AdjacencySpec {
  int order = 0;
  Index dim = 0;
  std::map<std::vector<NodeId>, double> entries;

  /// Sum over p2..pM of entry (v, p2, ..., pM) for every v.
  std::vector<double> row_sums() const {
    std::vector<double> s(static_cast<std::size_t>(dim), 0.0);
    for (const auto& [key, w] : entries) s[static_cast<std::size_t>(key.front())] += w;
    return s;
  }
};

inline AdjacencySpec build_adjacency(const Hypergraph& g, int order) {
  if (order < 2) throw std::invalid_argument("build_adjacency: order must be >= 2, got " + std::to_string(order));
  if (order < g.order()) {
    throw std::invalid_argument("build_adjacency: order " + std::to_string(order) + " below hypergraph order " +
                                std::to_string(g.order()));
  }
  const DegreeVector d = degrees(g);
  AdjacencySpec a{order, g.num_nodes(), {}};
  const auto m = static_cast<std::size_t>(order);

  std::vector<int> pos(m);
  std::vector<NodeId> key(m);
  std::vector<int> uses;
  for (const auto& e : g.edges()) {
    const int c = static_cast<int>(e.size());
    const double scale = static_cast<double>(c) / static_cast<double>(multinomial_alpha(c, order));
    uses.assign(static_cast<std::size_t>(c), 0);
    int covered = 0;
    // Depth-first over positions; prune once the remaining positions cannot
    // cover the unused nodes.
    auto recurse = [&](auto&& self, std::size_t depth) -> void {
      if (depth == m) {
        if (covered != c) return;
        for (std::size_t i = 0; i < m; ++i) key[i] = e[static_cast<std::size_t>(pos[i])];
        a.entries[key] += scale / static_cast<double>(d[static_cast<std::size_t>(key.front())]);
        return;
      }
      if (static_cast<int>(m - depth) < c - covered) return;
      for (int s = 0; s < c; ++s) {
        pos[depth] = s;
        if (uses[static_cast<std::size_t>(s)]++ == 0) ++covered;
        self(self, depth + 1);
        if (--uses[static_cast<std::size_t>(s)] == 0) --covered;
      }
    };
    recurse(recurse, 0);
  }
  return a;
}

inline AdjacencySpec build_adjacency(const Hypergraph& g) { return build_adjacency(g, std::max(2, g.order())); }

/// max |row_sum(v) - 1| over nodes with d(v) > 0; rows of isolated nodes
/// contribute |row_sum(v)|.
inline double max_row_sum_deviation(const AdjacencySpec& a, const DegreeVector& d) {
  const auto sums = a.row_sums();
  double dev = 0.0;
  for (std::size_t v = 0; v < sums.size(); ++v) dev = std::max(dev, std::abs(sums[v] - (d[v] > 0 ? 1.0 : 0.0)));
  return dev;
}

// -- flattening of the trailing M-2 indices ------------------------------------

inline Index flattened_slice_count(Index n, int order) {
  Index count = 1;
  for (int i = 2; i < order; ++i) {
    if (count > std::numeric_limits<Index>::max() / std::max<Index>(n, 1)) {
      throw std::length_error("flattened slice count overflows");
    }
    count *= n;
  }
  return count;
}

/// Row-major: p3 is the most significant digit.
inline Index slice_index(std::span<const NodeId> tail, Index n) {
  Index s = 0;
  for (NodeId p : tail) s = s * n + p;
  return s;
}

inline std::vector<NodeId> slice_tail(Index s, Index n, int order) {
  std::vector<NodeId> tail(static_cast<std::size_t>(std::max(0, order - 2)));
  for (auto it = tail.rbegin(); it != tail.rend(); ++it) {
    *it = static_cast<NodeId>(s % n);
    s /= n;
  }
  return tail;
}

inline Tensor3 flatten_to_slices(const AdjacencySpec& a) {
  Tensor3 t(a.dim, a.dim, flattened_slice_count(a.dim, a.order));
  for (const auto& [key, w] : a.entries) {
    const std::span<const NodeId> tail(key.data() + 2, key.size() - 2);
    t(key[0], key[1], slice_index(tail, a.dim)) = w;
  }
  return t;
}

/// Sum of all flattened slices (equivalently of all symmetrized slices).
inline Matrix adjacency_slice_sum(const AdjacencySpec& a) {
  Matrix s = Matrix::Zero(a.dim, a.dim);
  for (const auto& [key, w] : a.entries) s(key[0], key[1]) += w;
  return s;
}

// -- signal tensor -------------------------------------------------------------

/// N x D x N^(M-2): entry (p1, d, (p3..pM)) = x(p1, d) * prod_i x(p_i, d).
struct SignalSpec {
  int order = 0;
  Tensor3 data;

  Index dim() const noexcept { return data.rows(); }
  Index features() const noexcept { return data.cols(); }
};

inline SignalSpec build_signal(const Matrix& x, int order) {
  if (order < 2) throw std::invalid_argument("build_signal: order must be >= 2");
  const Index n = x.rows();
  const Index slices = flattened_slice_count(n, order);
  SignalSpec s{order, Tensor3(n, x.cols(), slices)};
  Vector w(x.cols());
  for (Index k = 0; k < slices; ++k) {
    w.setOnes();
    for (NodeId p : slice_tail(k, n, order)) w.array() *= x.row(p).transpose().array();
    s.data.slice(k) = x * w.asDiagonal();
  }
  return s;
}

inline const Tensor3& flatten_to_slices(const SignalSpec& s) { return s.data; }

// -- symmetrization and Laplacian ----------------------------------------------

/// 1/2 [0, S_1, ..., S_n, S_n, ..., S_1]; 2n + 1 slices.
inline Tensor3 symmetrize(const Tensor3& t) {
  const Index nf = t.n_slices();
  Tensor3 out(t.rows(), t.cols(), 2 * nf + 1);
  for (Index k = 0; k < nf; ++k) {
    out.slice(1 + k) = 0.5 * t.slice(k);
    out.slice(2 * nf - k) = 0.5 * t.slice(k);
  }
  out.set_symmetrized(true);
  return out;
}

inline Tensor3 laplacian(const Tensor3& a_s) {
  if (a_s.rows() != a_s.cols()) throw DimensionError("laplacian: tensor must be square, got " + a_s.shape());
  Tensor3 l = identity_tensor(a_s.rows(), a_s.n_slices());
  l -= a_s;
  return l;
}

/// Symmetrized, flattened adjacency tensor A_s.
inline Tensor3 build_shift_tensor(const Hypergraph& g, int order) {
  return symmetrize(flatten_to_slices(build_adjacency(g, order)));
}

inline Tensor3 build_signal_tensor(const Matrix& x, int order) { return symmetrize(build_signal(x, order).data); }

/// Row-normalized clique expansion with self loops, D^-1 (C + I): the
/// matrix shift of the clique-expansion baseline.
inline Matrix clique_shift_matrix(const Hypergraph& g) {
  Matrix c = clique_expansion(g);
  c.diagonal().array() += 1.0;
  const Vector rs = c.rowwise().sum();
  return rs.cwiseInverse().asDiagonal() * c;
}

}  // namespace thyper
