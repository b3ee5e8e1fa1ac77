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
 * @file witness.hpp
 *
 * Two hypergraphs with the same clique expansion but different adjacency
 * tensors: the tensor keeps which nodes share a hyperedge as a group, the
 * clique expansion only keeps pairs.
 */

#pragma once

#include <json.hpp>

#include "thyper/builder.hpp"

namespace thyper {

struct InjectivityReport {
  Matrix clique_a;
  Matrix clique_b;
  int order = 0;              // common tensor order used for the comparison
  double tensor_max_abs_diff = 0.0;
  bool cliques_equal() const { return clique_a == clique_b; }
  bool holds() const { return cliques_equal() && tensor_max_abs_diff > 0.0; }
};

/// Builds both adjacency tensors at the larger of the two orders.
inline InjectivityReport compare_expansions(const Hypergraph& a, const Hypergraph& b) {
  if (a.num_nodes() != b.num_nodes()) throw std::invalid_argument("compare_expansions: node counts differ");
  InjectivityReport r;
  r.clique_a = clique_expansion(a);
  r.clique_b = clique_expansion(b);
  r.order = std::max({2, a.order(), b.order()});
  r.tensor_max_abs_diff =
      max_abs_diff(flatten_to_slices(build_adjacency(a, r.order)), flatten_to_slices(build_adjacency(b, r.order)));
  return r;
}

/// The triangle as one hyperedge versus three pairwise edges.
inline std::pair<Hypergraph, Hypergraph> triangle_witness() {
  return {Hypergraph(3, {{0, 1, 2}}), Hypergraph(3, {{0, 1}, {1, 2}, {0, 2}})};
}

inline nlohmann::json to_json(const InjectivityReport& r) {
  auto mat = [](const Matrix& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (Index i = 0; i < m.rows(); ++i) {
      std::vector<double> row(m.cols());
      for (Index j = 0; j < m.cols(); ++j) row[static_cast<std::size_t>(j)] = m(i, j);
      rows.push_back(row);
    }
    return rows;
  };
  return {{"clique_expansions_equal", r.cliques_equal()},
          {"adjacency_tensors_differ", r.tensor_max_abs_diff > 0.0},
          {"tensor_max_abs_diff", r.tensor_max_abs_diff},
          {"order", r.order},
          {"clique_a", mat(r.clique_a)},
          {"clique_b", mat(r.clique_b)},
          {"verdict", r.holds() ? "witness holds" : "witness FAILED"}};
}

}  // namespace thyper
