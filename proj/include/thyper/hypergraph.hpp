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

#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <queue>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "thyper/tensor.hpp"

namespace thyper {

using NodeId = std::int32_t;
using Hyperedge = std::vector<NodeId>;  // sorted, unique
using DegreeVector = std::vector<std::int64_t>;
using WarningSink = std::function<void(const std::string&)>;

inline void warn_to_stderr(const std::string& msg) { std::cerr << "warning: " << msg << '\n'; }

/// Node set [0, N) plus an ordered list of hyperedges. Duplicate hyperedges
/// are kept; they raise degrees.
class Hypergraph {
 public:
  Hypergraph() = default;

  /// Edges are normalized to sorted sets. Throws on empty edges and
  /// out-of-range ids.
  Hypergraph(Index num_nodes, std::vector<Hyperedge> edges) : num_nodes_(num_nodes) {
    if (num_nodes <= 0) throw std::invalid_argument("Hypergraph: num_nodes must be positive");
    edges_.reserve(edges.size());
    for (std::size_t e = 0; e < edges.size(); ++e) {
      Hyperedge h = std::move(edges[e]);
      if (h.empty()) throw std::invalid_argument("Hypergraph: hyperedge " + std::to_string(e) + " is empty");
      std::sort(h.begin(), h.end());
      h.erase(std::unique(h.begin(), h.end()), h.end());
      for (NodeId v : h) {
        if (v < 0 || v >= num_nodes) {
          throw std::out_of_range("Hypergraph: node id " + std::to_string(v) + " in hyperedge " +
                                  std::to_string(e) + " outside [0, " + std::to_string(num_nodes) + ")");
        }
      }
      order_ = std::max(order_, static_cast<int>(h.size()));
      edges_.push_back(std::move(h));
    }
  }

  Index num_nodes() const noexcept { return num_nodes_; }
  std::size_t num_edges() const noexcept { return edges_.size(); }
  const std::vector<Hyperedge>& edges() const noexcept { return edges_; }
  const Hyperedge& edge(std::size_t e) const { return edges_.at(e); }

  /// Maximum edge cardinality M.
  int order() const noexcept { return order_; }

  friend bool operator==(const Hypergraph&, const Hypergraph&) = default;

 private:
  Index num_nodes_ = 0;
  std::vector<Hyperedge> edges_;
  int order_ = 0;
};

inline DegreeVector degrees(const Hypergraph& g) {
  DegreeVector d(static_cast<std::size_t>(g.num_nodes()), 0);
  for (const auto& e : g.edges()) {
    for (NodeId v : e) ++d[static_cast<std::size_t>(v)];
  }
  return d;
}

/// 0/1 matrix with (i, j) = 1 iff i != j share a hyperedge.
inline Matrix clique_expansion(const Hypergraph& g) {
  Matrix c = Matrix::Zero(g.num_nodes(), g.num_nodes());
  for (const auto& e : g.edges()) {
    for (NodeId u : e) {
      for (NodeId v : e) {
        if (u != v) c(u, v) = 1.0;
      }
    }
  }
  return c;
}

/// Longest finite shortest-path length over node pairs of the clique
/// expansion (0 when there are no edges between distinct nodes).
inline int max_shortest_path(const Hypergraph& g) {
  const Index n = g.num_nodes();
  std::vector<std::vector<NodeId>> adj(static_cast<std::size_t>(n));
  const Matrix c = clique_expansion(g);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) {
      if (c(i, j) != 0.0) adj[static_cast<std::size_t>(i)].push_back(static_cast<NodeId>(j));
    }
  }
  int best = 0;
  std::vector<int> dist(static_cast<std::size_t>(n));
  for (Index s = 0; s < n; ++s) {
    std::fill(dist.begin(), dist.end(), -1);
    std::queue<NodeId> q;
    dist[static_cast<std::size_t>(s)] = 0;
    q.push(static_cast<NodeId>(s));
    while (!q.empty()) {
      const NodeId u = q.front();
      q.pop();
      for (NodeId v : adj[static_cast<std::size_t>(u)]) {
        if (dist[static_cast<std::size_t>(v)] < 0) {
          dist[static_cast<std::size_t>(v)] = dist[static_cast<std::size_t>(u)] + 1;
          best = std::max(best, dist[static_cast<std::size_t>(v)]);
          q.push(v);
        }
      }
    }
  }
  return best;
}

// -- text format ---------------------------------------------------------------
//
//   N <num_nodes>
//   # comment
//   0 1 2
//   2 3

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline std::int64_t parse_int(std::string_view tok, const std::string& source, std::size_t line) {
  std::int64_t v = 0;
  std::size_t pos = 0;
  try {
    v = std::stoll(std::string(tok), &pos);
  } catch (const std::exception&) {
    throw ParseError(source, line, "expected an integer, got '" + std::string(tok) + "'");
  }
  if (pos != tok.size()) throw ParseError(source, line, "expected an integer, got '" + std::string(tok) + "'");
  return v;
}

inline std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::ios_base::failure("cannot open '" + path + "'");
  return in;
}

}  // namespace detail

inline Hypergraph read_hypergraph(std::istream& in, const std::string& source = "<stream>",
                                  const WarningSink& warn = warn_to_stderr) {
  std::string raw;
  std::size_t line_no = 0;
  std::int64_t num_nodes = -1;
  std::vector<Hyperedge> edges;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string_view line = detail::trim(raw);
    if (line.empty() || line.front() == '#') continue;
    std::istringstream toks{std::string(line)};
    if (num_nodes < 0) {
      std::string key, value, extra;
      toks >> key >> value;
      if (key != "N" || value.empty() || (toks >> extra)) {
        throw ParseError(source, line_no, "expected header 'N <num_nodes>'");
      }
      num_nodes = detail::parse_int(value, source, line_no);
      if (num_nodes <= 0) throw ParseError(source, line_no, "num_nodes must be positive");
      continue;
    }
    Hyperedge e;
    std::string tok;
    while (toks >> tok) {
      const std::int64_t v = detail::parse_int(tok, source, line_no);
      if (v < 0 || v >= num_nodes) {
        throw ParseError(source, line_no,
                         "node id " + std::to_string(v) + " outside [0, " + std::to_string(num_nodes) + ")");
      }
      e.push_back(static_cast<NodeId>(v));
    }
    const std::size_t before = e.size();
    std::sort(e.begin(), e.end());
    e.erase(std::unique(e.begin(), e.end()), e.end());
    if (e.size() != before && warn) {
      warn(source + ":" + std::to_string(line_no) + ": duplicate node ids collapsed");
    }
    edges.push_back(std::move(e));
  }
  if (num_nodes < 0) throw ParseError(source, 0, "missing header 'N <num_nodes>'");
  if (edges.empty()) throw ParseError(source, 0, "no hyperedges");
  return Hypergraph(static_cast<Index>(num_nodes), std::move(edges));
}

inline Hypergraph load_hypergraph(const std::string& path, const WarningSink& warn = warn_to_stderr) {
  auto in = detail::open_input(path);
  return read_hypergraph(in, path, warn);
}

inline void write_hypergraph(std::ostream& out, const Hypergraph& g) {
  out << "N " << g.num_nodes() << '\n';
  for (const auto& e : g.edges()) {
    for (std::size_t i = 0; i < e.size(); ++i) out << (i ? " " : "") << e[i];
    out << '\n';
  }
}

inline void save_hypergraph(const std::string& path, const Hypergraph& g) {
  std::ofstream out(path);
  if (!out) throw std::ios_base::failure("cannot write '" + path + "'");
  write_hypergraph(out, g);
}

}  // namespace thyper
