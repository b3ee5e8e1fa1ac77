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

#include <numeric>
#include <optional>
#include <random>

#include "thyper/hypergraph.hpp"
#include "thyper/rng.hpp"

namespace thyper {

enum class Split : std::uint8_t { None, Train, Val, Test };

/// Hypergraph plus node features, labels (-1 = unlabeled) and a
/// train/val/test assignment.
struct Dataset {
  Hypergraph graph;
  Matrix features;
  std::vector<int> labels;
  std::vector<Split> split;

  Index num_nodes() const noexcept { return graph.num_nodes(); }
  Index num_features() const noexcept { return features.cols(); }

  int num_classes() const {
    int c = 0;
    for (int l : labels) c = std::max(c, l + 1);
    return c;
  }

  std::vector<bool> mask(Split s) const {
    std::vector<bool> m(split.size());
    for (std::size_t i = 0; i < split.size(); ++i) m[i] = split[i] == s;
    return m;
  }

  /// Throws std::invalid_argument on the first broken invariant.
  void validate() const {
    const auto n = static_cast<std::size_t>(graph.num_nodes());
    if (static_cast<std::size_t>(features.rows()) != n) {
      throw std::invalid_argument("dataset: " + std::to_string(features.rows()) + " feature rows for " +
                                  std::to_string(n) + " nodes");
    }
    if (labels.size() != n || split.size() != n) throw std::invalid_argument("dataset: labels/split size mismatch");
    for (std::size_t i = 0; i < n; ++i) {
      if (split[i] != Split::None && labels[i] < 0) {
        throw std::invalid_argument("dataset: node " + std::to_string(i) + " is in a split but has no label");
      }
    }
    if (!features.allFinite()) throw std::invalid_argument("dataset: non-finite feature value");
  }
};

// -- CSV inputs ----------------------------------------------------------------

namespace detail {

inline std::vector<std::string> split_csv(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.emplace_back(trim(line.substr(start, comma == std::string_view::npos ? comma : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

inline double parse_double(const std::string& tok, const std::string& source, std::size_t line) {
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(tok, &pos);
  } catch (const std::exception&) {
    throw ParseError(source, line, "expected a number, got '" + tok + "'");
  }
  if (pos != tok.size()) throw ParseError(source, line, "expected a number, got '" + tok + "'");
  return v;
}

inline NodeId parse_node(const std::string& tok, Index n, const std::string& source, std::size_t line) {
  const auto v = parse_int(tok, source, line);
  if (v < 0 || v >= n) throw ParseError(source, line, "node id " + tok + " out of range");
  return static_cast<NodeId>(v);
}

}  // namespace detail

/// N rows, D columns, no header; row i is node i.
inline Matrix read_features_csv(std::istream& in, Index num_nodes, const std::string& source = "<features>") {
  std::vector<std::vector<double>> rows;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto line = detail::trim(raw);
    if (line.empty()) continue;
    std::vector<double> row;
    for (const auto& tok : detail::split_csv(line)) row.push_back(detail::parse_double(tok, source, line_no));
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw ParseError(source, line_no, "expected " + std::to_string(rows.front().size()) + " columns");
    }
    rows.push_back(std::move(row));
  }
  if (static_cast<Index>(rows.size()) != num_nodes) {
    throw ParseError(source, 0, std::to_string(rows.size()) + " rows for " + std::to_string(num_nodes) + " nodes");
  }
  Matrix x(num_nodes, rows.empty() ? 0 : static_cast<Index>(rows.front().size()));
  for (Index i = 0; i < x.rows(); ++i) {
    for (Index j = 0; j < x.cols(); ++j) x(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  }
  return x;
}

/// Lines `node_id,class_id`.
inline std::vector<int> read_labels_csv(std::istream& in, Index num_nodes, const std::string& source = "<labels>") {
  std::vector<int> labels(static_cast<std::size_t>(num_nodes), -1);
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto line = detail::trim(raw);
    if (line.empty() || line.front() == '#') continue;
    const auto f = detail::split_csv(line);
    if (f.size() != 2) throw ParseError(source, line_no, "expected 'node_id,class_id'");
    const NodeId v = detail::parse_node(f[0], num_nodes, source, line_no);
    const auto c = detail::parse_int(f[1], source, line_no);
    if (c < 0) throw ParseError(source, line_no, "class id must be nonnegative");
    labels[static_cast<std::size_t>(v)] = static_cast<int>(c);
  }
  return labels;
}

/// Lines `node_id,{train|val|test}`.
inline std::vector<Split> read_splits_csv(std::istream& in, Index num_nodes, const std::string& source = "<splits>") {
  std::vector<Split> split(static_cast<std::size_t>(num_nodes), Split::None);
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto line = detail::trim(raw);
    if (line.empty() || line.front() == '#') continue;
    const auto f = detail::split_csv(line);
    if (f.size() != 2) throw ParseError(source, line_no, "expected 'node_id,split'");
    const NodeId v = detail::parse_node(f[0], num_nodes, source, line_no);
    Split s = Split::None;
    if (f[1] == "train") s = Split::Train;
    else if (f[1] == "val") s = Split::Val;
    else if (f[1] == "test") s = Split::Test;
    else throw ParseError(source, line_no, "unknown split '" + f[1] + "'");
    if (split[static_cast<std::size_t>(v)] != Split::None && split[static_cast<std::size_t>(v)] != s) {
      throw ParseError(source, line_no, "node " + f[0] + " assigned to two splits");
    }
    split[static_cast<std::size_t>(v)] = s;
  }
  return split;
}

inline Dataset load_dataset(const std::string& graph_path, const std::string& features_path,
                            const std::string& labels_path, const std::string& splits_path,
                            const WarningSink& warn = warn_to_stderr) {
  Dataset ds;
  ds.graph = load_hypergraph(graph_path, warn);
  const Index n = ds.graph.num_nodes();
  {
    auto in = detail::open_input(features_path);
    ds.features = read_features_csv(in, n, features_path);
  }
  {
    auto in = detail::open_input(labels_path);
    ds.labels = read_labels_csv(in, n, labels_path);
  }
  {
    auto in = detail::open_input(splits_path);
    ds.split = read_splits_csv(in, n, splits_path);
  }
  ds.validate();
  return ds;
}

inline void write_dataset(const std::string& stem, const Dataset& ds) {
  save_hypergraph(stem + ".graph.txt", ds.graph);
  std::ofstream f(stem + ".features.csv"), l(stem + ".labels.csv"), s(stem + ".splits.csv");
  if (!f || !l || !s) throw std::ios_base::failure("cannot write dataset files under '" + stem + "'");
  f.precision(17);
  for (Index i = 0; i < ds.features.rows(); ++i) {
    for (Index j = 0; j < ds.features.cols(); ++j) f << (j ? "," : "") << ds.features(i, j);
    f << '\n';
  }
  for (std::size_t i = 0; i < ds.labels.size(); ++i) {
    if (ds.labels[i] >= 0) l << i << ',' << ds.labels[i] << '\n';
  }
  static constexpr const char* names[] = {"", "train", "val", "test"};
  for (std::size_t i = 0; i < ds.split.size(); ++i) {
    if (ds.split[i] != Split::None) s << i << ',' << names[static_cast<int>(ds.split[i])] << '\n';
  }
}

// -- synthetic planted-community hypergraphs ----------------------------------

struct SyntheticOptions {
  Index nodes = 60;
  int communities = 2;
  int edges = 30;  // total, spread evenly over communities
  int min_edge_size = 3;
  int max_edge_size = 4;
  Index features = 8;
  double signal = 1.0;  // indicator strength
  double noise = 1.0;   // gaussian sigma added to every feature
  double train_fraction = 0.5;
  double val_fraction = 0.25;
};

/**
 * Nodes are dealt round-robin over a random permutation into communities.
 * Every hyperedge samples its nodes from one community. Feature d of node
 * v is `signal` when d falls in v's block of features/communities columns,
 * plus N(0, noise^2).
 */
inline Dataset make_planted_communities(std::uint64_t seed, const SyntheticOptions& opt = {}) {
  if (opt.communities < 1 || opt.nodes < opt.communities || opt.min_edge_size < 1 ||
      opt.max_edge_size < opt.min_edge_size || opt.features < opt.communities) {
    throw std::invalid_argument("make_planted_communities: inconsistent options");
  }
  Rng rng = substream(seed, "synthetic");
  const auto n = static_cast<std::size_t>(opt.nodes);

  std::vector<NodeId> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  std::vector<int> community(n);
  std::vector<std::vector<NodeId>> members(static_cast<std::size_t>(opt.communities));
  for (std::size_t i = 0; i < n; ++i) {
    const int c = static_cast<int>(i % static_cast<std::size_t>(opt.communities));
    community[static_cast<std::size_t>(perm[i])] = c;
    members[static_cast<std::size_t>(c)].push_back(perm[i]);
  }

  std::vector<Hyperedge> edges;
  std::uniform_int_distribution<int> size_dist(opt.min_edge_size, opt.max_edge_size);
  for (int e = 0; e < opt.edges; ++e) {
    auto pool = members[static_cast<std::size_t>(e % opt.communities)];
    const auto size = std::min<std::size_t>(static_cast<std::size_t>(size_dist(rng)), pool.size());
    std::shuffle(pool.begin(), pool.end(), rng);
    edges.emplace_back(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(size));
  }

  Dataset ds;
  ds.graph = Hypergraph(opt.nodes, std::move(edges));
  ds.features = Matrix(opt.nodes, opt.features);
  std::normal_distribution<double> noise(0.0, 1.0);
  const Index block = opt.features / opt.communities;
  for (Index v = 0; v < opt.nodes; ++v) {
    const int c = community[static_cast<std::size_t>(v)];
    for (Index d = 0; d < opt.features; ++d) {
      const bool on = d / block == c;
      ds.features(v, d) = (on ? opt.signal : 0.0) + opt.noise * noise(rng);
    }
  }
  ds.labels = community;

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  const auto n_train = static_cast<std::size_t>(std::llround(opt.train_fraction * static_cast<double>(n)));
  const auto n_val = static_cast<std::size_t>(std::llround(opt.val_fraction * static_cast<double>(n)));
  ds.split.assign(n, Split::Test);
  for (std::size_t i = 0; i < n; ++i) {
    ds.split[order[i]] = i < n_train ? Split::Train : (i < n_train + n_val ? Split::Val : Split::Test);
  }
  ds.validate();
  return ds;
}

}  // namespace thyper
