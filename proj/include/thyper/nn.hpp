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
 * @file nn.hpp
 *
 * Trainable layers on tensor signals. A layer multiplies every frontal
 * slice by the same weight matrix (a weight tensor supported on its first
 * slice), applies an elementwise activation, and the network ends with
 * shifting Y = A * X' or the propagation
 *
 *   Y_0 = X',  Y_k = alpha X' + (1 - alpha) A * Y_{k-1}.
 *
 * Two evaluation paths exist. The full path works on N x C x N_s tensors.
 * The collapsed path serves the slice_sum readout: summing slices is a
 * homomorphism of the t-product, sum(A * Z) = sum(A) sum(Z), so the
 * propagation runs on N x N matrices and the per-slice stack is only
 * visited once per pass, over distinct nonzero slices with multiplicity.
 */

#pragma once

#include <json.hpp>

#include <algorithm>
#include <cassert>
#include <cmath>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "thyper/builder.hpp"
#include "thyper/dataset.hpp"
#include "thyper/rng.hpp"
#include "thyper/talg.hpp"

namespace thyper {

enum class Variant { THGCN, THGIN, MLP, Clique };
enum class Activation { ReLU, Identity, Tanh };
enum class Readout { SliceSum, LeadingSlice };
enum class EvalPath { Auto, Full, Collapsed };

NLOHMANN_JSON_SERIALIZE_ENUM(Variant, {{Variant::THGCN, "thgcn"},
                                       {Variant::THGIN, "thgin"},
                                       {Variant::MLP, "mlp"},
                                       {Variant::Clique, "clique"}})
NLOHMANN_JSON_SERIALIZE_ENUM(Activation,
                             {{Activation::ReLU, "relu"}, {Activation::Identity, "identity"}, {Activation::Tanh, "tanh"}})
NLOHMANN_JSON_SERIALIZE_ENUM(Readout, {{Readout::SliceSum, "slice_sum"}, {Readout::LeadingSlice, "leading_slice"}})

/// Parse an enum from its JSON name; throws invalid_argument on unknown names.
template <class E>
E parse_enum(const std::string& name, const char* what) {
  const E value = nlohmann::json(name).get<E>();
  if (nlohmann::json(value).get<std::string>() != name) {
    throw std::invalid_argument(std::string("unknown ") + what + " '" + name + "'");
  }
  return value;
}

template <class E>
std::string enum_name(E value) {
  return nlohmann::json(value).get<std::string>();
}

/// One D_in x D_out matrix per layer, no bias.
using Weights = std::vector<Matrix>;

struct ModelConfig {
  std::vector<Index> layer_dims{8, 64, 2};
  Variant variant = Variant::THGIN;
  double alpha = 0.1;
  int k = 1;
  Activation activation = Activation::ReLU;
  Readout readout = Readout::SliceSum;
  std::uint64_t seed = 0;
  /// Tensor order used to build the signal and shift; 0 means the
  /// hypergraph's own order (at least 2).
  int order = 0;

  double effective_alpha() const noexcept { return variant == Variant::THGCN ? 0.0 : alpha; }
  int effective_k() const noexcept {
    if (variant == Variant::MLP) return 0;
    return variant == Variant::THGCN ? 1 : k;
  }
  Index input_dim() const { return layer_dims.front(); }
  Index output_dim() const { return layer_dims.back(); }

  void validate() const {
    if (layer_dims.size() < 2) throw std::invalid_argument("ModelConfig: need at least input and output dims");
    for (Index d : layer_dims) {
      if (d < 1) throw std::invalid_argument("ModelConfig: layer dims must be positive");
    }
    if (variant == Variant::THGCN && k != 1) throw std::invalid_argument("ModelConfig: thgcn uses exactly K = 1");
    if (k < 1) throw std::invalid_argument("ModelConfig: K must be >= 1");
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw std::invalid_argument("ModelConfig: alpha must be in [0, 1]");
    if (order < 0 || order == 1) throw std::invalid_argument("ModelConfig: order must be 0 or >= 2");
  }
};

inline void to_json(nlohmann::json& j, const ModelConfig& c) {
  j = {{"layer_dims", c.layer_dims}, {"variant", c.variant},       {"alpha", c.alpha}, {"k", c.k},
       {"activation", c.activation}, {"readout", c.readout}, {"seed", c.seed},   {"order", c.order}};
}

inline void from_json(const nlohmann::json& j, ModelConfig& c) {
  c.layer_dims = j.at("layer_dims").get<std::vector<Index>>();
  c.variant = parse_enum<Variant>(j.at("variant").get<std::string>(), "variant");
  c.alpha = j.at("alpha").get<double>();
  c.k = j.at("k").get<int>();
  c.activation = parse_enum<Activation>(j.at("activation").get<std::string>(), "activation");
  c.readout = parse_enum<Readout>(j.at("readout").get<std::string>(), "readout");
  c.seed = j.at("seed").get<std::uint64_t>();
  c.order = j.at("order").get<int>();
}

/// uniform(-s, s), s = sqrt(6 / (D_in + D_out)), filled row-major per layer.
inline Weights init_weights(const ModelConfig& cfg, Rng& rng) {
  cfg.validate();
  Weights w;
  for (std::size_t l = 0; l + 1 < cfg.layer_dims.size(); ++l) {
    const Index in = cfg.layer_dims[l], out = cfg.layer_dims[l + 1];
    const double s = std::sqrt(6.0 / static_cast<double>(in + out));
    std::uniform_real_distribution<double> u(-s, s);
    Matrix m(in, out);
    for (Index i = 0; i < in; ++i) {
      for (Index j = 0; j < out; ++j) m(i, j) = u(rng);
    }
    w.push_back(std::move(m));
  }
  return w;
}

/// Draws from the model seed's "init" stream.
inline Weights init_weights(const ModelConfig& cfg) {
  Rng rng = substream(cfg.seed, "init");
  return init_weights(cfg, rng);
}

inline double squared_norm(const Weights& w) {
  double s = 0.0;
  for (const auto& m : w) s += m.squaredNorm();
  return s;
}

// -- activations ---------------------------------------------------------------

inline Matrix activate(const Matrix& z, Activation act) {
  switch (act) {
    case Activation::ReLU: return z.cwiseMax(0.0);
    case Activation::Tanh: return z.array().tanh().matrix();
    case Activation::Identity: break;
  }
  return z;
}

/// Upstream gradient times the activation derivative, expressed through the
/// activation's output h (relu' = [h > 0], tanh' = 1 - h^2).
inline Matrix activation_backward(const Matrix& h, const Matrix& upstream, Activation act) {
  switch (act) {
    case Activation::ReLU: return (h.array() > 0.0).select(upstream, 0.0);
    case Activation::Tanh: return (upstream.array() * (1.0 - h.array().square())).matrix();
    case Activation::Identity: break;
  }
  return upstream;
}

// -- slice-shared MLP ----------------------------------------------------------

namespace detail {

inline void require_chain(Index in_dim, const Weights& w, const char* who) {
  if (w.empty()) throw DimensionError(std::string(who) + ": no weight matrices");
  Index d = in_dim;
  for (const auto& m : w) {
    if (m.rows() != d) {
      throw DimensionError(std::string(who) + ": weight expects " + std::to_string(m.rows()) + " inputs, got " +
                           std::to_string(d));
    }
    d = m.cols();
  }
}

/// Hidden-layer outputs; input rows are stacked slices.
struct MlpTape {
  std::vector<Matrix> post;
};

inline Matrix mlp_forward(const Matrix& in, const Weights& w, Activation act, MlpTape* tape) {
  Matrix z = in * w[0];
  for (std::size_t l = 1; l < w.size(); ++l) {
    Matrix h = activate(z, act);
    z.noalias() = h * w[l];
    if (tape) tape->post.push_back(std::move(h));
  }
  return z;
}

/// Accumulates weight gradients into grad given d(output).
inline void mlp_backward(const Matrix& in, const Weights& w, Activation act, const MlpTape& tape, Matrix upstream,
                          Weights& grad) {
  for (std::size_t l = w.size(); l-- > 0;) {
    const Matrix& input = l == 0 ? in : tape.post[l - 1];
    grad[l].noalias() += input.transpose() * upstream;
    if (l > 0) upstream = activation_backward(tape.post[l - 1], upstream * w[l].transpose(), act);
  }
}

}  // namespace detail

/// Same MLP on every frontal slice; equals x * W_s with W_s = [W, 0, ..., 0]
/// for a single linear layer.
inline Tensor3 transform(const Tensor3& x, const Weights& w, Activation act = Activation::ReLU) {
  detail::require_chain(x.cols(), w, "transform");
  Tensor3 out(detail::mlp_forward(x.unfolded(), w, act, nullptr), x.rows(), x.n_slices());
  if (x.symmetrized()) {
    out.set_symmetrized(true);
    assert(out.has_reflection_structure() && "transform must preserve slice structure");
  }
  return out;
}

/// Y = A * X'.
inline Tensor3 thgcn_forward(const Tensor3& x, const ShiftOperator& a, const Weights& w,
                             Activation act = Activation::ReLU) {
  return a.apply(transform(x, w, act));
}

namespace detail {

/// K steps of y <- alpha x + (1 - alpha) shift(y), starting from y = x.
template <class T, class Shift>
T propagate(const T& x, const Shift& shift, double alpha, int k) {
  T y = x;
  for (int s = 0; s < k; ++s) {
    T next = alpha * x + (1.0 - alpha) * shift(y);
    y = std::move(next);
  }
  return y;
}

/// Adjoint of propagate: gradient with respect to x given gradient g at y.
template <class T, class ShiftT>
T propagate_backward(T g, const ShiftT& shift_t, double alpha, int k) {
  T dx = 0.0 * g;
  for (int s = 0; s < k; ++s) {
    dx += alpha * g;
    T next = (1.0 - alpha) * shift_t(g);
    g = std::move(next);
  }
  dx += g;
  return dx;
}

}  // namespace detail

/// Transform once, then K propagation steps.
inline Tensor3 thgin_forward(const Tensor3& x, const ShiftOperator& a, const Weights& w, double alpha, int k,
                             Activation act = Activation::ReLU) {
  if (k < 1) throw std::invalid_argument("thgin_forward: K must be >= 1");
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw std::invalid_argument("thgin_forward: alpha must be in [0, 1]");
  const Tensor3 xp = transform(x, w, act);
  return detail::propagate(xp, [&](const Tensor3& y) { return a.apply(y); }, alpha, k);
}

// -- readout and loss ----------------------------------------------------------

/// slice_sum: sum of all frontal slices, so readout(symmetrize(S)) = S.
/// leading_slice: twice the second slice (the first data slice after
/// symmetrization), or the only slice of a one-slice tensor.
inline Matrix readout(const Tensor3& y, Readout mode) {
  if (mode == Readout::LeadingSlice) return y.n_slices() == 1 ? Matrix(y.slice(0)) : Matrix(2.0 * y.slice(1));
  Matrix s = Matrix::Zero(y.rows(), y.cols());
  for (Index k = 0; k < y.n_slices(); ++k) s += y.slice(k);
  return s;
}

inline Tensor3 readout_backward(const Matrix& g, Index n_slices, Readout mode) {
  Tensor3 d(g.rows(), g.cols(), n_slices);
  if (mode == Readout::LeadingSlice) {
    if (n_slices == 1) {
      d.slice(0) = g;
    } else {
      d.slice(1) = 2.0 * g;
    }
    return d;
  }
  for (Index k = 0; k < n_slices; ++k) d.slice(k) = g;
  return d;
}

struct LossResult {
  double value = 0.0;
  Matrix grad;  // d value / d logits
};

/// Mean softmax cross-entropy over masked rows.
inline LossResult cross_entropy(const Matrix& logits, const std::vector<int>& labels, const std::vector<bool>& mask) {
  const Index n = logits.rows(), c = logits.cols();
  if (static_cast<Index>(labels.size()) != n || static_cast<Index>(mask.size()) != n) {
    throw DimensionError("cross_entropy: labels/mask length must equal the number of rows");
  }
  const auto count = std::count(mask.begin(), mask.end(), true);
  if (count == 0) throw std::invalid_argument("cross_entropy: empty mask");
  LossResult r{0.0, Matrix::Zero(n, c)};
  const double inv = 1.0 / static_cast<double>(count);
  for (Index i = 0; i < n; ++i) {
    if (!mask[static_cast<std::size_t>(i)]) continue;
    const int y = labels[static_cast<std::size_t>(i)];
    if (y < 0 || y >= c) throw std::invalid_argument("cross_entropy: masked node " + std::to_string(i) + " has no valid label");
    const double m = logits.row(i).maxCoeff();
    const Eigen::RowVectorXd e = (logits.row(i).array() - m).exp().matrix();
    const double z = e.sum();
    r.value += (std::log(z) + m - logits(i, y)) * inv;
    r.grad.row(i) = e * (inv / z);
    r.grad(i, y) -= inv;
  }
  return r;
}

/// Row argmax, lowest index on ties.
inline std::vector<int> predict(const Matrix& logits) {
  std::vector<int> out(static_cast<std::size_t>(logits.rows()));
  for (Index i = 0; i < logits.rows(); ++i) {
    Index arg = 0;
    logits.row(i).maxCoeff(&arg);
    out[static_cast<std::size_t>(i)] = static_cast<int>(arg);
  }
  return out;
}

inline double accuracy(const Matrix& logits, const std::vector<int>& labels, const std::vector<bool>& mask) {
  const auto pred = predict(logits);
  std::size_t hit = 0, total = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (!mask[i]) continue;
    ++total;
    hit += pred[i] == labels[i] ? 1 : 0;
  }
  return total ? static_cast<double>(hit) / static_cast<double>(total) : 0.0;
}

// -- network -------------------------------------------------------------------

struct Evaluation {
  Matrix logits;
  double data_loss = 0.0;
  double loss = 0.0;  // data_loss + weight_decay / 2 * |W|^2
  Weights grad;
};

/**
 * A model bound to its inputs. The full path keeps the N x D x N_s signal
 * and the shift operator; the collapsed path keeps the distinct nonzero
 * input slices stacked row-wise, their multiplicities, and the slice sum of
 * the shift.
 */
class Network {
 public:
  /// Builds inputs for the variant from a dataset.
  Network(ModelConfig cfg, const Dataset& ds, EvalPath path = EvalPath::Auto) : cfg_(std::move(cfg)) {
    cfg_.validate();
    ds.validate();
    if (ds.features.cols() != cfg_.input_dim()) {
      throw DimensionError("Network: features have " + std::to_string(ds.features.cols()) + " columns, model expects " +
                           std::to_string(cfg_.input_dim()));
    }
    resolve_path(path);
    n_ = ds.features.rows();
    switch (cfg_.variant) {
      case Variant::MLP: bind_matrix_inputs(ds.features, std::nullopt); break;
      case Variant::Clique: bind_matrix_inputs(ds.features, clique_shift_matrix(ds.graph)); break;
      case Variant::THGCN:
      case Variant::THGIN: bind_hypergraph(ds); break;
    }
  }

  /// Binds explicit tensors; `shift` is required unless the variant is MLP.
  Network(ModelConfig cfg, const Tensor3& x, std::optional<Tensor3> shift, EvalPath path = EvalPath::Auto)
      : cfg_(std::move(cfg)) {
    cfg_.validate();
    if (x.cols() != cfg_.input_dim()) throw DimensionError("Network: input has the wrong feature count");
    if (cfg_.variant != Variant::MLP && !shift) throw std::invalid_argument("Network: this variant needs a shift tensor");
    resolve_path(path);
    n_ = x.rows();
    bind_tensors(x, cfg_.variant == Variant::MLP ? std::nullopt : std::move(shift));
  }

  const ModelConfig& config() const noexcept { return cfg_; }
  EvalPath path() const noexcept { return path_; }
  Index num_nodes() const noexcept { return n_; }
  Index n_slices() const noexcept { return n_slices_; }

  /// Output tensor before readout; full path only.
  Tensor3 output(const Weights& w) const {
    require_full("output");
    const Tensor3 xp = transform(*x_, w, cfg_.activation);
    if (!shift_) return xp;
    const ShiftOperator& a = *shift_;
    return detail::propagate(xp, [&](const Tensor3& y) { return a.apply(y); }, cfg_.effective_alpha(),
                             cfg_.effective_k());
  }

  Matrix logits(const Weights& w) const {
    detail::require_chain(cfg_.input_dim(), w, "Network");
    return path_ == EvalPath::Full ? readout(output(w), cfg_.readout) : collapsed_signal(w);
  }

  Evaluation evaluate(const Weights& w, const std::vector<int>& labels, const std::vector<bool>& mask,
                      double weight_decay, bool with_grad) const {
    detail::require_chain(cfg_.input_dim(), w, "Network");
    Evaluation ev;
    ev.logits = logits(w);
    LossResult ce = cross_entropy(ev.logits, labels, mask);
    ev.data_loss = ce.value;
    ev.loss = ce.value + 0.5 * weight_decay * squared_norm(w);
    if (!with_grad) return ev;
    ev.grad.reserve(w.size());
    for (const auto& m : w) ev.grad.push_back(weight_decay * m);
    if (path_ == EvalPath::Full) {
      full_backward(w, ce.grad, ev.grad);
    } else {
      collapsed_backward(w, ce.grad, ev.grad);
    }
    return ev;
  }

 private:
  void resolve_path(EvalPath path) {
    if (path == EvalPath::Collapsed && cfg_.readout != Readout::SliceSum) {
      throw std::invalid_argument("Network: the collapsed path requires the slice_sum readout");
    }
    path_ = path == EvalPath::Auto ? (cfg_.readout == Readout::SliceSum ? EvalPath::Collapsed : EvalPath::Full) : path;
  }

  void require_full(const char* who) const {
    if (!x_) throw std::logic_error(std::string("Network::") + who + ": full-path inputs were not built");
  }

  void bind_matrix_inputs(const Matrix& features, std::optional<Matrix> shift) {
    Tensor3 x(features, features.rows(), 1);
    std::optional<Tensor3> a;
    if (shift) a = Tensor3(*shift, shift->rows(), 1);
    bind_tensors(x, std::move(a));
  }

  void bind_hypergraph(const Dataset& ds) {
    const int order = cfg_.order ? cfg_.order : std::max(2, ds.graph.order());
    if (path_ == EvalPath::Full) {
      bind_tensors(build_signal_tensor(ds.features, order), build_shift_tensor(ds.graph, order));
      return;
    }
    // Symmetrization of S has slices S_j / 2 at two positions each and a zero
    // slice. Signal slices depend only on the multiset of their tail indices,
    // so one sorted tail stands for all of its orderings.
    const Tensor3 s = build_signal(ds.features, order).data;
    n_slices_ = 2 * s.n_slices() + 1;
    std::vector<std::pair<Index, double>> keep;
    for (Index k = 0; k < s.n_slices(); ++k) {
      const auto tail = slice_tail(k, n_, order);
      if (!std::is_sorted(tail.begin(), tail.end()) || s.slice(k).cwiseAbs().maxCoeff() == 0.0) continue;
      keep.emplace_back(k, 2.0 * static_cast<double>(distinct_orderings(tail)));
    }
    stack_ = Matrix(static_cast<Index>(keep.size()) * n_, s.cols());
    multiplicity_.clear();
    for (std::size_t i = 0; i < keep.size(); ++i) {
      stack_.middleRows(static_cast<Index>(i) * n_, n_) = 0.5 * s.slice(keep[i].first);
      multiplicity_.push_back(keep[i].second);
    }
    shift_sum_ = adjacency_slice_sum(build_adjacency(ds.graph, order));
  }

  void bind_tensors(const Tensor3& x, std::optional<Tensor3> a) {
    if (a && (a->rows() != x.rows() || a->cols() != x.rows() || a->n_slices() != x.n_slices())) {
      throw DimensionError("Network: shift " + a->shape() + " does not act on input " + x.shape());
    }
    n_slices_ = x.n_slices();
    if (path_ == EvalPath::Full) {
      x_ = x;
      if (a) shift_.emplace(std::move(*a));
      return;
    }
    // Distinct slices: with reflection structure slice k and n - k coincide.
    const Index n = x.n_slices();
    const bool reflect = x.symmetrized() && x.has_reflection_structure();
    const Index last = reflect ? (n - 1) / 2 : n - 1;
    std::vector<std::pair<Index, double>> keep;
    for (Index k = 0; k <= last; ++k) {
      if (x.slice(k).cwiseAbs().maxCoeff() == 0.0) continue;
      keep.emplace_back(k, reflect && k > 0 ? 2.0 : 1.0);
    }
    stack_ = Matrix(static_cast<Index>(keep.size()) * n_, x.cols());
    multiplicity_.clear();
    for (std::size_t i = 0; i < keep.size(); ++i) {
      stack_.middleRows(static_cast<Index>(i) * n_, n_) = x.slice(keep[i].first);
      multiplicity_.push_back(keep[i].second);
    }
    if (a) {
      shift_sum_ = Matrix::Zero(n_, n_);
      for (Index k = 0; k < a->n_slices(); ++k) *shift_sum_ += a->slice(k);
    }
  }

  Index chunk_slices() const {
    Index widest = 1;
    for (Index d : cfg_.layer_dims) widest = std::max(widest, d);
    return std::max<Index>(1, kChunkElements / std::max<Index>(1, n_ * widest));
  }

  /// Number of sorted-tail orderings, (M-2)! / prod(multiplicity!).
  static std::uint64_t distinct_orderings(const std::vector<NodeId>& sorted_tail) {
    std::uint64_t total = 1, run = 0;
    for (std::size_t i = 0; i < sorted_tail.size(); ++i) {
      run = i > 0 && sorted_tail[i] == sorted_tail[i - 1] ? run + 1 : 1;
      total = total * (i + 1) / run;
    }
    return total;
  }

  /// Sum over slices of the transformed input, propagated with the summed shift.
  Matrix collapsed_signal(const Weights& w) const {
    const Index count = static_cast<Index>(multiplicity_.size());
    Matrix xp = Matrix::Zero(n_, cfg_.output_dim());
    const Index step = chunk_slices();
    for (Index s0 = 0; s0 < count; s0 += step) {
      const Index s1 = std::min(count, s0 + step);
      const Matrix out = detail::mlp_forward(stack_.middleRows(s0 * n_, (s1 - s0) * n_), w, cfg_.activation, nullptr);
      for (Index s = s0; s < s1; ++s) xp += multiplicity_[static_cast<std::size_t>(s)] * out.middleRows((s - s0) * n_, n_);
    }
    if (!shift_sum_) return xp;
    const Matrix& a = *shift_sum_;
    return detail::propagate(xp, [&](const Matrix& y) -> Matrix { return a * y; }, cfg_.effective_alpha(),
                             cfg_.effective_k());
  }

  /// Recomputes each chunk's hidden outputs; that keeps the working set in
  /// cache and is faster than storing them.
  void collapsed_backward(const Weights& w, const Matrix& d_logits, Weights& grad) const {
    Matrix g = d_logits;
    if (shift_sum_) {
      const Matrix at = shift_sum_->transpose();
      g = detail::propagate_backward(g, [&](const Matrix& y) -> Matrix { return at * y; }, cfg_.effective_alpha(),
                                     cfg_.effective_k());
    }
    const Index count = static_cast<Index>(multiplicity_.size());
    const Index step = chunk_slices();
    for (Index s0 = 0; s0 < count; s0 += step) {
      const Index s1 = std::min(count, s0 + step);
      const Matrix in = stack_.middleRows(s0 * n_, (s1 - s0) * n_);
      detail::MlpTape tape;
      detail::mlp_forward(in, w, cfg_.activation, &tape);
      Matrix up((s1 - s0) * n_, g.cols());
      for (Index s = s0; s < s1; ++s) up.middleRows((s - s0) * n_, n_) = multiplicity_[static_cast<std::size_t>(s)] * g;
      detail::mlp_backward(in, w, cfg_.activation, tape, std::move(up), grad);
    }
  }

  void full_backward(const Weights& w, const Matrix& d_logits, Weights& grad) const {
    Tensor3 g = readout_backward(d_logits, n_slices_, cfg_.readout);
    if (shift_) {
      const ShiftOperator& a = *shift_;
      g = detail::propagate_backward(g, [&](const Tensor3& y) { return a.apply_transpose(y); },
                                     cfg_.effective_alpha(), cfg_.effective_k());
    }
    detail::MlpTape tape;
    detail::mlp_forward(x_->unfolded(), w, cfg_.activation, &tape);
    detail::mlp_backward(x_->unfolded(), w, cfg_.activation, tape, g.unfolded(), grad);
  }

  // Chunks small enough for the hidden block to stay in cache.
  static constexpr Index kChunkElements = Index{1} << 16;

  ModelConfig cfg_;
  EvalPath path_ = EvalPath::Full;
  Index n_ = 0;
  Index n_slices_ = 0;
  std::optional<Tensor3> x_;
  std::optional<ShiftOperator> shift_;
  Matrix stack_;
  std::vector<double> multiplicity_;
  std::optional<Matrix> shift_sum_;
};

}  // namespace thyper
