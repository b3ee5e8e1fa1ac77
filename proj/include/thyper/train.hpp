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
 * @file train.hpp
 *
 * Full-graph training: Adam on the masked cross-entropy plus L2 weight
 * decay, best-validation checkpointing, resumable JSON checkpoints, and a
 * seeded grid search over (K, alpha).
 */

#pragma once

#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <atomic>
#include <exception>
#include <thread>

#include "thyper/nn.hpp"

namespace thyper {

struct TrainConfig {
  double lr = 0.01;
  double weight_decay = 5e-4;
  int epochs = 200;
  int patience = 0;  // epochs without val improvement before stopping; 0 disables
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  void validate() const {
    if (!(lr >= 0.0)) throw std::invalid_argument("TrainConfig: lr must be nonnegative");
    if (!(weight_decay >= 0.0)) throw std::invalid_argument("TrainConfig: weight_decay must be nonnegative");
    if (epochs < 0 || patience < 0) throw std::invalid_argument("TrainConfig: epochs and patience must be >= 0");
    if (!(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0 && eps > 0.0)) {
      throw std::invalid_argument("TrainConfig: invalid Adam constants");
    }
  }
};

NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(TrainConfig, lr, weight_decay, epochs, patience, beta1, beta2, eps)

// -- Adam ----------------------------------------------------------------------

struct AdamState {
  Weights m;
  Weights v;
  long t = 0;

  static AdamState zeros_like(const Weights& w) {
    AdamState s;
    for (const auto& x : w) {
      s.m.push_back(Matrix::Zero(x.rows(), x.cols()));
      s.v.push_back(Matrix::Zero(x.rows(), x.cols()));
    }
    return s;
  }
};

inline void adam_step(Weights& w, const Weights& grad, AdamState& st, const TrainConfig& tc) {
  ++st.t;
  const double c1 = 1.0 - std::pow(tc.beta1, static_cast<double>(st.t));
  const double c2 = 1.0 - std::pow(tc.beta2, static_cast<double>(st.t));
  for (std::size_t l = 0; l < w.size(); ++l) {
    st.m[l] = tc.beta1 * st.m[l] + (1.0 - tc.beta1) * grad[l];
    st.v[l] = tc.beta2 * st.v[l] + (1.0 - tc.beta2) * grad[l].cwiseAbs2();
    w[l].array() -= tc.lr * (st.m[l].array() / c1) / ((st.v[l].array() / c2).sqrt() + tc.eps);
  }
}

// -- checkpoints ---------------------------------------------------------------

inline constexpr int kCheckpointVersion = 1;

struct EpochMetrics {
  int epoch = 0;
  double train_loss = 0.0;
  double train_acc = 0.0;
  double val_acc = 0.0;
};

struct Checkpoint {
  ModelConfig model;
  TrainConfig train;
  Weights weights;
  AdamState adam;
  int epoch = 0;  // epochs completed
  double best_val_acc = -1.0;
  int since_best = 0;
  std::string rng_state;  // textual state of the init stream after drawing weights
};

namespace detail {

inline nlohmann::json matrix_json(const Matrix& m) {
  std::vector<double> flat;
  flat.reserve(static_cast<std::size_t>(m.size()));
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) flat.push_back(m(i, j));
  }
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", flat}};
}

inline Matrix matrix_from_json(const nlohmann::json& j) {
  const Index r = j.at("rows").get<Index>(), c = j.at("cols").get<Index>();
  const auto flat = j.at("data").get<std::vector<double>>();
  if (static_cast<Index>(flat.size()) != r * c) throw std::invalid_argument("checkpoint: matrix size mismatch");
  Matrix m(r, c);
  for (Index i = 0; i < r; ++i) {
    for (Index k = 0; k < c; ++k) m(i, k) = flat[static_cast<std::size_t>(i * c + k)];
  }
  return m;
}

inline nlohmann::json weights_json(const Weights& w) {
  nlohmann::json a = nlohmann::json::array();
  for (const auto& m : w) a.push_back(matrix_json(m));
  return a;
}

inline Weights weights_from_json(const nlohmann::json& j) {
  Weights w;
  for (const auto& m : j) w.push_back(matrix_from_json(m));
  return w;
}

inline std::string rng_text(const Rng& r) {
  std::ostringstream os;
  os << r;
  return os.str();
}

}  // namespace detail

inline nlohmann::json checkpoint_json(const Checkpoint& c) {
  return {{"format", "thyper-checkpoint"},
          {"version", kCheckpointVersion},
          {"model", c.model},
          {"train", c.train},
          {"epoch", c.epoch},
          {"best_val_acc", c.best_val_acc},
          {"since_best", c.since_best},
          {"weights", detail::weights_json(c.weights)},
          {"adam", {{"t", c.adam.t}, {"m", detail::weights_json(c.adam.m)}, {"v", detail::weights_json(c.adam.v)}}},
          {"rng_state", c.rng_state}};
}

inline Checkpoint checkpoint_from_json(const nlohmann::json& j) {
  if (j.value("format", "") != "thyper-checkpoint") throw std::invalid_argument("checkpoint: not a thyper checkpoint");
  if (j.at("version").get<int>() != kCheckpointVersion) {
    throw std::invalid_argument("checkpoint: unsupported version " + j.at("version").dump());
  }
  Checkpoint c;
  c.model = j.at("model").get<ModelConfig>();
  c.train = j.at("train").get<TrainConfig>();
  c.epoch = j.at("epoch").get<int>();
  c.best_val_acc = j.at("best_val_acc").get<double>();
  c.since_best = j.at("since_best").get<int>();
  c.weights = detail::weights_from_json(j.at("weights"));
  c.adam.t = j.at("adam").at("t").get<long>();
  c.adam.m = detail::weights_from_json(j.at("adam").at("m"));
  c.adam.v = detail::weights_from_json(j.at("adam").at("v"));
  c.rng_state = j.at("rng_state").get<std::string>();
  return c;
}

inline std::string serialize_checkpoint(const Checkpoint& c) { return checkpoint_json(c).dump(1) + "\n"; }

inline Checkpoint parse_checkpoint(const std::string& text) {
  try {
    return checkpoint_from_json(nlohmann::json::parse(text));
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("checkpoint: ") + e.what());
  }
}

inline void save_checkpoint(const std::string& path, const Checkpoint& c) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::ios_base::failure("cannot write " + path);
  out << serialize_checkpoint(c);
}

inline Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::ios_base::failure("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_checkpoint(ss.str());
}

// -- training ------------------------------------------------------------------

class Trainer {
 public:
  Trainer(const Dataset& ds, ModelConfig model, TrainConfig tc, EvalPath path = EvalPath::Auto)
      : ds_(ds), net_(model, ds, path), train_mask_(ds.mask(Split::Train)), val_mask_(ds.mask(Split::Val)) {
    tc.validate();
    state_.model = std::move(model);
    state_.train = tc;
    Rng rng = substream(state_.model.seed, "init");
    state_.weights = init_weights(state_.model, rng);
    state_.rng_state = detail::rng_text(rng);
    state_.adam = AdamState::zeros_like(state_.weights);
    best_ = state_;
  }

  /// Continues from a checkpoint; the dataset must be the one it was trained
  /// on. `best` is the best-so-far checkpoint of the same run, if kept.
  Trainer(const Dataset& ds, const Checkpoint& ck, EvalPath path = EvalPath::Auto,
          const std::optional<Checkpoint>& best = std::nullopt)
      : ds_(ds), net_(ck.model, ds, path), train_mask_(ds.mask(Split::Train)), val_mask_(ds.mask(Split::Val)) {
    ck.train.validate();
    state_ = ck;
    best_ = best ? *best : ck;
    if (best && (best->best_val_acc != ck.best_val_acc || best->epoch > ck.epoch)) {
      throw std::invalid_argument("checkpoint: best and last checkpoints come from different runs");
    }
  }

  const Network& network() const noexcept { return net_; }
  const Checkpoint& state() const noexcept { return state_; }
  const Checkpoint& best() const noexcept { return best_; }
  bool stopped() const noexcept {
    return state_.epoch >= state_.train.epochs ||
           (state_.train.patience > 0 && state_.since_best >= state_.train.patience);
  }

  /// One epoch: metrics are those of the weights entering the epoch, which
  /// are also what a new best checkpoint stores.
  EpochMetrics step() {
    const Evaluation ev = net_.evaluate(state_.weights, ds_.labels, train_mask_, state_.train.weight_decay, true);
    if (!std::isfinite(ev.loss)) {
      throw DivergenceError("training diverged at epoch " + std::to_string(state_.epoch + 1) +
                            ": loss = " + std::to_string(ev.loss));
    }
    EpochMetrics m{state_.epoch + 1, ev.loss, accuracy(ev.logits, ds_.labels, train_mask_),
                   has_val() ? accuracy(ev.logits, ds_.labels, val_mask_) : 0.0};
    const bool improved = m.val_acc > state_.best_val_acc;
    if (improved) {
      state_.best_val_acc = m.val_acc;
      state_.since_best = 0;
      best_ = state_;
    } else {
      ++state_.since_best;
    }
    adam_step(state_.weights, ev.grad, state_.adam, state_.train);
    ++state_.epoch;
    return m;
  }

 private:
  bool has_val() const { return std::find(val_mask_.begin(), val_mask_.end(), true) != val_mask_.end(); }

  const Dataset& ds_;
  Network net_;
  std::vector<bool> train_mask_;
  std::vector<bool> val_mask_;
  Checkpoint state_;
  Checkpoint best_;
};

struct TrainResult {
  Checkpoint best;   // weights with the highest validation accuracy
  Checkpoint last;   // state after the final epoch, resumable
  std::vector<EpochMetrics> history;
  double test_acc = 0.0;   // best weights on the test split
  double final_train_acc = 0.0;  // last weights on the train split
};

inline double split_accuracy(const Network& net, const Weights& w, const Dataset& ds, Split s) {
  return accuracy(net.logits(w), ds.labels, ds.mask(s));
}

inline TrainResult finish(const Trainer& t, const Dataset& ds, std::vector<EpochMetrics> history) {
  TrainResult r{t.best(), t.state(), std::move(history), 0.0, 0.0};
  r.test_acc = split_accuracy(t.network(), r.best.weights, ds, Split::Test);
  r.final_train_acc = split_accuracy(t.network(), r.last.weights, ds, Split::Train);
  return r;
}

inline TrainResult train(const Dataset& ds, const ModelConfig& model, const TrainConfig& tc,
                         EvalPath path = EvalPath::Auto) {
  Trainer t(ds, model, tc, path);
  std::vector<EpochMetrics> history;
  while (!t.stopped()) history.push_back(t.step());
  return finish(t, ds, std::move(history));
}

inline std::string format_double(double v, int digits = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

inline std::string history_csv(const std::vector<EpochMetrics>& h) {
  std::string out = "epoch,train_loss,train_acc,val_acc\n";
  for (const auto& m : h) {
    out += std::to_string(m.epoch) + "," + format_double(m.train_loss, 10) + "," + format_double(m.train_acc) + "," +
           format_double(m.val_acc) + "\n";
  }
  return out;
}

// -- grid search ---------------------------------------------------------------

struct GridSpec {
  std::vector<int> ks{1, 2, 3, 4, 5};
  std::vector<double> alphas{0.1, 0.2, 0.3, 0.4, 0.5};
  int repeats = 1;          // run r uses seed base_seed + r
  std::uint64_t base_seed = 0;
  unsigned threads = 1;
};

struct GridCell {
  int k = 0;
  double alpha = 0.0;
  double mean_acc = 0.0;
  double std_acc = 0.0;  // sample standard deviation, 0 for one run
  int n_runs = 0;
  std::vector<double> runs;
};

struct GridResult {
  std::vector<GridCell> cells;  // K-major, in spec order
  std::size_t best = 0;         // highest mean, first on ties
};

inline GridResult grid_search(const Dataset& ds, const ModelConfig& base, const TrainConfig& tc, const GridSpec& grid) {
  if (grid.ks.empty() || grid.alphas.empty() || grid.repeats < 1) {
    throw std::invalid_argument("grid_search: empty grid or no repeats");
  }
  GridResult res;
  for (int k : grid.ks) {
    for (double a : grid.alphas) res.cells.push_back({k, a, 0.0, 0.0, grid.repeats, std::vector<double>(static_cast<std::size_t>(grid.repeats))});
  }
  const std::size_t jobs = res.cells.size() * static_cast<std::size_t>(grid.repeats);
  auto run = [&](std::size_t job) {
    GridCell& cell = res.cells[job / static_cast<std::size_t>(grid.repeats)];
    const auto r = job % static_cast<std::size_t>(grid.repeats);
    ModelConfig m = base;
    m.k = cell.k;
    m.alpha = cell.alpha;
    m.seed = grid.base_seed + r;
    cell.runs[r] = train(ds, m, tc).test_acc;
  };
  const unsigned threads = std::max(1u, std::min<unsigned>(grid.threads, static_cast<unsigned>(jobs)));
  if (threads == 1) {
    for (std::size_t j = 0; j < jobs; ++j) run(j);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(threads);
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) {
      pool.emplace_back([&, t] {
        try {
          for (std::size_t j; (j = next.fetch_add(1)) < jobs;) run(j);
        } catch (...) {
          errors[t] = std::current_exception();
        }
      });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }
  for (std::size_t i = 0; i < res.cells.size(); ++i) {
    GridCell& c = res.cells[i];
    double sum = 0.0;
    for (double v : c.runs) sum += v;
    c.mean_acc = sum / static_cast<double>(c.n_runs);
    double ss = 0.0;
    for (double v : c.runs) ss += (v - c.mean_acc) * (v - c.mean_acc);
    c.std_acc = c.n_runs > 1 ? std::sqrt(ss / static_cast<double>(c.n_runs - 1)) : 0.0;
    if (c.mean_acc > res.cells[res.best].mean_acc) res.best = i;
  }
  return res;
}

inline std::string grid_csv(const GridResult& g) {
  std::string out = "K,alpha,mean_acc,std_acc,n_runs\n";
  for (const auto& c : g.cells) {
    out += std::to_string(c.k) + "," + format_double(c.alpha, 4) + "," + format_double(c.mean_acc) + "," +
           format_double(c.std_acc) + "," + std::to_string(c.n_runs) + "\n";
  }
  return out;
}

}  // namespace thyper
