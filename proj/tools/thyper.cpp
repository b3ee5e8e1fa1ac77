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

// thyper command-line tool. Every subcommand writes its outputs and a
// manifest.json into --out-dir.

#include <openssl/evp.h>

#include <CLI11.hpp>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <sstream>

#include "thyper/thyper.hpp"

#ifndef THYPER_VERSION
#define THYPER_VERSION "0.0.0"
#endif

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

// -- manifest -----------------------------------------------------------------

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::ios_base::failure("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1) {
    throw thyper::InternalError("SHA-256 digest failed");
  }
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

class Clock {
 public:
  double elapsed_ms() const {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

struct Run {
  std::string command;
  std::vector<std::string> argv;
  std::uint64_t seed = 0;
  std::string out_dir = "thyper-out";
  bool json_output = false;
  json config = json::object();
  std::string config_text;
  json inputs = json::object();
  json outputs = json::array();
  json timings = json::object();
  Clock clock;
  bool dir_ready = false;

  void prepare() {
    fs::create_directories(out_dir);
    dir_ready = true;
  }

  void add_input(const std::string& path) { inputs[path] = sha256_hex(read_file(path)); }

  std::string path(const std::string& name) const { return (fs::path(out_dir) / name).string(); }

  std::string write(const std::string& name, const std::string& text) {
    const auto p = path(name);
    std::ofstream out(p, std::ios::binary);
    if (!out || !(out << text)) throw std::ios_base::failure("cannot write '" + p + "'");
    outputs.push_back(name);
    return p;
  }

  std::string write_json(const std::string& name, const json& j) { return write(name, j.dump(2) + "\n"); }

  template <typename F>
  auto timed(const std::string& phase, F&& f) {
    Clock c;
    if constexpr (std::is_void_v<decltype(f())>) {
      f();
      timings[phase] = c.elapsed_ms();
    } else {
      auto r = f();
      timings[phase] = c.elapsed_ms();
      return r;
    }
  }

  void write_manifest(int exit_code, const std::string& error) {
    timings["total"] = clock.elapsed_ms();
    json m{{"tool", "thyper"},
           {"version", THYPER_VERSION},
           {"command", command},
           {"argv", argv},
           {"seed", seed},
           {"config", config},
           {"config_text", config_text},
           {"inputs", inputs},
           {"outputs", outputs},
           {"timings_ms", timings},
           {"exit_code", exit_code}};
    if (!error.empty()) m["error"] = error;
    std::ofstream out(path("manifest.json"), std::ios::binary);
    out << m.dump(2) << "\n";
  }
};

void emit(const Run& run, const json& report, const std::string& text) {
  if (run.json_output) std::cout << report.dump(2) << "\n";
  else std::cout << text;
}

std::string fixed(double v, int digits = 4) { return thyper::format_double(v, digits); }

// -- shared option groups -------------------------------------------------------

void add_common(CLI::App* sub, Run& run) {
  sub->add_option("--seed", run.seed, "Seed for every random substream")->capture_default_str();
  sub->add_option("--out-dir", run.out_dir, "Directory for outputs and manifest.json")->capture_default_str();
  sub->add_flag("--json", run.json_output, "Print the report as JSON");
  sub->fallthrough();
}

struct DataArgs {
  std::string graph, features, labels, splits;
  bool synthetic = false;
  std::optional<std::uint64_t> data_seed;
  thyper::SyntheticOptions syn;
};

void add_data(CLI::App* sub, DataArgs& d) {
  auto* g = sub->add_option_group("dataset", "Node classification data: files or --synthetic");
  g->add_option("--graph", d.graph, "Hyperedge list")->check(CLI::ExistingFile);
  g->add_option("--features", d.features, "Feature CSV, one row per node")->check(CLI::ExistingFile);
  g->add_option("--labels", d.labels, "Label CSV node_id,class_id")->check(CLI::ExistingFile);
  g->add_option("--splits", d.splits, "Split CSV node_id,{train|val|test}")->check(CLI::ExistingFile);
  g->add_flag("--synthetic", d.synthetic, "Use a planted-community hypergraph");
  g->add_option("--data-seed", d.data_seed, "Seed of the synthetic dataset (default: --seed)");
  g->add_option("--nodes", d.syn.nodes)->capture_default_str();
  g->add_option("--communities", d.syn.communities)->capture_default_str();
  g->add_option("--edges", d.syn.edges)->capture_default_str();
  g->add_option("--min-edge-size", d.syn.min_edge_size)->capture_default_str();
  g->add_option("--max-edge-size", d.syn.max_edge_size)->capture_default_str();
  g->add_option("--dim", d.syn.features, "Feature count")->capture_default_str();
  g->add_option("--signal", d.syn.signal)->capture_default_str();
  g->add_option("--noise", d.syn.noise, "Feature noise sigma")->capture_default_str();
  g->add_option("--train-fraction", d.syn.train_fraction)->capture_default_str();
  g->add_option("--val-fraction", d.syn.val_fraction)->capture_default_str();
}

thyper::Dataset load_data(const DataArgs& d, Run& run) {
  if (d.synthetic) {
    const auto seed = d.data_seed.value_or(run.seed);
    run.config["dataset"] = {{"synthetic", true},
                             {"seed", seed},
                             {"nodes", d.syn.nodes},
                             {"communities", d.syn.communities},
                             {"edges", d.syn.edges},
                             {"min_edge_size", d.syn.min_edge_size},
                             {"max_edge_size", d.syn.max_edge_size},
                             {"dim", d.syn.features},
                             {"signal", d.syn.signal},
                             {"noise", d.syn.noise},
                             {"train_fraction", d.syn.train_fraction},
                             {"val_fraction", d.syn.val_fraction}};
    return thyper::make_planted_communities(seed, d.syn);
  }
  if (d.graph.empty() || d.features.empty() || d.labels.empty() || d.splits.empty()) {
    throw CLI::ValidationError("dataset", "give --graph, --features, --labels and --splits, or --synthetic");
  }
  for (const auto* p : {&d.graph, &d.features, &d.labels, &d.splits}) run.add_input(*p);
  run.config["dataset"] = {{"graph", d.graph}, {"features", d.features}, {"labels", d.labels}, {"splits", d.splits}};
  return thyper::load_dataset(d.graph, d.features, d.labels, d.splits);
}

struct ModelArgs {
  std::string variant = "thgin";
  std::vector<thyper::Index> hidden{64};
  double alpha = 0.1;
  int k = 1;
  std::string activation = "relu";
  std::string readout = "slice_sum";
  int order = 0;
  std::string path = "auto";
};

void add_model(CLI::App* sub, ModelArgs& m) {
  auto* g = sub->add_option_group("model");
  g->add_option("--variant", m.variant)->check(CLI::IsMember({"thgcn", "thgin", "mlp", "clique"}))->capture_default_str();
  g->add_option("--hidden", m.hidden, "Hidden widths, comma separated (empty for none)")
      ->delimiter(',')
      ->expected(0, -1)
      ->capture_default_str();
  g->add_option("--alpha", m.alpha, "Teleport weight of the propagation")->capture_default_str();
  g->add_option("--K", m.k, "Propagation steps")->capture_default_str();
  g->add_option("--activation", m.activation)->check(CLI::IsMember({"relu", "identity", "tanh"}))->capture_default_str();
  g->add_option("--readout", m.readout)->check(CLI::IsMember({"slice_sum", "leading_slice"}))->capture_default_str();
  g->add_option("--order", m.order, "Tensor order (0: the hypergraph's own)")->capture_default_str();
  g->add_option("--path", m.path, "Evaluation path")->check(CLI::IsMember({"auto", "full", "collapsed"}))->capture_default_str();
}

thyper::EvalPath eval_path(const std::string& s) {
  if (s == "full") return thyper::EvalPath::Full;
  if (s == "collapsed") return thyper::EvalPath::Collapsed;
  return thyper::EvalPath::Auto;
}

thyper::ModelConfig model_config(const ModelArgs& m, const thyper::Dataset& ds, std::uint64_t seed) {
  thyper::ModelConfig c;
  c.layer_dims = {ds.num_features()};
  c.layer_dims.insert(c.layer_dims.end(), m.hidden.begin(), m.hidden.end());
  c.layer_dims.push_back(std::max(ds.num_classes(), 1));
  c.variant = thyper::parse_enum<thyper::Variant>(m.variant, "variant");
  c.alpha = m.alpha;
  c.k = m.k;
  c.activation = thyper::parse_enum<thyper::Activation>(m.activation, "activation");
  c.readout = thyper::parse_enum<thyper::Readout>(m.readout, "readout");
  c.seed = seed;
  c.order = m.order;
  c.validate();
  return c;
}

void add_train_opts(CLI::App* sub, thyper::TrainConfig& t) {
  auto* g = sub->add_option_group("optimizer");
  g->add_option("--lr", t.lr)->capture_default_str();
  g->add_option("--weight-decay", t.weight_decay)->capture_default_str();
  g->add_option("--epochs", t.epochs)->capture_default_str();
  g->add_option("--patience", t.patience, "Stop after this many epochs without a better val accuracy (0: off)")
      ->capture_default_str();
}

json split_report(const thyper::Network& net, const thyper::Weights& w, const thyper::Dataset& ds) {
  return {{"train_acc", thyper::split_accuracy(net, w, ds, thyper::Split::Train)},
          {"val_acc", thyper::split_accuracy(net, w, ds, thyper::Split::Val)},
          {"test_acc", thyper::split_accuracy(net, w, ds, thyper::Split::Test)}};
}

// -- subcommands ----------------------------------------------------------------

struct BuildArgs {
  std::string graph;
  int order = 0;
  bool check_rowsum = false;
  bool symmetrize = false;
  std::string out = "adjacency.json";
};

int cmd_build(const BuildArgs& a, Run& run) {
  run.add_input(a.graph);
  const auto g = run.timed("load", [&] { return thyper::load_hypergraph(a.graph); });
  const int order = a.order > 0 ? a.order : std::max(2, g.order());
  run.config = {{"graph", a.graph}, {"order", order}, {"check_rowsum", a.check_rowsum}, {"symmetrize", a.symmetrize}};
  const auto spec = run.timed("build", [&] { return thyper::build_adjacency(g, order); });
  const double dev = thyper::max_row_sum_deviation(spec, thyper::degrees(g));
  const auto t = run.timed("flatten", [&] {
    auto flat = thyper::flatten_to_slices(spec);
    return a.symmetrize ? thyper::symmetrize(flat) : flat;
  });
  run.write_json(a.out, thyper::to_json(t));
  const bool ok = !a.check_rowsum || dev <= 1e-12;
  json report{{"nodes", g.num_nodes()},       {"hyperedges", g.num_edges()}, {"order", order},
              {"nonzeros", spec.entries.size()}, {"shape", {t.rows(), t.cols(), t.n_slices()}},
              {"max_row_sum_deviation", dev},  {"rowsum_ok", ok},            {"out", run.path(a.out)}};
  std::ostringstream os;
  os << "adjacency tensor " << t.rows() << "x" << t.cols() << "x" << t.n_slices() << " (order " << order << ", "
     << spec.entries.size() << " nonzeros) -> " << run.path(a.out) << "\n";
  if (a.check_rowsum) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3e", dev);
    os << "max row-sum deviation: " << buf << (ok ? " (ok)" : " (exceeds 1e-12)") << "\n";
  }
  emit(run, report, os.str());
  return ok ? kExitOk : kExitFailure;
}

struct DenoiseArgs {
  std::string graph, features;
  int order = 0;
  thyper::Index dim = 1;
  double b = 0.5, c = 0.2;
  std::optional<double> alpha;
  int k = 200;
  double tol = 1e-10;
  double noise_sigma = 0.0;
  std::string out = "denoised.json";
  std::string trace = "trace.csv";
};

int cmd_denoise(const DenoiseArgs& a, Run& run) {
  run.add_input(a.graph);
  const auto g = thyper::load_hypergraph(a.graph);
  const int order = a.order > 0 ? a.order : std::max(2, g.order());
  thyper::Matrix x;
  if (!a.features.empty()) {
    run.add_input(a.features);
    auto in = thyper::detail::open_input(a.features);
    x = thyper::read_features_csv(in, g.num_nodes(), a.features);
  } else {
    if (a.dim < 1) throw std::invalid_argument("--dim must be positive");
    auto rng = thyper::substream(run.seed, "features");
    std::normal_distribution<double> n01;
    x = thyper::Matrix::NullaryExpr(g.num_nodes(), a.dim, [&] { return n01(rng); });
  }
  if (a.noise_sigma > 0.0) {
    auto rng = thyper::substream(run.seed, "noise");
    std::normal_distribution<double> n01;
    for (thyper::Index i = 0; i < x.size(); ++i) x.data()[i] += a.noise_sigma * n01(rng);
  }
  thyper::DenoiseConfig cfg;
  cfg.b = a.b;
  cfg.c = a.c;
  cfg.alpha = a.alpha;
  cfg.iterations = a.k;
  cfg.tol = a.tol;
  const auto resolved = cfg.resolved();
  run.config = {{"graph", a.graph},
                {"features", a.features.empty() ? json("random") : json(a.features)},
                {"order", order},
                {"b", resolved.b},
                {"c", resolved.c},
                {"alpha", a.alpha ? json(*a.alpha) : json(nullptr)},
                {"K", a.k},
                {"tol", a.tol},
                {"noise_sigma", a.noise_sigma}};

  const auto shift = run.timed("build", [&] { return thyper::build_shift_tensor(g, order); });
  const auto xs = thyper::build_signal_tensor(x, order);
  const auto res = run.timed("iterate", [&] { return thyper::iterate(xs, shift, cfg); });
  const auto fp = run.timed("fixed_point", [&] { return thyper::fixed_point(xs, shift, resolved.c); });
  const double dist = thyper::max_abs_diff(res.signal, fp);

  run.write_json(a.out, thyper::to_json(res.signal));
  std::string csv = "step,monitor,delta\n";
  char buf[96];
  for (const auto& s : res.trace) {
    std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g\n", s.step, s.monitor, s.delta);
    csv += buf;
  }
  run.write(a.trace, csv);

  const int steps = res.trace.empty() ? 0 : res.trace.back().step;
  const double bound = thyper::contraction_bound(resolved.b, resolved.c);
  json report{{"shape", {xs.rows(), xs.cols(), xs.n_slices()}},
              {"b", resolved.b},
              {"c", resolved.c},
              {"contraction_bound", bound},
              {"steps", steps},
              {"converged", res.converged},
              {"final_delta", res.trace.empty() ? 0.0 : res.trace.back().delta},
              {"fixed_point_max_abs_diff", dist},
              {"out", run.path(a.out)},
              {"trace", run.path(a.trace)}};
  std::ostringstream os;
  std::snprintf(buf, sizeof buf, "%.3e", dist);
  os << "denoised " << xs.rows() << "x" << xs.cols() << "x" << xs.n_slices() << " signal in " << steps << " steps"
     << (res.converged ? " (converged)" : "") << "; b=" << resolved.b << " c=" << resolved.c
     << " bound=" << fixed(bound) << "\n"
     << "max-abs distance to the closed-form fixed point: " << buf << "\n";
  emit(run, report, os.str());
  return kExitOk;
}

struct TrainArgs {
  DataArgs data;
  ModelArgs model;
  thyper::TrainConfig train;
  std::string resume;
};

int cmd_train(TrainArgs& a, const CLI::App* sub, Run& run) {
  const auto ds = run.timed("load", [&] { return load_data(a.data, run); });
  std::optional<thyper::Trainer> trainer;
  if (!a.resume.empty()) {
    run.add_input(a.resume);
    auto ck = thyper::load_checkpoint(a.resume);
    // Model and optimizer settings come from the checkpoint; only the epoch
    // budget and patience can change on resume. A checkpoint.json next to
    // it restores the best-so-far weights.
    if (sub->count("--epochs")) ck.train.epochs = a.train.epochs;
    if (sub->count("--patience")) ck.train.patience = a.train.patience;
    std::optional<thyper::Checkpoint> best;
    const auto best_path = (fs::path(a.resume).parent_path() / "checkpoint.json").string();
    if (fs::exists(best_path) && !fs::equivalent(best_path, a.resume)) {
      run.add_input(best_path);
      best = thyper::load_checkpoint(best_path);
      best->train = ck.train;
    }
    trainer.emplace(ds, ck, eval_path(a.model.path), best);
  } else {
    trainer.emplace(ds, model_config(a.model, ds, run.seed), a.train, eval_path(a.model.path));
  }
  const auto& st = trainer->state();
  run.config["model"] = st.model;
  run.config["train"] = st.train;
  run.config["path"] = a.model.path;
  run.config["resume"] = a.resume;

  std::vector<thyper::EpochMetrics> history;
  run.timed("train", [&] {
    while (!trainer->stopped()) history.push_back(trainer->step());
  });
  const auto res = thyper::finish(*trainer, ds, std::move(history));
  thyper::save_checkpoint(run.path("checkpoint.json"), res.best);
  thyper::save_checkpoint(run.path("last.json"), res.last);
  run.outputs.push_back("checkpoint.json");
  run.outputs.push_back("last.json");
  run.write("metrics.csv", thyper::history_csv(res.history));

  json report{{"epochs_run", res.history.size()},
              {"epoch", res.last.epoch},
              {"best_checkpoint_epoch", res.best.epoch},
              {"best_val_acc", res.best.best_val_acc},
              {"test_acc", res.test_acc},
              {"final_train_acc", res.final_train_acc},
              {"final_train_loss", res.history.empty() ? json(nullptr) : json(res.history.back().train_loss)},
              {"max_shortest_path", thyper::max_shortest_path(ds.graph)},
              {"readout", st.model.readout}};
  run.write_json("report.json", report);
  std::ostringstream os;
  os << thyper::enum_name(st.model.variant) << ": " << res.history.size() << " epochs, final train acc "
     << fixed(res.final_train_acc) << ", best val acc " << fixed(res.best.best_val_acc) << " (after "
     << res.best.epoch << " updates), test acc " << fixed(res.test_acc) << "\n";
  emit(run, report, os.str());
  return kExitOk;
}

struct EvalArgs {
  DataArgs data;
  std::string checkpoint;
  std::string path = "auto";
};

int cmd_eval(const EvalArgs& a, Run& run) {
  run.add_input(a.checkpoint);
  const auto ck = thyper::load_checkpoint(a.checkpoint);
  const auto ds = load_data(a.data, run);
  run.config["checkpoint"] = a.checkpoint;
  run.config["model"] = ck.model;
  const thyper::Network net(ck.model, ds, eval_path(a.path));
  json report = run.timed("eval", [&] { return split_report(net, ck.weights, ds); });
  report["epoch"] = ck.epoch;
  run.write_json("report.json", report);
  std::ostringstream os;
  os << "train " << fixed(report["train_acc"]) << "  val " << fixed(report["val_acc"]) << "  test "
     << fixed(report["test_acc"]) << "\n";
  emit(run, report, os.str());
  return kExitOk;
}

struct GridArgs {
  DataArgs data;
  ModelArgs model;
  thyper::TrainConfig train;
  thyper::GridSpec grid;
};

int cmd_grid(GridArgs& a, Run& run) {
  const auto ds = load_data(a.data, run);
  const auto base = model_config(a.model, ds, run.seed);
  a.grid.base_seed = run.seed;
  run.config["model"] = base;
  run.config["train"] = a.train;
  run.config["grid"] = {{"ks", a.grid.ks}, {"alphas", a.grid.alphas}, {"repeats", a.grid.repeats}};
  const auto res = run.timed("grid", [&] { return thyper::grid_search(ds, base, a.train, a.grid); });
  run.write("grid.csv", thyper::grid_csv(res));
  const int diameter = thyper::max_shortest_path(ds.graph);
  const auto& best = res.cells[res.best];
  json report{{"cells", res.cells.size()},
              {"best", {{"K", best.k}, {"alpha", best.alpha}, {"mean_acc", best.mean_acc},
                        {"std_acc", best.std_acc}}},
              {"max_shortest_path", diameter}};
  run.write_json("report.json", report);
  std::ostringstream os;
  os << thyper::grid_csv(res) << "best: K=" << best.k << " alpha=" << fixed(best.alpha, 2) << " acc "
     << fixed(best.mean_acc) << " +/- " << fixed(best.std_acc) << "; max shortest path " << diameter << "\n";
  emit(run, report, os.str());
  return kExitOk;
}

int cmd_demo_injectivity(Run& run) {
  const auto [g1, g2] = thyper::triangle_witness();
  const auto r = thyper::compare_expansions(g1, g2);
  const json report = thyper::to_json(r);
  run.write_json("injectivity.json", report);
  std::ostringstream os;
  os << "G1 = {{0,1,2}}   G2 = {{0,1},{1,2},{0,2}}\n"
     << "clique expansion G1:\n" << r.clique_a << "\nclique expansion G2:\n" << r.clique_b << "\n"
     << "clique expansions " << (r.cliques_equal() ? "equal" : "DIFFER") << "\n"
     << "order-" << r.order << " adjacency tensors " << (r.tensor_max_abs_diff > 0.0 ? "differ" : "are EQUAL")
     << ", max-abs difference " << r.tensor_max_abs_diff << "\n"
     << (r.holds() ? "witness holds\n" : "witness FAILED\n");
  emit(run, report, os.str());
  return r.holds() ? kExitOk : kExitFailure;
}

int cmd_bench(thyper::BenchOptions opt, Run& run) {
  opt.seed = run.seed;
  run.config = {{"sizes", opt.sizes}, {"cols", opt.cols}, {"repeat", opt.repeat}, {"tol", opt.agreement_tol}};
  const auto rows = run.timed("bench", [&] { return thyper::bench_tproduct(opt); });
  run.write("bench.csv", thyper::bench_csv(rows));
  json report = json::array();
  for (const auto& r : rows) {
    report.push_back({{"N", r.n}, {"n_slices", r.n_slices}, {"path", r.path}, {"repeats", r.repeats},
                      {"min_ms", r.min_ms}, {"median_ms", r.median_ms}, {"max_abs_diff", r.max_abs_diff}});
  }
  emit(run, report, thyper::bench_csv(rows));
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tensor hypergraph signal processing toolkit"};
  app.set_version_flag("--version", THYPER_VERSION);
  app.set_config("--config", "", "key = value file; keys live in a [subcommand] section");
  app.allow_config_extras(CLI::config_extras_mode::error);
  app.require_subcommand(1);

  Run run;
  run.argv.assign(argv, argv + argc);

  BuildArgs build;
  auto* s_build = app.add_subcommand("build", "Build the adjacency tensor of a hypergraph");
  s_build->add_option("--graph", build.graph, "Hyperedge list")->required()->check(CLI::ExistingFile);
  s_build->add_option("--order", build.order, "Tensor order (0: the hypergraph's own)")->capture_default_str();
  s_build->add_flag("--check-rowsum", build.check_rowsum, "Report the max row-sum deviation; fail above 1e-12");
  s_build->add_flag("--symmetrize", build.symmetrize, "Emit the reflection-symmetrized shift tensor");
  s_build->add_option("--out", build.out, "Tensor JSON file name inside --out-dir")->capture_default_str();

  DenoiseArgs den;
  auto* s_den = app.add_subcommand("denoise", "Iteratively denoise a hypergraph signal");
  s_den->add_option("--graph", den.graph, "Hyperedge list")->required()->check(CLI::ExistingFile);
  s_den->add_option("--features", den.features, "Feature CSV (default: seeded gaussian features)")
      ->check(CLI::ExistingFile);
  s_den->add_option("--dim", den.dim, "Random feature count when --features is absent")->capture_default_str();
  s_den->add_option("--order", den.order, "Tensor order (0: the hypergraph's own)")->capture_default_str();
  s_den->add_option("--b", den.b, "Step weight")->capture_default_str();
  s_den->add_option("--c", den.c, "Smoothness weight")->capture_default_str();
  s_den->add_option("--alpha", den.alpha, "Teleport form; overrides --b and --c");
  s_den->add_option("--K", den.k, "Iteration budget")->capture_default_str();
  s_den->add_option("--tol", den.tol, "Stop when the max-abs update falls below this")->capture_default_str();
  s_den->add_option("--noise-sigma", den.noise_sigma, "Gaussian noise added to the features first")
      ->capture_default_str();
  s_den->add_option("--out", den.out)->capture_default_str();
  s_den->add_option("--trace", den.trace)->capture_default_str();

  TrainArgs tr;
  auto* s_train = app.add_subcommand("train", "Train a node classifier");
  add_data(s_train, tr.data);
  add_model(s_train, tr.model);
  add_train_opts(s_train, tr.train);
  s_train->add_option("--resume", tr.resume, "Continue from a saved checkpoint (last.json)")->check(CLI::ExistingFile);

  EvalArgs ev;
  auto* s_eval = app.add_subcommand("eval", "Evaluate a checkpoint");
  s_eval->add_option("--checkpoint", ev.checkpoint)->required()->check(CLI::ExistingFile);
  add_data(s_eval, ev.data);
  s_eval->add_option("--path", ev.path)->check(CLI::IsMember({"auto", "full", "collapsed"}))->capture_default_str();

  GridArgs gr;
  auto* s_grid = app.add_subcommand("grid", "Seeded grid search over K and alpha");
  add_data(s_grid, gr.data);
  add_model(s_grid, gr.model);
  add_train_opts(s_grid, gr.train);
  s_grid->add_option("--ks", gr.grid.ks)->delimiter(',')->capture_default_str();
  s_grid->add_option("--alphas", gr.grid.alphas)->delimiter(',')->capture_default_str();
  s_grid->add_option("--repeats", gr.grid.repeats, "Runs per cell, seeds seed..seed+R-1")->capture_default_str();
  s_grid->add_option("--threads", gr.grid.threads, "Worker threads")->capture_default_str();

  auto* s_inj = app.add_subcommand("demo-injectivity", "Show two hypergraphs with equal clique expansions");

  thyper::BenchOptions bench;
  auto* s_bench = app.add_subcommand("bench", "Time the direct and Fourier t-products");
  s_bench->add_option("--sizes", bench.sizes)->delimiter(',')->capture_default_str();
  s_bench->add_option("--cols", bench.cols, "Columns of the right operand")->capture_default_str();
  s_bench->add_option("--repeat", bench.repeat)->capture_default_str();
  s_bench->add_option("--tol", bench.agreement_tol, "Max-abs agreement required")->capture_default_str();

  for (auto* s : {s_build, s_den, s_train, s_eval, s_grid, s_inj, s_bench}) add_common(s, run);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitUsage;
  }

  CLI::App* sub = app.get_subcommands().front();
  run.command = sub->get_name();
  run.config_text = sub->config_to_str(true, false);
  int rc = kExitOk;
  std::string error;
  try {
    run.prepare();
    if (sub == s_build) rc = cmd_build(build, run);
    else if (sub == s_den) rc = cmd_denoise(den, run);
    else if (sub == s_train) rc = cmd_train(tr, sub, run);
    else if (sub == s_eval) rc = cmd_eval(ev, run);
    else if (sub == s_grid) rc = cmd_grid(gr, run);
    else if (sub == s_inj) rc = cmd_demo_injectivity(run);
    else rc = cmd_bench(bench, run);
  } catch (const CLI::Error& e) {
    error = e.what();
    rc = kExitUsage;
  } catch (const thyper::ParseError& e) {
    error = e.what();
    rc = kExitUsage;
  } catch (const std::ios_base::failure& e) {
    error = e.what();
    rc = kExitUsage;
  } catch (const fs::filesystem_error& e) {
    error = e.what();
    rc = kExitUsage;
  } catch (const std::invalid_argument& e) {
    error = e.what();
    rc = kExitUsage;
  } catch (const json::exception& e) {
    error = e.what();
    rc = kExitUsage;
  } catch (const std::exception& e) {
    error = e.what();
    rc = kExitFailure;
  }
  if (!error.empty()) std::cerr << "error: " << error << "\n";
  if (run.dir_ready) {
    try {
      run.write_manifest(rc, error);
    } catch (const std::exception& e) {
      std::cerr << "error: cannot write manifest: " << e.what() << "\n";
      if (rc == kExitOk) rc = kExitUsage;
    }
  }
  return rc;
}
