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

#include <gtest/gtest.h>

#include <cmath>

#include "thyper/train.hpp"

using namespace thyper;

namespace {

Dataset small_dataset(std::uint64_t seed = 1) {
  SyntheticOptions opt;
  opt.nodes = 20;
  opt.edges = 10;
  opt.min_edge_size = 3;
  opt.max_edge_size = 3;
  opt.features = 4;
  opt.noise = 0.5;
  return make_planted_communities(seed, opt);
}

ModelConfig small_model(std::uint64_t seed = 0) {
  ModelConfig m;
  m.layer_dims = {4, 8, 2};
  m.alpha = 0.2;
  m.k = 2;
  m.seed = seed;
  return m;
}

TrainConfig short_run(int epochs = 15) {
  TrainConfig t;
  t.epochs = epochs;
  return t;
}

bool same_history(const std::vector<EpochMetrics>& a, const std::vector<EpochMetrics>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].epoch != b[i].epoch || a[i].train_loss != b[i].train_loss || a[i].train_acc != b[i].train_acc ||
        a[i].val_acc != b[i].val_acc) {
      return false;
    }
  }
  return true;
}

}  // namespace

TEST(Adam, FirstStepMovesEachWeightByLearningRate) {
  Weights w{Matrix::Constant(2, 2, 1.0)};
  Weights g{Matrix::Zero(2, 2)};
  g[0] << 3.0, -0.5, 1e-3, 0.0;
  AdamState st = AdamState::zeros_like(w);
  TrainConfig tc;
  tc.lr = 0.1;
  adam_step(w, g, st, tc);
  EXPECT_NEAR(w[0](0, 0), 0.9, 1e-7);
  EXPECT_NEAR(w[0](0, 1), 1.1, 1e-7);
  EXPECT_NEAR(w[0](1, 0), 0.9, 1e-5);
  EXPECT_EQ(w[0](1, 1), 1.0);
  EXPECT_EQ(st.t, 1);
}

TEST(Adam, MinimizesQuadratic) {
  Weights w{Matrix::Constant(1, 3, 5.0)};
  AdamState st = AdamState::zeros_like(w);
  TrainConfig tc;
  tc.lr = 0.05;
  for (int i = 0; i < 2000; ++i) adam_step(w, {2.0 * w[0]}, st, tc);
  EXPECT_LT(w[0].cwiseAbs().maxCoeff(), 1e-3);
}

TEST(Train, SameSeedSameHistory) {
  const Dataset ds = small_dataset();
  const auto a = train(ds, small_model(3), short_run());
  const auto b = train(ds, small_model(3), short_run());
  EXPECT_TRUE(same_history(a.history, b.history));
  EXPECT_EQ(serialize_checkpoint(a.last), serialize_checkpoint(b.last));
  const auto c = train(ds, small_model(4), short_run());
  EXPECT_FALSE(same_history(a.history, c.history));
}

TEST(Train, ZeroLearningRateLeavesModelUnchanged) {
  const Dataset ds = small_dataset();
  TrainConfig tc = short_run(8);
  tc.lr = 0.0;
  const auto r = train(ds, small_model(1), tc);
  const Weights init = init_weights(small_model(1));
  for (std::size_t l = 0; l < init.size(); ++l) EXPECT_EQ(r.last.weights[l], init[l]);
  for (const auto& m : r.history) {
    EXPECT_EQ(m.train_loss, r.history.front().train_loss);
    EXPECT_EQ(m.train_acc, r.history.front().train_acc);
    EXPECT_EQ(m.val_acc, r.history.front().val_acc);
  }
}

TEST(Train, LossDecreasesAndFitsEasyData) {
  const Dataset ds = small_dataset();
  const auto r = train(ds, small_model(0), short_run(150));
  EXPECT_LT(r.history.back().train_loss, r.history.front().train_loss);
  EXPECT_GE(r.final_train_acc, 0.9);
}

TEST(Train, BestCheckpointHoldsBestValidationWeights) {
  const Dataset ds = small_dataset();
  const auto r = train(ds, small_model(2), short_run(30));
  double best = -1.0;
  int best_epoch = 0;
  for (const auto& m : r.history) {
    if (m.val_acc > best) {
      best = m.val_acc;
      best_epoch = m.epoch;
    }
  }
  EXPECT_EQ(r.best.best_val_acc, best);
  EXPECT_EQ(r.best.epoch, best_epoch - 1);
  const Network net(r.best.model, ds);
  EXPECT_EQ(split_accuracy(net, r.best.weights, ds, Split::Val), best);
}

TEST(Train, PatienceStopsEarly) {
  const Dataset ds = small_dataset();
  TrainConfig tc = short_run(500);
  tc.patience = 5;
  tc.lr = 0.0;
  const auto r = train(ds, small_model(), tc);
  EXPECT_EQ(r.history.size(), 6u);
}

TEST(Train, NonFiniteLossRaises) {
  const Dataset ds = small_dataset();
  TrainConfig tc = short_run(5);
  tc.lr = 1e200;
  EXPECT_THROW(train(ds, small_model(), tc), DivergenceError);
}

TEST(Train, RejectsNonFiniteFeatures) {
  Dataset ds = small_dataset();
  ds.features(0, 0) = std::nan("");
  EXPECT_THROW(train(ds, small_model(), short_run(3)), std::invalid_argument);
}

TEST(Checkpoint, RoundTripsByteForByte) {
  const Dataset ds = small_dataset();
  const auto r = train(ds, small_model(5), short_run(4));
  const std::string text = serialize_checkpoint(r.last);
  const Checkpoint back = parse_checkpoint(text);
  EXPECT_EQ(serialize_checkpoint(back), text);
  EXPECT_EQ(back.weights[0], r.last.weights[0]);
  EXPECT_EQ(back.adam.v[1], r.last.adam.v[1]);
  EXPECT_EQ(back.epoch, 4);
}

TEST(Checkpoint, ResumeReproducesNextEpoch) {
  const Dataset ds = small_dataset();
  Trainer straight(ds, small_model(6), short_run(12));
  std::vector<EpochMetrics> ref;
  while (!straight.stopped()) ref.push_back(straight.step());

  Trainer first(ds, small_model(6), short_run(12));
  for (int e = 0; e < 7; ++e) first.step();
  const Checkpoint saved = parse_checkpoint(serialize_checkpoint(first.state()));
  Trainer resumed(ds, saved);
  for (std::size_t e = 7; e < ref.size(); ++e) {
    const EpochMetrics m = resumed.step();
    EXPECT_EQ(m.epoch, ref[e].epoch);
    EXPECT_NEAR(m.train_loss, ref[e].train_loss, 1e-12);
  }
  EXPECT_TRUE(resumed.stopped());
}

TEST(Checkpoint, RejectsForeignDocuments) {
  EXPECT_THROW(parse_checkpoint("{\"format\": \"other\"}"), std::invalid_argument);
  EXPECT_THROW(parse_checkpoint("not json"), std::invalid_argument);
  const Dataset ds = small_dataset();
  auto j = checkpoint_json(train(ds, small_model(), short_run(1)).last);
  j["version"] = 99;
  EXPECT_THROW(checkpoint_from_json(j), std::invalid_argument);
}

TEST(Metrics, CsvSchema) {
  const std::string csv = history_csv({{1, 0.5, 0.25, 0.75}});
  EXPECT_EQ(csv, "epoch,train_loss,train_acc,val_acc\n1,0.5000000000,0.250000,0.750000\n");
}

TEST(Grid, SingleCellEqualsSingleRun) {
  const Dataset ds = small_dataset();
  GridSpec g;
  g.ks = {2};
  g.alphas = {0.3};
  g.base_seed = 11;
  const auto res = grid_search(ds, small_model(), short_run(), g);
  ModelConfig m = small_model(11);
  m.alpha = 0.3;
  ASSERT_EQ(res.cells.size(), 1u);
  EXPECT_EQ(res.cells[0].mean_acc, train(ds, m, short_run()).test_acc);
  EXPECT_EQ(res.cells[0].std_acc, 0.0);
}

TEST(Grid, FullGridShapeStatsAndThreadInvariance) {
  const Dataset ds = small_dataset();
  GridSpec g;
  g.repeats = 2;
  const auto a = grid_search(ds, small_model(), short_run(5), g);
  ASSERT_EQ(a.cells.size(), 25u);
  for (const auto& c : a.cells) {
    EXPECT_EQ(c.n_runs, 2);
    EXPECT_NEAR(c.mean_acc, 0.5 * (c.runs[0] + c.runs[1]), 1e-15);
    EXPECT_NEAR(c.std_acc, std::abs(c.runs[0] - c.runs[1]) / std::sqrt(2.0), 1e-12);
  }
  const std::string csv = grid_csv(a);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 26);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "K,alpha,mean_acc,std_acc,n_runs");
  g.threads = 3;
  EXPECT_EQ(grid_csv(grid_search(ds, small_model(), short_run(5), g)), csv);
  for (const auto& c : a.cells) EXPECT_LE(c.mean_acc, a.cells[a.best].mean_acc);
}
