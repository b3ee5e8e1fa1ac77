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

#include "test_util.hpp"
#include "thyper/nn.hpp"

using namespace thyper;
using testutil::random_hypergraph;
using testutil::random_tensor;

namespace {

struct Instance {
  Tensor3 x;
  Tensor3 a_s;
};

Instance make_instance(Rng& rng, Index n, Index d) {
  Instance in;
  in.a_s = build_shift_tensor(random_hypergraph(rng, n, 3, static_cast<int>(n)), 3);
  in.x = build_signal_tensor(random_tensor(rng, n, d, 1).unfolded(), 3);
  return in;
}

Weights random_weights(Rng& rng, std::vector<Index> dims) {
  Weights w;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) w.push_back(random_tensor(rng, dims[l], dims[l + 1], 1).unfolded());
  return w;
}

/// Embeds W as the first slice of an otherwise zero tensor.
Tensor3 lift(const Matrix& w, Index n_slices) {
  Tensor3 t(w.rows(), w.cols(), n_slices);
  t.slice(0) = w;
  return t;
}

ModelConfig small_config(Variant v, Activation act, Readout r, int k = 3, double alpha = 0.3) {
  ModelConfig c;
  c.layer_dims = {3, 4, 2};
  c.variant = v;
  c.k = v == Variant::THGCN ? 1 : k;
  c.alpha = alpha;
  c.activation = act;
  c.readout = r;
  return c;
}

std::vector<int> random_labels(Rng& rng, Index n, int classes) {
  std::uniform_int_distribution<int> u(0, classes - 1);
  std::vector<int> y(static_cast<std::size_t>(n));
  for (auto& v : y) v = u(rng);
  return y;
}

double max_weight_relative_error(const Weights& a, const Weights& b) {
  double worst = 0.0;
  for (std::size_t l = 0; l < a.size(); ++l) {
    for (Index i = 0; i < a[l].size(); ++i) {
      const double x = a[l].data()[i], y = b[l].data()[i];
      worst = std::max(worst, std::abs(x - y) / std::max({std::abs(x), std::abs(y), 1e-6}));
    }
  }
  return worst;
}

Weights finite_difference(const Network& net, Weights w, const std::vector<int>& y, const std::vector<bool>& mask,
                          double wd, double h = 1e-5) {
  Weights g;
  for (auto& m : w) {
    Matrix gm(m.rows(), m.cols());
    for (Index i = 0; i < m.size(); ++i) {
      const double keep = m.data()[i];
      m.data()[i] = keep + h;
      const double up = net.evaluate(w, y, mask, wd, false).loss;
      m.data()[i] = keep - h;
      const double down = net.evaluate(w, y, mask, wd, false).loss;
      m.data()[i] = keep;
      gm.data()[i] = (up - down) / (2 * h);
    }
    g.push_back(std::move(gm));
  }
  return g;
}

}  // namespace

// -- transform -----------------------------------------------------------------

TEST(Transform, IdentityWeightIsIdentity) {
  Rng rng(70);
  const Tensor3 x = random_tensor(rng, 5, 3, 7);
  EXPECT_EQ(transform(x, {Matrix::Identity(3, 3)}, Activation::Identity), x);
}

TEST(Transform, KeepsZeroSliceOfSymmetrizedInput) {
  Rng rng(71);
  const auto in = make_instance(rng, 6, 3);
  const Tensor3 out = transform(in.x, random_weights(rng, {3, 5, 2}), Activation::ReLU);
  EXPECT_EQ(out.slice(0).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_TRUE(out.symmetrized());
  EXPECT_TRUE(out.has_reflection_structure());
}

TEST(Transform, SingleLayerIsProductWithLiftedWeight) {
  Rng rng(72);
  for (Index ns : {1, 3, 9}) {
    const Tensor3 x = random_tensor(rng, 4, 3, ns);
    const Matrix w = random_tensor(rng, 3, 5, 1).unfolded();
    EXPECT_LE(max_abs_diff(transform(x, {w}, Activation::ReLU), t_product(x, lift(w, ns))), 1e-10);
  }
}

TEST(Transform, RejectsDimensionMismatch) {
  const Tensor3 x(4, 3, 3);
  EXPECT_THROW(transform(x, {Matrix::Zero(2, 2)}), DimensionError);
  EXPECT_THROW(transform(x, {Matrix::Zero(3, 2), Matrix::Zero(3, 2)}), DimensionError);
  EXPECT_THROW(transform(x, {}), DimensionError);
}

// -- shifting and propagation --------------------------------------------------

TEST(Thgcn, IdentityShiftIsTransformOnly) {
  Rng rng(73);
  const auto in = make_instance(rng, 5, 3);
  const Weights w = random_weights(rng, {3, 4, 2});
  const ShiftOperator id(identity_tensor(5, in.x.n_slices()));
  EXPECT_LE(max_abs_diff(thgcn_forward(in.x, id, w), transform(in.x, w)), 1e-15);
}

TEST(Thgcn, ZeroInputGivesZero) {
  Rng rng(74);
  const auto in = make_instance(rng, 5, 3);
  const Tensor3 zero(5, 3, in.x.n_slices());
  EXPECT_EQ(thgcn_forward(zero, ShiftOperator(in.a_s), random_weights(rng, {3, 4, 2})).max_abs(), 0.0);
}

TEST(Thgin, AlphaZeroSingleStepIsThgcnBitwise) {
  Rng rng(75);
  for (int trial = 0; trial < 10; ++trial) {
    const Index n = 3 + trial % 5;
    const auto in = make_instance(rng, n, 2 + trial % 3);
    const Weights w = random_weights(rng, {in.x.cols(), 4, 3});
    for (ProductPath p : {ProductPath::Direct, ProductPath::Fourier}) {
      const ShiftOperator a(in.a_s, p);
      EXPECT_TRUE(thgin_forward(in.x, a, w, 0.0, 1) == thgcn_forward(in.x, a, w)) << "trial " << trial;
    }
  }
}

TEST(Thgin, AlphaOneReturnsTransformedInput) {
  Rng rng(76);
  const auto in = make_instance(rng, 6, 3);
  const Weights w = random_weights(rng, {3, 4, 2});
  const ShiftOperator a(in.a_s);
  for (int k : {1, 3, 7}) EXPECT_TRUE(thgin_forward(in.x, a, w, 1.0, k) == transform(in.x, w)) << k;
}

TEST(Thgin, ManyStepsApproachPersonalizedPageRank) {
  Rng rng(77);
  for (int trial = 0; trial < 5; ++trial) {
    const auto in = make_instance(rng, 7, 3);
    const Weights w = random_weights(rng, {3, 4, 2});
    const double alpha = 0.2;
    const Tensor3 xp = transform(in.x, w);
    Tensor3 sys = identity_tensor(7, in.x.n_slices());
    sys -= (1.0 - alpha) * in.a_s;
    const Tensor3 closed = alpha * t_solve(sys, xp);
    const Tensor3 y = thgin_forward(in.x, ShiftOperator(in.a_s), w, alpha, 50);
    // Error after K steps is ((1 - alpha) A)^K (X' - Y*), and bcirc(A) has unit max-abs row sums.
    const double bound = std::pow(1.0 - alpha, 50) * max_abs_diff(xp, closed);
    EXPECT_LE(max_abs_diff(y, closed), bound * (1 + 1e-9) + 1e-13);
    EXPECT_LE(max_abs_diff(y, closed), 1e-6);
  }
}

// Property: successive iterates shrink by at least (1 - alpha) rho-hat.
TEST(Thgin, SuccessiveOutputsContract) {
  Rng rng(78);
  for (int trial = 0; trial < 8; ++trial) {
    const auto in = make_instance(rng, 6, 2);
    const Weights w = random_weights(rng, {2, 2});
    const double alpha = 0.1 + 0.1 * (trial % 5);
    const double rho = frequency_norm_bound(in.a_s);
    ASSERT_LE(spectral_radius(in.a_s), rho + 1e-12);
    const ShiftOperator a(in.a_s);
    double prev = -1.0;
    Tensor3 last = thgin_forward(in.x, a, w, alpha, 1);
    for (int k = 2; k <= 12; ++k) {
      const Tensor3 y = thgin_forward(in.x, a, w, alpha, k);
      const double gap = max_abs_diff(y, last);
      if (prev > 1e-14) EXPECT_LE(gap, (1.0 - alpha) * rho * prev * (1 + 1e-9) + 1e-15);
      prev = gap;
      last = y;
    }
  }
}

// -- readout and loss ----------------------------------------------------------

TEST(Readout, LeadingSliceDoublesSecondSlice) {
  Tensor3 y(3, 2, 3);
  y.slice(1) << 1, 2, 3, 4, 5, 6;
  Matrix expected(3, 2);
  expected << 2, 4, 6, 8, 10, 12;
  EXPECT_EQ(readout(y, Readout::LeadingSlice), expected);
}

TEST(Readout, SliceSumUndoesSymmetrization) {
  Rng rng(79);
  const Tensor3 s = random_tensor(rng, 4, 3, 1);
  EXPECT_LE((readout(symmetrize(s), Readout::SliceSum) - s.slice(0)).cwiseAbs().maxCoeff(), 1e-15);
  const Tensor3 many = random_tensor(rng, 4, 3, 5);
  EXPECT_LE((readout(symmetrize(many), Readout::SliceSum) - readout(many, Readout::SliceSum)).cwiseAbs().maxCoeff(),
            1e-14);
}

TEST(Readout, ZeroTensorGivesZero) {
  for (Readout r : {Readout::SliceSum, Readout::LeadingSlice}) {
    EXPECT_EQ(readout(Tensor3(3, 2, 5), r), Matrix::Zero(3, 2));
  }
}

TEST(Loss, UniformLogitsGiveLogC) {
  for (int c : {2, 3, 7}) {
    const Matrix logits = Matrix::Constant(4, c, 0.3);
    const auto r = cross_entropy(logits, {0, 1, 0, 1}, {true, true, false, true});
    EXPECT_NEAR(r.value, std::log(static_cast<double>(c)), 1e-14);
  }
}

TEST(Loss, LargeMarginDrivesLossToZero) {
  double prev = 1e300;
  for (double margin : {1.0, 5.0, 20.0, 50.0}) {
    Matrix logits = Matrix::Zero(2, 3);
    logits(0, 2) = margin;
    logits(1, 0) = margin;
    const double v = cross_entropy(logits, {2, 0}, {true, true}).value;
    EXPECT_LT(v, prev);
    prev = v;
  }
  EXPECT_LT(prev, 1e-20);
}

TEST(Loss, GradientMatchesFiniteDifferences) {
  Rng rng(80);
  Matrix logits = random_tensor(rng, 5, 3, 1, -2, 2).unfolded();
  const std::vector<int> y{0, 2, 1, 1, 0};
  const std::vector<bool> mask{true, false, true, true, true};
  const auto r = cross_entropy(logits, y, mask);
  for (Index i = 0; i < logits.size(); ++i) {
    Matrix p = logits, q = logits;
    p.data()[i] += 1e-6;
    q.data()[i] -= 1e-6;
    const double fd = (cross_entropy(p, y, mask).value - cross_entropy(q, y, mask).value) / 2e-6;
    EXPECT_NEAR(r.grad.data()[i], fd, 1e-8);
  }
}

TEST(Loss, RejectsEmptyMaskAndMissingLabels) {
  const Matrix logits = Matrix::Zero(2, 2);
  EXPECT_THROW(cross_entropy(logits, {0, 1}, {false, false}), std::invalid_argument);
  EXPECT_THROW(cross_entropy(logits, {0, -1}, {true, true}), std::invalid_argument);
}

// -- gradients -----------------------------------------------------------------

TEST(Backward, ZeroUpstreamGivesZeroGradient) {
  Rng rng(81);
  const Matrix in = random_tensor(rng, 6, 3, 1).unfolded();
  const Weights w = random_weights(rng, {3, 4, 2});
  detail::MlpTape tape;
  detail::mlp_forward(in, w, Activation::ReLU, &tape);
  Weights g{Matrix::Zero(3, 4), Matrix::Zero(4, 2)};
  detail::mlp_backward(in, w, Activation::ReLU, tape, Matrix::Zero(6, 2), g);
  EXPECT_EQ(g[0].cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(g[1].cwiseAbs().maxCoeff(), 0.0);
}

TEST(Backward, LinearModelHandDerivation) {
  // Two nodes, two features, identity weights: logits = X, so the gradient is
  // X^T (softmax(X) - onehot) / 2.
  Matrix xm(2, 2);
  xm << 1.0, 0.0, 0.0, 2.0;
  ModelConfig cfg;
  cfg.layer_dims = {2, 2};
  cfg.variant = Variant::MLP;
  const Network net(cfg, Tensor3(xm, 2, 1), std::nullopt);
  const Weights w{Matrix::Identity(2, 2)};
  const auto ev = net.evaluate(w, {1, 1}, {true, true}, 0.0, true);
  const double e = std::exp(1.0), f = std::exp(2.0);
  Matrix resid(2, 2);
  resid << e / (e + 1) - 0.0, 1 / (e + 1) - 1.0, 1 / (1 + f), f / (1 + f) - 1.0;
  const Matrix expected = xm.transpose() * resid / 2.0;
  EXPECT_LE((ev.grad[0] - expected).cwiseAbs().maxCoeff(), 1e-15);
}

struct GradCase {
  Variant variant;
  Activation act;
  Readout readout;
  EvalPath path;
};

class ModelGradient : public ::testing::TestWithParam<GradCase> {};

TEST_P(ModelGradient, MatchesFiniteDifferencesOverSeeds) {
  const GradCase gc = GetParam();
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(1000 + seed);
    const auto in = make_instance(rng, 6, 3);
    ModelConfig cfg = small_config(gc.variant, gc.act, gc.readout);
    cfg.seed = seed;
    const Network net(cfg, in.x, in.a_s, gc.path);
    const Weights w = init_weights(cfg);
    const auto y = random_labels(rng, 6, 2);
    const std::vector<bool> mask{true, true, false, true, true, true};
    const auto ev = net.evaluate(w, y, mask, 5e-4, true);
    EXPECT_LE(max_weight_relative_error(ev.grad, finite_difference(net, w, y, mask, 5e-4)), 1e-5) << "seed " << seed;
  }
}

INSTANTIATE_TEST_SUITE_P(
    Variants, ModelGradient,
    ::testing::Values(GradCase{Variant::THGIN, Activation::Tanh, Readout::SliceSum, EvalPath::Full},
                      GradCase{Variant::THGIN, Activation::Tanh, Readout::SliceSum, EvalPath::Collapsed},
                      GradCase{Variant::THGIN, Activation::ReLU, Readout::SliceSum, EvalPath::Collapsed},
                      GradCase{Variant::THGIN, Activation::ReLU, Readout::LeadingSlice, EvalPath::Full},
                      GradCase{Variant::THGCN, Activation::Tanh, Readout::LeadingSlice, EvalPath::Full},
                      GradCase{Variant::Clique, Activation::Tanh, Readout::SliceSum, EvalPath::Full}));

// -- collapsed path ------------------------------------------------------------

TEST(Collapsed, MatchesFullPath) {
  Rng rng(82);
  for (Variant v : {Variant::THGIN, Variant::THGCN, Variant::MLP}) {
    for (Activation act : {Activation::ReLU, Activation::Tanh, Activation::Identity}) {
      const auto in = make_instance(rng, 7, 3);
      ModelConfig cfg = small_config(v, act, Readout::SliceSum);
      const Network full(cfg, in.x, in.a_s, EvalPath::Full);
      const Network fast(cfg, in.x, in.a_s, EvalPath::Collapsed);
      const Weights w = random_weights(rng, {3, 4, 2});
      const auto y = random_labels(rng, 7, 2);
      const std::vector<bool> mask(7, true);
      const auto a = full.evaluate(w, y, mask, 1e-3, true);
      const auto b = fast.evaluate(w, y, mask, 1e-3, true);
      EXPECT_LE((a.logits - b.logits).cwiseAbs().maxCoeff(), 1e-10);
      EXPECT_NEAR(a.loss, b.loss, 1e-12);
      for (std::size_t l = 0; l < w.size(); ++l) EXPECT_LE((a.grad[l] - b.grad[l]).cwiseAbs().maxCoeff(), 1e-10);
    }
  }
}

TEST(Collapsed, DatasetBindingMatchesFullPath) {
  SyntheticOptions opt;
  opt.nodes = 14;
  opt.edges = 8;
  opt.features = 4;
  const Dataset ds = make_planted_communities(3, opt);
  ModelConfig cfg;
  cfg.layer_dims = {4, 6, 2};
  cfg.k = 3;
  const Network full(cfg, ds, EvalPath::Full);
  const Network fast(cfg, ds, EvalPath::Collapsed);
  EXPECT_EQ(fast.path(), EvalPath::Collapsed);
  EXPECT_EQ(full.n_slices(), fast.n_slices());
  const Weights w = init_weights(cfg);
  const auto mask = ds.mask(Split::Train);
  const auto a = full.evaluate(w, ds.labels, mask, 0.0, true);
  const auto b = fast.evaluate(w, ds.labels, mask, 0.0, true);
  const double scale = 1.0 + a.logits.cwiseAbs().maxCoeff();
  EXPECT_LE((a.logits - b.logits).cwiseAbs().maxCoeff(), 1e-10 * scale);
  for (std::size_t l = 0; l < w.size(); ++l) {
    EXPECT_LE((a.grad[l] - b.grad[l]).cwiseAbs().maxCoeff(), 1e-10 * (1.0 + a.grad[l].cwiseAbs().maxCoeff()));
  }
}

TEST(Collapsed, RequiresSliceSumReadout) {
  Rng rng(83);
  const auto in = make_instance(rng, 4, 3);
  const ModelConfig cfg = small_config(Variant::THGIN, Activation::ReLU, Readout::LeadingSlice);
  EXPECT_THROW(Network(cfg, in.x, in.a_s, EvalPath::Collapsed), std::invalid_argument);
  EXPECT_EQ(Network(cfg, in.x, in.a_s).path(), EvalPath::Full);
}

// -- config --------------------------------------------------------------------

TEST(ModelConfigTest, ValidationAndJson) {
  ModelConfig c;
  c.variant = Variant::THGCN;
  c.k = 2;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = {};
  c.alpha = -0.1;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = {};
  c.layer_dims = {8};
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = {};
  c.variant = Variant::Clique;
  c.k = 4;
  c.readout = Readout::LeadingSlice;
  c.seed = 99;
  const nlohmann::json j = c;
  EXPECT_EQ(j.at("variant"), "clique");
  const auto back = j.get<ModelConfig>();
  EXPECT_EQ(nlohmann::json(back), j);
  EXPECT_THROW(parse_enum<Variant>("hgnn", "variant"), std::invalid_argument);
}

TEST(ModelConfigTest, InitIsSeededAndBounded) {
  ModelConfig c;
  c.layer_dims = {8, 64, 2};
  c.seed = 5;
  const Weights a = init_weights(c), b = init_weights(c);
  EXPECT_EQ(a[0], b[0]);
  EXPECT_EQ(a[1], b[1]);
  EXPECT_LE(a[0].cwiseAbs().maxCoeff(), std::sqrt(6.0 / 72.0));
  EXPECT_LE(a[1].cwiseAbs().maxCoeff(), std::sqrt(6.0 / 66.0));
  c.seed = 6;
  EXPECT_NE(init_weights(c)[0], a[0]);
}
