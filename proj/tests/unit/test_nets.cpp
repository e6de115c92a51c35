#include <gtest/gtest.h>

#include <algorithm>
#include <functional>
#include <numeric>

#include "stc/autodiff/ops.hpp"
#include "stc/nets/pooling.hpp"
#include "stc/nets/temporal_conv.hpp"
#include "test_util.hpp"

using namespace stc;
using ad::Tensor;

namespace {

void zero_all(ad::ParamStore& s) {
  for (auto& [name, p] : s) std::fill(p.value.data().begin(), p.value.data().end(), 0.0);
}

// Sort-and-average reference for one pooled column.
double topk_reference(std::vector<double> column, std::size_t k) {
  std::sort(column.begin(), column.end(), std::greater<>());
  const std::size_t n = std::min(k, column.size());
  return std::accumulate(column.begin(), column.begin() + static_cast<std::ptrdiff_t>(n), 0.0) /
         static_cast<double>(n);
}

Tensor pool(const Tensor& frames, std::size_t k) {
  ad::Tape tape;
  return nets::topk_pool(tape.constant(frames), k).value();
}

Tensor reweighted(const Tensor& x, const Tensor& p) {
  ad::Tape tape;
  return nets::reweight(tape.constant(x), tape.constant(p)).value();
}

}  // namespace

TEST(LocalizationModule, ZeroWeightsGiveHalfProbabilityAndFirstFrame) {
  nets::LocalizationModule lm({4, 5, 8, 0.0});
  ad::ParamStore s;
  Rng rng(0);
  lm.init(s, rng);
  zero_all(s);
  const auto out = lm.infer(s, testutil::random_tensor({40, 4}, rng));
  ASSERT_EQ(out.scores.size(), 40u);
  for (std::size_t i = 0; i < 40; ++i) {
    EXPECT_EQ(out.scores[i], 0.0);
    EXPECT_EQ(out.probabilities[i], 0.5);
  }
  EXPECT_EQ(out.predicted_timestamp, 0u);
}

TEST(LocalizationModule, SingleFrameInput) {
  nets::LocalizationModule lm({4, 5, 8, 0.0});
  ad::ParamStore s;
  Rng rng(1);
  lm.init(s, rng);
  const auto out = lm.infer(s, testutil::random_tensor({1, 4}, rng));
  EXPECT_EQ(out.scores.size(), 1u);
  EXPECT_EQ(out.predicted_timestamp, 0u);
}

TEST(LocalizationModule, ProbabilitiesAreSigmoidAndTimestampIsArgmax) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed);
    nets::LocalizationModule lm({3, 3, 6, 0.0});
    ad::ParamStore s;
    lm.init(s, rng);
    const auto T = static_cast<std::size_t>(uniform_int(rng, 1, 80));
    const auto out = lm.infer(s, testutil::random_tensor({T, 3}, rng));
    ASSERT_EQ(out.scores.size(), T);
    ASSERT_EQ(out.probabilities.size(), T);
    std::size_t best = 0;
    for (std::size_t i = 0; i < T; ++i) {
      EXPECT_DOUBLE_EQ(out.probabilities[i], 1.0 / (1.0 + std::exp(-out.scores[i])));
      if (out.scores[i] > out.scores[best]) best = i;
    }
    EXPECT_EQ(out.predicted_timestamp, best);
  }
}

TEST(LocalizationModule, DimensionMismatchRejected) {
  nets::LocalizationModule lm({4, 2, 4, 0.0});
  ad::ParamStore s;
  Rng rng(0);
  lm.init(s, rng);
  EXPECT_THROW(lm.infer(s, Tensor({10, 5})), ad::ShapeError);
}

TEST(LocalizationModule, DilationsDoubleEachLayer) {
  nets::TemporalConvNet net("x.", 2, 4, 5, 1, 0.0);
  EXPECT_EQ(net.dilations(), (std::vector<std::size_t>{1, 2, 4, 8, 16}));
}

TEST(LocalizationModule, CheckRejectsMissingOrMisshapedParameters) {
  nets::LocalizationModule lm({4, 2, 4, 0.0});
  ad::ParamStore empty;
  EXPECT_THROW(lm.check(empty), std::invalid_argument);
  nets::LocalizationModule wider({4, 2, 6, 0.0});
  ad::ParamStore s;
  Rng rng(0);
  wider.init(s, rng);
  EXPECT_THROW(lm.check(s), ad::ShapeError);
}

TEST(GradingModule, ZeroWeightsGiveBiasLogits) {
  nets::GMConfig cfg;
  cfg.input_dim = 4;
  cfg.width = 8;
  cfg.classes = 5;
  nets::GradingModule gm(cfg);
  ad::ParamStore s;
  Rng rng(0);
  gm.init(s, rng);
  zero_all(s);
  auto& bias = s.at("gm.out.b").value;
  for (std::size_t j = 0; j < bias.size(); ++j) bias[j] = 0.25 * static_cast<double>(j) - 0.5;
  ad::Tape tape(&std::as_const(s));
  const auto logits = gm.frame_logits(tape, tape.constant(testutil::random_tensor({9, 4}, rng)), nullptr).value();
  ASSERT_EQ(logits.shape(), (ad::Shape{9, 6}));
  for (std::size_t t = 0; t < 9; ++t)
    for (std::size_t j = 0; j < 6; ++j) EXPECT_EQ(logits.at(t, j), bias[j]);
}

TEST(GradingModule, SingleFrameWindowAndBackgroundToggle) {
  nets::GMConfig cfg;
  cfg.input_dim = 3;
  cfg.width = 4;
  cfg.classes = 4;
  Rng rng(2);
  for (bool bg : {true, false}) {
    cfg.background = bg;
    nets::GradingModule gm(cfg);
    ad::ParamStore s;
    gm.init(s, rng);
    ad::Tape tape(&std::as_const(s));
    const auto logits = gm.frame_logits(tape, tape.constant(testutil::random_tensor({1, 3}, rng)), nullptr).value();
    EXPECT_EQ(logits.shape(), (ad::Shape{1, bg ? 5u : 4u}));
  }
}

TEST(GradingModule, DropoutOnlyActsInTrainMode) {
  nets::GMConfig cfg;
  cfg.input_dim = 3;
  cfg.width = 8;
  cfg.classes = 3;
  cfg.dropout = 0.5;
  nets::GradingModule gm(cfg);
  ad::ParamStore s;
  Rng rng(3);
  gm.init(s, rng);
  const auto x = testutil::random_tensor({12, 3}, rng);
  auto run = [&](Rng* r) {
    ad::Tape tape(&std::as_const(s));
    return gm.frame_logits(tape, tape.constant(x), r).value();
  };
  EXPECT_EQ(testutil::values(run(nullptr)), testutil::values(run(nullptr)));
  Rng a(9), b(9);
  const auto ta = run(&a);
  EXPECT_EQ(testutil::values(ta), testutil::values(run(&b)));
  EXPECT_NE(testutil::values(ta), testutil::values(run(nullptr)));
}

TEST(Reweight, KnownRows) {
  const auto x = Tensor::matrix(2, 2, {1, 2, -3, 4});
  EXPECT_EQ(testutil::values(reweighted(x, Tensor::vector({0.5, 0.0}))), (std::vector<double>{1.5, 3.0, -3, 4}));
  EXPECT_EQ(testutil::values(reweighted(x, Tensor::vector({0.0, 0.0}))), testutil::values(x));
  EXPECT_EQ(testutil::values(reweighted(x, Tensor::vector({1.0, 1.0}))), (std::vector<double>{2, 4, -6, 8}));
}

TEST(Reweight, MatchesDirectFormulaAndRejectsLengthMismatch) {
  Rng rng(4);
  for (int trial = 0; trial < 50; ++trial) {
    const auto T = static_cast<std::size_t>(uniform_int(rng, 1, 30));
    const auto x = testutil::random_tensor({T, 3}, rng, -5, 5);
    const auto p = testutil::random_tensor({T}, rng, 0, 1);
    const auto y = reweighted(x, p);
    for (std::size_t t = 0; t < T; ++t)
      for (std::size_t d = 0; d < 3; ++d) EXPECT_EQ(y.at(t, d), x.at(t, d) * p[t] + x.at(t, d));
  }
  EXPECT_THROW(reweighted(Tensor({4, 2}), Tensor({3})), ad::ShapeError);
}

TEST(TopKPool, KnownColumn) {
  const auto frames = Tensor::matrix(5, 1, {5, 1, 4, 2, 3});
  EXPECT_DOUBLE_EQ(pool(frames, 2)[0], 4.5);
}

TEST(TopKPool, ShortWindowAveragesEveryFrame) {
  const auto frames = Tensor::matrix(3, 2, {1, 10, 2, 20, 6, 60});
  const auto y = pool(frames, 8);
  EXPECT_DOUBLE_EQ(y[0], 3.0);
  EXPECT_DOUBLE_EQ(y[1], 30.0);
}

TEST(TopKPool, ConstantColumnsPoolToThemselves) {
  Tensor frames({11, 3});
  for (std::size_t t = 0; t < 11; ++t)
    for (std::size_t j = 0; j < 3; ++j) frames.at(t, j) = 0.5 * static_cast<double>(j) - 1.0;
  const auto y = pool(frames, 8);
  for (std::size_t j = 0; j < 3; ++j) EXPECT_DOUBLE_EQ(y[j], 0.5 * static_cast<double>(j) - 1.0);
}

TEST(TopKPool, MatchesSortOracleAndIsMonotone) {
  Rng rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    const auto T = static_cast<std::size_t>(uniform_int(rng, 1, 40));
    const auto k = static_cast<std::size_t>(uniform_int(rng, 1, 12));
    auto frames = testutil::random_tensor({T, 4}, rng, -3, 3);
    const auto y = pool(frames, k);
    for (std::size_t j = 0; j < 4; ++j) {
      std::vector<double> col(T);
      for (std::size_t t = 0; t < T; ++t) col[t] = frames.at(t, j);
      EXPECT_NEAR(y[j], topk_reference(col, k), 1e-12);
    }
    // Raising any one frame logit never lowers the pooled value.
    const auto t = static_cast<std::size_t>(uniform_int(rng, 0, static_cast<std::int64_t>(T) - 1));
    frames.at(t, 1) += uniform(rng, 0.0, 2.0);
    EXPECT_GE(pool(frames, k)[1], y[1] - 1e-12);
  }
}

TEST(TopKPool, RejectsZeroK) { EXPECT_THROW(pool(Tensor({3, 2}), 0), std::invalid_argument); }
