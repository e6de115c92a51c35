#include <gtest/gtest.h>

#include <cmath>

#include "stc/autodiff/ops.hpp"
#include "test_util.hpp"

using namespace stc::ad;

TEST(Tensor, RejectsZeroExtentsAndHighRank) {
  EXPECT_THROW(Tensor({0}), ShapeError);
  EXPECT_THROW(Tensor({2, 2, 2, 2}), ShapeError);
  EXPECT_THROW(Tensor({2, 3}, std::vector<double>(5)), ShapeError);
  Tensor t({2, 3});
  EXPECT_EQ(t.size(), 6u);
  EXPECT_EQ(t.rank(), 2u);
}

TEST(Primitives, SigmoidOfZeroIsHalf) {
  Tape tape;
  auto y = sigmoid(tape.constant(Tensor::scalar(0.0)));
  EXPECT_EQ(y.value().item(), 0.5);
}

TEST(Primitives, MatmulByIdentityIsIdentity) {
  stc::Rng rng(7);
  Tape tape;
  const auto a = testutil::random_tensor({4, 3}, rng);
  Tensor eye({3, 3});
  for (std::size_t i = 0; i < 3; ++i) eye.at(i, i) = 1.0;
  auto y = matmul(tape.constant(a), tape.constant(eye));
  EXPECT_EQ(y.value(), a);
}

TEST(Primitives, SoftmaxOfConstantIsUniform) {
  Tape tape;
  for (std::size_t n : {1u, 2u, 7u, 100u}) {
    auto y = softmax(tape.constant(Tensor({n}, 3.25)), 0);
    for (double v : y.value().data()) EXPECT_NEAR(v, 1.0 / static_cast<double>(n), 1e-15);
  }
}

TEST(Primitives, SoftmaxAlongEachAxisNormalises) {
  stc::Rng rng(3);
  Tape tape;
  auto x = tape.constant(testutil::random_tensor({3, 4}, rng, -5, 5));
  auto rows = softmax(x, 1).value();
  for (std::size_t r = 0; r < 3; ++r) {
    double s = 0;
    for (std::size_t c = 0; c < 4; ++c) s += rows.at(r, c);
    EXPECT_NEAR(s, 1.0, 1e-14);
  }
  auto cols = softmax(x, 0).value();
  for (std::size_t c = 0; c < 4; ++c) {
    double s = 0;
    for (std::size_t r = 0; r < 3; ++r) s += cols.at(r, c);
    EXPECT_NEAR(s, 1.0, 1e-14);
  }
}

TEST(Primitives, ShapeMismatchNamesOpAndShapes) {
  Tape tape;
  auto a = tape.constant(Tensor({2, 3}));
  auto b = tape.constant(Tensor({3, 2}));
  try {
    add(a, b);
    FAIL() << "expected ShapeError";
  } catch (const ShapeError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("add"), std::string::npos);
    EXPECT_NE(msg.find("[2x3]"), std::string::npos) << msg;
    EXPECT_NE(msg.find("[3x2]"), std::string::npos) << msg;
  }
  EXPECT_THROW(matmul(a, a), ShapeError);
  EXPECT_THROW(mul_rows(a, tape.constant(Tensor({3}))), ShapeError);
  EXPECT_THROW(slice_rows(a, 1, 3), ShapeError);
  EXPECT_THROW(dot(a, tape.constant(Tensor({4}))), ShapeError);
}

TEST(Primitives, ScalarOperandBroadcasts) {
  Tape tape;
  auto a = tape.constant(Tensor::vector({1, 2, 3}));
  auto y = mul(a, tape.constant(Tensor::scalar(2.0)));
  EXPECT_EQ(y.value(), Tensor::vector({2, 4, 6}));
}

TEST(Primitives, Conv1dMatchesDirectSum) {
  stc::Rng rng(11);
  const std::size_t T = 9, cin = 2, cout = 3, K = 3, dil = 2, pad = 2;
  const auto x = testutil::random_tensor({T, cin}, rng);
  const auto w = testutil::random_tensor({K, cin, cout}, rng);
  const auto b = testutil::random_tensor({cout}, rng);
  Tape tape;
  auto y = conv1d(tape.constant(x), tape.constant(w), tape.constant(b), dil, pad).value();
  const std::size_t out_len = T + 2 * pad - dil * (K - 1);
  ASSERT_EQ(y.shape(), (Shape{out_len, cout}));
  for (std::size_t t = 0; t < out_len; ++t) {
    for (std::size_t o = 0; o < cout; ++o) {
      double acc = b[o];
      for (std::size_t k = 0; k < K; ++k) {
        const long src = static_cast<long>(t + k * dil) - static_cast<long>(pad);
        if (src < 0 || src >= static_cast<long>(T)) continue;
        for (std::size_t i = 0; i < cin; ++i) acc += x.at(static_cast<std::size_t>(src), i) * w[(k * cin + i) * cout + o];
      }
      EXPECT_NEAR(y.at(t, o), acc, 1e-14);
    }
  }
}

TEST(Primitives, DropoutIsIdentityInEvalModeAndSeededInTrainMode) {
  stc::Rng data_rng(5);
  const auto x = testutil::random_tensor({20, 4}, data_rng);
  Tape tape;
  auto in = tape.constant(x);
  EXPECT_EQ(dropout(in, 0.5, nullptr).value(), x);
  stc::Rng r1(9), r2(9);
  const auto a = dropout(in, 0.5, &r1).value();
  const auto b = dropout(in, 0.5, &r2).value();
  EXPECT_EQ(a, b);
  std::size_t zeros = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] == 0.0) ++zeros;
    else EXPECT_DOUBLE_EQ(a[i], 2.0 * x[i]);
  }
  EXPECT_GT(zeros, 10u);
  EXPECT_LT(zeros, 70u);
}

TEST(Primitives, LogRejectsNonPositive) {
  Tape tape;
  EXPECT_THROW(log(tape.constant(Tensor::vector({1.0, 0.0}))), std::domain_error);
}

TEST(Backward, SigmoidDerivativeAtZero) {
  Tape tape;
  auto x = tape.variable(Tensor::scalar(0.0));
  auto y = sigmoid(x);
  tape.backward(y);
  EXPECT_EQ(tape.grad(x).item(), 0.25);
}

TEST(Backward, NonScalarLossRejected) {
  Tape tape;
  auto x = tape.variable(Tensor::vector({1, 2}));
  EXPECT_THROW(tape.backward(sigmoid(x)), ShapeError);
}

TEST(Backward, ConstantLossGivesZeroGradients) {
  ParamStore store;
  store.add("w", Tensor::vector({1, 2, 3}));
  Tape tape(&store);
  auto w = tape.param("w");
  auto loss = add(scale(sum(w), 0.0), tape.constant(Tensor::scalar(4.0)));
  tape.backward(loss);
  for (double g : store.at("w").grad.data()) EXPECT_EQ(g, 0.0);
}

TEST(Backward, FrozenParametersReceiveNoGradient) {
  ParamStore store;
  store.add("a", Tensor::vector({1, 2}));
  store.add("b", Tensor::vector({3, 4}), false);
  Tape tape(&store);
  tape.backward(dot(tape.param("a"), tape.param("b")));
  EXPECT_EQ(store.at("a").grad, Tensor::vector({3, 4}));
  EXPECT_TRUE(store.at("b").grad.empty() || store.at("b").grad == Tensor({2}));
}

TEST(Backward, LinearityOfGradients) {
  stc::Rng rng(21);
  for (int seed = 0; seed < 10; ++seed) {
    const auto w0 = testutil::random_tensor({5}, rng);
    const auto v0 = testutil::random_tensor({5}, rng);
    auto grad_of = [&](double a, double b) {
      ParamStore s;
      s.add("w", w0);
      Tape tape(&s);
      auto w = tape.param("w");
      auto l1 = sum(sigmoid(w));
      auto l2 = dot(mul(w, w), tape.constant(v0));
      Var loss = add(scale(l1, a), scale(l2, b));
      tape.backward(loss);
      return s.at("w").grad;
    };
    const auto g1 = grad_of(1, 0), g2 = grad_of(0, 1), g = grad_of(2.5, -0.75);
    for (std::size_t i = 0; i < 5; ++i) EXPECT_NEAR(g[i], 2.5 * g1[i] - 0.75 * g2[i], 1e-14);
  }
}

TEST(Backward, RepeatedParamUseAccumulatesOnce) {
  ParamStore s;
  s.add("w", Tensor::scalar(3.0));
  Tape tape(&s);
  auto loss = mul(tape.param("w"), tape.param("w"));
  tape.backward(loss);
  EXPECT_EQ(s.at("w").grad.item(), 6.0);
}

TEST(Backward, SecondBackwardRejected) {
  Tape tape;
  auto x = tape.variable(Tensor::scalar(1.0));
  auto y = sigmoid(x);
  tape.backward(y);
  EXPECT_THROW(tape.backward(y), std::logic_error);
}

TEST(Determinism, IdenticalInputsGiveBitIdenticalValues) {
  auto run = [] {
    stc::Rng rng(99);
    Tape tape;
    auto x = tape.constant(testutil::random_tensor({30, 4}, rng));
    auto w = tape.constant(testutil::random_tensor({3, 4, 5}, rng));
    auto b = tape.constant(testutil::random_tensor({5}, rng));
    return softmax(relu(conv1d_same(x, w, b, 2)), 1).value();
  };
  EXPECT_EQ(run(), run());
}

TEST(ParamStoreTest, DuplicateNamesRejectedAndPrefixFreeze) {
  ParamStore s;
  s.add("lm.a", Tensor::scalar(1));
  s.add("lm.b", Tensor::scalar(1));
  s.add("gm.a", Tensor::scalar(1));
  EXPECT_THROW(s.add("lm.a", Tensor::scalar(2)), std::invalid_argument);
  EXPECT_EQ(s.set_trainable("lm.", false), 2u);
  EXPECT_EQ(s.trainable_count(), 1u);
}
