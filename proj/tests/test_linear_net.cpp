#include <gtest/gtest.h>

#include <set>

#include "oracles.hpp"
#include "submodes/linear_net.hpp"

using namespace submodes;

namespace {

Vec random_vec(int n, Rng& rng, double sd = 1.0) {
  std::normal_distribution<double> d(0.0, sd);
  Vec v(n);
  for (int i = 0; i < n; ++i) v[i] = d(rng);
  return v;
}

}  // namespace

TEST(LinearNet, InitialWeightsAreSmallAndBiasZero) {
  Rng rng(3);
  LinearNet net(7, 4, NetParams{}, rng);
  EXPECT_LE(net.weights().cwiseAbs().maxCoeff(), 0.1);
  EXPECT_GT(net.weights().cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(net.bias(), Vec::Zero(4));
}

TEST(LinearNet, ForwardMatchesPlainLoops) {
  Rng rng(5);
  for (Head h : {Head::Tanh, Head::Sigmoid}) {
    LinearNet net(5, 3, NetParams{h}, rng);
    net.weights() = Mat::Random(3, 5);
    net.bias() = Vec::Random(3);
    for (int k = 0; k < 20; ++k) {
      const Vec x = random_vec(5, rng);
      const auto ref = oracle::affine(net.weights(), net.bias(), x, h == Head::Tanh ? oracle::tanh_out : oracle::sigmoid_out);
      const Vec out = net.forward(x);
      Vec into(3);
      net.forward_into(x, into);
      for (int r = 0; r < 3; ++r) {
        EXPECT_NEAR(out[r], ref[r], 1e-14);
        EXPECT_NEAR(into[r], ref[r], 1e-14);
      }
    }
  }
}

TEST(LinearNet, RejectsWrongShapes) {
  Rng rng(1);
  EXPECT_THROW(LinearNet(0, 2, NetParams{}, rng), std::invalid_argument);
  LinearNet net(3, 2, NetParams{}, rng);
  EXPECT_THROW(net.forward(Vec::Zero(4)), std::invalid_argument);
  EXPECT_THROW(net.train_regression(Vec::Zero(3), Vec::Zero(3), rng), std::invalid_argument);
  EXPECT_THROW(net.train_probability(Vec::Zero(3), 1.0, rng), std::logic_error);
}

TEST(LinearNet, RegressionGradientMatchesFiniteDifferences) {
  Rng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    LinearNet net(6, 4, NetParams{Head::Tanh, 0.01, 0.005}, rng);
    net.weights() = Mat::Random(4, 6);
    net.bias() = Vec::Random(4) * 0.5;
    const Vec x = random_vec(6, rng);
    const Vec t = Vec::Random(4) * 0.9;
    const auto g = net.regression_gradient(x, t);
    const auto n = oracle::central_difference(net.weights(), net.bias(), [&] { return net.regression_loss(x, t); });
    EXPECT_LT(oracle::relative_error(g.dW, n.dW), 1e-6);
    EXPECT_LT(oracle::relative_error(g.db, n.db), 1e-6);
  }
}

TEST(LinearNet, ProbabilityGradientMatchesFiniteDifferences) {
  Rng rng(12);
  for (int trial = 0; trial < 20; ++trial) {
    LinearNet net(6, 1, NetParams{Head::Sigmoid, 0.05}, rng);
    net.weights() = Mat::Random(1, 6);
    net.bias() = Vec::Random(1);
    const Vec x = random_vec(6, rng);
    const Vec t = Vec::Constant(1, trial % 2);
    const double w = 0.5 + trial * 0.1;
    const auto g = net.probability_gradient(x, t, w);
    const auto n =
        oracle::central_difference(net.weights(), net.bias(), [&] { return net.probability_loss(x, t, w); });
    EXPECT_LT(oracle::relative_error(g.dW, n.dW), 1e-6);
    EXPECT_LT(oracle::relative_error(g.db, n.db), 1e-6);
  }
}

TEST(LinearNet, TrainingReducesRegressionLoss) {
  Rng rng(4);
  LinearNet net(3, 2, NetParams{Head::Tanh, 0.05}, rng);
  Mat A(2, 3);
  A << 0.3, -0.2, 0.1, 0.0, 0.4, -0.3;
  double before = 0.0, after = 0.0;
  std::vector<Vec> xs;
  for (int k = 0; k < 50; ++k) xs.push_back(random_vec(3, rng));
  for (const Vec& x : xs) before += net.regression_loss(x, (A * x).array().tanh().matrix());
  for (int epoch = 0; epoch < 40; ++epoch)
    for (const Vec& x : xs) net.train_regression(x, (A * x).array().tanh().matrix(), rng);
  for (const Vec& x : xs) after += net.regression_loss(x, (A * x).array().tanh().matrix());
  EXPECT_LT(after, 0.1 * before);
}

TEST(LinearNet, ProbabilityTrainingSeparatesClasses) {
  Rng rng(9);
  LinearNet net(2, 1, NetParams{Head::Sigmoid, 0.1}, rng);
  for (int k = 0; k < 2000; ++k) {
    const Vec x = random_vec(2, rng);
    net.train_probability(x, x[0] > 0 ? 1.0 : 0.0, rng);
  }
  EXPECT_GT(net.forward(Vec::Unit(2, 0) * 2.0)[0], 0.8);
  EXPECT_LT(net.forward(-Vec::Unit(2, 0) * 2.0)[0], 0.2);
}

TEST(LinearNet, ClassWeightsAverageToOneOverBuffer) {
  Rng rng(2);
  LinearNet net(2, 1, NetParams{Head::Sigmoid, 0.05, 0.0, 50, 2}, rng);
  for (int k = 0; k < 80; ++k) net.train_probability(random_vec(2, rng), k % 5 == 0 ? 1.0 : 0.0, rng);
  const double n = static_cast<double>(net.positives() + net.negatives());
  EXPECT_EQ(n, 50.0);
  const double mean = (net.positives() * net.class_weight(1.0) + net.negatives() * net.class_weight(0.0)) / n;
  EXPECT_NEAR(mean, 1.0, 1e-12);
  EXPECT_GT(net.class_weight(1.0), net.class_weight(0.0));
}

TEST(LinearNet, FrozenRowsAndMaskedWeightsDoNotMove) {
  Rng rng(6);
  LinearNet net(4, 3, NetParams{Head::Tanh, 0.05, 0.01}, rng);
  net.freeze_rows(0, 1);
  net.limit_row_inputs(1, 1, 2);
  const Mat W0 = net.weights();
  EXPECT_TRUE(net.weight_masked(1, 2));
  EXPECT_FALSE(net.weight_masked(1, 1));
  EXPECT_FALSE(net.weight_masked(2, 3));
  for (int k = 0; k < 200; ++k) net.train_regression(random_vec(4, rng), Vec::Random(3) * 0.5, rng);
  EXPECT_EQ(net.weights().row(0), W0.row(0));
  EXPECT_EQ(net.weights()(1, 2), 0.0);
  EXPECT_EQ(net.weights()(1, 3), 0.0);
  EXPECT_NE(net.weights()(1, 0), W0(1, 0));
  EXPECT_NE(net.weights().row(2), W0.row(2));
}

TEST(ReplayBuffer, EvictsOldestFirst) {
  ReplayBuffer buf(3);
  for (int k = 0; k < 3; ++k) EXPECT_FALSE(buf.push({Vec::Constant(1, k), Vec::Zero(1)}).has_value());
  const auto evicted = buf.push({Vec::Constant(1, 3), Vec::Zero(1)});
  ASSERT_TRUE(evicted.has_value());
  EXPECT_EQ(evicted->input[0], 0.0);
  EXPECT_EQ(buf.size(), 3u);
  EXPECT_EQ(buf.at(0).input[0], 1.0);
  EXPECT_EQ(buf.at(2).input[0], 3.0);
  EXPECT_EQ(buf.total_pushed(), 4u);
  EXPECT_THROW(ReplayBuffer(0), std::invalid_argument);
}

TEST(ReplayBuffer, DrawsAreDistinctAndRoughlyUniform) {
  Rng rng(8);
  ReplayBuffer buf(10);
  for (int k = 0; k < 10; ++k) buf.push({Vec::Constant(1, k), Vec::Zero(1)});
  std::vector<int> hits(10, 0);
  for (int trial = 0; trial < 20000; ++trial) {
    const auto idx = buf.sample_indices(2, rng);
    ASSERT_EQ(idx.size(), 2u);
    EXPECT_NE(idx[0], idx[1]);
    for (auto i : idx) ++hits[i];
  }
  for (int h : hits) EXPECT_NEAR(h / 40000.0, 0.1, 0.01);
  ReplayBuffer one(5);
  one.push({Vec::Zero(1), Vec::Zero(1)});
  EXPECT_EQ(one.sample_indices(2, rng).size(), 1u);
}
