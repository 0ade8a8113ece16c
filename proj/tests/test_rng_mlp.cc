// Copyright 2026 The Safeplan Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cmath>
#include <set>

#include <gtest/gtest.h>

#include "safeplan/mlp.h"
#include "safeplan/rng.h"

namespace safeplan {
namespace {

TEST(RngTest, DeriveSeedDependsOnlyOnArguments) {
  EXPECT_EQ(DeriveSeed(1, Stream::kPlanner, 3, 4), DeriveSeed(1, Stream::kPlanner, 3, 4));
  std::set<std::uint64_t> seen;
  for (std::uint64_t master : {0, 1}) {
    for (Stream s : {Stream::kEnvReset, Stream::kRandomPolicy, Stream::kModel,
                     Stream::kPlanner}) {
      for (std::uint64_t a = 0; a < 4; ++a) {
        for (std::uint64_t b = 0; b < 4; ++b) seen.insert(DeriveSeed(master, s, a, b));
      }
    }
  }
  EXPECT_EQ(seen.size(), 2u * 4u * 16u);
  // (a, b) is not symmetric
  EXPECT_NE(DeriveSeed(1, Stream::kPlanner, 3, 4), DeriveSeed(1, Stream::kPlanner, 4, 3));
}

TEST(RngTest, UniformRealRangeAndMean) {
  Rng rng = MakeRng(1, Stream::kTest);
  double sum = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const double u = UniformReal(rng, -1.0, 3.0);
    ASSERT_GE(u, -1.0);
    ASSERT_LT(u, 3.0);
    sum += u;
  }
  EXPECT_NEAR(sum / n, 1.0, 0.02);
}

TEST(RngTest, UniformIndexCoversRange) {
  Rng rng = MakeRng(2, Stream::kTest);
  std::vector<int> counts(7, 0);
  for (int i = 0; i < 70000; ++i) {
    const auto k = UniformIndex(rng, 7);
    ASSERT_LT(k, 7u);
    ++counts[k];
  }
  for (int c : counts) EXPECT_NEAR(c, 10000, 500);
  EXPECT_EQ(UniformIndex(rng, 1), 0u);
}

TEST(RngTest, StandardNormalMoments) {
  Rng rng = MakeRng(3, Stream::kTest);
  double sum = 0.0, sq = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double z = StandardNormal(rng);
    sum += z;
    sq += z * z;
  }
  EXPECT_NEAR(sum / n, 0.0, 0.01);
  EXPECT_NEAR(std::sqrt(sq / n), 1.0, 0.01);
}

Mlp TinyNet() {
  Mlp net(2, {2}, 1);
  auto& l = net.mutable_layers();
  l[0].weight << 0.5, -1.0, 0.25, 2.0;
  l[0].bias << 0.1, -0.2;
  l[1].weight << 1.5, -0.5;
  l[1].bias << 0.3;
  return net;
}

TEST(MlpTest, ForwardMatchesHandComputation) {
  const Mlp net = TinyNet();
  Eigen::MatrixXd x(2, 2);
  x << 1.0, -0.5, 2.0, 0.75;
  const Eigen::MatrixXd y = net.Forward(x);
  ASSERT_EQ(y.rows(), 1);
  ASSERT_EQ(y.cols(), 2);
  for (int j = 0; j < 2; ++j) {
    const double h0 = std::tanh(0.5 * x(0, j) - 1.0 * x(1, j) + 0.1);
    const double h1 = std::tanh(0.25 * x(0, j) + 2.0 * x(1, j) - 0.2);
    EXPECT_NEAR(y(0, j), 1.5 * h0 - 0.5 * h1 + 0.3, 1e-14);
  }
  EXPECT_EQ(net.num_parameters(), 4 + 2 + 2 + 1);
}

TEST(MlpTest, BackwardMatchesFiniteDifferences) {
  Rng rng = MakeRng(4, Stream::kTest);
  Mlp net(3, {6, 5}, 2);
  net.Initialize(rng);
  Eigen::MatrixXd x(3, 8);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = StandardNormal(rng);
  auto loss = [&](const Mlp& m) { return 0.5 * m.Forward(x).squaredNorm(); };

  Mlp::Cache cache;
  const Eigen::MatrixXd out = net.Forward(x, &cache);
  auto grads = net.ZeroGradients();
  net.Backward(cache, out, &grads);
  const Eigen::VectorXd analytic = Flatten(grads);

  Eigen::VectorXd p = net.GetParameters();
  Mlp probe = net;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    const double saved = p[i];
    p[i] = saved + 1e-6;
    probe.SetParameters(p);
    const double plus = loss(probe);
    p[i] = saved - 1e-6;
    probe.SetParameters(p);
    const double minus = loss(probe);
    p[i] = saved;
    EXPECT_NEAR((plus - minus) / 2e-6, analytic[i], 1e-6) << "param " << i;
  }
}

TEST(MlpTest, ParameterRoundTripAndShapeErrors) {
  Rng rng = MakeRng(5, Stream::kTest);
  Mlp net(4, {3}, 2);
  net.Initialize(rng);
  const Eigen::VectorXd p = net.GetParameters();
  Mlp other(4, {3}, 2);
  other.SetParameters(p);
  EXPECT_EQ(other.GetParameters(), p);
  EXPECT_THROW(other.SetParameters(Eigen::VectorXd::Zero(3)), std::invalid_argument);
  EXPECT_THROW(net.Forward(Eigen::MatrixXd::Zero(3, 1)), std::invalid_argument);
  EXPECT_THROW(Mlp(0, {3}, 1), std::invalid_argument);
}

TEST(AdamTest, MatchesHandUpdates) {
  Mlp net(1, {}, 1);
  net.mutable_layers()[0].weight << 1.0;
  net.mutable_layers()[0].bias << 0.0;
  AdamConfig config{0.1, 0.9, 0.999, 1e-8};
  Adam adam(net, config);
  auto grads = net.ZeroGradients();

  double w = 1.0, m = 0.0, v = 0.0;
  const double g_seq[] = {2.0, -1.0, 0.5};
  for (int t = 1; t <= 3; ++t) {
    const double g = g_seq[t - 1];
    grads[0].weight << g;
    grads[0].bias << 0.0;
    adam.Step(grads, &net);
    m = 0.9 * m + 0.1 * g;
    v = 0.999 * v + 0.001 * g * g;
    const double mhat = m / (1.0 - std::pow(0.9, t));
    const double vhat = v / (1.0 - std::pow(0.999, t));
    w -= 0.1 * mhat / (std::sqrt(vhat) + 1e-8);
    EXPECT_NEAR(net.layers()[0].weight(0, 0), w, 1e-12) << "step " << t;
    EXPECT_EQ(net.layers()[0].bias[0], 0.0);
  }
}

}  // namespace
}  // namespace safeplan
