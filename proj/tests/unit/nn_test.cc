// Copyright 2026 The EarlySD Authors.
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

#include <array>
#include <cmath>

#include <gtest/gtest.h>

#include "earlysd/error.h"
#include "earlysd/nn.h"
#include "gradcheck.h"

namespace earlysd::nn {
namespace {

TEST(FfnTest, IdentityWeightsPassInputThrough) {
  FfnLayer layer("id", 3, 3, Activation::kIdentity);
  layer.weight.value = Matrix::Identity(3, 3);
  Matrix x(2, 3);
  x << 1, -2, 3, 0.5, 0, -7;
  EXPECT_EQ(layer.Forward(x, nullptr), x);
}

TEST(FfnTest, ZeroWeightsGiveActivatedBias) {
  FfnLayer layer("b", 2, 2, Activation::kReLU);
  layer.bias.value << 1.5, -2.0;
  Matrix x = Matrix::Ones(3, 2);
  const Matrix y = layer.Forward(x, nullptr);
  for (Eigen::Index i = 0; i < 3; ++i) {
    EXPECT_EQ(y(i, 0), 1.5);
    EXPECT_EQ(y(i, 1), 0.0);
  }
}

TEST(FfnTest, WrongInputWidthIsShapeError) {
  FfnLayer layer("s", 3, 2, Activation::kReLU);
  EXPECT_THROW(layer.Forward(Matrix::Zero(2, 4), nullptr), ShapeError);
}

class GradientCheckTest : public ::testing::TestWithParam<gradcheck::OpCheck> {};

TEST_P(GradientCheckTest, MatchesCentralDifferences) {
  Rng rng(99 + GetParam().name.size());
  for (int trial = 0; trial < 10; ++trial) {
    EXPECT_LT(GetParam().run(rng), 1e-4) << GetParam().name << " trial " << trial;
  }
}

INSTANTIATE_TEST_SUITE_P(AllOps, GradientCheckTest, ::testing::ValuesIn(gradcheck::AllChecks()),
                         [](const auto& info) { return info.param.name; });

HeteroSocialGraph TinyGraph(const std::vector<UserLink>& uu, const std::vector<TopicLink>& ut,
                            std::size_t users, std::size_t topics) {
  std::vector<UserRecord> us;
  for (std::size_t i = 0; i < users; ++i) us.push_back(MakeUser("u" + std::to_string(i), 50));
  std::vector<TopicNode> ts;
  for (std::size_t t = 0; t < topics; ++t) ts.push_back({"t" + std::to_string(t), "x", TopicOrigin::kOriginal, {}});
  return HeteroSocialGraph::Build(us, ts, uu, ut);
}

TEST(HeteroConvTest, SingleTopicNeighborCopiesTopicEmbedding) {
  const auto g = TinyGraph({}, {{"u0", "t0"}}, 1, 1);
  HeteroConvLayer layer("c", 2, 2, 2, {Aggregation::kSum, Activation::kIdentity, false, false});
  layer.f_cross.value = Matrix::Identity(2, 2);
  Matrix hu(1, 2);
  hu << 9, 9;
  Matrix ht(1, 2);
  ht << 0.25, -3;
  EXPECT_EQ(HeteroConv(layer, g, hu, ht), ht);
}

TEST(HeteroConvTest, IsolatedUserGetsZero) {
  const auto g = TinyGraph({{"u0", "u1"}}, {{"u0", "t0"}}, 3, 1);
  HeteroConvLayer layer("c", 2, 2, 2, {});
  Rng rng(1);
  layer.Init(rng);
  const Matrix hu = gradcheck::RandomMatrix(3, 2, rng);
  const Matrix ht = gradcheck::RandomMatrix(1, 2, rng);
  const Matrix out = HeteroConv(layer, g, hu, ht);
  EXPECT_EQ(out.row(2).norm(), 0.0);
}

TEST(HeteroConvTest, UnitWeightSumMatchesExplicitLoop) {
  Rng rng(21);
  const auto g = gradcheck::RandomGraph(rng, 9, 5);
  const Eigen::Index d = 3;
  HeteroConvLayer layer("c", d, d, d, {Aggregation::kSum, Activation::kIdentity, false, false});
  layer.f_same.value = Matrix::Ones(d, d);
  layer.f_cross.value = Matrix::Ones(d, d);
  const Matrix hu = gradcheck::RandomMatrix(static_cast<Eigen::Index>(g.num_users()), d, rng);
  const Matrix ht = gradcheck::RandomMatrix(static_cast<Eigen::Index>(g.num_topics()), d, rng);
  const Matrix got = HeteroConv(layer, g, hu, ht);

  for (std::size_t u = 0; u < g.num_users(); ++u) {
    RowVector expected = RowVector::Zero(d);
    for (const auto& adj : g.user_neighbors(u)) {
      expected += g.uu_edges()[adj.edge].weight * (hu.row(static_cast<Eigen::Index>(adj.neighbor)) * layer.f_same.value.transpose());
    }
    for (std::size_t t : g.user_topics(u)) {
      expected += ht.row(static_cast<Eigen::Index>(t)) * layer.f_cross.value.transpose();
    }
    for (Eigen::Index j = 0; j < d; ++j) EXPECT_NEAR(got(static_cast<Eigen::Index>(u), j), expected(j), 1e-12);
  }
}

TEST(KanTest, ZeroModuleIsOneHalf) {
  KanEdgeModule kan;
  for (Param* p : kan.params()) p->value.setZero();
  EXPECT_EQ(kan.Alpha(0.3, -0.8), 0.5);
  EXPECT_EQ(kan.Alpha(-1.0, 1.0), 0.5);
}

TEST(KanTest, LargeBiasSaturates) {
  KanEdgeModule kan;
  for (Param* p : kan.params()) p->value.setZero();
  kan.bias.value(0, 0) = 20.0;
  EXPECT_GT(kan.Alpha(0.1, 0.2), 0.999);
}

TEST(KanTest, OutOfRangeInputIsDomainError) {
  KanEdgeModule kan;
  EXPECT_NO_THROW(kan.Alpha(1.0 + 5e-7, 0.0));
  EXPECT_THROW(kan.Alpha(1.01, 0.0), DomainError);
}

TEST(LossTest, BceValues) {
  const std::vector<double> half = {0.5};
  const std::vector<double> one = {1.0};
  EXPECT_NEAR(Bce(half, one), std::log(2.0), 1e-15);
  const std::vector<double> near_one = {1.0 - 1e-7};
  EXPECT_LT(Bce(near_one, one), 1e-6);
  const std::vector<double> nan = {NAN};
  EXPECT_THROW(Bce(nan, one), NumericError);
}

TEST(CosineTest, BasicValues) {
  RowVector v(3);
  v << 1, 2, 3;
  EXPECT_NEAR(Cosine(v, v), 1.0, 1e-15);
  RowVector e1 = RowVector::Zero(3);
  RowVector e2 = RowVector::Zero(3);
  e1(0) = 1;
  e2(1) = 1;
  EXPECT_EQ(Cosine(e1, e2), 0.0);
  EXPECT_THROW(Cosine(RowVector::Zero(3), v), NumericError);
}

TEST(AdamTest, ZeroGradientLeavesParamsUnchanged) {
  Param p("p", 2, 2);
  p.value << 1, 2, 3, 4;
  const Matrix before = p.value;
  Adam adam({&p}, {});
  adam.Step();
  EXPECT_EQ(p.value, before);
}

TEST(AdamTest, OneStepDescendsOnSquare) {
  Param p("x", 1, 1);
  p.value(0, 0) = 1.0;
  AdamOptions opt;
  opt.lr = 0.1;
  Adam adam({&p}, opt);
  p.grad(0, 0) = 2 * p.value(0, 0);
  adam.Step();
  EXPECT_LT(std::abs(p.value(0, 0)), 1.0);
}

TEST(AdamTest, ConvergesOnQuadratic) {
  // f(x) = sum_i c_i (x_i - t_i)^2
  Param p("x", 1, 3);
  const std::array<double, 3> c = {1.0, 3.0, 0.5};
  const std::array<double, 3> t = {0.7, -1.2, 2.0};
  AdamOptions opt;
  opt.lr = 0.05;
  Adam adam({&p}, opt);
  double loss = 0.0;
  for (int step = 0; step < 500; ++step) {
    adam.ZeroGrad();
    loss = 0.0;
    for (int i = 0; i < 3; ++i) {
      const double r = p.value(0, i) - t[i];
      loss += c[i] * r * r;
      p.grad(0, i) = 2 * c[i] * r;
    }
    adam.Step();
  }
  EXPECT_LT(loss, 1e-4);
}

TEST(DropoutTest, MaskScalesKeptUnits) {
  Rng rng(8);
  const Matrix m = DropoutMask(200, 50, 0.2, rng);
  int kept = 0;
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    const double v = m.data()[i];
    EXPECT_TRUE(v == 0.0 || std::abs(v - 1.25) < 1e-15);
    kept += v != 0.0;
  }
  EXPECT_NEAR(kept / 10000.0, 0.8, 0.02);
}

}  // namespace
}  // namespace earlysd::nn
