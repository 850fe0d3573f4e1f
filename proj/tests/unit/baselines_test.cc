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

#include <gtest/gtest.h>

#include "earlysd/baselines.h"
#include "earlysd/error.h"
#include "test_util.h"

namespace earlysd {
namespace {

nn::Matrix Points(std::initializer_list<std::pair<double, double>> xy) {
  nn::Matrix m(static_cast<Eigen::Index>(xy.size()), 2);
  Eigen::Index i = 0;
  for (const auto& [x, y] : xy) {
    m(i, 0) = x;
    m(i, 1) = y;
    ++i;
  }
  return m;
}

double Accuracy(const std::vector<int>& a, const std::vector<int>& b) {
  int hit = 0;
  for (std::size_t i = 0; i < a.size(); ++i) hit += a[i] == b[i];
  return static_cast<double>(hit) / static_cast<double>(a.size());
}

// Two Gaussian clouds separated along the first axis.
void Separable(std::size_t n, Rng& rng, nn::Matrix& x, std::vector<int>& y) {
  x.resize(static_cast<Eigen::Index>(n), 3);
  y.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = static_cast<int>(i % 2);
    const auto r = static_cast<Eigen::Index>(i);
    x(r, 0) = (y[i] ? 3.0 : -3.0) + 0.5 * rng.Normal();
    x(r, 1) = rng.Normal();
    x(r, 2) = rng.Normal();
  }
}

TEST(KnnTest, OneNeighborMemorizesTraining) {
  Rng rng(1);
  nn::Matrix x;
  std::vector<int> y;
  Separable(40, rng, x, y);
  for (std::size_t i = 0; i < y.size(); i += 5) y[i] = 1 - y[i];  // label noise
  KnnClassifier knn(1);
  knn.Fit(x, y);
  EXPECT_EQ(Accuracy(knn.Predict(x), y), 1.0);
}

TEST(KnnTest, TieGoesToNearestNeighbor) {
  KnnClassifier knn(2);
  knn.Fit(Points({{0, 0}, {10, 0}}), {1, 0});
  EXPECT_EQ(knn.Predict(Points({{1, 0}}))[0], 1);
  EXPECT_EQ(knn.Predict(Points({{9, 0}}))[0], 0);
}

TEST(LogisticRegressionTest, SeparatesClouds) {
  Rng rng(2);
  nn::Matrix x;
  std::vector<int> y;
  Separable(100, rng, x, y);
  LogisticRegression lr;
  lr.Fit(x, y);
  EXPECT_EQ(Accuracy(lr.Predict(x), y), 1.0);
  for (double p : lr.Probabilities(x)) {
    EXPECT_GT(p, 0.0);
    EXPECT_LT(p, 1.0);
  }
}

TEST(RandomForestTest, FitsSeparableDataAndIsSeeded) {
  Rng rng(3);
  nn::Matrix x;
  std::vector<int> y;
  Separable(80, rng, x, y);
  RandomForest a({.trees = 20, .seed = 4});
  RandomForest b({.trees = 20, .seed = 4});
  a.Fit(x, y);
  b.Fit(x, y);
  EXPECT_GE(Accuracy(a.Predict(x), y), 0.95);
  EXPECT_EQ(a.Predict(x), b.Predict(x));
}

TEST(MlpTest, LearnsSeparableData) {
  Rng rng(5);
  nn::Matrix x;
  std::vector<int> y;
  Separable(100, rng, x, y);
  MlpClassifier mlp({.hidden = 16, .max_epochs = 200, .lr = 0.01, .seed = 2});
  mlp.Fit(x, y);
  EXPECT_GE(Accuracy(mlp.Predict(x), y), 0.95);
}

TEST(RunBaselineTest, NamesAndUnknownName) {
  const auto g = testing::SmallGraph(60, 5, 0);
  const auto split = StratifiedSplit(g.users(), {}, 1);
  for (const auto& name : BaselineNames()) {
    if (name == "mlp") continue;  // covered above; slow at default epochs
    const auto r = RunBaseline(name, g, split, ModalityMask::All(), 1);
    EXPECT_EQ(r.name, name);
    EXPECT_EQ(r.test.counts.total(), split.test.size());
  }
  const auto best = RunBaseline("ml-best", g, split, ModalityMask::All(), 1);
  EXPECT_TRUE(best.chosen == "knn" || best.chosen == "logreg" || best.chosen == "rf_like");
  for (const char* name : {"knn", "logreg", "rf_like"}) {
    EXPECT_GE(best.test.acc, RunBaseline(name, g, split, ModalityMask::All(), 1).test.acc);
  }
  EXPECT_THROW(RunBaseline("svm", g, split, ModalityMask::All(), 1), ConfigError);
  EXPECT_THROW(MakeClassifier("svm", 1), ConfigError);
}

}  // namespace
}  // namespace earlysd
