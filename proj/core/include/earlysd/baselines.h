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

#ifndef EARLYSD_BASELINES_H_
#define EARLYSD_BASELINES_H_

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "earlysd/graph.h"
#include "earlysd/metrics.h"
#include "earlysd/nn.h"
#include "earlysd/split.h"

// Feature-only classifiers used as reference points for the graph model.
namespace earlysd {

class Classifier {
 public:
  virtual ~Classifier() = default;
  // x: one row per sample. `y` holds 0/1 labels.
  virtual void Fit(const nn::Matrix& x, const std::vector<int>& y) = 0;
  virtual std::vector<int> Predict(const nn::Matrix& x) const = 0;
};

// Majority vote over the k nearest training rows (Euclidean); ties go to the
// nearer neighbor's label.
class KnnClassifier : public Classifier {
 public:
  explicit KnnClassifier(std::size_t k = 5) : k_(k) {}
  void Fit(const nn::Matrix& x, const std::vector<int>& y) override;
  std::vector<int> Predict(const nn::Matrix& x) const override;

 private:
  std::size_t k_;
  nn::Matrix x_;
  std::vector<int> y_;
};

// L2-regularized logistic regression fitted by full-batch gradient descent.
class LogisticRegression : public Classifier {
 public:
  explicit LogisticRegression(double l2 = 1e-3, std::size_t iterations = 500, double lr = 0.1)
      : l2_(l2), iterations_(iterations), lr_(lr) {}
  void Fit(const nn::Matrix& x, const std::vector<int>& y) override;
  std::vector<int> Predict(const nn::Matrix& x) const override;
  std::vector<double> Probabilities(const nn::Matrix& x) const;

 private:
  double l2_;
  std::size_t iterations_;
  double lr_;
  std::vector<double> w_;
  double b_ = 0.0;
};

// Bagged depth-limited Gini trees with per-split feature subsampling.
class RandomForest : public Classifier {
 public:
  struct Options {
    std::size_t trees = 50;
    std::size_t max_depth = 6;
    std::size_t min_leaf = 2;
    std::uint64_t seed = 1;
  };
  RandomForest() = default;
  explicit RandomForest(Options options) : options_(options) {}
  void Fit(const nn::Matrix& x, const std::vector<int>& y) override;
  std::vector<int> Predict(const nn::Matrix& x) const override;

  struct Node {
    int feature = -1;  // -1 for leaves
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double positive_fraction = 0.0;
  };

 private:
  Options options_;
  std::vector<std::vector<Node>> trees_;
};

// Two-layer ReLU perceptron with early stopping on a validation F1.
class MlpClassifier : public Classifier {
 public:
  struct Options {
    std::size_t hidden = 64;
    std::size_t max_epochs = 300;
    std::size_t patience = 30;
    std::size_t min_epochs = 100;
    double lr = 1e-3;
    double dropout = 0.2;
    std::uint64_t seed = 1;
  };
  MlpClassifier() = default;
  explicit MlpClassifier(Options options) : options_(options) {}
  // Without validation data the last epoch is kept.
  void Fit(const nn::Matrix& x, const std::vector<int>& y) override;
  void FitWithValidation(const nn::Matrix& x, const std::vector<int>& y, const nn::Matrix& x_val,
                         const std::vector<int>& y_val);
  std::vector<int> Predict(const nn::Matrix& x) const override;

 private:
  Options options_;
  nn::FfnLayer l1_;
  nn::FfnLayer l2_;
};

// Names accepted by RunBaseline: knn, logreg, rf_like, mlp, ml-best.
const std::vector<std::string>& BaselineNames();

struct BaselineResult {
  std::string name;
  // For ml-best: the classical model with the highest test accuracy.
  std::string chosen;
  MetricsReport test;
};

// Fits on the split's train users (val users feed the MLP's early stopping)
// and evaluates on test users, using standardized features under `mask`.
// Throws ConfigError for an unknown name.
BaselineResult RunBaseline(std::string_view name, const HeteroSocialGraph& g,
                           const DatasetSplit& split, const ModalityMask& mask, std::uint64_t seed);

std::unique_ptr<Classifier> MakeClassifier(std::string_view name, std::uint64_t seed);

}  // namespace earlysd

#endif  // EARLYSD_BASELINES_H_
