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

#include "earlysd/baselines.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "earlysd/error.h"
#include "earlysd/features.h"
#include "earlysd/model.h"
#include "earlysd/rng.h"

namespace earlysd {
namespace {

void CheckTraining(const nn::Matrix& x, const std::vector<int>& y) {
  if (x.rows() == 0) throw DomainError("cannot fit on zero rows");
  if (static_cast<std::size_t>(x.rows()) != y.size()) throw ShapeError("row/label count mismatch");
}

double Gini(double pos, double n) {
  if (n <= 0.0) return 0.0;
  const double p = pos / n;
  return 2.0 * p * (1.0 - p);
}

struct TreeBuilder {
  const nn::Matrix& x;
  const std::vector<int>& y;
  const RandomForest::Options& opt;
  Rng& rng;
  std::vector<RandomForest::Node> nodes;

  int Build(std::vector<std::size_t>& rows, std::size_t depth) {
    double pos = 0.0;
    for (std::size_t r : rows) pos += y[r];
    const int id = static_cast<int>(nodes.size());
    nodes.push_back({});
    nodes[id].positive_fraction = pos / static_cast<double>(rows.size());
    if (depth >= opt.max_depth || rows.size() < 2 * opt.min_leaf || pos == 0.0 ||
        pos == static_cast<double>(rows.size())) {
      return id;
    }
    const auto d = static_cast<std::size_t>(x.cols());
    const std::size_t m = std::max<std::size_t>(1, static_cast<std::size_t>(std::sqrt(static_cast<double>(d))));
    std::vector<std::size_t> features(d);
    std::iota(features.begin(), features.end(), 0);
    rng.Shuffle(features);
    features.resize(m);

    const double n = static_cast<double>(rows.size());
    double best_gain = 1e-12;
    int best_f = -1;
    double best_t = 0.0;
    std::vector<std::pair<double, int>> vals(rows.size());
    for (std::size_t f : features) {
      for (std::size_t i = 0; i < rows.size(); ++i) {
        vals[i] = {x(static_cast<Eigen::Index>(rows[i]), static_cast<Eigen::Index>(f)), y[rows[i]]};
      }
      std::sort(vals.begin(), vals.end());
      double left_pos = 0.0;
      const double parent = Gini(pos, n);
      for (std::size_t i = 0; i + 1 < vals.size(); ++i) {
        left_pos += vals[i].second;
        if (vals[i].first == vals[i + 1].first) continue;
        const double nl = static_cast<double>(i + 1);
        if (nl < opt.min_leaf || n - nl < opt.min_leaf) continue;
        const double gain = parent - (nl / n) * Gini(left_pos, nl) - ((n - nl) / n) * Gini(pos - left_pos, n - nl);
        if (gain > best_gain) {
          best_gain = gain;
          best_f = static_cast<int>(f);
          best_t = 0.5 * (vals[i].first + vals[i + 1].first);
        }
      }
    }
    if (best_f < 0) return id;
    std::vector<std::size_t> left;
    std::vector<std::size_t> right;
    for (std::size_t r : rows) {
      (x(static_cast<Eigen::Index>(r), best_f) <= best_t ? left : right).push_back(r);
    }
    nodes[id].feature = best_f;
    nodes[id].threshold = best_t;
    const int l = Build(left, depth + 1);
    const int r = Build(right, depth + 1);
    nodes[id].left = l;
    nodes[id].right = r;
    return id;
  }
};

std::vector<int> Argmax(const nn::Matrix& logits) {
  std::vector<int> out(static_cast<std::size_t>(logits.rows()));
  for (Eigen::Index i = 0; i < logits.rows(); ++i) out[static_cast<std::size_t>(i)] = logits(i, 1) > logits(i, 0);
  return out;
}

nn::Matrix Rows(const nn::Matrix& x, const std::vector<std::size_t>& idx) {
  nn::Matrix out(static_cast<Eigen::Index>(idx.size()), x.cols());
  for (std::size_t i = 0; i < idx.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = x.row(static_cast<Eigen::Index>(idx[i]));
  return out;
}

}  // namespace

void KnnClassifier::Fit(const nn::Matrix& x, const std::vector<int>& y) {
  CheckTraining(x, y);
  if (k_ == 0) throw ConfigError("knn k must be positive");
  x_ = x;
  y_ = y;
}

std::vector<int> KnnClassifier::Predict(const nn::Matrix& x) const {
  if (x_.rows() == 0) throw Error("knn classifier is not fitted");
  const std::size_t k = std::min<std::size_t>(k_, static_cast<std::size_t>(x_.rows()));
  std::vector<int> out;
  std::vector<std::pair<double, std::size_t>> d(static_cast<std::size_t>(x_.rows()));
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (Eigen::Index j = 0; j < x_.rows(); ++j) {
      d[static_cast<std::size_t>(j)] = {(x_.row(j) - x.row(i)).squaredNorm(), static_cast<std::size_t>(j)};
    }
    std::partial_sort(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(k), d.end());
    int votes = 0;
    for (std::size_t j = 0; j < k; ++j) votes += y_[d[j].second] ? 1 : -1;
    out.push_back(votes > 0 ? 1 : votes < 0 ? 0 : y_[d[0].second]);
  }
  return out;
}

void LogisticRegression::Fit(const nn::Matrix& x, const std::vector<int>& y) {
  CheckTraining(x, y);
  const auto d = static_cast<std::size_t>(x.cols());
  const double n = static_cast<double>(x.rows());
  w_.assign(d, 0.0);
  b_ = 0.0;
  Eigen::Map<Eigen::VectorXd> w(w_.data(), static_cast<Eigen::Index>(d));
  Eigen::VectorXd yv(x.rows());
  for (Eigen::Index i = 0; i < x.rows(); ++i) yv(i) = y[static_cast<std::size_t>(i)];
  for (std::size_t it = 0; it < iterations_; ++it) {
    Eigen::VectorXd z = x * w;
    z.array() += b_;
    const Eigen::VectorXd p = z.unaryExpr([](double v) { return nn::Sigmoid(v); });
    const Eigen::VectorXd r = p - yv;
    const Eigen::VectorXd gw = x.transpose() * r / n + l2_ * w;
    w -= lr_ * gw;
    b_ -= lr_ * r.mean();
  }
}

std::vector<double> LogisticRegression::Probabilities(const nn::Matrix& x) const {
  if (w_.empty()) throw Error("logistic regression is not fitted");
  if (static_cast<std::size_t>(x.cols()) != w_.size()) throw ShapeError("feature count mismatch");
  Eigen::Map<const Eigen::VectorXd> w(w_.data(), static_cast<Eigen::Index>(w_.size()));
  const Eigen::VectorXd z = x * w;
  std::vector<double> p(static_cast<std::size_t>(z.size()));
  for (Eigen::Index i = 0; i < z.size(); ++i) p[static_cast<std::size_t>(i)] = nn::Sigmoid(z(i) + b_);
  return p;
}

std::vector<int> LogisticRegression::Predict(const nn::Matrix& x) const {
  std::vector<int> out;
  for (double p : Probabilities(x)) out.push_back(p > 0.5 ? 1 : 0);
  return out;
}

void RandomForest::Fit(const nn::Matrix& x, const std::vector<int>& y) {
  CheckTraining(x, y);
  if (options_.trees == 0) throw ConfigError("forest needs at least one tree");
  trees_.clear();
  Rng rng = Rng::Stream(options_.seed, 0xf0e5);
  const auto n = static_cast<std::size_t>(x.rows());
  for (std::size_t t = 0; t < options_.trees; ++t) {
    std::vector<std::size_t> rows(n);
    for (auto& r : rows) r = rng.Index(n);
    TreeBuilder b{x, y, options_, rng, {}};
    b.Build(rows, 0);
    trees_.push_back(std::move(b.nodes));
  }
}

std::vector<int> RandomForest::Predict(const nn::Matrix& x) const {
  if (trees_.empty()) throw Error("forest is not fitted");
  std::vector<int> out;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    double sum = 0.0;
    for (const auto& tree : trees_) {
      int id = 0;
      while (tree[id].feature >= 0) id = x(i, tree[id].feature) <= tree[id].threshold ? tree[id].left : tree[id].right;
      sum += tree[id].positive_fraction;
    }
    out.push_back(sum / static_cast<double>(trees_.size()) > 0.5 ? 1 : 0);
  }
  return out;
}

void MlpClassifier::Fit(const nn::Matrix& x, const std::vector<int>& y) {
  FitWithValidation(x, y, nn::Matrix(0, x.cols()), {});
}

void MlpClassifier::FitWithValidation(const nn::Matrix& x, const std::vector<int>& y,
                                      const nn::Matrix& x_val, const std::vector<int>& y_val) {
  CheckTraining(x, y);
  Rng rng = Rng::Stream(options_.seed, 0x31b);
  l1_ = nn::FfnLayer("mlp.hidden", static_cast<std::size_t>(x.cols()), options_.hidden, nn::Activation::kReLU);
  l2_ = nn::FfnLayer("mlp.out", options_.hidden, 2, nn::Activation::kIdentity);
  l1_.Init(rng);
  l2_.Init(rng);
  std::vector<nn::Param*> params = l1_.params();
  for (nn::Param* p : l2_.params()) params.push_back(p);
  nn::AdamOptions ao;
  ao.lr = options_.lr;
  nn::Adam adam(params, ao);

  const bool has_val = x_val.rows() > 0;
  std::vector<nn::Matrix> best;
  for (const nn::Param* p : params) best.push_back(p->value);
  double best_f1 = -1.0;
  std::size_t best_epoch = 0;
  for (std::size_t epoch = 1; epoch <= options_.max_epochs; ++epoch) {
    adam.ZeroGrad();
    nn::FfnLayer::Cache c1;
    nn::FfnLayer::Cache c2;
    nn::Matrix h = l1_.Forward(x, &c1);
    nn::Matrix mask;
    if (options_.dropout > 0.0) {
      mask = nn::DropoutMask(h.rows(), h.cols(), options_.dropout, rng);
      h.array() *= mask.array();
    }
    const nn::Matrix logits = l2_.Forward(h, &c2);
    nn::Matrix grad;
    const double loss = nn::CrossEntropy(logits, y, &grad);
    if (!std::isfinite(loss)) throw TrainingError("mlp loss is not finite at epoch " + std::to_string(epoch));
    nn::Matrix dh = l2_.Backward(grad, c2);
    if (mask.size()) dh.array() *= mask.array();
    l1_.Backward(dh, c1);
    adam.Step();
    if (!has_val) continue;
    const double f1 = Evaluate(y_val, Predict(x_val)).f1;
    if (f1 > best_f1) {
      best_f1 = f1;
      best_epoch = epoch;
      std::size_t i = 0;
      for (const nn::Param* p : params) best[i++] = p->value;
    } else if (epoch >= options_.min_epochs && epoch - best_epoch >= options_.patience) {
      break;
    }
  }
  if (has_val) {
    std::size_t i = 0;
    for (nn::Param* p : params) p->value = best[i++];
  }
}

std::vector<int> MlpClassifier::Predict(const nn::Matrix& x) const {
  if (l1_.weight.value.size() == 0) throw Error("mlp is not fitted");
  return Argmax(l2_.Forward(l1_.Forward(x, nullptr), nullptr));
}

const std::vector<std::string>& BaselineNames() {
  static const std::vector<std::string> kNames = {"knn", "logreg", "rf_like", "mlp", "ml-best"};
  return kNames;
}

std::unique_ptr<Classifier> MakeClassifier(std::string_view name, std::uint64_t seed) {
  if (name == "knn") return std::make_unique<KnnClassifier>(5);
  if (name == "logreg") return std::make_unique<LogisticRegression>();
  if (name == "rf_like") {
    RandomForest::Options o;
    o.seed = seed;
    return std::make_unique<RandomForest>(o);
  }
  if (name == "mlp") {
    MlpClassifier::Options o;
    o.seed = seed;
    return std::make_unique<MlpClassifier>(o);
  }
  throw ConfigError("unknown baseline '" + std::string(name) + "'");
}

BaselineResult RunBaseline(std::string_view name, const HeteroSocialGraph& g,
                           const DatasetSplit& split, const ModalityMask& mask, std::uint64_t seed) {
  if (std::find(BaselineNames().begin(), BaselineNames().end(), name) == BaselineNames().end()) {
    throw ConfigError("unknown baseline '" + std::string(name) + "'");
  }
  const nn::Matrix x = BuildFeatureMatrix(g.users(), mask, FeatureScaling::kStandardized);
  std::vector<int> labels;
  for (const UserRecord& u : g.users()) labels.push_back(u.binary_label() == BinaryLabel::kPositive ? 1 : 0);
  const auto train = UserIndices(g, split.train);
  const auto val = UserIndices(g, split.val);
  const auto test = UserIndices(g, split.test);
  auto pick = [&](const std::vector<std::size_t>& idx) {
    std::vector<int> out;
    for (std::size_t i : idx) out.push_back(labels[i]);
    return out;
  };
  const nn::Matrix x_train = Rows(x, train);
  const nn::Matrix x_test = Rows(x, test);
  const std::vector<int> y_train = pick(train);
  const std::vector<int> y_test = pick(test);

  auto run_one = [&](std::string_view n) {
    auto clf = MakeClassifier(n, seed);
    if (auto* mlp = dynamic_cast<MlpClassifier*>(clf.get()); mlp && !val.empty()) {
      mlp->FitWithValidation(x_train, y_train, Rows(x, val), pick(val));
    } else {
      clf->Fit(x_train, y_train);
    }
    return Evaluate(y_test, clf->Predict(x_test));
  };

  BaselineResult result;
  result.name = std::string(name);
  if (name != "ml-best") {
    result.chosen = result.name;
    result.test = run_one(name);
    return result;
  }
  for (const char* n : {"knn", "logreg", "rf_like"}) {
    MetricsReport m = run_one(n);
    if (result.chosen.empty() || m.acc > result.test.acc) {
      result.chosen = n;
      result.test = m;
    }
  }
  return result;
}

}  // namespace earlysd
