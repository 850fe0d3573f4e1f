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

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "earlysd/augment.h"
#include "earlysd/error.h"
#include "earlysd/features.h"
#include "earlysd/rng.h"

namespace earlysd::augment {
namespace {

using nn::Matrix;
using Pair = std::pair<std::size_t, std::size_t>;

struct Relations {
  nn::SparseRelation uu;
  nn::SparseRelation ut;  // users <- topics
  nn::SparseRelation tu;  // topics <- users
  nn::SparseRelation tt;  // empty
};

Relations BuildRelations(const HeteroSocialGraph& g, const std::vector<Pair>& ut_pairs) {
  Relations r;
  r.uu = nn::UserUserRelation(g);
  const std::size_t nu = g.num_users();
  const std::size_t nt = g.num_topics();
  std::vector<std::vector<std::size_t>> by_user(nu);
  std::vector<std::vector<std::size_t>> by_topic(nt);
  for (const auto& [u, t] : ut_pairs) {
    by_user[u].push_back(t);
    by_topic[t].push_back(u);
  }
  auto fill = [](nn::SparseRelation& rel, std::vector<std::vector<std::size_t>>& lists,
                 std::size_t sources) {
    rel.num_targets = lists.size();
    rel.num_sources = sources;
    for (auto& l : lists) {
      std::sort(l.begin(), l.end());
      for (std::size_t s : l) {
        rel.sources.push_back(s);
        rel.weights.push_back(1.0);
        rel.slot.push_back(-1);
      }
      rel.offsets.push_back(rel.sources.size());
    }
  };
  fill(r.ut, by_user, nt);
  fill(r.tu, by_topic, nu);
  r.tt = nn::EmptyRelation(nt, nt);
  return r;
}

std::vector<Pair> AllPairs(const HeteroSocialGraph& g) {
  std::vector<Pair> p;
  for (const TopicEdge& e : g.ut_edges()) p.emplace_back(e.user, e.topic);
  return p;
}

struct Inputs {
  Matrix x_user;
  Matrix x_topic;
};

Inputs BuildInputs(const HeteroSocialGraph& g) {
  if (g.topic_embedding_dim() == 0) {
    throw TrainingError("link prediction needs topic embeddings");
  }
  return {BuildFeatureMatrix(g.users(), ModalityMask::All(), FeatureScaling::kStandardized),
          TopicEmbeddingMatrix(g)};
}

struct Forward {
  nn::FfnLayer::Cache ffn_u;
  nn::FfnLayer::Cache ffn_t;
  std::vector<nn::HeteroConvLayer::Cache> user;
  std::vector<nn::HeteroConvLayer::Cache> topic;
  Matrix h_user;
  Matrix h_topic;
};

// cos(a, b) and its gradient; a zero vector yields 0 with zero gradient.
double SafeCosine(const nn::RowVector& a, const nn::RowVector& b, nn::RowVector* da,
                  nn::RowVector* db) {
  const double na = a.norm();
  const double nb = b.norm();
  if (na < 1e-12 || nb < 1e-12) {
    if (da) *da = nn::RowVector::Zero(a.size());
    if (db) *db = nn::RowVector::Zero(b.size());
    return 0.0;
  }
  const double c = a.dot(b) / (na * nb);
  if (da) *da = b / (na * nb) - c * a / (na * na);
  if (db) *db = a / (na * nb) - c * b / (nb * nb);
  return c;
}

}  // namespace

LinkPredictor::LinkPredictor(std::size_t user_in, std::size_t topic_in, std::size_t hidden,
                             std::size_t layers, std::uint64_t seed)
    : ffn_user("lp.ffn_u", user_in, hidden, nn::Activation::kIdentity),
      ffn_topic("lp.ffn_t", topic_in, hidden, nn::Activation::kIdentity) {
  Rng rng = Rng::Stream(seed, 0x11e7);
  ffn_user.Init(rng);
  ffn_topic.Init(rng);
  for (std::size_t l = 0; l < layers; ++l) {
    nn::HeteroConvLayer::Options opt;
    opt.aggregation = nn::Aggregation::kDegreeMean;
    opt.self_loop = true;
    opt.activation = l + 1 == layers ? nn::Activation::kIdentity : nn::Activation::kReLU;
    const std::string suffix = std::to_string(l);
    user_layers.emplace_back("lp.user" + suffix, hidden, hidden, hidden, opt);
    topic_layers.emplace_back("lp.topic" + suffix, hidden, hidden, hidden, opt);
    user_layers.back().Init(rng);
    topic_layers.back().Init(rng);
  }
}

std::vector<nn::Param*> LinkPredictor::params() {
  std::vector<nn::Param*> p = ffn_user.params();
  for (nn::Param* q : ffn_topic.params()) p.push_back(q);
  for (auto& l : user_layers) {
    for (nn::Param* q : l.params()) p.push_back(q);
  }
  for (auto& l : topic_layers) {
    for (nn::Param* q : l.params()) p.push_back(q);
  }
  return p;
}

namespace {

Forward RunForward(const LinkPredictor& lp, const Inputs& in, const Relations& rel) {
  Forward f;
  Matrix hu = lp.ffn_user.Forward(in.x_user, &f.ffn_u);
  Matrix ht = lp.ffn_topic.Forward(in.x_topic, &f.ffn_t);
  f.user.resize(lp.user_layers.size());
  f.topic.resize(lp.topic_layers.size());
  for (std::size_t l = 0; l < lp.user_layers.size(); ++l) {
    Matrix nu = lp.user_layers[l].Forward(rel.uu, rel.ut, hu, ht, &f.user[l]);
    Matrix nt = lp.topic_layers[l].Forward(rel.tt, rel.tu, ht, hu, &f.topic[l]);
    hu = std::move(nu);
    ht = std::move(nt);
  }
  f.h_user = std::move(hu);
  f.h_topic = std::move(ht);
  return f;
}

void RunBackward(LinkPredictor& lp, const Relations& rel, const Forward& f, Matrix d_user,
                 Matrix d_topic) {
  for (std::size_t l = lp.user_layers.size(); l-- > 0;) {
    auto gu = lp.user_layers[l].Backward(d_user, rel.uu, rel.ut, f.user[l], 0);
    auto gt = lp.topic_layers[l].Backward(d_topic, rel.tt, rel.tu, f.topic[l], 0);
    d_user = gu.d_same + gt.d_cross;
    d_topic = gu.d_cross + gt.d_same;
  }
  lp.ffn_user.Backward(d_user, f.ffn_u);
  lp.ffn_topic.Backward(d_topic, f.ffn_t);
}

std::vector<double> ScorePairs(const Matrix& hu, const Matrix& ht, const std::vector<Pair>& pairs) {
  std::vector<double> s;
  s.reserve(pairs.size());
  for (const auto& [u, t] : pairs) {
    s.push_back(nn::Sigmoid(SafeCosine(hu.row(static_cast<Eigen::Index>(u)),
                                       ht.row(static_cast<Eigen::Index>(t)), nullptr, nullptr)));
  }
  return s;
}

std::vector<Pair> SampleNegatives(std::size_t count, std::size_t nu, std::size_t nt,
                                  const std::unordered_set<std::size_t>& known, Rng& rng) {
  std::vector<Pair> out;
  if (nu * nt <= known.size()) return out;
  out.reserve(count);
  std::size_t guard = 0;
  while (out.size() < count && guard < 100 * count + 1000) {
    ++guard;
    const std::size_t u = rng.Index(nu);
    const std::size_t t = rng.Index(nt);
    if (!known.contains(u * nt + t)) out.emplace_back(u, t);
  }
  return out;
}

}  // namespace

void LinkPredictor::Encode(const HeteroSocialGraph& g, Matrix& h_user, Matrix& h_topic) const {
  const Inputs in = BuildInputs(g);
  Forward f = RunForward(*this, in, BuildRelations(g, AllPairs(g)));
  h_user = std::move(f.h_user);
  h_topic = std::move(f.h_topic);
}

std::vector<double> LinkPredictor::Score(const HeteroSocialGraph& g,
                                         const std::vector<Pair>& pairs) const {
  if (!trained_) throw Error("link predictor is not trained");
  Matrix hu;
  Matrix ht;
  Encode(g, hu, ht);
  return ScorePairs(hu, ht, pairs);
}

std::pair<LinkPredictor, LinkPredictorReport> LinkPredictor::Train(const HeteroSocialGraph& g,
                                                                   const AugmentConfig& config) {
  std::vector<Pair> given;
  for (const TopicEdge& e : g.ut_edges()) {
    if (e.origin == EdgeOrigin::kGiven) given.emplace_back(e.user, e.topic);
  }
  if (given.empty()) throw TrainingError("link prediction needs at least one given u-t edge");
  const Inputs in = BuildInputs(g);
  const std::size_t nu = g.num_users();
  const std::size_t nt = g.num_topics();

  Rng rng = Rng::Stream(config.seed, 0x1b);
  rng.Shuffle(given);
  std::size_t n_hold = static_cast<std::size_t>(std::floor(config.lp_holdout * static_cast<double>(given.size())));
  if (given.size() < 10) n_hold = 0;
  const std::vector<Pair> holdout(given.begin(), given.begin() + static_cast<std::ptrdiff_t>(n_hold));
  const std::vector<Pair> train(given.begin() + static_cast<std::ptrdiff_t>(n_hold), given.end());

  std::unordered_set<std::size_t> known;
  for (const TopicEdge& e : g.ut_edges()) known.insert(e.user * nt + e.topic);
  std::unordered_set<std::size_t> held;
  for (const auto& [u, t] : holdout) held.insert(u * nt + t);
  std::vector<Pair> message;
  for (const TopicEdge& e : g.ut_edges()) {
    if (!held.contains(e.user * nt + e.topic)) message.emplace_back(e.user, e.topic);
  }
  const Relations rel = BuildRelations(g, message);

  LinkPredictor lp(static_cast<std::size_t>(in.x_user.cols()), static_cast<std::size_t>(in.x_topic.cols()),
                   config.lp_hidden, config.lp_layers, config.seed);
  nn::AdamOptions adam_opt;
  adam_opt.lr = config.lp_lr;
  nn::Adam adam(lp.params(), adam_opt);

  LinkPredictorReport report;
  report.train_positives = train.size();
  report.holdout_positives = holdout.size();
  Rng neg_rng = Rng::Stream(config.seed, 0x2b);
  for (std::size_t epoch = 0; epoch < config.lp_epochs; ++epoch) {
    std::vector<Pair> batch = train;
    const std::vector<Pair> negs =
        SampleNegatives(train.size() * config.negative_ratio, nu, nt, known, neg_rng);
    batch.insert(batch.end(), negs.begin(), negs.end());
    std::vector<double> y(batch.size(), 0.0);
    std::fill(y.begin(), y.begin() + static_cast<std::ptrdiff_t>(train.size()), 1.0);

    adam.ZeroGrad();
    const Forward f = RunForward(lp, in, rel);
    std::vector<double> p(batch.size());
    std::vector<double> cosv(batch.size());
    for (std::size_t i = 0; i < batch.size(); ++i) {
      cosv[i] = SafeCosine(f.h_user.row(static_cast<Eigen::Index>(batch[i].first)),
                           f.h_topic.row(static_cast<Eigen::Index>(batch[i].second)), nullptr, nullptr);
      p[i] = nn::Sigmoid(cosv[i]);
    }
    std::vector<double> dp(batch.size());
    const double loss = nn::Bce(p, y, dp);
    if (!std::isfinite(loss)) {
      throw TrainingError("link predictor loss diverged at epoch " + std::to_string(epoch));
    }
    report.final_loss = loss;
    Matrix d_user = Matrix::Zero(f.h_user.rows(), f.h_user.cols());
    Matrix d_topic = Matrix::Zero(f.h_topic.rows(), f.h_topic.cols());
    for (std::size_t i = 0; i < batch.size(); ++i) {
      const auto u = static_cast<Eigen::Index>(batch[i].first);
      const auto t = static_cast<Eigen::Index>(batch[i].second);
      nn::RowVector da;
      nn::RowVector db;
      SafeCosine(f.h_user.row(u), f.h_topic.row(t), &da, &db);
      const double dc = dp[i] * p[i] * (1.0 - p[i]);
      d_user.row(u) += dc * da;
      d_topic.row(t) += dc * db;
    }
    RunBackward(lp, rel, f, std::move(d_user), std::move(d_topic));
    adam.Step();
    report.epochs = epoch + 1;
  }
  lp.trained_ = true;

  if (!holdout.empty()) {
    Rng eval_rng = Rng::Stream(config.seed, 0x3b);
    const std::vector<Pair> negs = SampleNegatives(holdout.size(), nu, nt, known, eval_rng);
    const Forward f = RunForward(lp, in, rel);
    report.holdout_auc = RocAuc(ScorePairs(f.h_user, f.h_topic, holdout),
                                ScorePairs(f.h_user, f.h_topic, negs));
  }
  return {std::move(lp), report};
}

}  // namespace earlysd::augment
