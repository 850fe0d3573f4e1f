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

#include "earlysd/model.h"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "earlysd/csv.h"
#include "earlysd/error.h"
#include "earlysd/rng.h"

namespace earlysd {
namespace {

using nn::Matrix;

struct LayerCache {
  Matrix mask;  // dropout mask applied to the layer input (empty: none)
  nn::HeteroConvLayer::Cache conv;
};

struct ForwardState {
  nn::FfnLayer::Cache ffn_u;
  nn::FfnLayer::Cache ffn_t;
  std::vector<LayerCache> layers;
  Matrix head_mask;
  nn::FfnLayer::Cache head_hidden;
  nn::FfnLayer::Cache head_out;
  std::vector<double> alpha;     // per u-u edge, NaN when not learned
  std::vector<double> raw;       // unclamped learned weight
  nn::SparseRelation uu;
  Matrix logits;
};

}  // namespace

void ModelConfig::Validate() const {
  if (mask.empty()) throw ConfigError("at least one feature modality must be enabled");
  if (hidden == 0) throw ConfigError("hidden dimension must be positive");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw ConfigError("dropout must lie in [0, 1)");
  if (!(lr > 0.0)) throw ConfigError("learning rate must be positive");
  if (weight_decay < 0.0) throw ConfigError("weight_decay must be >= 0");
  if (max_epochs == 0) throw ConfigError("max_epochs must be positive");
}

ModelInputs ModelInputs::FromGraph(const HeteroSocialGraph& g, const ModalityMask& mask,
                                   bool learn_edge_weights) {
  if (g.num_topics() > 0 && g.topic_embedding_dim() == 0) {
    throw ShapeError("topics carry no embeddings");
  }
  ModelInputs in;
  in.x_user = BuildFeatureMatrix(g.users(), mask, FeatureScaling::kStandardized);
  in.x_topic = g.num_topics() > 0 ? TopicEmbeddingMatrix(g) : Matrix(0, 1);
  in.uu = nn::UserUserRelation(g);
  in.ut = nn::UserTopicRelation(g);
  for (const UserEdge& e : g.uu_edges()) {
    const bool learn = learn_edge_weights && e.origin == EdgeOrigin::kAugmented &&
                       std::isfinite(e.sim_f) && std::isfinite(e.sim_t);
    in.sim_f.push_back(learn ? e.sim_f : 0.0);
    in.sim_t.push_back(learn ? e.sim_t : 0.0);
    in.fixed_weight.push_back(e.weight);
    in.learned.push_back(learn);
  }
  for (const UserRecord& u : g.users()) {
    in.labels.push_back(u.binary_label() == BinaryLabel::kPositive ? 1 : 0);
  }
  return in;
}

EarlySdModel::EarlySdModel(const ModelConfig& config, std::size_t user_in, std::size_t topic_in)
    : ffn_user("ffn_u", user_in, config.hidden, nn::Activation::kReLU),
      ffn_topic("ffn_t", topic_in, config.hidden, nn::Activation::kReLU),
      head_hidden("head.hidden", config.hidden, config.hidden, nn::Activation::kReLU),
      head_out("head.out", config.hidden, 2, nn::Activation::kIdentity),
      config_(config),
      user_in_(user_in),
      topic_in_(topic_in) {
  config.Validate();
  Rng rng = Rng::Stream(config.seed, 0x30de1);
  ffn_user.Init(rng);
  ffn_topic.Init(rng);
  nn::HeteroConvLayer::Options opt;
  opt.aggregation = config.aggregation;
  opt.self_loop = config.self_loop;
  opt.tied = config.homogeneous;
  for (std::size_t l = 0; l < config.layers; ++l) {
    convs.emplace_back("conv" + std::to_string(l), config.hidden, config.hidden, config.hidden, opt);
    convs.back().Init(rng);
  }
  head_hidden.Init(rng);
  head_out.Init(rng);
}

std::vector<nn::Param*> EarlySdModel::params() {
  std::vector<nn::Param*> p = ffn_user.params();
  for (nn::Param* q : ffn_topic.params()) p.push_back(q);
  for (auto& c : convs) {
    for (nn::Param* q : c.params()) p.push_back(q);
  }
  for (nn::Param* q : head_hidden.params()) p.push_back(q);
  for (nn::Param* q : head_out.params()) p.push_back(q);
  for (nn::Param* q : kan.params()) p.push_back(q);
  return p;
}

std::vector<const nn::Param*> EarlySdModel::params() const {
  std::vector<const nn::Param*> out;
  for (nn::Param* p : const_cast<EarlySdModel*>(this)->params()) out.push_back(p);
  return out;
}

EarlySdModel::Embeddings EarlySdModel::InitEmbeddings(const ModelInputs& in) const {
  return {ffn_user.Forward(in.x_user, nullptr), ffn_topic.Forward(in.x_topic, nullptr)};
}

namespace {

ForwardState RunForward(const EarlySdModel& m, const ModelInputs& in, Rng* dropout_rng) {
  ForwardState s;
  const std::size_t ne = in.fixed_weight.size();
  std::vector<double> w = in.fixed_weight;
  s.alpha.assign(ne, std::nan(""));
  s.raw.assign(ne, 0.0);
  for (std::size_t e = 0; e < ne; ++e) {
    if (!in.learned[e]) continue;
    const double a = m.kan.Alpha(in.sim_f[e], in.sim_t[e]);
    s.alpha[e] = a;
    s.raw[e] = a * in.sim_f[e] + (1.0 - a) * in.sim_t[e];
    w[e] = std::clamp(s.raw[e], 0.0, 1.0);
  }
  s.uu = in.uu;
  s.uu.SetSlotWeights(w);

  const double rate = m.config().dropout;
  auto maybe_drop = [&](Matrix& h, Matrix& mask) {
    if (!dropout_rng || rate <= 0.0) return;
    mask = nn::DropoutMask(h.rows(), h.cols(), rate, *dropout_rng);
    h.array() *= mask.array();
  };

  Matrix h = m.ffn_user.Forward(in.x_user, &s.ffn_u);
  const Matrix ht = m.ffn_topic.Forward(in.x_topic, &s.ffn_t);
  s.layers.resize(m.convs.size());
  for (std::size_t l = 0; l < m.convs.size(); ++l) {
    maybe_drop(h, s.layers[l].mask);
    h = m.convs[l].Forward(s.uu, in.ut, h, ht, &s.layers[l].conv);
  }
  maybe_drop(h, s.head_mask);
  const Matrix z = m.head_hidden.Forward(h, &s.head_hidden);
  s.logits = m.head_out.Forward(z, &s.head_out);
  return s;
}

}  // namespace

std::vector<double> EarlySdModel::EdgeWeights(const ModelInputs& in) const {
  std::vector<double> w = in.fixed_weight;
  for (std::size_t e = 0; e < w.size(); ++e) {
    if (!in.learned[e]) continue;
    const double a = kan.Alpha(in.sim_f[e], in.sim_t[e]);
    w[e] = std::clamp(a * in.sim_f[e] + (1.0 - a) * in.sim_t[e], 0.0, 1.0);
  }
  return w;
}

Matrix EarlySdModel::Logits(const ModelInputs& in) const { return RunForward(*this, in, nullptr).logits; }

std::vector<int> EarlySdModel::Predict(const ModelInputs& in) const {
  const Matrix logits = Logits(in);
  std::vector<int> out(static_cast<std::size_t>(logits.rows()));
  for (Eigen::Index i = 0; i < logits.rows(); ++i) out[static_cast<std::size_t>(i)] = logits(i, 1) > logits(i, 0) ? 1 : 0;
  return out;
}

double EarlySdModel::LossAndGrad(const ModelInputs& in, const std::vector<std::size_t>& train, Rng& rng) {
  ForwardState s = RunForward(*this, in, &rng);
  Matrix sub(static_cast<Eigen::Index>(train.size()), s.logits.cols());
  std::vector<int> y(train.size());
  for (std::size_t i = 0; i < train.size(); ++i) {
    sub.row(static_cast<Eigen::Index>(i)) = s.logits.row(static_cast<Eigen::Index>(train[i]));
    y[i] = in.labels[train[i]];
  }
  Matrix d_sub;
  const double loss = nn::CrossEntropy(sub, y, &d_sub);
  Matrix d_logits = Matrix::Zero(s.logits.rows(), s.logits.cols());
  for (std::size_t i = 0; i < train.size(); ++i) {
    d_logits.row(static_cast<Eigen::Index>(train[i])) += d_sub.row(static_cast<Eigen::Index>(i));
  }

  Matrix d = head_hidden.Backward(head_out.Backward(d_logits, s.head_out), s.head_hidden);
  if (s.head_mask.size()) d.array() *= s.head_mask.array();
  const std::size_t ne = in.fixed_weight.size();
  std::vector<double> d_w(ne, 0.0);
  Matrix d_topic = Matrix::Zero(s.ffn_t.pre.rows(), s.ffn_t.pre.cols());
  for (std::size_t l = convs.size(); l-- > 0;) {
    auto g = convs[l].Backward(d, s.uu, in.ut, s.layers[l].conv, ne);
    d = std::move(g.d_same);
    if (s.layers[l].mask.size()) d.array() *= s.layers[l].mask.array();
    d_topic += g.d_cross;
    for (std::size_t e = 0; e < ne; ++e) d_w[e] += g.d_slot[e];
  }
  ffn_user.Backward(d, s.ffn_u);
  if (d_topic.size()) ffn_topic.Backward(d_topic, s.ffn_t);

  std::vector<double> sf;
  std::vector<double> st;
  std::vector<double> ga;
  for (std::size_t e = 0; e < ne; ++e) {
    if (!in.learned[e]) continue;
    // The clamp to [0, 1] passes no gradient outside its range.
    if (s.raw[e] <= 0.0 || s.raw[e] >= 1.0) continue;
    sf.push_back(in.sim_f[e]);
    st.push_back(in.sim_t[e]);
    ga.push_back(d_w[e] * (in.sim_f[e] - in.sim_t[e]));
  }
  if (!ga.empty()) kan.Backward(sf, st, ga, {}, {});
  return loss;
}

std::vector<std::size_t> UserIndices(const HeteroSocialGraph& g, const std::vector<std::string>& ids) {
  std::vector<std::size_t> out;
  out.reserve(ids.size());
  for (const auto& id : ids) {
    auto idx = g.user_index(id);
    if (!idx) throw LookupError("unknown user '" + id + "'");
    out.push_back(*idx);
  }
  return out;
}

namespace {

double LossOn(const Matrix& logits, const std::vector<int>& labels, const std::vector<std::size_t>& rows) {
  Matrix sub(static_cast<Eigen::Index>(rows.size()), logits.cols());
  std::vector<int> y(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    sub.row(static_cast<Eigen::Index>(i)) = logits.row(static_cast<Eigen::Index>(rows[i]));
    y[i] = labels[rows[i]];
  }
  return nn::CrossEntropy(sub, y);
}

MetricsReport MetricsOn(const Matrix& logits, const std::vector<int>& labels,
                        const std::vector<std::size_t>& rows) {
  std::vector<int> truth;
  std::vector<int> pred;
  for (std::size_t r : rows) {
    truth.push_back(labels[r]);
    const auto i = static_cast<Eigen::Index>(r);
    pred.push_back(logits(i, 1) > logits(i, 0) ? 1 : 0);
  }
  return Evaluate(truth, pred);
}

}  // namespace

TrainResult TrainEarlySd(const HeteroSocialGraph& g, const DatasetSplit& split,
                         const ModelConfig& config) {
  config.Validate();
  const ModelInputs in = ModelInputs::FromGraph(g, config.mask, config.learn_edge_weights);
  const std::vector<std::size_t> train = UserIndices(g, split.train);
  std::vector<std::size_t> val = UserIndices(g, split.val);
  if (train.empty()) throw TrainingError("no training users");
  if (val.empty()) val = train;

  TrainResult result;
  result.model = EarlySdModel(config, static_cast<std::size_t>(in.x_user.cols()),
                              static_cast<std::size_t>(in.x_topic.cols()));
  EarlySdModel& model = result.model;
  nn::AdamOptions opt;
  opt.lr = config.lr;
  opt.weight_decay = config.weight_decay;
  nn::Adam adam(model.params(), opt);
  Rng rng = Rng::Stream(config.seed, 0xd20);

  std::vector<Matrix> best;
  for (const nn::Param* p : model.params()) best.push_back(p->value);
  double best_f1 = -1.0;
  double best_loss = HUGE_VAL;
  for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
    adam.ZeroGrad();
    double loss = 0.0;
    try {
      loss = model.LossAndGrad(in, train, rng);
    } catch (const NumericError& e) {
      throw TrainingError("training diverged at epoch " + std::to_string(epoch) + ": " + e.what());
    }
    if (!std::isfinite(loss)) {
      throw TrainingError("training loss is not finite at epoch " + std::to_string(epoch));
    }
    adam.Step();

    const Matrix logits = model.Logits(in);
    if (!logits.allFinite()) {
      throw TrainingError("logits are not finite at epoch " + std::to_string(epoch));
    }
    const MetricsReport vm = MetricsOn(logits, in.labels, val);
    const double vl = LossOn(logits, in.labels, val);
    result.log.push_back({epoch, loss, vl, vm.acc, vm.f1});
    if (vm.f1 > best_f1 || (vm.f1 == best_f1 && vl < best_loss)) {
      best_f1 = vm.f1;
      best_loss = vl;
      result.best_epoch = epoch;
      std::size_t i = 0;
      for (const nn::Param* p : model.params()) best[i++] = p->value;
    } else if (epoch >= config.min_epochs && epoch - result.best_epoch >= config.patience) {
      break;
    }
  }
  std::size_t i = 0;
  for (nn::Param* p : model.params()) p->value = best[i++];
  result.best_val_f1 = best_f1;
  return result;
}

MetricsReport EvaluateModel(const EarlySdModel& model, const HeteroSocialGraph& g,
                            const std::vector<std::string>& user_ids) {
  if (user_ids.empty()) throw DomainError("empty evaluation set");
  const ModelInputs in = ModelInputs::FromGraph(g, model.config().mask, model.config().learn_edge_weights);
  return MetricsOn(model.Logits(in), in.labels, UserIndices(g, user_ids));
}

std::string TrainingLogCsv(const std::vector<EpochLog>& log) {
  std::ostringstream os;
  CsvWriter w(os);
  w.Row({"epoch", "train_loss", "val_loss", "val_acc", "val_f1"});
  for (const EpochLog& e : log) {
    w.Row({std::to_string(e.epoch), FormatDouble(e.train_loss), FormatDouble(e.val_loss),
           FormatDouble(e.val_acc), FormatDouble(e.val_f1)});
  }
  return os.str();
}

}  // namespace earlysd
