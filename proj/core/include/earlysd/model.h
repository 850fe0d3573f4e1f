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

#ifndef EARLYSD_MODEL_H_
#define EARLYSD_MODEL_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "earlysd/features.h"
#include "earlysd/graph.h"
#include "earlysd/metrics.h"
#include "earlysd/nn.h"
#include "earlysd/split.h"

namespace earlysd {

struct ModelConfig {
  ModalityMask mask = ModalityMask::All();
  std::size_t hidden = 64;
  std::size_t layers = 2;
  double dropout = 0.2;
  double lr = 1e-3;
  double weight_decay = 0.0;
  std::size_t max_epochs = 300;
  std::size_t patience = 30;
  // Patience is not checked before this epoch.
  std::size_t min_epochs = 100;
  nn::Aggregation aggregation = nn::Aggregation::kSum;
  bool self_loop = false;
  // One shared message function for both relations (GCN-like control).
  bool homogeneous = false;
  // Augmented u-u edge weights recomputed by the KAN and trained end to end.
  bool learn_edge_weights = true;
  std::uint64_t seed = 1;

  void Validate() const;
};

// Everything the model reads from a graph, precomputed once.
struct ModelInputs {
  nn::Matrix x_user;   // masked, standardized features
  nn::Matrix x_topic;  // topic embeddings
  nn::SparseRelation uu;
  nn::SparseRelation ut;
  // Per u-u edge: similarity components and whether its weight is learned.
  std::vector<double> sim_f;
  std::vector<double> sim_t;
  std::vector<double> fixed_weight;
  std::vector<bool> learned;
  std::vector<int> labels;  // binary, per user

  // Throws ConfigError on an empty mask and ShapeError when topics lack
  // embeddings.
  static ModelInputs FromGraph(const HeteroSocialGraph& g, const ModalityMask& mask,
                               bool learn_edge_weights);
};

struct EpochLog {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;
  double val_acc = 0.0;
  double val_f1 = 0.0;
};

// FFN_u / FFN_t initial embeddings, a stack of heterogeneous conv layers over
// users (topic embeddings stay at their initial value), and a two-layer MLP
// head producing two logits.
class EarlySdModel {
 public:
  EarlySdModel() = default;
  EarlySdModel(const ModelConfig& config, std::size_t user_in, std::size_t topic_in);

  struct Embeddings {
    nn::Matrix h_user;
    nn::Matrix h_topic;
  };
  // h_u^0 = FFN_u(X_u), h_t^0 = FFN_t(X_t) (no dropout).
  Embeddings InitEmbeddings(const ModelInputs& in) const;

  // Logits (num_users x 2) in inference mode.
  nn::Matrix Logits(const ModelInputs& in) const;
  std::vector<int> Predict(const ModelInputs& in) const;
  // Edge weights after the KAN, one per u-u edge.
  std::vector<double> EdgeWeights(const ModelInputs& in) const;

  // One training step on the rows in `train`: forward with dropout, loss,
  // backward. Gradients are accumulated (not applied); returns the loss.
  double LossAndGrad(const ModelInputs& in, const std::vector<std::size_t>& train, Rng& rng);

  std::vector<nn::Param*> params();
  std::vector<const nn::Param*> params() const;
  const ModelConfig& config() const { return config_; }
  std::size_t user_in() const { return user_in_; }
  std::size_t topic_in() const { return topic_in_; }

  nn::FfnLayer ffn_user;
  nn::FfnLayer ffn_topic;
  std::vector<nn::HeteroConvLayer> convs;
  nn::FfnLayer head_hidden;
  nn::FfnLayer head_out;
  nn::KanEdgeModule kan;

 private:
  ModelConfig config_;
  std::size_t user_in_ = 0;
  std::size_t topic_in_ = 0;
};

struct TrainResult {
  EarlySdModel model;
  std::vector<EpochLog> log;
  std::size_t best_epoch = 0;
  double best_val_f1 = 0.0;
};

// Transductive training on the train users' binary labels with early stopping
// on validation F1; the returned model holds the best-epoch parameters.
// Throws TrainingError (with the epoch) when the loss becomes NaN.
TrainResult TrainEarlySd(const HeteroSocialGraph& g, const DatasetSplit& split,
                         const ModelConfig& config);

// Metrics over the named users. Throws DomainError when `user_ids` is empty
// and LookupError for unknown ids.
MetricsReport EvaluateModel(const EarlySdModel& model, const HeteroSocialGraph& g,
                            const std::vector<std::string>& user_ids);

std::vector<std::size_t> UserIndices(const HeteroSocialGraph& g, const std::vector<std::string>& ids);

// Checkpoint: binary container (magic, version, named float64 arrays in
// little-endian order) plus a `<path>.toml` sidecar with the hyperparameters.
void SaveCheckpoint(const EarlySdModel& model, const std::filesystem::path& path);
// Throws IoError / ParseError on a missing or malformed checkpoint.
EarlySdModel LoadCheckpoint(const std::filesystem::path& path);

std::string TrainingLogCsv(const std::vector<EpochLog>& log);

}  // namespace earlysd

#endif  // EARLYSD_MODEL_H_
