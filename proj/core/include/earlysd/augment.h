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

#ifndef EARLYSD_AUGMENT_H_
#define EARLYSD_AUGMENT_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "earlysd/enhancer.h"
#include "earlysd/graph.h"
#include "earlysd/nn.h"

// Graph refinement: u-u edges from blended feature/topic similarity, topic
// set expansion from user content, and u-t edges from a link predictor.
namespace earlysd::augment {

struct AugmentConfig {
  // Admission threshold for s_uv = a * sim_f + (1 - a) * sim_t.
  double tau_uu = 0.3;
  // Admission threshold for sigmoid(cos(h_u, h_t)).
  double theta_ut = 0.5;
  // Augmented u-u edges per node (existing augmented edges count).
  std::size_t max_new_uu_per_node = 10;
  // New u-t edges per user; 0 disables the cap.
  std::size_t max_new_ut_per_user = 3;
  std::size_t negative_ratio = 1;
  std::size_t lp_epochs = 100;
  std::size_t lp_hidden = 32;
  std::size_t lp_layers = 2;
  double lp_lr = 0.01;
  double lp_holdout = 0.1;
  // All-pairs candidate generation is refused above this many pairs unless
  // blocking is enabled.
  std::size_t max_candidate_pairs = 2'000'000;
  bool blocking = false;
  // Bits of the random-hyperplane signature used as blocking key.
  std::size_t blocking_bits = 4;
  std::uint64_t seed = 1;

  // Throws ConfigError when tau_uu leaves (0, 1], theta_ut leaves [0, 1] or a
  // count is invalid.
  void Validate() const;
};

struct UuCandidate {
  std::size_t u = 0;
  std::size_t v = 0;
  double sim_f = 0.0;
  // NaN when either user has no topics (alpha is then 1).
  double sim_t = 0.0;
  double alpha = 1.0;
  double score = 0.0;
};

// s_uv for one pair. sim_t may be NaN, meaning the topic term is skipped.
double BlendedScore(const nn::KanEdgeModule& kan, double sim_f, double sim_t, double* alpha = nullptr);

struct UuResult {
  HeteroSocialGraph graph;
  std::vector<UuCandidate> added;
  std::size_t candidates = 0;
  std::size_t admitted_before_cap = 0;
};

// Adds Augmented u-u edges with weight s_uv for pairs with s_uv >= tau_uu,
// keeping each node's highest-scoring pairs under the cap. Existing edges are
// never touched. Throws ConfigError when the all-pairs candidate set is over
// the limit and blocking is off.
UuResult UuAugment(const HeteroSocialGraph& g, const nn::KanEdgeModule& kan,
                   enhancer::EnhancerClient& client, const AugmentConfig& config);

// Standardized all-modality feature cosine between two users, in [-1, 1];
// 0 when either vector is zero.
double FeatureSimilarity(const nn::Matrix& x, std::size_t u, std::size_t v);

struct ExpandResult {
  HeteroSocialGraph graph;
  std::vector<std::string> new_topics;  // canonical names, in creation order
  std::size_t added_edges = 0;
};

// Runs topic extraction over every user's content. Novel names become
// Expanded topics (embedded with the client when the graph carries
// embeddings); every extraction hit becomes an Augmented u-t edge unless the
// edge already exists.
ExpandResult ExpandTopicSet(const HeteroSocialGraph& g, enhancer::EnhancerClient& client);

// Graph whose topics all carry client embeddings (existing ones are kept
// when their dimension matches the client's).
HeteroSocialGraph EnsureTopicEmbeddings(const HeteroSocialGraph& g,
                                        enhancer::EnhancerClient& client);

struct LinkPredictorReport {
  double final_loss = 0.0;
  double holdout_auc = 0.0;
  std::size_t train_positives = 0;
  std::size_t holdout_positives = 0;
  std::size_t epochs = 0;
};

// Heterogeneous encoder over users and topics with a sigmoid(cos) head.
class LinkPredictor {
 public:
  LinkPredictor() = default;
  LinkPredictor(std::size_t user_in, std::size_t topic_in, std::size_t hidden,
                std::size_t layers, std::uint64_t seed);

  // Trains on the Given u-t edges of `g` (10% held out for AUC). Throws
  // TrainingError when there are no Given edges or the loss diverges.
  static std::pair<LinkPredictor, LinkPredictorReport> Train(const HeteroSocialGraph& g,
                                                             const AugmentConfig& config);

  // Embeddings over the graph's full edge set.
  void Encode(const HeteroSocialGraph& g, nn::Matrix& h_user, nn::Matrix& h_topic) const;
  // sigmoid(cos(h_u, h_t)) for the given pairs. Throws Error when untrained.
  std::vector<double> Score(const HeteroSocialGraph& g,
                            const std::vector<std::pair<std::size_t, std::size_t>>& pairs) const;

  bool trained() const { return trained_; }
  void set_trained(bool t) { trained_ = t; }
  std::vector<nn::Param*> params();

  nn::FfnLayer ffn_user;
  nn::FfnLayer ffn_topic;
  std::vector<nn::HeteroConvLayer> user_layers;
  std::vector<nn::HeteroConvLayer> topic_layers;

 private:
  bool trained_ = false;
};

struct UtResult {
  HeteroSocialGraph graph;
  std::size_t added = 0;
  std::size_t scored = 0;
};

// Scores every user-topic non-edge and adds those >= theta_ut as Augmented,
// keeping each user's top max_new_ut_per_user.
UtResult UtAugment(const HeteroSocialGraph& g, const LinkPredictor& predictor,
                   const AugmentConfig& config);

// Area under the ROC curve with ties counted half.
double RocAuc(const std::vector<double>& positive_scores, const std::vector<double>& negative_scores);

struct PipelineToggles {
  bool uu = true;
  bool ut = true;
  bool expand = true;
};

struct RefinementReport {
  std::size_t new_topics = 0;
  std::size_t expansion_edges = 0;
  std::size_t uu_added = 0;
  std::size_t ut_added = 0;
  double uu_homophily = 0.0;
  double label_agreement_base = 0.0;
  LinkPredictorReport lp;
};

// Expand, then u-u, then train the link predictor and add u-t edges. Topic
// embeddings are filled in first.
std::pair<HeteroSocialGraph, RefinementReport> Refine(const HeteroSocialGraph& g,
                                                      const nn::KanEdgeModule& kan,
                                                      enhancer::EnhancerClient& client,
                                                      const AugmentConfig& config,
                                                      const PipelineToggles& toggles);

// Fraction of Augmented u-u edges joining users of the same binary label,
// and the same fraction over all user pairs.
std::pair<double, double> UuHomophily(const HeteroSocialGraph& g);

}  // namespace earlysd::augment

#endif  // EARLYSD_AUGMENT_H_
