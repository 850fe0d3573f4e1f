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
#include <map>
#include <set>

#include <gtest/gtest.h>

#include "earlysd/augment.h"
#include "earlysd/enhancer.h"
#include "earlysd/error.h"
#include "earlysd/features.h"
#include "earlysd/synth.h"
#include "earlysd/text.h"
#include "planted.h"
#include "test_util.h"

namespace earlysd::augment {
namespace {

nn::KanEdgeModule HalfKan() {
  nn::KanEdgeModule kan;
  for (nn::Param* p : kan.params()) p->value.setZero();
  return kan;
}

const synth::Cohort& Cohort() {
  static const synth::Cohort c = synth::GenerateCohort(synth::CohortConfig{});
  return c;
}

const HeteroSocialGraph& CohortGraph() {
  static const HeteroSocialGraph g = Cohort().data.ToGraph();
  return g;
}

TEST(BlendTest, FixedAlphaArithmetic) {
  const auto kan = HalfKan();
  double alpha = 0.0;
  const double s = BlendedScore(kan, 0.8, 0.4, &alpha);
  EXPECT_EQ(alpha, 0.5);
  EXPECT_NEAR(s, 0.6, 1e-15);
  EXPECT_LT(s, 0.7);
  // No topics on one side: alpha is forced to 1.
  EXPECT_EQ(BlendedScore(kan, 0.8, NAN, &alpha), 0.8);
  EXPECT_EQ(alpha, 1.0);
}

TEST(UuAugmentTest, IdenticalUsersGetUnitWeightEdge) {
  Rng rng(1);
  UserRecord a = testing::RandomUser("a", 70, rng);
  UserRecord b = a;
  b.id = "b";
  UserRecord c = testing::RandomUser("c", 40, rng);
  for (auto& x : c.block(Modality::kPersonal)) x = 1.0 - x;
  std::vector<TopicNode> topics = {{"t1", "music", TopicOrigin::kOriginal, {}},
                                   {"t2", "travel", TopicOrigin::kOriginal, {}}};
  const std::vector<TopicLink> ut = {{"a", "t1"}, {"b", "t1"}, {"c", "t2"}};
  const auto g = HeteroSocialGraph::Build({a, b, c}, topics, {}, ut);

  enhancer::StubEnhancer stub;
  AugmentConfig cfg;
  cfg.tau_uu = 0.99;
  const auto r = UuAugment(g, HalfKan(), stub, cfg);
  ASSERT_GE(r.added.size(), 1u);
  bool found = false;
  for (const auto& e : r.graph.uu_edges()) {
    if (r.graph.users()[e.u].id == "a" && r.graph.users()[e.v].id == "b") {
      found = true;
      EXPECT_NEAR(e.weight, 1.0, 1e-12);
      EXPECT_EQ(e.origin, EdgeOrigin::kAugmented);
    }
  }
  EXPECT_TRUE(found);
}

TEST(UuAugmentTest, SymmetricBoundedIdempotentAndMonotone) {
  const auto g = testing::SmallGraph(40, 6, 0);
  enhancer::StubEnhancer stub;
  AugmentConfig cfg;
  cfg.tau_uu = 0.2;
  cfg.max_new_uu_per_node = 4;
  const auto once = UuAugment(g, HalfKan(), stub, cfg);
  ASSERT_GT(once.added.size(), 0u);
  std::vector<std::size_t> per_node(g.num_users());
  for (const auto& e : once.graph.uu_edges()) {
    EXPECT_LT(e.u, e.v);
    EXPECT_GE(e.weight, cfg.tau_uu);
    EXPECT_LE(e.weight, 1.0);
    ++per_node[e.u];
    ++per_node[e.v];
  }
  for (std::size_t n : per_node) EXPECT_LE(n, cfg.max_new_uu_per_node);
  for (const auto& adj_user : once.graph.users()) {
    for (const auto& n : once.graph.Neighbors(adj_user.id, Relation::kUserUser)) {
      EXPECT_TRUE(once.graph.Adjacent(n.id, adj_user.id));
    }
  }
  const auto twice = UuAugment(once.graph, HalfKan(), stub, cfg);
  EXPECT_EQ(twice.added.size(), 0u);
  EXPECT_EQ(twice.graph.uu_edges().size(), once.graph.uu_edges().size());
}

TEST(UuAugmentTest, CandidateGuardNeedsBlocking) {
  const auto g = testing::SmallGraph(40, 6, 0);
  enhancer::StubEnhancer stub;
  AugmentConfig cfg;
  cfg.max_candidate_pairs = 100;
  EXPECT_THROW(UuAugment(g, HalfKan(), stub, cfg), ConfigError);
  cfg.blocking = true;
  EXPECT_NO_THROW(UuAugment(g, HalfKan(), stub, cfg));
}

TEST(UuAugmentTest, CohortEdgesAreHomophilous) {
  for (std::uint64_t seed : {1, 2, 3}) {
    synth::CohortConfig cc;
    cc.seed = seed;
    const auto g = synth::GenerateCohort(cc).data.ToGraph();
    enhancer::StubEnhancer stub;
    const auto r = UuAugment(g, HalfKan(), stub, AugmentConfig{});
    ASSERT_GT(r.added.size(), 0u) << seed;
    const auto [homophily, base] = UuHomophily(r.graph);
    EXPECT_GT(homophily, base) << seed;
  }
}

TEST(ExpandTest, LexiconOnlyContentAddsNoTopics) {
  auto g = testing::SmallGraph(10, 4, 0);
  std::vector<UserRecord> users = g.users();
  for (auto& u : users) u.content = {"topic 1 and topic 2", "more topic 3"};
  g = HeteroSocialGraph::Build(users, g.topics(), {}, g.TopicLinks());
  enhancer::StubEnhancer stub;
  const auto r = ExpandTopicSet(g, stub);
  EXPECT_EQ(r.new_topics.size(), 0u);
  EXPECT_EQ(r.graph.num_topics(), g.num_topics());
}

TEST(ExpandTest, MentionOfKnownTopicAddsEdge) {
  Rng rng(3);
  std::vector<UserRecord> users = {testing::RandomUser("a", 70, rng), testing::RandomUser("b", 40, rng)};
  users[0].content = {"saw a K-pop show yesterday"};
  users[1].content = {"gardening all day"};
  std::vector<TopicNode> topics = {{"t1", "K-pop", TopicOrigin::kOriginal, {}},
                                   {"t2", "gardening", TopicOrigin::kOriginal, {}}};
  const std::vector<TopicLink> ut = {{"b", "t2"}};
  const auto g = HeteroSocialGraph::Build(users, topics, {}, ut);
  enhancer::StubEnhancer stub;
  const auto r = ExpandTopicSet(g, stub);
  const auto a = *r.graph.user_index("a");
  const auto kpop = *r.graph.topic_index("t1");
  EXPECT_TRUE(r.graph.HasTopicEdge(a, kpop));
  EXPECT_EQ(r.added_edges, 1u);
}

TEST(ExpandTest, CohortGrowsByFrozenCount) {
  enhancer::StubEnhancer stub;
  const auto r = ExpandTopicSet(CohortGraph(), stub);
  EXPECT_EQ(CohortGraph().num_topics(), 317u);
  EXPECT_EQ(r.new_topics.size(), 49u);
  EXPECT_EQ(r.graph.num_topics(), 317u + 49u);
  for (const auto& t : r.graph.topics()) {
    if (t.origin == TopicOrigin::kExpanded) EXPECT_TRUE(r.graph.topic_index_by_name(t.name).has_value());
  }
}

TEST(LinkPredictorTest, RecoversPlantedBlocks) {
  const auto g = planted::BlockGraph({}, 5);
  AugmentConfig cfg;
  cfg.seed = 5;
  const auto [lp, report] = LinkPredictor::Train(g, cfg);
  EXPECT_GT(report.holdout_auc, 0.8);
  EXPECT_GT(report.holdout_positives, 0u);
  EXPECT_TRUE(lp.trained());
}

TEST(LinkPredictorTest, SymmetricInitScoresEqually) {
  const auto g = planted::BlockGraph({}, 6);
  LinkPredictor lp(g.feature_dim(), g.topic_embedding_dim(), 8, 1, 1);
  for (nn::Param* p : lp.params()) p->value.setZero();
  // Identical (bias-only) initial embeddings for every node.
  lp.ffn_user.bias.value.setConstant(0.3);
  lp.ffn_topic.bias.value.setConstant(0.3);
  lp.set_trained(true);
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t u = 0; u < 10; ++u) pairs.push_back({u, (u * 7) % g.num_topics()});
  const auto s = lp.Score(g, pairs);
  for (double x : s) EXPECT_EQ(x, s[0]);
}

TEST(LinkPredictorTest, NoGivenEdgesIsTrainingError) {
  const auto g = testing::SmallGraph(10, 3, 4);
  const auto empty = HeteroSocialGraph::Build(g.users(), g.topics(), {}, {});
  EXPECT_THROW(LinkPredictor::Train(empty, AugmentConfig{}), TrainingError);
}

TEST(UtAugmentTest, ThresholdExtremes) {
  const auto g = planted::BlockGraph({.blocks = 2, .users_per_block = 10, .topics_per_block = 5}, 2);
  AugmentConfig cfg;
  cfg.lp_epochs = 20;
  const auto [lp, report] = LinkPredictor::Train(g, cfg);
  (void)report;
  const std::size_t non_edges = g.num_users() * g.num_topics() - g.ut_edges().size();

  cfg.theta_ut = 1.0;
  EXPECT_EQ(UtAugment(g, lp, cfg).added, 0u);

  cfg.theta_ut = 0.0;
  cfg.max_new_ut_per_user = 0;
  const auto all = UtAugment(g, lp, cfg);
  EXPECT_EQ(all.added, non_edges);
  EXPECT_EQ(all.graph.ut_edges().size(), g.num_users() * g.num_topics());
}

TEST(UtAugmentTest, CohortEdgesFollowLatentInterests) {
  const auto& cohort = Cohort();
  enhancer::StubEnhancer stub;
  const auto g = EnsureTopicEmbeddings(CohortGraph(), stub);
  AugmentConfig cfg;
  const auto [lp, report] = LinkPredictor::Train(g, cfg);
  (void)report;
  const auto r = UtAugment(g, lp, cfg);
  ASSERT_GT(r.added, 0u);

  // Latent probability of the topic under the user's own group.
  const auto names = synth::OriginalTopicNames(317);
  std::map<std::string, std::size_t> latent_index;
  for (std::size_t i = 0; i < names.size(); ++i) latent_index[CanonicalName(names[i])] = i;
  auto group_of = [](SfvaLabel l) {
    return static_cast<std::size_t>(std::find(synth::kGroupOrder.begin(), synth::kGroupOrder.end(), l) -
                                    synth::kGroupOrder.begin());
  };
  double added = 0.0;
  std::size_t n_added = 0;
  for (const auto& e : r.graph.ut_edges()) {
    if (e.origin != EdgeOrigin::kAugmented) continue;
    const auto& u = r.graph.users()[e.user];
    const auto it = latent_index.find(CanonicalName(r.graph.topics()[e.topic].name));
    if (it == latent_index.end()) continue;
    added += cohort.truth.latent.original[group_of(u.label())][it->second];
    ++n_added;
  }
  Rng rng(11);
  double random = 0.0;
  const std::size_t draws = 20000;
  for (std::size_t i = 0; i < draws; ++i) {
    const auto& u = g.users()[rng.Index(g.num_users())];
    random += cohort.truth.latent.original[group_of(u.label())][rng.Index(317)];
  }
  ASSERT_GT(n_added, 0u);
  EXPECT_GT(added / n_added, random / draws);
}

TEST(RefineTest, NeverRemovesOrReweightsGivenEdges) {
  const auto& g = CohortGraph();
  enhancer::StubEnhancer stub;
  AugmentConfig cfg;
  cfg.lp_epochs = 10;
  const auto [refined, report] = Refine(g, HalfKan(), stub, cfg, PipelineToggles{});
  EXPECT_GE(refined.num_topics(), g.num_topics());
  EXPECT_GE(refined.ut_edges().size(), g.ut_edges().size());
  for (const auto& e : g.ut_edges()) {
    const auto u = *refined.user_index(g.users()[e.user].id);
    const auto t = *refined.topic_index(g.topics()[e.topic].id);
    EXPECT_TRUE(refined.HasTopicEdge(u, t));
  }
  for (const auto& e : g.uu_edges()) {
    EXPECT_TRUE(refined.Adjacent(g.users()[e.u].id, g.users()[e.v].id));
  }
  EXPECT_EQ(report.new_topics, refined.num_topics() - g.num_topics());
}

TEST(RocAucTest, KnownValues) {
  EXPECT_EQ(RocAuc({0.9, 0.8}, {0.1, 0.2}), 1.0);
  EXPECT_EQ(RocAuc({0.1}, {0.9}), 0.0);
  EXPECT_EQ(RocAuc({0.5}, {0.5}), 0.5);
  EXPECT_NEAR(RocAuc({0.9, 0.4}, {0.5, 0.1}), 0.75, 1e-15);
}

TEST(ConfigTest, ThresholdsOutsideRangeAreRejected) {
  AugmentConfig cfg;
  cfg.tau_uu = 0.0;
  EXPECT_THROW(cfg.Validate(), ConfigError);
  cfg = AugmentConfig{};
  cfg.theta_ut = 1.5;
  EXPECT_THROW(cfg.Validate(), ConfigError);
  EXPECT_NO_THROW(AugmentConfig{}.Validate());
}

}  // namespace
}  // namespace earlysd::augment
