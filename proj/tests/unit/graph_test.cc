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

#include <set>
#include <utility>

#include <gtest/gtest.h>

#include "earlysd/error.h"
#include "earlysd/graph.h"
#include "test_util.h"

namespace earlysd {
namespace {

using testing::RandomUser;

TEST(LabelTest, BoundaryScores) {
  EXPECT_EQ(LabelFromScore(57), SfvaLabel::kNonSfva);
  EXPECT_EQ(LabelFromScore(58), SfvaLabel::kPotentialSfva);
  EXPECT_EQ(LabelFromScore(60), SfvaLabel::kPotentialSfva);
  EXPECT_EQ(LabelFromScore(63), SfvaLabel::kPotentialSfva);
  EXPECT_EQ(LabelFromScore(64), SfvaLabel::kSfva);
}

TEST(LabelTest, PotentialCountsAsPositive) {
  EXPECT_EQ(ToBinary(SfvaLabel::kNonSfva), BinaryLabel::kNegative);
  EXPECT_EQ(ToBinary(SfvaLabel::kPotentialSfva), BinaryLabel::kPositive);
  EXPECT_EQ(ToBinary(SfvaLabel::kSfva), BinaryLabel::kPositive);
}

TEST(LabelTest, MonotoneOverWholeRange) {
  int prev = 0;
  for (int s = kMinScore; s <= kMaxScore; ++s) {
    const int rank = static_cast<int>(LabelFromScore(s));
    EXPECT_GE(rank, prev) << s;
    prev = rank;
  }
}

TEST(LabelTest, OutOfRangeIsDomainError) {
  EXPECT_THROW(LabelFromScore(-1), DomainError);
  EXPECT_THROW(LabelFromScore(121), DomainError);
}

TEST(ModalityMaskTest, ParseAndPrint) {
  EXPECT_EQ(ModalityMask::Parse("PCTSI"), ModalityMask::All());
  const auto m = ModalityMask::Parse("ctsi");
  EXPECT_FALSE(m.contains(Modality::kPersonal));
  EXPECT_TRUE(m.contains(Modality::kSearch));
  EXPECT_EQ(m.ToString(), "CTSI");
  EXPECT_THROW(ModalityMask::Parse("PX"), ConfigError);
  EXPECT_THROW(ModalityMask::Parse(""), ConfigError);
}

TEST(UserRecordTest, NamedFeatureAccess) {
  UserRecord u = MakeUser("a", 50);
  u.feature("followers") = 12.0;
  EXPECT_EQ(u.feature("followers"), 12.0);
  EXPECT_THROW(u.feature("no_such_column"), LookupError);
}

class GraphTest : public ::testing::Test {
 protected:
  std::vector<UserRecord> Users(std::initializer_list<const char*> ids) {
    std::vector<UserRecord> out;
    for (const char* id : ids) out.push_back(RandomUser(id, 50, rng_));
    return out;
  }
  static std::vector<TopicNode> Topics(std::initializer_list<const char*> ids) {
    std::vector<TopicNode> out;
    for (const char* id : ids) out.push_back({id, std::string("name ") + id, TopicOrigin::kOriginal, {}});
    return out;
  }
  Rng rng_{3};
};

TEST_F(GraphTest, EdgeIsStoredCanonically) {
  const std::vector<UserLink> uu = {{"b", "a"}};
  const auto g = HeteroSocialGraph::Build(Users({"a", "b"}), {}, uu, {});
  ASSERT_EQ(g.uu_edges().size(), 1u);
  EXPECT_EQ(g.users()[g.uu_edges()[0].u].id, "a");
  EXPECT_EQ(g.users()[g.uu_edges()[0].v].id, "b");
  EXPECT_EQ(g.uu_edges()[0].weight, 1.0);
  EXPECT_TRUE(g.Adjacent("a", "b"));
  EXPECT_TRUE(g.Adjacent("b", "a"));
}

TEST_F(GraphTest, SelfLoopIsRejected) {
  const std::vector<UserLink> uu = {{"a", "a"}};
  try {
    HeteroSocialGraph::Build(Users({"a", "b"}), {}, uu, {});
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("a"), std::string::npos);
  }
}

TEST_F(GraphTest, DanglingAndDuplicateIdsAreListed) {
  const std::vector<TopicLink> ut = {{"a", "t9"}};
  EXPECT_THROW(HeteroSocialGraph::Build(Users({"a", "b"}), Topics({"t1"}), {}, ut), ValidationError);
  EXPECT_THROW(HeteroSocialGraph::Build(Users({"a", "a"}), {}, {}, {}), ValidationError);
  const std::vector<UserLink> heavy = {{"a", "b", 1.5}};
  EXPECT_THROW(HeteroSocialGraph::Build(Users({"a", "b"}), {}, heavy, {}), ValidationError);
}

TEST_F(GraphTest, DuplicateEdgesCollapse) {
  const std::vector<UserLink> uu = {{"a", "b"}, {"b", "a"}};
  const std::vector<TopicLink> ut = {{"a", "t1"}, {"a", "t1"}};
  const auto g = HeteroSocialGraph::Build(Users({"a", "b"}), Topics({"t1"}), uu, ut);
  EXPECT_EQ(g.uu_edges().size(), 1u);
  EXPECT_EQ(g.ut_edges().size(), 1u);
}

TEST_F(GraphTest, LargeCohortCounts) {
  std::vector<UserRecord> users;
  for (int i = 0; i < 468; ++i) users.push_back(RandomUser("u" + std::to_string(1000 + i), 50, rng_));
  std::vector<TopicNode> topics;
  for (int t = 0; t < 40; ++t) topics.push_back({"t" + std::to_string(100 + t), "topic " + std::to_string(t), TopicOrigin::kOriginal, {}});
  std::vector<TopicLink> ut;
  for (int i = 0; i < 468 && ut.size() < 6621; ++i) {
    for (int t = 0; t < 40 && ut.size() < 6621; ++t) {
      if ((i + t) % 3 != 0) ut.push_back({users[i].id, topics[t].id});
    }
  }
  ASSERT_EQ(ut.size(), 6621u);
  const auto g = HeteroSocialGraph::Build(users, topics, {}, ut);
  EXPECT_EQ(g.num_users(), 468u);
  EXPECT_EQ(g.ut_edges().size(), 6621u);
}

TEST_F(GraphTest, NeighborQueries) {
  const std::vector<UserLink> uu = {{"a", "b", 0.73, EdgeOrigin::kAugmented}};
  const std::vector<TopicLink> ut = {{"a", "t2"}, {"a", "t1"}, {"b", "t1"}};
  const auto g = HeteroSocialGraph::Build(Users({"c", "a", "b"}), Topics({"t2", "t1"}), uu, ut);

  EXPECT_TRUE(g.Neighbors("c", Relation::kUserUser).empty());
  EXPECT_TRUE(g.Neighbors("c", Relation::kUserTopic).empty());

  const auto topics = g.Neighbors("a", Relation::kUserTopic);
  ASSERT_EQ(topics.size(), 2u);
  EXPECT_EQ(topics[0].id, "t1");
  EXPECT_EQ(topics[1].id, "t2");

  const auto friends = g.Neighbors("a", Relation::kUserUser);
  ASSERT_EQ(friends.size(), 1u);
  EXPECT_EQ(friends[0], (Neighbor{"b", 0.73}));

  const auto fans = g.Neighbors("t1", Relation::kUserTopic);
  ASSERT_EQ(fans.size(), 2u);
  EXPECT_EQ(fans[0].id, "a");
  EXPECT_EQ(fans[1].id, "b");

  EXPECT_THROW(g.Neighbors("zz", Relation::kUserUser), LookupError);
  EXPECT_THROW(g.Adjacent("a", "zz"), LookupError);
}

TEST_F(GraphTest, TopicNeighborsMatchEdgeList) {
  const auto g = testing::SmallGraph(30, 7, 0);
  std::set<std::pair<std::string, std::string>> from_queries;
  for (const auto& u : g.users()) {
    for (const auto& n : g.Neighbors(u.id, Relation::kUserTopic)) from_queries.insert({u.id, n.id});
  }
  std::set<std::pair<std::string, std::string>> from_edges;
  for (const auto& e : g.ut_edges()) from_edges.insert({g.users()[e.user].id, g.topics()[e.topic].id});
  EXPECT_EQ(from_queries, from_edges);
}

TEST_F(GraphTest, WithAdditionsKeepsExistingEdges) {
  const std::vector<UserLink> uu = {{"a", "b"}};
  const auto g = HeteroSocialGraph::Build(Users({"a", "b", "c"}), Topics({"t1"}), uu, {});
  const std::vector<UserLink> extra = {{"b", "a", 0.4, EdgeOrigin::kAugmented}, {"b", "c", 0.5, EdgeOrigin::kAugmented}};
  const std::vector<TopicLink> extra_ut = {{"c", "t2", EdgeOrigin::kAugmented}};
  const auto h = g.WithAdditions({{"t2", "new", TopicOrigin::kExpanded, {}}}, extra, extra_ut);
  ASSERT_EQ(h.uu_edges().size(), 2u);
  EXPECT_EQ(h.uu_edges()[0].weight, 1.0);
  EXPECT_EQ(h.uu_edges()[0].origin, EdgeOrigin::kGiven);
  EXPECT_EQ(h.num_topics(), 2u);
  EXPECT_TRUE(h.HasTopicEdge(*h.user_index("c"), *h.topic_index("t2")));
}

}  // namespace
}  // namespace earlysd
