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
#include <set>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "earlysd/dataset.h"
#include "earlysd/error.h"
#include "earlysd/split.h"
#include "earlysd/text.h"
#include "test_util.h"

namespace earlysd {
namespace {

using testing::TempDir;

std::string ReadAll(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void WriteAll(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out << text;
}

Dataset SampleDataset() {
  auto g = testing::SmallGraph(12, 5, 4);
  auto d = Dataset::FromGraph(g);
  for (auto& u : d.users) {
    u.feature("bidir_ratio") = 0.25;
    u.feature("followers") = 1.0 / 3.0;
  }
  d.uu_links.push_back({d.users[0].id, d.users[1].id, 0.73, EdgeOrigin::kAugmented, 0.8, 0.6});
  d.uu_links.push_back({d.users[2].id, d.users[3].id});
  return d;
}

TEST(DatasetTest, SaveLoadRoundTripIsExact) {
  TempDir dir("roundtrip");
  const auto d = SampleDataset();
  const auto g = d.ToGraph();
  SaveDataset(d, dir.path());
  const auto back = LoadDataset(dir.path()).ToGraph();

  EXPECT_EQ(back.users(), g.users());
  EXPECT_EQ(back.topics(), g.topics());
  ASSERT_EQ(back.uu_edges().size(), g.uu_edges().size());
  for (std::size_t i = 0; i < g.uu_edges().size(); ++i) {
    EXPECT_EQ(back.uu_edges()[i].u, g.uu_edges()[i].u);
    EXPECT_EQ(back.uu_edges()[i].v, g.uu_edges()[i].v);
    EXPECT_EQ(back.uu_edges()[i].weight, g.uu_edges()[i].weight);
    EXPECT_EQ(back.uu_edges()[i].origin, g.uu_edges()[i].origin);
  }
  ASSERT_EQ(back.ut_edges().size(), g.ut_edges().size());
  for (std::size_t i = 0; i < g.ut_edges().size(); ++i) {
    EXPECT_EQ(back.ut_edges()[i].user, g.ut_edges()[i].user);
    EXPECT_EQ(back.ut_edges()[i].topic, g.ut_edges()[i].topic);
  }
}

TEST(DatasetTest, ManifestRecordsDimensions) {
  TempDir dir("manifest");
  const auto d = SampleDataset();
  SaveDataset(d, dir.path());
  const auto m = ReadManifest(dir.path());
  EXPECT_EQ(m.num_users, 12u);
  EXPECT_EQ(m.num_topics, 5u);
  EXPECT_EQ(m.topic_embedding_dim, 4u);
  EXPECT_EQ(m.num_uu_edges, 2u);
}

TEST(DatasetTest, RatioAboveOneIsParseError) {
  TempDir dir("ratio");
  SaveDataset(SampleDataset(), dir.path());
  const auto cols = UserFeatureColumns();
  const auto col = 2 + static_cast<std::size_t>(std::find(cols.begin(), cols.end(), "bidir_ratio") - cols.begin());

  const auto users_csv = dir.path() / "users.csv";
  std::istringstream in(ReadAll(users_csv));
  std::string out;
  std::string line;
  for (int row = 0; std::getline(in, line); ++row) {
    if (row == 3) {
      std::vector<std::string> fields;
      std::stringstream ls(line);
      for (std::string f; std::getline(ls, f, ',');) fields.push_back(f);
      fields.at(col) = "1.2";
      line = Join(fields, ",");
    }
    out += line + "\n";
  }
  WriteAll(users_csv, out);

  try {
    LoadDataset(dir.path());
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 4u);
    EXPECT_NE(e.file().find("users.csv"), std::string::npos);
  }
}

TEST(DatasetTest, EmptyTopicEdgeFileGivesNoEdges) {
  TempDir dir("empty_ut");
  SaveDataset(SampleDataset(), dir.path());
  WriteAll(dir.path() / "ut_edges.csv", "user_id,topic_id\n");
  const auto g = LoadDataset(dir.path()).ToGraph();
  EXPECT_EQ(g.ut_edges().size(), 0u);
  EXPECT_EQ(g.num_users(), 12u);
}

TEST(DatasetTest, UnknownTopicIdIsParseError) {
  TempDir dir("unknown_topic");
  SaveDataset(SampleDataset(), dir.path());
  WriteAll(dir.path() / "ut_edges.csv", "user_id,topic_id\nu000,t999\n");
  EXPECT_THROW(LoadDataset(dir.path()), ParseError);
}

TEST(DatasetTest, MissingFileIsIoError) {
  TempDir dir("missing");
  EXPECT_THROW(LoadDataset(dir.path()), IoError);
}

std::vector<UserRecord> Cohort(int positives, int negatives) {
  std::vector<UserRecord> users;
  for (int i = 0; i < positives + negatives; ++i) {
    users.push_back(MakeUser("u" + std::to_string(100 + i), i < positives ? 70 : 40));
  }
  return users;
}

int Positives(const std::vector<std::string>& ids, const std::vector<UserRecord>& users) {
  int n = 0;
  for (const auto& id : ids) {
    for (const auto& u : users) n += (u.id == id && u.binary_label() == BinaryLabel::kPositive);
  }
  return n;
}

TEST(SplitTest, SizesAndStratification) {
  const auto users = Cohort(50, 50);
  const auto s = StratifiedSplit(users, {0.7, 0.15, 0.15}, 1);
  ASSERT_EQ(s.train.size(), 70u);
  ASSERT_EQ(s.val.size(), 15u);
  ASSERT_EQ(s.test.size(), 15u);
  for (const auto* part : {&s.train, &s.val, &s.test}) {
    const double rate = static_cast<double>(Positives(*part, users)) / part->size();
    // 15 users cannot hold exactly half; floor/ceil of the share is the best.
    EXPECT_LE(std::abs(rate - 0.5), 0.5 / part->size() + 0.02);
  }
  std::set<std::string> all(s.train.begin(), s.train.end());
  all.insert(s.val.begin(), s.val.end());
  all.insert(s.test.begin(), s.test.end());
  EXPECT_EQ(all.size(), 100u);
}

TEST(SplitTest, DeterministicForSeed) {
  const auto users = Cohort(50, 50);
  EXPECT_EQ(StratifiedSplit(users, {}, 1), StratifiedSplit(users, {}, 1));
  EXPECT_NE(StratifiedSplit(users, {}, 1).train, StratifiedSplit(users, {}, 2).train);
}

TEST(SplitTest, ThreePositivesOnePerSplit) {
  const auto users = Cohort(3, 9);
  const auto s = StratifiedSplit(users, {1.0 / 3, 1.0 / 3, 1.0 / 3}, 5);
  EXPECT_EQ(Positives(s.train, users), 1);
  EXPECT_EQ(Positives(s.val, users), 1);
  EXPECT_EQ(Positives(s.test, users), 1);
}

TEST(SplitTest, InfeasibleOrBadRatios) {
  EXPECT_THROW(StratifiedSplit(Cohort(2, 10), {}, 1), DomainError);
  EXPECT_THROW(StratifiedSplit(Cohort(10, 10), {0.5, 0.5, 0.5}, 1), DomainError);
  EXPECT_THROW(StratifiedSplit(Cohort(10, 10), {1.0, 0.0, 0.0}, 1), DomainError);
}

TEST(SplitTest, SaveLoadRoundTrip) {
  TempDir dir("split");
  const auto s = StratifiedSplit(Cohort(20, 20), {}, 9);
  SaveSplit(s, dir.path() / "split.csv");
  const auto back = LoadSplit(dir.path() / "split.csv");
  EXPECT_EQ(back.train, s.train);
  EXPECT_EQ(back.val, s.val);
  EXPECT_EQ(back.test, s.test);
}

}  // namespace
}  // namespace earlysd
