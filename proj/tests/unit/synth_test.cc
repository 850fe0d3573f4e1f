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
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "earlysd/dataset.h"
#include "earlysd/error.h"
#include "earlysd/stats.h"
#include "earlysd/synth.h"
#include "test_util.h"

namespace earlysd::synth {
namespace {

const Cohort& DefaultCohort() {
  static const Cohort cohort = GenerateCohort(CohortConfig{});
  return cohort;
}

std::array<std::size_t, 3> GroupCounts(const std::vector<UserRecord>& users) {
  std::array<std::size_t, 3> n{};
  for (const auto& u : users) ++n[static_cast<std::size_t>(u.label())];
  return n;
}

TEST(CohortTest, DefaultGroupSizes) {
  const auto n = GroupCounts(DefaultCohort().data.users);
  EXPECT_EQ(n[static_cast<std::size_t>(SfvaLabel::kNonSfva)], 259u);
  EXPECT_EQ(n[static_cast<std::size_t>(SfvaLabel::kSfva)], 134u);
  EXPECT_EQ(n[static_cast<std::size_t>(SfvaLabel::kPotentialSfva)], 75u);
  EXPECT_EQ(DefaultCohort().data.topics.size(), 317u);
}

TEST(CohortTest, ScoreMeansNearTargets) {
  const CohortConfig cfg;
  std::array<double, 3> sum{};
  std::array<double, 3> n{};
  for (const auto& u : DefaultCohort().data.users) {
    const auto g = static_cast<std::size_t>(u.label());
    sum[g] += u.score;
    n[g] += 1;
  }
  for (std::size_t k = 0; k < kNumGroups; ++k) {
    const auto g = static_cast<std::size_t>(kGroupOrder[k]);
    EXPECT_NEAR(sum[g] / n[g], cfg.score_ranges[k].mean, 1.5) << k;
  }
}

TEST(CohortTest, HardBoundsHoldAcrossSeeds) {
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    CohortConfig cfg;
    cfg.seed = seed;
    const auto cohort = GenerateCohort(cfg);
    for (const auto& u : cohort.data.users) {
      const auto label = u.label();
      const auto k = static_cast<std::size_t>(std::find(kGroupOrder.begin(), kGroupOrder.end(), label) - kGroupOrder.begin());
      ASSERT_GE(u.score, cfg.score_ranges[k].min) << seed;
      ASSERT_LE(u.score, cfg.score_ranges[k].max) << seed;
      const std::array<const char*, 3> channels = {"posts", "stories", "comments"};
      for (std::size_t c = 0; c < 3; ++c) {
        ASSERT_GE(u.feature(channels[c]), cfg.content_stats[k][c].min) << seed << " " << channels[c];
        ASSERT_LE(u.feature(channels[c]), cfg.content_stats[k][c].max) << seed << " " << channels[c];
      }
      const double r = u.feature("bidir_ratio");
      ASSERT_TRUE(r >= 0.0 && r <= 1.0) << seed;
      for (const auto& block : u.features) {
        for (double x : block) ASSERT_TRUE(std::isfinite(x));
      }
    }
  }
}

TEST(CohortTest, ObservedScoreExtremesMatchBounds) {
  for (std::uint64_t seed : {1, 2, 3}) {
    CohortConfig cfg;
    cfg.seed = seed;
    std::array<int, 3> lo = {1000, 1000, 1000};
    std::array<int, 3> hi = {-1, -1, -1};
    for (const auto& u : GenerateCohort(cfg).data.users) {
      const auto k = static_cast<std::size_t>(std::find(kGroupOrder.begin(), kGroupOrder.end(), u.label()) - kGroupOrder.begin());
      lo[k] = std::min(lo[k], u.score);
      hi[k] = std::max(hi[k], u.score);
    }
    for (std::size_t k = 0; k < kNumGroups; ++k) {
      EXPECT_EQ(lo[k], cfg.score_ranges[k].min) << seed << " " << k;
      EXPECT_EQ(hi[k], cfg.score_ranges[k].max) << seed << " " << k;
    }
  }
}

TEST(CohortTest, DeterministicBytes) {
  testing::TempDir a("synth_a");
  testing::TempDir b("synth_b");
  SaveDataset(GenerateCohort(CohortConfig{}).data, a.path());
  SaveDataset(GenerateCohort(CohortConfig{}).data, b.path());
  for (const char* name : {"users.csv", "topics.csv", "ut_edges.csv", "content.jsonl", "manifest.toml"}) {
    std::ifstream fa(a.path() / name, std::ios::binary);
    std::ifstream fb(b.path() / name, std::ios::binary);
    std::stringstream sa;
    std::stringstream sb;
    sa << fa.rdbuf();
    sb << fb.rdbuf();
    EXPECT_EQ(sa.str(), sb.str()) << name;
    EXPECT_FALSE(sa.str().empty()) << name;
  }
}

TEST(CohortTest, InfeasibleMeanIsConfigError) {
  CohortConfig cfg;
  cfg.score_ranges[0].mean = 60;
  EXPECT_THROW(cfg.Validate(), ConfigError);
  EXPECT_THROW(GenerateCohort(cfg), ConfigError);
}

TEST(CohortTest, ParsesToml) {
  const auto cfg = ParseCohortConfig("seed = 9\nsignal_strength = 0.25\n");
  EXPECT_EQ(cfg.seed, 9u);
  EXPECT_EQ(cfg.signal_strength, 0.25);
  EXPECT_THROW(ParseCohortConfig("no_such_key = 1\n"), ConfigError);
}

double Jsd3(const std::vector<double>& a, const std::vector<double>& b) {
  return stats::Jsd(stats::Distribution(a), stats::Distribution(b));
}

TEST(CalibrationTest, MatchesPublishedTargets) {
  const auto lt = CalibrateTopicDivergence({0.48, 0.41, 0.39}, 317, 1);
  for (const auto& d : lt.original) {
    double s = 0.0;
    for (double p : d) s += p;
    EXPECT_NEAR(s, 1.0, 1e-9);
  }
  EXPECT_NEAR(Jsd3(lt.original[0], lt.original[1]), 0.48, 0.03);
  EXPECT_NEAR(Jsd3(lt.original[0], lt.original[2]), 0.41, 0.03);
  EXPECT_NEAR(Jsd3(lt.original[1], lt.original[2]), 0.39, 0.03);
}

TEST(CalibrationTest, ZeroTargetsGiveIdenticalDistributions) {
  const auto lt = CalibrateTopicDivergence({0, 0, 0}, 50, 3);
  EXPECT_EQ(lt.original[0], lt.original[1]);
  EXPECT_EQ(lt.original[1], lt.original[2]);
}

TEST(CalibrationTest, UnitTargetsGiveDisjointSupports) {
  const auto lt = CalibrateTopicDivergence({1, 1, 1}, 30, 3);
  for (std::size_t t = 0; t < 30; ++t) {
    int nonzero = 0;
    for (const auto& d : lt.original) nonzero += d[t] > 0.0;
    EXPECT_LE(nonzero, 1) << t;
  }
}

TEST(CalibrationTest, TargetsOutsideUnitIntervalAreDomainErrors) {
  EXPECT_THROW(CalibrateTopicDivergence({1.2, 0.1, 0.1}, 30, 1), DomainError);
}

TEST(SignalTest, ZeroStrengthIsIdentity) {
  auto users = DefaultCohort().data.users;
  const auto before = users;
  PlantSignal(users, 0.0, SignalEffects{});
  EXPECT_EQ(users, before);
  EXPECT_THROW(PlantSignal(users, 1.5, SignalEffects{}), DomainError);
}

TEST(SignalTest, FullStrengthSeparatesGroups) {
  const auto& users = DefaultCohort().data.users;
  std::array<std::vector<double>, 3> age;
  double pos = 0.0;
  double neg = 0.0;
  double npos = 0.0;
  double nneg = 0.0;
  for (const auto& u : users) {
    age[static_cast<std::size_t>(u.label())].push_back(u.feature("age"));
    if (u.binary_label() == BinaryLabel::kPositive) {
      pos += u.feature("bidir_ratio");
      npos += 1;
    } else {
      neg += u.feature("bidir_ratio");
      nneg += 1;
    }
  }
  EXPECT_LT(stats::AnovaOneWay(age).p_value, 0.05);
  EXPECT_GT(pos / npos, neg / nneg);
}

TEST(TruncatedFitTest, LogNormalMeanIsMatched) {
  const double mu = FitTruncatedLogNormalMu(2, 1214, 1.2, 49.87);
  EXPECT_NEAR(TruncatedLogNormalMean(2, 1214, mu, 1.2), 49.87, 1e-6);
  EXPECT_THROW(FitTruncatedNormalLocation(26, 57, 5, 60), ConfigError);
}

}  // namespace
}  // namespace earlysd::synth
