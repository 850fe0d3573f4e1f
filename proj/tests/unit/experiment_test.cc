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

#include <cmath>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "earlysd/error.h"
#include "earlysd/experiment.h"
#include "test_util.h"

namespace earlysd {
namespace {

TEST(ExperimentConfigTest, ParsesAllSections) {
  const auto c = ParseExperimentConfig(R"(
dataset = "data/cohort"
seeds = [3, 4]
masks = ["PCTSI", "CTSI"]
variant = "uu"
variants = ["none", "full"]
baselines = ["knn"]

[split]
train = 0.6
val = 0.2
test = 0.2

[augment]
tau_uu = 0.4
max_new_ut_per_user = 5

[model]
hidden = 32
aggregation = "degree_mean"
homogeneous = true

[enhancer]
mode = "stub"
embedding_dim = 16
)",
                                       "exp.toml", "/base");
  EXPECT_EQ(c.dataset, std::filesystem::path("/base/data/cohort"));
  EXPECT_EQ(c.seeds, (std::vector<std::uint64_t>{3, 4}));
  ASSERT_EQ(c.masks.size(), 2u);
  EXPECT_EQ(c.masks[1].ToString(), "CTSI");
  EXPECT_EQ(c.variant, "uu");
  EXPECT_EQ(c.split.train, 0.6);
  EXPECT_EQ(c.augment.tau_uu, 0.4);
  EXPECT_EQ(c.augment.max_new_ut_per_user, 5u);
  EXPECT_EQ(c.model.hidden, 32u);
  EXPECT_EQ(c.model.aggregation, nn::Aggregation::kDegreeMean);
  EXPECT_TRUE(c.model.homogeneous);
  EXPECT_EQ(c.enhancer.stub.embedding_dim, 16u);
}

TEST(ExperimentConfigTest, RejectsBadInput) {
  EXPECT_THROW(ParseExperimentConfig("seeds = []\n", "x.toml"), ConfigError);
  EXPECT_THROW(ParseExperimentConfig("masks = [\"PZ\"]\n", "x.toml"), ConfigError);
  EXPECT_THROW(ParseExperimentConfig("variant = \"bogus\"\n", "x.toml"), ConfigError);
  EXPECT_THROW(ParseExperimentConfig("baselines = [\"svm\"]\n", "x.toml"), ConfigError);
  EXPECT_THROW(ParseExperimentConfig("[model]\nlayers = 2\nwidth = 3\n", "x.toml"), ConfigError);
  EXPECT_THROW(ParseExperimentConfig("[augment]\ntau_uu = 2.0\n", "x.toml"), ConfigError);
  EXPECT_THROW(ParseExperimentConfig("[split]\ntrain = 0.9\n", "x.toml"), ConfigError);
  EXPECT_THROW(ParseExperimentConfig("[enhancer]\nmode = \"psychic\"\n", "x.toml"), ConfigError);
  try {
    ParseExperimentConfig("seeds = [1,\n\n  = oops\n", "broken.toml");
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("broken.toml"), std::string::npos);
  }
}

TEST(VariantTest, StandardVariants) {
  ASSERT_EQ(StandardVariants().size(), 4u);
  const auto none = VariantByName("none");
  EXPECT_FALSE(none.toggles.uu || none.toggles.ut || none.toggles.expand);
  const auto ut = VariantByName("ut");
  EXPECT_TRUE(ut.toggles.ut && ut.toggles.expand && !ut.toggles.uu);
  EXPECT_THROW(VariantByName("half"), ConfigError);
}

TEST(SummaryTest, MeanAndSampleStd) {
  const auto s = Summarize({1.0, 2.0, 3.0, 4.0});
  EXPECT_EQ(s.mean, 2.5);
  EXPECT_NEAR(s.std, std::sqrt(5.0 / 3.0), 1e-15);
  EXPECT_EQ(Summarize({7.0}).std, 0.0);
}

ExperimentConfig TinyConfig() {
  ExperimentConfig c;
  c.seeds = {1, 2};
  c.masks = {ModalityMask::All(), ModalityMask::Parse("CTSI")};
  c.variants = {"none", "uu", "ut", "full"};
  c.baselines = {"knn"};
  c.model.hidden = 8;
  c.model.max_epochs = 5;
  c.model.min_epochs = 1;
  c.augment.lp_epochs = 3;
  c.augment.lp_hidden = 8;
  c.enhancer.stub.embedding_dim = 8;
  return c;
}

class AblationTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    const auto g = testing::SmallGraph(40, 6, 8);
    enhancer::StubEnhancer stub(TinyConfig().enhancer.stub);
    runs_ = new std::vector<RunResult>(RunAblation(g, TinyConfig(), stub, true));
  }
  static void TearDownTestSuite() { delete runs_; }
  static std::vector<RunResult>* runs_;
};
std::vector<RunResult>* AblationTest::runs_ = nullptr;

TEST_F(AblationTest, GridCardinalityAndOrder) {
  ASSERT_EQ(runs_->size(), 4u * 2u * 2u);
  EXPECT_EQ((*runs_)[0].variant, "none");
  EXPECT_EQ((*runs_)[0].mask.ToString(), "PCTSI");
  EXPECT_EQ((*runs_)[0].seed, 1u);
  EXPECT_EQ((*runs_)[1].seed, 2u);
  EXPECT_EQ((*runs_)[2].mask.ToString(), "CTSI");
  EXPECT_EQ(runs_->back().variant, "full");
  for (const auto& r : *runs_) {
    ASSERT_EQ(r.baselines.size(), 1u);
    EXPECT_EQ(r.baselines[0].name, "knn");
  }
}

TEST_F(AblationTest, CsvRoundTrip) {
  testing::TempDir dir("ablation");
  const auto path = dir.path() / "ablation.csv";
  const std::string csv = AblationCsv(*runs_);
  {
    std::ofstream out(path, std::ios::binary);
    out << csv;
  }
  const auto back = LoadAblationCsv(path);
  ASSERT_EQ(back.size(), runs_->size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    EXPECT_EQ(back[i].variant, (*runs_)[i].variant);
    EXPECT_EQ(back[i].seed, (*runs_)[i].seed);
    EXPECT_EQ(back[i].mask, (*runs_)[i].mask);
    EXPECT_EQ(back[i].test.acc, (*runs_)[i].test.acc);
    EXPECT_EQ(back[i].test.f1, (*runs_)[i].test.f1);
    EXPECT_EQ(back[i].test.counts, (*runs_)[i].test.counts);
    ASSERT_EQ(back[i].baselines.size(), 1u);
    EXPECT_EQ(back[i].baselines[0].test.acc, (*runs_)[i].baselines[0].test.acc);
  }
  EXPECT_EQ(AblationCsv(back).substr(0, csv.find('\n')), csv.substr(0, csv.find('\n')));
}

TEST_F(AblationTest, MarkdownHasOneRowPerSetting) {
  std::vector<RunResult> one_mask;
  for (const auto& r : *runs_) {
    if (r.mask == ModalityMask::All()) one_mask.push_back(r);
  }
  const std::string md = AblationMarkdown(one_mask);
  for (const char* v : {"| none", "| uu", "| ut", "| full"}) {
    EXPECT_NE(md.find(v), std::string::npos) << v;
  }
  std::istringstream in(md);
  int rows = 0;
  bool in_main = false;
  for (std::string line; std::getline(in, line);) {
    if (line.rfind("| Setting", 0) == 0) {
      in_main = true;
      continue;
    }
    if (!in_main) continue;
    if (line.rfind("|-", 0) == 0 || line.rfind("| -", 0) == 0 || line.rfind("|:", 0) == 0) continue;
    if (line.rfind("|", 0) != 0) break;
    ++rows;
  }
  EXPECT_EQ(rows, 4);
  EXPECT_NE(md.find("±"), std::string::npos);
}

TEST_F(AblationTest, RunJsonIsStable) {
  const auto a = RunJson((*runs_)[0]).dump();
  EXPECT_EQ(a, RunJson((*runs_)[0]).dump());
  EXPECT_NE(a.find("\"f1\""), std::string::npos);
}

}  // namespace
}  // namespace earlysd
