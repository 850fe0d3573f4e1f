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

#ifndef EARLYSD_SYNTH_H_
#define EARLYSD_SYNTH_H_

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "earlysd/dataset.h"
#include "earlysd/graph.h"

// Synthetic cohort generator calibrated to published group statistics. Group
// order everywhere in this header is (Non-SFVA, SFVA, Potential-SFVA).
namespace earlysd::synth {

inline constexpr std::size_t kNumGroups = 3;
inline constexpr std::array<SfvaLabel, kNumGroups> kGroupOrder = {
    SfvaLabel::kNonSfva, SfvaLabel::kSfva, SfvaLabel::kPotentialSfva};

struct RangeStats {
  double min = 0.0;
  double max = 0.0;
  double mean = 0.0;
};

enum Channel { kPosts = 0, kStories = 1, kComments = 2 };

// Shift of each planted feature for positive users, in units of the
// feature's generating spread. Signs follow the preliminary study: age goes
// down, the rest go up.
struct SignalEffects {
  double age = 0.5;
  double sias = 0.5;
  double big5_n = 0.4;
  double social_searches = 0.4;
  double comment_inter = 0.4;
  double bidir_ratio = 0.4;
};

struct CohortConfig {
  std::array<std::size_t, kNumGroups> group_sizes = {259, 134, 75};
  std::array<RangeStats, kNumGroups> score_ranges = {
      RangeStats{26, 57, 44.73}, RangeStats{64, 95, 70.8}, RangeStats{58, 63, 60.11}};
  // [group][channel]
  std::array<std::array<RangeStats, 3>, kNumGroups> content_stats = {{
      {RangeStats{2, 1214, 49.87}, RangeStats{2, 3876, 474.08}, RangeStats{1, 6727, 541.75}},
      {RangeStats{2, 416, 27.41}, RangeStats{2, 4603, 640.53}, RangeStats{1, 27137, 697.39}},
      {RangeStats{2, 507, 47.35}, RangeStats{15, 2812, 621.78}, RangeStats{8, 2277, 481.19}},
  }};
  std::size_t topic_count_original = 317;
  // Topics that only appear in user content (candidates for expansion).
  std::size_t topic_count_novel = 51;
  // (Non,SFVA), (Non,Potential), (SFVA,Potential)
  std::array<double, 3> jsd_targets = {0.48, 0.41, 0.39};
  double signal_strength = 1.0;
  SignalEffects effects;
  std::uint64_t seed = 1;

  double mean_topics_per_user = 14.0;
  std::size_t max_topics_per_user = 60;
  // Latent interests mentioned in content but absent from the given u-t edges.
  double mean_hidden_topics = 3.0;
  double mean_novel_topics = 1.5;
  std::size_t max_novel_topics = 4;
  std::size_t min_snippets = 4;
  std::size_t max_snippets = 16;
  std::size_t embedding_dim = 64;
  bool with_embeddings = false;

  // Throws ConfigError naming the first violated invariant.
  void Validate() const;
};

// Reads a synth.toml; absent keys keep their defaults. Throws ConfigError.
CohortConfig LoadCohortConfig(const std::filesystem::path& path);
CohortConfig ParseCohortConfig(std::string_view toml_text, const std::string& source = "synth.toml");

struct LatentTopics {
  // Per group, over the original topic vocabulary (topic index order).
  std::array<std::vector<double>, kNumGroups> original;
  // Per group, over the novel vocabulary.
  std::array<std::vector<double>, kNumGroups> novel;
  std::array<double, kNumGroups> lambda{};
  double max_residual = 0.0;
};

struct GroundTruth {
  std::vector<std::string> user_ids;
  std::vector<SfvaLabel> labels;
  // Topic names each user is interested in but which only show up in content.
  std::vector<std::vector<std::string>> hidden_topics;
  std::vector<std::vector<std::string>> novel_topics;
  std::vector<std::string> novel_names;
  LatentTopics latent;
};

struct Cohort {
  Dataset data;
  GroundTruth truth;
};

// Three distributions over `topic_count` topics whose pairwise JSD (bits)
// matches the targets within `tolerance`. Each is (1 - l_i) B + l_i G_i for a
// shared base B and disjoint group-specific G_i; the l_i are found by damped
// Gauss-Newton with restarts. Throws CalibrationError with the best residual
// when the search fails, and DomainError for targets outside [0, 1].
LatentTopics CalibrateTopicDivergence(const std::array<double, 3>& targets,
                                      std::size_t topic_count, std::uint64_t seed,
                                      double tolerance = 0.03);

// Shifts the planted features of positive users by strength * effect.
// strength 0 is the identity. Throws DomainError outside [0, 1].
void PlantSignal(std::span<UserRecord> users, double strength, const SignalEffects& effects);

// Throws ConfigError for an invalid config and CalibrationError when the
// topic divergences cannot be matched.
Cohort GenerateCohort(const CohortConfig& config);

// Fixed topic vocabularies. Original names are two words, novel names one.
std::vector<std::string> OriginalTopicNames(std::size_t count);
std::vector<std::string> NovelTopicNames(std::size_t count);

// ground_truth.csv (user_id,score,label,binary_label,hidden_topics,
// novel_topics) and ground_truth_topics.csv (kind,name,p_non,p_sfva,
// p_potential).
void SaveGroundTruth(const Cohort& cohort, const std::filesystem::path& dir);

// Discrete normal truncated to the integers of [lo, hi] whose mean is
// `mean`; returns the location parameter. Throws ConfigError when the mean is
// outside (lo, hi).
double FitTruncatedNormalLocation(int lo, int hi, double sd, double mean);
// Log-normal truncated to [lo, hi] with mean `mean`; returns mu.
double FitTruncatedLogNormalMu(double lo, double hi, double sigma, double mean);
double TruncatedLogNormalMean(double lo, double hi, double mu, double sigma);

}  // namespace earlysd::synth

#endif  // EARLYSD_SYNTH_H_
