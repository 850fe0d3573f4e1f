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

#ifndef EARLYSD_EXPERIMENT_H_
#define EARLYSD_EXPERIMENT_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "earlysd/augment.h"
#include "earlysd/baselines.h"
#include "earlysd/enhancer.h"
#include "earlysd/graph.h"
#include "earlysd/metrics.h"
#include "earlysd/model.h"
#include "earlysd/split.h"

namespace earlysd {

// Named augmentation setting used by the ablation grid.
struct AugmentVariant {
  std::string name;  // none, uu, ut, full
  augment::PipelineToggles toggles;
};

// none: raw graph; uu: u-u only; ut: topic expansion plus u-t; full: all.
const std::vector<AugmentVariant>& StandardVariants();
// Throws ConfigError for an unknown name.
AugmentVariant VariantByName(std::string_view name);

struct ExperimentConfig {
  std::filesystem::path dataset;
  std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  std::vector<ModalityMask> masks = {ModalityMask::All()};
  // Variant used by train/evaluate; the ablation grid runs `variants`.
  std::string variant = "full";
  std::vector<std::string> variants = {"none", "uu", "ut", "full"};
  augment::AugmentConfig augment;
  ModelConfig model;
  std::vector<std::string> baselines = {"mlp", "ml-best"};
  enhancer::EnhancerConfig enhancer;
  SplitRatios split;

  // Throws ConfigError on an empty seed/mask list, unknown variants or
  // baselines, and invalid nested settings.
  void Validate() const;
};

// Relative dataset paths resolve against `base_dir`. Throws ConfigError
// (with the line for syntax errors) on malformed input or unknown keys.
ExperimentConfig ParseExperimentConfig(std::string_view toml_text, const std::string& source,
                                       const std::filesystem::path& base_dir = {});
ExperimentConfig LoadExperimentConfig(const std::filesystem::path& path);

struct RunResult {
  std::uint64_t seed = 0;
  std::string variant;
  ModalityMask mask;
  augment::RefinementReport refinement;
  std::size_t best_epoch = 0;
  std::size_t epochs = 0;
  MetricsReport test;
  std::vector<BaselineResult> baselines;
};

// One seeded run: refine the graph under the variant, split, train on the
// refined graph and evaluate on the test users.
struct RunArtifacts {
  RunResult result;
  HeteroSocialGraph refined;
  DatasetSplit split;
  TrainResult training;
};
RunArtifacts RunOnce(const HeteroSocialGraph& base, const ExperimentConfig& config,
                     std::uint64_t seed, const ModalityMask& mask, const AugmentVariant& variant,
                     enhancer::EnhancerClient& client, bool with_baselines);

// Graph refinement alone, seeded like RunOnce.
std::pair<HeteroSocialGraph, augment::RefinementReport> RefineForSeed(
    const HeteroSocialGraph& base, const ExperimentConfig& config, std::uint64_t seed,
    const AugmentVariant& variant, enhancer::EnhancerClient& client);

// variants x masks x seeds, in that nesting order.
std::vector<RunResult> RunAblation(const HeteroSocialGraph& base, const ExperimentConfig& config,
                                   enhancer::EnhancerClient& client, bool with_baselines);

struct Summary {
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation; 0 for a single value
};
Summary Summarize(const std::vector<double>& values);

// One row per run.
std::string AblationCsv(const std::vector<RunResult>& runs);
// Mean ± std per (variant, mask), plus baseline rows when present.
std::string AblationMarkdown(const std::vector<RunResult>& runs);
// Reads AblationCsv output back (identifiers, metrics and baselines only).
// Throws IoError / ParseError.
std::vector<RunResult> LoadAblationCsv(const std::filesystem::path& path);

// Deterministic JSON (sorted keys, no timestamps).
nlohmann::json RunJson(const RunResult& run);

}  // namespace earlysd

#endif  // EARLYSD_EXPERIMENT_H_
