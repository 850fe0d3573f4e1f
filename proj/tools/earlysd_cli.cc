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

// earlysd: command-line front end for the detection pipeline.
//
//   earlysd generate --config synth.toml --seed 1 --out data/
//   earlysd analyze data/
//   earlysd augment --config exp.toml --out refined/
//   earlysd train --config exp.toml --out run/
//   earlysd evaluate --run run/ --out run/
//   earlysd ablate --config exp.toml --out results/
//   earlysd report --in results/ --out results/
//
// Exit status: 0 success, 2 configuration error, 3 runtime error.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "earlysd/csv.h"
#include "earlysd/dataset.h"
#include "earlysd/enhancer.h"
#include "earlysd/error.h"
#include "earlysd/experiment.h"
#include "earlysd/model.h"
#include "earlysd/split.h"
#include "earlysd/stats.h"
#include "earlysd/synth.h"

namespace fs = std::filesystem;
using namespace earlysd;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

void WriteJson(const fs::path& path, const nlohmann::json& j) { WriteTextFile(path, j.dump(2) + "\n"); }

struct ExperimentFlags {
  std::string config;
  std::string dataset;
  std::optional<std::uint64_t> seed;
  std::string mask;
  std::string variant;
  bool homogeneous = false;
};

void AddExperimentFlags(CLI::App* cmd, ExperimentFlags& f) {
  cmd->add_option("--config", f.config, "Experiment config (exp.toml)");
  cmd->add_option("--dataset", f.dataset, "Dataset directory (overrides the config)");
  cmd->add_option("--seed", f.seed, "Single seed (overrides the config's seed list)");
  cmd->add_option("--mask", f.mask, "Feature modalities, e.g. PCTSI");
  cmd->add_option("--variant", f.variant, "Augmentation variant: none, uu, ut, full");
  cmd->add_flag("--homogeneous", f.homogeneous, "Share one message function across relations");
}

ExperimentConfig ResolveConfig(const ExperimentFlags& f) {
  ExperimentConfig c = f.config.empty() ? ExperimentConfig{} : LoadExperimentConfig(f.config);
  if (!f.dataset.empty()) c.dataset = f.dataset;
  if (f.seed) c.seeds = {*f.seed};
  if (!f.mask.empty()) c.masks = {ModalityMask::Parse(f.mask)};
  if (!f.variant.empty()) {
    VariantByName(f.variant);
    c.variant = f.variant;
    c.variants = {f.variant};
  }
  if (f.homogeneous) c.model.homogeneous = true;
  if (c.dataset.empty()) throw ConfigError("no dataset given (set 'dataset' or pass --dataset)");
  c.Validate();
  return c;
}

int Generate(const std::string& config, std::optional<std::uint64_t> seed, std::optional<double> signal,
             bool embeddings, const fs::path& out) {
  synth::CohortConfig c = config.empty() ? synth::CohortConfig{} : synth::LoadCohortConfig(config);
  if (seed) c.seed = *seed;
  if (signal) c.signal_strength = *signal;
  if (embeddings) c.with_embeddings = true;
  c.Validate();
  const synth::Cohort cohort = synth::GenerateCohort(c);
  SaveDataset(cohort.data, out);
  synth::SaveGroundTruth(cohort, out);
  std::cout << fmt::format("wrote {} users, {} topics to {}\n", cohort.data.users.size(), cohort.data.topics.size(),
                           out.string());
  return 0;
}

int Analyze(const fs::path& dir, fs::path out) {
  if (out.empty()) out = dir;
  const HeteroSocialGraph g = LoadDataset(dir).ToGraph();
  const auto names = stats::DefaultSignificanceFeatures();
  const auto features = stats::FeatureSignificanceReport(g.users(), names);
  const auto divergence = stats::GroupTopicDivergence(g);
  std::vector<std::size_t> sizes(3, 0);
  for (const UserRecord& u : g.users()) ++sizes[static_cast<std::size_t>(u.label())];
  WriteJson(out / "analysis_report.json", stats::AnalysisReportJson(features, divergence, sizes));
  WriteTextFile(out / "analysis_report.md", stats::AnalysisReportMarkdown(features, divergence));
  std::cout << "wrote " << (out / "analysis_report.json").string() << "\n";
  return 0;
}

int Augment(const ExperimentFlags& flags, const fs::path& out) {
  const ExperimentConfig c = ResolveConfig(flags);
  const HeteroSocialGraph g = LoadDataset(c.dataset).ToGraph();
  auto client = enhancer::MakeEnhancer(c.enhancer);
  auto [refined, report] = RefineForSeed(g, c, c.seeds.front(), VariantByName(c.variant), *client);
  SaveDataset(Dataset::FromGraph(refined), out);
  WriteJson(out / "refinement.json",
            {{"seed", c.seeds.front()},
             {"variant", c.variant},
             {"new_topics", report.new_topics},
             {"expansion_edges", report.expansion_edges},
             {"uu_added", report.uu_added},
             {"ut_added", report.ut_added},
             {"uu_homophily", report.uu_homophily},
             {"label_agreement_base", report.label_agreement_base},
             {"lp_holdout_auc", report.lp.holdout_auc}});
  std::cout << fmt::format("added {} u-u, {} u-t edges and {} topics\n", report.uu_added, report.ut_added,
                           report.new_topics);
  return 0;
}

int Train(const ExperimentFlags& flags, const fs::path& out) {
  const ExperimentConfig c = ResolveConfig(flags);
  const HeteroSocialGraph g = LoadDataset(c.dataset).ToGraph();
  auto client = enhancer::MakeEnhancer(c.enhancer);
  const std::uint64_t seed = c.seeds.front();
  RunArtifacts run = RunOnce(g, c, seed, c.masks.front(), VariantByName(c.variant), *client, true);
  SaveDataset(Dataset::FromGraph(run.refined), out / "graph");
  SaveSplit(run.split, out / "split.csv");
  SaveCheckpoint(run.training.model, out / "model.ckpt");
  WriteTextFile(out / "training_log.csv", TrainingLogCsv(run.training.log));
  WriteJson(out / "metrics.json", RunJson(run.result));
  std::cout << fmt::format("test acc {:.4f} f1 {:.4f} (best epoch {})\n", run.result.test.acc, run.result.test.f1,
                           run.result.best_epoch);
  return 0;
}

int Evaluate(const fs::path& run, const std::string& users, fs::path out) {
  if (out.empty()) out = run;
  const HeteroSocialGraph g = LoadDataset(run / "graph").ToGraph();
  const DatasetSplit split = LoadSplit(run / "split.csv");
  const EarlySdModel model = LoadCheckpoint(run / "model.ckpt");
  std::vector<std::string> ids;
  if (users == "train") {
    ids = split.train;
  } else if (users == "val") {
    ids = split.val;
  } else if (users == "test") {
    ids = split.test;
  } else if (users == "all") {
    for (const UserRecord& u : g.users()) ids.push_back(u.id);
  } else {
    throw ConfigError("--users must be train, val, test or all");
  }
  const MetricsReport m = EvaluateModel(model, g, ids);
  WriteJson(out / "evaluation.json", {{"users", users}, {"metrics", ToJson(m)}});
  std::cout << fmt::format("{} users: acc {:.4f} pre {:.4f} rec {:.4f} f1 {:.4f}\n", users, m.acc, m.pre, m.rec,
                           m.f1);
  return 0;
}

int Ablate(const ExperimentFlags& flags, bool baselines, const fs::path& out) {
  const ExperimentConfig c = ResolveConfig(flags);
  const HeteroSocialGraph g = LoadDataset(c.dataset).ToGraph();
  auto client = enhancer::MakeEnhancer(c.enhancer);
  const auto runs = RunAblation(g, c, *client, baselines);
  WriteTextFile(out / "ablation.csv", AblationCsv(runs));
  WriteTextFile(out / "ablation.md", AblationMarkdown(runs));
  std::cout << AblationMarkdown(runs);
  return 0;
}

int Report(const fs::path& in, fs::path out) {
  if (out.empty()) out = in;
  std::string md = "# EarlySD report\n\n";
  if (fs::exists(in / "analysis_report.md")) md += "## Cohort analysis\n\n" + ReadTextFile(in / "analysis_report.md") + "\n";
  if (fs::exists(in / "ablation.csv")) {
    md += "## Ablation\n\n" + AblationMarkdown(LoadAblationCsv(in / "ablation.csv")) + "\n";
  }
  if (fs::exists(in / "metrics.json")) {
    const auto j = nlohmann::json::parse(ReadTextFile(in / "metrics.json"));
    const auto& t = j.at("test");
    md += fmt::format("## Single run\n\nseed {}, variant {}, mask {}: ACC {:.2f}%, PRE {:.2f}%, REC {:.2f}%, F1 {:.2f}%\n",
                      j.at("seed").get<std::uint64_t>(), j.at("variant").get<std::string>(),
                      j.at("mask").get<std::string>(), 100 * t.at("acc").get<double>(),
                      100 * t.at("pre").get<double>(), 100 * t.at("rec").get<double>(),
                      100 * t.at("f1").get<double>());
  }
  if (md == "# EarlySD report\n\n") throw IoError("nothing to report in " + in.string());
  WriteTextFile(out / "report.md", md);
  std::cout << md;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"EarlySD short-form video addiction detection pipeline"};
  app.require_subcommand(1);

  std::string out;
  std::string synth_config;
  std::optional<std::uint64_t> gen_seed;
  std::optional<double> signal;
  bool embeddings = false;
  auto* gen = app.add_subcommand("generate", "Generate a synthetic cohort");
  gen->add_option("--config", synth_config, "Cohort config (synth.toml)");
  gen->add_option("--seed", gen_seed, "Generator seed");
  gen->add_option("--signal", signal, "Signal strength in [0, 1]");
  gen->add_flag("--embeddings", embeddings, "Also write stub topic embeddings");
  gen->add_option("--out", out, "Output dataset directory")->required();

  std::string dir;
  auto* analyze = app.add_subcommand("analyze", "ANOVA and topic divergence report");
  analyze->add_option("dataset", dir, "Dataset directory")->required();
  analyze->add_option("--out", out, "Output directory (default: the dataset directory)");

  ExperimentFlags flags;
  auto* augment = app.add_subcommand("augment", "Refine a graph and write it as a dataset");
  AddExperimentFlags(augment, flags);
  augment->add_option("--out", out, "Output dataset directory")->required();

  auto* train = app.add_subcommand("train", "Refine, train and evaluate one seeded run");
  AddExperimentFlags(train, flags);
  train->add_option("--out", out, "Run directory")->required();

  std::string users = "test";
  auto* evaluate = app.add_subcommand("evaluate", "Evaluate a trained run's checkpoint");
  evaluate->add_option("--run", dir, "Run directory written by train")->required();
  evaluate->add_option("--users", users, "train, val, test or all");
  evaluate->add_option("--out", out, "Output directory (default: the run directory)");

  bool no_baselines = false;
  auto* ablate = app.add_subcommand("ablate", "Run the variant x mask x seed grid");
  AddExperimentFlags(ablate, flags);
  ablate->add_flag("--no-baselines", no_baselines, "Skip the feature-only baselines");
  ablate->add_option("--out", out, "Results directory")->required();

  auto* report = app.add_subcommand("report", "Render report.md from a results directory");
  report->add_option("--in", dir, "Results directory")->required();
  report->add_option("--out", out, "Output directory (default: --in)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*gen) return Generate(synth_config, gen_seed, signal, embeddings, out);
    if (*analyze) return Analyze(dir, out);
    if (*augment) return Augment(flags, out);
    if (*train) return Train(flags, out);
    if (*evaluate) return Evaluate(dir, users, out);
    if (*ablate) return Ablate(flags, !no_baselines, out);
    if (*report) return Report(dir, out);
  } catch (const ConfigError& e) {
    std::cerr << "earlysd: " << e.kind() << " error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const Error& e) {
    std::cerr << "earlysd: " << e.kind() << " error: " << e.what() << "\n";
    return kExitRuntime;
  } catch (const std::exception& e) {
    std::cerr << "earlysd: error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitRuntime;
}
