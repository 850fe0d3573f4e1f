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

#include "earlysd/experiment.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include <fmt/format.h>
#include <toml++/toml.hpp>

#include "earlysd/csv.h"
#include "earlysd/error.h"
#include "toml_util.h"

namespace earlysd {

const std::vector<AugmentVariant>& StandardVariants() {
  static const std::vector<AugmentVariant> kVariants = {
      {"none", {false, false, false}},
      {"uu", {true, false, false}},
      {"ut", {false, true, true}},
      {"full", {true, true, true}},
  };
  return kVariants;
}

AugmentVariant VariantByName(std::string_view name) {
  for (const AugmentVariant& v : StandardVariants()) {
    if (v.name == name) return v;
  }
  throw ConfigError("unknown augmentation variant '" + std::string(name) + "'");
}

void ExperimentConfig::Validate() const {
  if (seeds.empty()) throw ConfigError("seed list is empty");
  if (masks.empty()) throw ConfigError("mask list is empty");
  for (const ModalityMask& m : masks) {
    if (m.empty()) throw ConfigError("at least one feature modality must be enabled");
  }
  VariantByName(variant);
  if (variants.empty()) throw ConfigError("variant list is empty");
  for (const auto& v : variants) VariantByName(v);
  for (const auto& b : baselines) {
    if (std::find(BaselineNames().begin(), BaselineNames().end(), b) == BaselineNames().end()) {
      throw ConfigError("unknown baseline '" + b + "'");
    }
  }
  if (!(split.train > 0.0 && split.val > 0.0 && split.test > 0.0) ||
      std::abs(split.train + split.val + split.test - 1.0) > 1e-9) {
    throw ConfigError("split ratios must be positive and sum to 1");
  }
  augment.Validate();
  model.Validate();
}

namespace {

using internal::CheckKeys;
using internal::ReadBool;
using internal::ReadDouble;
using internal::ReadSize;
using internal::ReadString;
using internal::ReadStringArray;

std::vector<std::uint64_t> ReadSeeds(const toml::table& t, const std::vector<std::uint64_t>& fallback,
                                     const std::string& where) {
  const toml::node* n = t.get("seeds");
  if (!n) return fallback;
  const toml::array* arr = n->as_array();
  if (!arr) throw ConfigError(where + ": 'seeds' must be an array");
  std::vector<std::uint64_t> out;
  for (const auto& e : *arr) {
    auto v = e.value<std::int64_t>();
    if (!v || *v < 0) throw ConfigError(where + ": 'seeds' must hold non-negative integers");
    out.push_back(static_cast<std::uint64_t>(*v));
  }
  return out;
}

nn::Aggregation ParseAggregation(const std::string& s, const std::string& where) {
  if (s == "sum") return nn::Aggregation::kSum;
  if (s == "degree_mean") return nn::Aggregation::kDegreeMean;
  throw ConfigError(where + ": aggregation must be 'sum' or 'degree_mean'");
}

}  // namespace

ExperimentConfig ParseExperimentConfig(std::string_view toml_text, const std::string& source,
                                       const std::filesystem::path& base_dir) {
  const toml::table t = internal::ParseToml(toml_text, source);
  CheckKeys(t, {"dataset", "seeds", "masks", "variant", "variants", "baselines", "split", "augment", "model", "enhancer"},
            source);
  ExperimentConfig c;
  const std::string ds = ReadString(t, "dataset", "", source);
  if (!ds.empty()) {
    std::filesystem::path p(ds);
    c.dataset = p.is_relative() && !base_dir.empty() ? base_dir / p : p;
  }
  c.seeds = ReadSeeds(t, c.seeds, source);
  if (t.get("masks")) {
    c.masks.clear();
    for (const auto& m : ReadStringArray(t, "masks", {}, source)) c.masks.push_back(ModalityMask::Parse(m));
  }
  c.variant = ReadString(t, "variant", c.variant, source);
  c.variants = ReadStringArray(t, "variants", c.variants, source);
  c.baselines = ReadStringArray(t, "baselines", c.baselines, source);

  if (const toml::table* s = internal::SubTable(t, "split", source)) {
    const std::string w = source + " [split]";
    CheckKeys(*s, {"train", "val", "test"}, w);
    c.split.train = ReadDouble(*s, "train", c.split.train, w);
    c.split.val = ReadDouble(*s, "val", c.split.val, w);
    c.split.test = ReadDouble(*s, "test", c.split.test, w);
  }
  if (const toml::table* a = internal::SubTable(t, "augment", source)) {
    const std::string w = source + " [augment]";
    CheckKeys(*a, {"tau_uu", "theta_ut", "max_new_uu_per_node", "max_new_ut_per_user", "negative_ratio",
                   "lp_epochs", "lp_hidden", "lp_layers", "lp_lr", "lp_holdout", "max_candidate_pairs",
                   "blocking", "blocking_bits"},
              w);
    auto& g = c.augment;
    g.tau_uu = ReadDouble(*a, "tau_uu", g.tau_uu, w);
    g.theta_ut = ReadDouble(*a, "theta_ut", g.theta_ut, w);
    g.max_new_uu_per_node = ReadSize(*a, "max_new_uu_per_node", g.max_new_uu_per_node, w);
    g.max_new_ut_per_user = ReadSize(*a, "max_new_ut_per_user", g.max_new_ut_per_user, w);
    g.negative_ratio = ReadSize(*a, "negative_ratio", g.negative_ratio, w);
    g.lp_epochs = ReadSize(*a, "lp_epochs", g.lp_epochs, w);
    g.lp_hidden = ReadSize(*a, "lp_hidden", g.lp_hidden, w);
    g.lp_layers = ReadSize(*a, "lp_layers", g.lp_layers, w);
    g.lp_lr = ReadDouble(*a, "lp_lr", g.lp_lr, w);
    g.lp_holdout = ReadDouble(*a, "lp_holdout", g.lp_holdout, w);
    g.max_candidate_pairs = ReadSize(*a, "max_candidate_pairs", g.max_candidate_pairs, w);
    g.blocking = ReadBool(*a, "blocking", g.blocking, w);
    g.blocking_bits = ReadSize(*a, "blocking_bits", g.blocking_bits, w);
  }
  if (const toml::table* m = internal::SubTable(t, "model", source)) {
    const std::string w = source + " [model]";
    CheckKeys(*m, {"hidden", "layers", "dropout", "lr", "weight_decay", "max_epochs", "patience", "min_epochs", "aggregation",
                   "self_loop", "homogeneous", "learn_edge_weights"},
              w);
    auto& mc = c.model;
    mc.hidden = ReadSize(*m, "hidden", mc.hidden, w);
    mc.layers = ReadSize(*m, "layers", mc.layers, w);
    mc.dropout = ReadDouble(*m, "dropout", mc.dropout, w);
    mc.lr = ReadDouble(*m, "lr", mc.lr, w);
    mc.weight_decay = ReadDouble(*m, "weight_decay", mc.weight_decay, w);
    mc.max_epochs = ReadSize(*m, "max_epochs", mc.max_epochs, w);
    mc.patience = ReadSize(*m, "patience", mc.patience, w);
    mc.min_epochs = ReadSize(*m, "min_epochs", mc.min_epochs, w);
    if (m->get("aggregation")) mc.aggregation = ParseAggregation(ReadString(*m, "aggregation", "", w), w);
    mc.self_loop = ReadBool(*m, "self_loop", mc.self_loop, w);
    mc.homogeneous = ReadBool(*m, "homogeneous", mc.homogeneous, w);
    mc.learn_edge_weights = ReadBool(*m, "learn_edge_weights", mc.learn_edge_weights, w);
  }
  if (const toml::table* e = internal::SubTable(t, "enhancer", source)) {
    const std::string w = source + " [enhancer]";
    CheckKeys(*e, {"mode", "embedding_dim", "max_new_per_user", "max_df", "min_df", "min_score", "endpoint",
                   "cache_path", "allow_network", "fallback_to_stub", "timeout_seconds"},
              w);
    auto& ec = c.enhancer;
    const std::string mode = ReadString(*e, "mode", "stub", w);
    if (mode == "stub") {
      ec.mode = enhancer::Mode::kStub;
    } else if (mode == "remote") {
      ec.mode = enhancer::Mode::kRemote;
    } else {
      throw ConfigError(w + ": mode must be 'stub' or 'remote'");
    }
    ec.remote = enhancer::RemoteOptions::FromEnvironment();
    ec.stub.embedding_dim = ReadSize(*e, "embedding_dim", ec.stub.embedding_dim, w);
    ec.remote.embedding_dim = ec.stub.embedding_dim;
    ec.stub.max_new_per_user = ReadSize(*e, "max_new_per_user", ec.stub.max_new_per_user, w);
    ec.stub.max_df = ReadDouble(*e, "max_df", ec.stub.max_df, w);
    ec.stub.min_df = ReadSize(*e, "min_df", ec.stub.min_df, w);
    ec.stub.min_score = ReadDouble(*e, "min_score", ec.stub.min_score, w);
    ec.remote.endpoint = ReadString(*e, "endpoint", ec.remote.endpoint, w);
    const std::string cache = ReadString(*e, "cache_path", "", w);
    if (!cache.empty()) {
      std::filesystem::path p(cache);
      ec.remote.cache_path = p.is_relative() && !base_dir.empty() ? base_dir / p : p;
    }
    ec.remote.allow_network = ReadBool(*e, "allow_network", ec.remote.allow_network, w);
    ec.remote.fallback_to_stub = ReadBool(*e, "fallback_to_stub", ec.remote.fallback_to_stub, w);
    ec.remote.timeout_seconds =
        static_cast<int>(internal::ReadInt(*e, "timeout_seconds", ec.remote.timeout_seconds, w));
  }
  c.Validate();
  return c;
}

ExperimentConfig LoadExperimentConfig(const std::filesystem::path& path) {
  std::string text;
  try {
    text = ReadTextFile(path);
  } catch (const IoError& e) {
    throw ConfigError(std::string("cannot read config: ") + e.what());
  }
  return ParseExperimentConfig(text, path.string(), path.parent_path());
}

std::pair<HeteroSocialGraph, augment::RefinementReport> RefineForSeed(
    const HeteroSocialGraph& base, const ExperimentConfig& config, std::uint64_t seed,
    const AugmentVariant& variant, enhancer::EnhancerClient& client) {
  augment::AugmentConfig ac = config.augment;
  ac.seed = seed;
  // The augmentation pass reads edge weights from an untrained KAN (alpha =
  // 1/2); training later relearns the blend on the admitted edges.
  const nn::KanEdgeModule kan;
  return augment::Refine(base, kan, client, ac, variant.toggles);
}

RunArtifacts RunOnce(const HeteroSocialGraph& base, const ExperimentConfig& config,
                     std::uint64_t seed, const ModalityMask& mask, const AugmentVariant& variant,
                     enhancer::EnhancerClient& client, bool with_baselines) {
  RunArtifacts out;
  std::tie(out.refined, out.result.refinement) = RefineForSeed(base, config, seed, variant, client);
  out.split = StratifiedSplit(out.refined.users(), config.split, seed);
  ModelConfig mc = config.model;
  mc.mask = mask;
  mc.seed = seed;
  out.training = TrainEarlySd(out.refined, out.split, mc);

  RunResult& r = out.result;
  r.seed = seed;
  r.variant = variant.name;
  r.mask = mask;
  r.best_epoch = out.training.best_epoch;
  r.epochs = out.training.log.size();
  r.test = EvaluateModel(out.training.model, out.refined, out.split.test);
  if (with_baselines) {
    for (const auto& b : config.baselines) r.baselines.push_back(RunBaseline(b, base, out.split, mask, seed));
  }
  return out;
}

std::vector<RunResult> RunAblation(const HeteroSocialGraph& base, const ExperimentConfig& config,
                                   enhancer::EnhancerClient& client, bool with_baselines) {
  config.Validate();
  std::vector<RunResult> runs;
  for (const auto& name : config.variants) {
    const AugmentVariant variant = VariantByName(name);
    for (const ModalityMask& mask : config.masks) {
      for (std::uint64_t seed : config.seeds) {
        runs.push_back(RunOnce(base, config, seed, mask, variant, client, with_baselines).result);
      }
    }
  }
  return runs;
}

Summary Summarize(const std::vector<double>& values) {
  Summary s;
  if (values.empty()) return s;
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.std = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  return s;
}

namespace {

std::vector<std::string> BaselineColumns(const std::vector<RunResult>& runs) {
  std::vector<std::string> names;
  for (const RunResult& r : runs) {
    for (const BaselineResult& b : r.baselines) {
      if (std::find(names.begin(), names.end(), b.name) == names.end()) names.push_back(b.name);
    }
  }
  return names;
}

const BaselineResult* FindBaseline(const RunResult& r, const std::string& name) {
  for (const BaselineResult& b : r.baselines) {
    if (b.name == name) return &b;
  }
  return nullptr;
}

std::string Pct(const Summary& s) { return fmt::format("{:.2f} ± {:.2f}", 100.0 * s.mean, 100.0 * s.std); }

}  // namespace

std::string AblationCsv(const std::vector<RunResult>& runs) {
  const auto baselines = BaselineColumns(runs);
  std::ostringstream os;
  CsvWriter w(os);
  std::vector<std::string> header = {"variant", "mask", "seed", "acc", "pre", "rec", "f1", "macro_f1",
                                     "tp", "tn", "fp", "fn", "best_epoch", "new_topics", "uu_added", "ut_added"};
  for (const auto& b : baselines) {
    header.push_back("baseline:" + b + ":acc");
    header.push_back("baseline:" + b + ":f1");
  }
  w.Row(header);
  for (const RunResult& r : runs) {
    std::vector<std::string> row = {r.variant, r.mask.ToString(), std::to_string(r.seed),
                                    FormatDouble(r.test.acc), FormatDouble(r.test.pre), FormatDouble(r.test.rec),
                                    FormatDouble(r.test.f1), FormatDouble(r.test.macro_f1),
                                    std::to_string(r.test.counts.tp), std::to_string(r.test.counts.tn),
                                    std::to_string(r.test.counts.fp), std::to_string(r.test.counts.fn),
                                    std::to_string(r.best_epoch), std::to_string(r.refinement.new_topics),
                                    std::to_string(r.refinement.uu_added), std::to_string(r.refinement.ut_added)};
    for (const auto& b : baselines) {
      const BaselineResult* br = FindBaseline(r, b);
      row.push_back(br ? FormatDouble(br->test.acc) : "");
      row.push_back(br ? FormatDouble(br->test.f1) : "");
    }
    w.Row(row);
  }
  return os.str();
}

std::string AblationMarkdown(const std::vector<RunResult>& runs) {
  // Groups keep first-appearance order.
  std::vector<std::pair<std::string, std::string>> keys;
  std::map<std::pair<std::string, std::string>, std::vector<const RunResult*>> groups;
  for (const RunResult& r : runs) {
    auto key = std::make_pair(r.variant, r.mask.ToString());
    if (!groups.count(key)) keys.push_back(key);
    groups[key].push_back(&r);
  }
  std::string md = "| Setting | Mask | Seeds | ACC (%) | PRE (%) | REC (%) | F1 (%) |\n";
  md += "|---|---|---|---|---|---|---|\n";
  auto metric = [](const std::vector<const RunResult*>& rs, double MetricsReport::*field) {
    std::vector<double> v;
    for (const RunResult* r : rs) v.push_back(r->test.*field);
    return Summarize(v);
  };
  for (const auto& key : keys) {
    const auto& rs = groups[key];
    md += fmt::format("| {} | {} | {} | {} | {} | {} | {} |\n", key.first, key.second, rs.size(),
                      Pct(metric(rs, &MetricsReport::acc)), Pct(metric(rs, &MetricsReport::pre)),
                      Pct(metric(rs, &MetricsReport::rec)), Pct(metric(rs, &MetricsReport::f1)));
  }
  const auto baselines = BaselineColumns(runs);
  if (baselines.empty()) return md;
  md += "\n| Baseline | Mask | Seeds | ACC (%) | F1 (%) |\n|---|---|---|---|---|\n";
  std::vector<std::string> masks;
  for (const auto& key : keys) {
    if (std::find(masks.begin(), masks.end(), key.second) == masks.end()) masks.push_back(key.second);
  }
  for (const auto& b : baselines) {
    for (const auto& mask : masks) {
      // One entry per seed: baselines do not depend on the variant.
      std::map<std::uint64_t, const BaselineResult*> by_seed;
      for (const RunResult& r : runs) {
        if (r.mask.ToString() != mask) continue;
        if (const BaselineResult* br = FindBaseline(r, b)) by_seed.emplace(r.seed, br);
      }
      if (by_seed.empty()) continue;
      std::vector<double> acc;
      std::vector<double> f1;
      for (const auto& [seed, br] : by_seed) {
        acc.push_back(br->test.acc);
        f1.push_back(br->test.f1);
      }
      md += fmt::format("| {} | {} | {} | {} | {} |\n", b, mask, by_seed.size(), Pct(Summarize(acc)),
                        Pct(Summarize(f1)));
    }
  }
  return md;
}

std::vector<RunResult> LoadAblationCsv(const std::filesystem::path& path) {
  CsvReader reader(path);
  const std::string& file = reader.file();
  auto num = [&](const CsvRow& row, std::string_view col) {
    double v = 0.0;
    const std::string& s = row.fields[reader.Column(col)];
    if (!ParseDouble(s, v)) throw ParseError(file, row.line, "bad number in column '" + std::string(col) + "'");
    return v;
  };
  auto count = [&](const CsvRow& row, std::string_view col) {
    long long v = 0;
    const std::string& s = row.fields[reader.Column(col)];
    if (!ParseInt(s, v) || v < 0) throw ParseError(file, row.line, "bad count in column '" + std::string(col) + "'");
    return static_cast<std::size_t>(v);
  };
  std::vector<std::string> baselines;
  for (const auto& h : reader.header()) {
    if (h.rfind("baseline:", 0) == 0 && h.size() > 13 && h.substr(h.size() - 4) == ":acc") {
      baselines.push_back(h.substr(9, h.size() - 13));
    }
  }
  std::vector<RunResult> runs;
  for (const CsvRow& row : reader.rows()) {
    if (row.fields.size() != reader.header().size()) throw ParseError(file, row.line, "wrong field count");
    RunResult r;
    r.variant = row.fields[reader.Column("variant")];
    try {
      r.mask = ModalityMask::Parse(row.fields[reader.Column("mask")]);
    } catch (const ConfigError& e) {
      throw ParseError(file, row.line, e.what());
    }
    r.seed = count(row, "seed");
    r.test.acc = num(row, "acc");
    r.test.pre = num(row, "pre");
    r.test.rec = num(row, "rec");
    r.test.f1 = num(row, "f1");
    r.test.macro_f1 = num(row, "macro_f1");
    r.test.counts = {count(row, "tp"), count(row, "tn"), count(row, "fp"), count(row, "fn")};
    r.best_epoch = count(row, "best_epoch");
    r.refinement.new_topics = count(row, "new_topics");
    r.refinement.uu_added = count(row, "uu_added");
    r.refinement.ut_added = count(row, "ut_added");
    for (const auto& b : baselines) {
      if (row.fields[reader.Column("baseline:" + b + ":acc")].empty()) continue;
      BaselineResult br;
      br.name = b;
      br.test.acc = num(row, "baseline:" + b + ":acc");
      br.test.f1 = num(row, "baseline:" + b + ":f1");
      r.baselines.push_back(br);
    }
    runs.push_back(std::move(r));
  }
  return runs;
}

nlohmann::json RunJson(const RunResult& run) {
  nlohmann::json j;
  j["seed"] = run.seed;
  j["variant"] = run.variant;
  j["mask"] = run.mask.ToString();
  j["best_epoch"] = run.best_epoch;
  j["epochs"] = run.epochs;
  j["test"] = ToJson(run.test);
  j["refinement"] = {
      {"new_topics", run.refinement.new_topics},
      {"expansion_edges", run.refinement.expansion_edges},
      {"uu_added", run.refinement.uu_added},
      {"ut_added", run.refinement.ut_added},
      {"uu_homophily", run.refinement.uu_homophily},
      {"label_agreement_base", run.refinement.label_agreement_base},
      {"lp_holdout_auc", run.refinement.lp.holdout_auc},
  };
  nlohmann::json b = nlohmann::json::object();
  for (const BaselineResult& br : run.baselines) {
    b[br.name] = ToJson(br.test);
    b[br.name]["chosen"] = br.chosen;
  }
  j["baselines"] = b;
  return j;
}

}  // namespace earlysd
