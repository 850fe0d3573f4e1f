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

#include "earlysd/synth.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include <Eigen/Dense>

#include "earlysd/csv.h"
#include "earlysd/enhancer.h"
#include "earlysd/error.h"
#include "earlysd/rng.h"
#include "earlysd/stats.h"
#include "earlysd/text.h"
#include "toml_util.h"

namespace earlysd::synth {
namespace {

// Stream tags keep the random draws of each generation stage independent, so
// changing one stage does not perturb the others.
constexpr std::uint64_t kTagLabels = 1;
constexpr std::uint64_t kTagScores = 2;
constexpr std::uint64_t kTagContent = 3;
constexpr std::uint64_t kTagFeatures = 4;
constexpr std::uint64_t kTagTopics = 5;
constexpr std::uint64_t kTagSnippets = 6;
// Outer rounds correcting latent JSD targets for sampling inflation.
constexpr int kMaxJsdCorrectionRounds = 8;
constexpr double kJsdCorrectionTolerance = 0.01;
constexpr std::uint64_t kTagCalibOriginal = 7;
constexpr std::uint64_t kTagCalibNovel = 8;

constexpr double kCountSigma = 1.2;

constexpr std::string_view kModifiers[] = {
    "indie",  "retro",   "street", "mobile", "classic", "urban",  "extreme", "home",
    "digital", "vintage", "outdoor", "budget", "gourmet", "acoustic", "speed", "casual",
    "luxury",  "amateur", "local",  "wild"};
constexpr std::string_view kNouns[] = {
    "music",  "fashion", "cooking", "gaming", "travel",  "fitness", "photography",
    "dance",  "comedy",  "art",     "cars",   "pets",    "anime",   "movies",
    "books",  "makeup",  "football", "basketball", "gadgets", "crafts"};
constexpr std::string_view kNovel[] = {
    "k-pop",     "asmr",       "cosplay",   "mukbang",     "vlogging",  "skateboarding",
    "parkour",   "origami",    "k-drama",   "esports",     "streetwear", "bouldering",
    "calligraphy", "beatboxing", "crossfit", "yoga",        "pilates",   "meditation",
    "surfing",   "snowboarding", "sneakers", "thrifting",  "baking",    "gardening",
    "aquariums", "astrology",  "tarot",     "podcasts",    "rap",       "edm",
    "karaoke",   "magic",      "juggling",  "lego",        "drones",    "robotics",
    "chess",     "poker",      "hiking",    "camping",     "fishing",   "knitting",
    "pottery",   "skincare",   "manga",     "webtoons",    "unboxing",  "minimalism",
    "journaling", "birdwatching", "archery", "fencing",    "sudoku",    "ukulele",
    "breakdance", "taekwondo",  "volleyball", "badminton", "kayaking",  "beekeeping"};

struct Template {
  std::string_view text;
  int slots;
};
constexpr Template kTemplates[] = {
    {"watched so many {a} videos tonight", 1},
    {"can't stop scrolling {a} clips", 1},
    {"new {a} post is up", 1},
    {"anyone else obsessed with {a} lately?", 1},
    {"weekend plans: {a} and {b}", 2},
    {"my feed is all {a} now", 1},
    {"saved another {a} reel", 1},
    {"story time about {a} and {b}", 2},
};

double PhiCdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

double Logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }
double Logit(double p) { return std::log(p / (1.0 - p)); }

double Lerp(double a, double b, double s) { return a + (b - a) * s; }

std::size_t GroupIndex(SfvaLabel l) {
  for (std::size_t g = 0; g < kNumGroups; ++g) {
    if (kGroupOrder[g] == l) return g;
  }
  return 0;
}

// Inverse-CDF draw from a log-normal truncated to [lo, hi].
double SampleTruncatedLogNormal(double lo, double hi, double mu, double sigma, Rng& rng) {
  const double a = (std::log(lo) - mu) / sigma;
  const double b = (std::log(hi) - mu) / sigma;
  const double fa = PhiCdf(a);
  const double fb = PhiCdf(b);
  const double u = fa + (fb - fa) * rng.Uniform();
  double l = a;
  double h = b;
  for (int it = 0; it < 80; ++it) {
    const double m = 0.5 * (l + h);
    if (PhiCdf(m) < u) {
      l = m;
    } else {
      h = m;
    }
  }
  return std::clamp(std::exp(mu + sigma * 0.5 * (l + h)), lo, hi);
}

std::vector<double> ZipfWeights(std::size_t n, double exponent) {
  std::vector<double> w(n);
  for (std::size_t r = 0; r < n; ++r) w[r] = 1.0 / std::pow(static_cast<double>(r + 1), exponent);
  return w;
}

void NormalizeInPlace(std::vector<double>& p) {
  const double s = std::accumulate(p.begin(), p.end(), 0.0);
  for (double& x : p) x /= s;
}

double PairJsd(const std::vector<double>& a, const std::vector<double>& b) {
  return stats::Jsd(stats::Distribution(a), stats::Distribution(b));
}

std::string FormatRange(const RangeStats& r) {
  return "[" + FormatDouble(r.min) + ", " + FormatDouble(r.max) + "] mean " + FormatDouble(r.mean);
}

}  // namespace

// ------------------------------------------------------------ config

void CohortConfig::Validate() const {
  for (std::size_t g = 0; g < kNumGroups; ++g) {
    const std::string group(LabelName(kGroupOrder[g]));
    if (group_sizes[g] == 0) throw ConfigError("group " + group + " is empty");
    const RangeStats& s = score_ranges[g];
    if (s.min != std::floor(s.min) || s.max != std::floor(s.max)) {
      throw ConfigError("score bounds of " + group + " must be integers");
    }
    if (s.min < kMinScore || s.max > kMaxScore) {
      throw ConfigError("score range of " + group + " leaves [0, 120]");
    }
    if (!(s.min < s.mean && s.mean < s.max)) {
      throw ConfigError("score mean of " + group + " lies outside " + FormatRange(s));
    }
    for (int lo = static_cast<int>(s.min); lo <= static_cast<int>(s.max); ++lo) {
      if (LabelFromScore(lo) != kGroupOrder[g]) {
        throw ConfigError("score range of " + group + " crosses a label boundary at " +
                          std::to_string(lo));
      }
    }
    for (std::size_t c = 0; c < 3; ++c) {
      const RangeStats& r = content_stats[g][c];
      if (!(r.min >= 1.0 && r.min < r.mean && r.mean < r.max)) {
        throw ConfigError("content stats of " + group + " channel " + std::to_string(c) +
                          " need 1 <= min < mean < max, got " + FormatRange(r));
      }
    }
  }
  for (double t : jsd_targets) {
    if (!(t >= 0.0 && t <= 1.0)) throw ConfigError("jsd targets must lie in [0, 1]");
  }
  if (topic_count_original == 0) throw ConfigError("topic_count_original must be positive");
  if (topic_count_original > std::size(kModifiers) * std::size(kNouns)) {
    throw ConfigError("topic_count_original exceeds the name vocabulary (" +
                      std::to_string(std::size(kModifiers) * std::size(kNouns)) + ")");
  }
  if (topic_count_novel > std::size(kNovel)) {
    throw ConfigError("topic_count_novel exceeds the name vocabulary (" +
                      std::to_string(std::size(kNovel)) + ")");
  }
  if (!(signal_strength >= 0.0 && signal_strength <= 1.0)) {
    throw ConfigError("signal_strength must lie in [0, 1]");
  }
  if (!(mean_topics_per_user > 0.0) || max_topics_per_user == 0) {
    throw ConfigError("topics per user must be positive");
  }
  if (mean_hidden_topics < 0.0 || mean_novel_topics < 0.0) {
    throw ConfigError("hidden/novel topic means must be >= 0");
  }
  if (min_snippets == 0 || min_snippets > max_snippets) {
    throw ConfigError("need 1 <= min_snippets <= max_snippets");
  }
  if (embedding_dim == 0) throw ConfigError("embedding_dim must be positive");
}

CohortConfig ParseCohortConfig(std::string_view text, const std::string& source) {
  using namespace earlysd::internal;
  const toml::table t = ParseToml(text, source);
  CheckKeys(t,
            {"seed", "signal_strength", "group_sizes", "jsd_targets", "topic_count_original",
             "topic_count_novel", "mean_topics_per_user", "max_topics_per_user",
             "mean_hidden_topics", "mean_novel_topics", "max_novel_topics", "min_snippets",
             "max_snippets", "embedding_dim", "with_embeddings", "scores", "content", "effects"},
            source);
  CohortConfig c;
  c.seed = static_cast<std::uint64_t>(ReadInt(t, "seed", static_cast<std::int64_t>(c.seed), source));
  c.signal_strength = ReadDouble(t, "signal_strength", c.signal_strength, source);
  c.topic_count_original = ReadSize(t, "topic_count_original", c.topic_count_original, source);
  c.topic_count_novel = ReadSize(t, "topic_count_novel", c.topic_count_novel, source);
  c.mean_topics_per_user = ReadDouble(t, "mean_topics_per_user", c.mean_topics_per_user, source);
  c.max_topics_per_user = ReadSize(t, "max_topics_per_user", c.max_topics_per_user, source);
  c.mean_hidden_topics = ReadDouble(t, "mean_hidden_topics", c.mean_hidden_topics, source);
  c.mean_novel_topics = ReadDouble(t, "mean_novel_topics", c.mean_novel_topics, source);
  c.max_novel_topics = ReadSize(t, "max_novel_topics", c.max_novel_topics, source);
  c.min_snippets = ReadSize(t, "min_snippets", c.min_snippets, source);
  c.max_snippets = ReadSize(t, "max_snippets", c.max_snippets, source);
  c.embedding_dim = ReadSize(t, "embedding_dim", c.embedding_dim, source);
  c.with_embeddings = ReadBool(t, "with_embeddings", c.with_embeddings, source);

  if (const toml::node* n = t.get("group_sizes")) {
    const toml::array* arr = n->as_array();
    if (!arr || arr->size() != kNumGroups) {
      throw ConfigError(source + ": group_sizes must be [non, sfva, potential]");
    }
    for (std::size_t g = 0; g < kNumGroups; ++g) {
      auto v = (*arr)[g].value<std::int64_t>();
      if (!v || *v < 0) throw ConfigError(source + ": group_sizes must be counts");
      c.group_sizes[g] = static_cast<std::size_t>(*v);
    }
  }
  const std::vector<double> jsd = ReadDoubleArray(
      t, "jsd_targets", {c.jsd_targets[0], c.jsd_targets[1], c.jsd_targets[2]}, source);
  if (jsd.size() != 3) throw ConfigError(source + ": jsd_targets needs three values");
  std::copy(jsd.begin(), jsd.end(), c.jsd_targets.begin());

  static constexpr std::string_view kGroupKeys[] = {"non", "sfva", "potential"};
  auto read_range = [&](const toml::table& tbl, std::string_view key, RangeStats& r,
                        const std::string& where) {
    const std::vector<double> v = ReadDoubleArray(tbl, key, {r.min, r.max, r.mean}, where);
    if (v.size() != 3) throw ConfigError(where + ": '" + std::string(key) + "' needs [min, max, mean]");
    r = {v[0], v[1], v[2]};
  };
  if (const toml::table* s = SubTable(t, "scores", source)) {
    CheckKeys(*s, {"non", "sfva", "potential"}, source + " [scores]");
    for (std::size_t g = 0; g < kNumGroups; ++g) {
      read_range(*s, kGroupKeys[g], c.score_ranges[g], source + " [scores]");
    }
  }
  if (const toml::table* ct = SubTable(t, "content", source)) {
    CheckKeys(*ct, {"non", "sfva", "potential"}, source + " [content]");
    for (std::size_t g = 0; g < kNumGroups; ++g) {
      const std::string where = source + " [content." + std::string(kGroupKeys[g]) + "]";
      if (const toml::table* gt = SubTable(*ct, kGroupKeys[g], where)) {
        CheckKeys(*gt, {"posts", "stories", "comments"}, where);
        read_range(*gt, "posts", c.content_stats[g][kPosts], where);
        read_range(*gt, "stories", c.content_stats[g][kStories], where);
        read_range(*gt, "comments", c.content_stats[g][kComments], where);
      }
    }
  }
  if (const toml::table* e = SubTable(t, "effects", source)) {
    const std::string where = source + " [effects]";
    CheckKeys(*e, {"age", "sias", "big5_n", "social_searches", "comment_inter", "bidir_ratio"}, where);
    SignalEffects& f = c.effects;
    f.age = ReadDouble(*e, "age", f.age, where);
    f.sias = ReadDouble(*e, "sias", f.sias, where);
    f.big5_n = ReadDouble(*e, "big5_n", f.big5_n, where);
    f.social_searches = ReadDouble(*e, "social_searches", f.social_searches, where);
    f.comment_inter = ReadDouble(*e, "comment_inter", f.comment_inter, where);
    f.bidir_ratio = ReadDouble(*e, "bidir_ratio", f.bidir_ratio, where);
  }
  c.Validate();
  return c;
}

CohortConfig LoadCohortConfig(const std::filesystem::path& path) {
  std::string text;
  try {
    text = ReadTextFile(path);
  } catch (const IoError& e) {
    throw ConfigError(e.what());
  }
  return ParseCohortConfig(text, path.string());
}

// ------------------------------------------------------------ fitting

double FitTruncatedNormalLocation(int lo, int hi, double sd, double mean) {
  if (!(lo < mean && mean < hi)) {
    throw ConfigError("mean " + FormatDouble(mean) + " is outside (" + std::to_string(lo) + ", " +
                      std::to_string(hi) + ")");
  }
  auto mean_at = [&](double mu) {
    double z = 0.0;
    double m = 0.0;
    for (int k = lo; k <= hi; ++k) {
      const double w = std::exp(-0.5 * ((k - mu) / sd) * ((k - mu) / sd));
      z += w;
      m += w * k;
    }
    return z > 0.0 ? m / z : (mu < lo ? lo : hi);
  };
  double a = lo - 6.0 * sd;
  double b = hi + 6.0 * sd;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (a + b);
    if (mean_at(mid) < mean) {
      a = mid;
    } else {
      b = mid;
    }
  }
  return 0.5 * (a + b);
}

double TruncatedLogNormalMean(double lo, double hi, double mu, double sigma) {
  const double la = std::log(lo);
  const double lb = std::log(hi);
  const double den = PhiCdf((lb - mu) / sigma) - PhiCdf((la - mu) / sigma);
  const double num = PhiCdf((lb - mu - sigma * sigma) / sigma) -
                     PhiCdf((la - mu - sigma * sigma) / sigma);
  if (den <= 1e-300) return mu < la ? lo : hi;
  return std::exp(mu + 0.5 * sigma * sigma) * num / den;
}

double FitTruncatedLogNormalMu(double lo, double hi, double sigma, double mean) {
  if (!(lo > 0.0 && lo < mean && mean < hi)) {
    throw ConfigError("mean " + FormatDouble(mean) + " is outside (" + FormatDouble(lo) + ", " +
                      FormatDouble(hi) + ")");
  }
  double a = std::log(lo) - 8.0 * sigma;
  double b = std::log(hi) + 8.0 * sigma;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (a + b);
    if (TruncatedLogNormalMean(lo, hi, mid, sigma) < mean) {
      a = mid;
    } else {
      b = mid;
    }
  }
  return 0.5 * (a + b);
}

// -------------------------------------------------------- calibration

LatentTopics CalibrateTopicDivergence(const std::array<double, 3>& targets,
                                      std::size_t topic_count, std::uint64_t seed,
                                      double tolerance) {
  for (double t : targets) {
    if (!(t >= 0.0 && t <= 1.0)) throw DomainError("jsd targets must lie in [0, 1]");
  }
  if (topic_count < kNumGroups) {
    throw DomainError("calibration needs at least " + std::to_string(kNumGroups) + " topics");
  }
  Rng rng = Rng::Stream(seed, 0xca11b);

  // Shared base over every topic, Zipf-shaped in a random order.
  std::vector<std::size_t> order(topic_count);
  std::iota(order.begin(), order.end(), 0);
  rng.Shuffle(order);
  std::vector<double> base(topic_count);
  const std::vector<double> zipf = ZipfWeights(topic_count, 0.8);
  for (std::size_t r = 0; r < topic_count; ++r) base[order[r]] = zipf[r];
  NormalizeInPlace(base);

  // Disjoint group-specific supports.
  rng.Shuffle(order);
  const std::size_t m = std::max<std::size_t>(1, topic_count / 5);
  const std::size_t per = std::min(m, topic_count / kNumGroups);
  std::array<std::vector<double>, kNumGroups> specific;
  const std::vector<double> zs = ZipfWeights(per, 0.6);
  for (std::size_t g = 0; g < kNumGroups; ++g) {
    specific[g].assign(topic_count, 0.0);
    for (std::size_t r = 0; r < per; ++r) specific[g][order[g * per + r]] = zs[r];
    NormalizeInPlace(specific[g]);
  }

  auto mix = [&](const std::array<double, kNumGroups>& lam) {
    std::array<std::vector<double>, kNumGroups> p;
    for (std::size_t g = 0; g < kNumGroups; ++g) {
      p[g].resize(topic_count);
      for (std::size_t i = 0; i < topic_count; ++i) {
        p[g][i] = (1.0 - lam[g]) * base[i] + lam[g] * specific[g][i];
      }
      NormalizeInPlace(p[g]);
    }
    return p;
  };
  auto residual = [&](const std::array<double, kNumGroups>& lam) {
    const auto p = mix(lam);
    return Eigen::Vector3d(PairJsd(p[0], p[1]) - targets[0], PairJsd(p[0], p[2]) - targets[1],
                           PairJsd(p[1], p[2]) - targets[2]);
  };

  std::array<double, kNumGroups> best{};
  double best_res = HUGE_VAL;
  // All-zero targets are met exactly by the shared base.
  if (targets[0] == 0.0 && targets[1] == 0.0 && targets[2] == 0.0) best_res = 0.0;
  for (int restart = 0; restart < 12 && best_res > 1e-10; ++restart) {
    std::array<double, kNumGroups> lam;
    for (double& l : lam) l = restart == 0 ? 0.5 : rng.Uniform(0.05, 0.95);
    double mu = 1e-3;
    Eigen::Vector3d r = residual(lam);
    for (int it = 0; it < 200; ++it) {
      if (r.cwiseAbs().maxCoeff() < 1e-12) break;
      Eigen::Matrix3d jac;
      for (std::size_t k = 0; k < kNumGroups; ++k) {
        std::array<double, kNumGroups> hi = lam;
        std::array<double, kNumGroups> lo = lam;
        const double h = 1e-6;
        hi[k] = std::min(1.0, lam[k] + h);
        lo[k] = std::max(0.0, lam[k] - h);
        jac.col(static_cast<Eigen::Index>(k)) = (residual(hi) - residual(lo)) / (hi[k] - lo[k]);
      }
      const Eigen::Matrix3d a = jac.transpose() * jac + mu * Eigen::Matrix3d::Identity();
      const Eigen::Vector3d step = a.ldlt().solve(-jac.transpose() * r);
      std::array<double, kNumGroups> next;
      for (std::size_t k = 0; k < kNumGroups; ++k) {
        next[k] = std::clamp(lam[k] + step[static_cast<Eigen::Index>(k)], 0.0, 1.0);
      }
      const Eigen::Vector3d rn = residual(next);
      if (rn.squaredNorm() < r.squaredNorm()) {
        lam = next;
        r = rn;
        mu = std::max(mu * 0.3, 1e-12);
      } else {
        mu *= 10.0;
        if (mu > 1e8) break;
      }
    }
    const double res = r.cwiseAbs().maxCoeff();
    if (res < best_res) {
      best_res = res;
      best = lam;
    }
  }
  if (best_res > tolerance) {
    throw CalibrationError("topic divergence calibration failed: best max residual " +
                           FormatDouble(best_res) + " exceeds " + FormatDouble(tolerance));
  }
  LatentTopics out;
  out.original = mix(best);
  out.lambda = best;
  out.max_residual = best_res;
  return out;
}

// ------------------------------------------------------------- signal

void PlantSignal(std::span<UserRecord> users, double strength, const SignalEffects& e) {
  if (!(strength >= 0.0 && strength <= 1.0)) {
    throw DomainError("signal strength must lie in [0, 1]");
  }
  if (strength == 0.0) return;
  for (UserRecord& u : users) {
    if (u.binary_label() != BinaryLabel::kPositive) continue;
    // Spreads match the generating distributions below.
    u.feature("age") = std::clamp(u.feature("age") - strength * e.age * 3.0, 15.0, 40.0);
    u.feature("sias") = std::clamp(u.feature("sias") + strength * e.sias * 12.0, 0.0, 80.0);
    u.feature("big5_n") = std::clamp(u.feature("big5_n") + strength * e.big5_n * 0.7, 1.0, 5.0);
    u.feature("social_searches") =
        std::round(u.feature("social_searches") * std::exp(strength * e.social_searches * 1.0));
    u.feature("searches") = std::max(u.feature("searches"), u.feature("social_searches"));
    u.feature("comment_inter") =
        std::round(u.feature("comment_inter") * std::exp(strength * e.comment_inter * 1.1));
    const double r = std::clamp(u.feature("bidir_ratio"), 1e-6, 1.0 - 1e-6);
    u.feature("bidir_ratio") = Logistic(Logit(r) + strength * e.bidir_ratio * 0.8);
  }
}

// --------------------------------------------------------------- names

std::vector<std::string> OriginalTopicNames(std::size_t count) {
  // Diagonal walk over modifier x noun so that short lists still mix nouns.
  std::vector<std::string> names;
  const std::size_t nm = std::size(kModifiers);
  const std::size_t nn = std::size(kNouns);
  for (std::size_t shift = 0; shift < nn && names.size() < count; ++shift) {
    for (std::size_t i = 0; i < nm && names.size() < count; ++i) {
      names.push_back(std::string(kModifiers[i]) + " " + std::string(kNouns[(i + shift) % nn]));
    }
  }
  if (names.size() < count) throw ConfigError("not enough original topic names");
  return names;
}

std::vector<std::string> NovelTopicNames(std::size_t count) {
  if (count > std::size(kNovel)) throw ConfigError("not enough novel topic names");
  return {kNovel, kNovel + count};
}

// ----------------------------------------------------------- generator

Cohort GenerateCohort(const CohortConfig& config) {
  config.Validate();
  const double s = config.signal_strength;
  const std::size_t n = std::accumulate(config.group_sizes.begin(), config.group_sizes.end(),
                                        std::size_t{0});

  // Labels in shuffled order so ids carry no group information.
  std::vector<std::size_t> group_of;
  for (std::size_t g = 0; g < kNumGroups; ++g) group_of.insert(group_of.end(), config.group_sizes[g], g);
  Rng label_rng = Rng::Stream(config.seed, kTagLabels);
  label_rng.Shuffle(group_of);

  std::vector<UserRecord> users;
  users.reserve(n);
  const int width = std::max<int>(4, static_cast<int>(std::to_string(n).size()));
  for (std::size_t i = 0; i < n; ++i) {
    std::string id = std::to_string(i + 1);
    id = "u" + std::string(static_cast<std::size_t>(width) - id.size(), '0') + id;
    users.push_back(MakeUser(std::move(id), 0));
  }

  // Scores: per group discrete truncated normal, then nudged toward the mean.
  Rng score_rng = Rng::Stream(config.seed, kTagScores);
  for (std::size_t g = 0; g < kNumGroups; ++g) {
    const RangeStats& r = config.score_ranges[g];
    const int lo = static_cast<int>(r.min);
    const int hi = static_cast<int>(r.max);
    const double sd = std::max(1.0, (r.max - r.min) / 4.0);
    const double mu = FitTruncatedNormalLocation(lo, hi, sd, r.mean);
    std::vector<double> w;
    for (int k = lo; k <= hi; ++k) w.push_back(std::exp(-0.5 * ((k - mu) / sd) * ((k - mu) / sd)));
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < n; ++i) {
      if (group_of[i] == g) members.push_back(i);
    }
    long total = 0;
    for (std::size_t i : members) {
      users[i].score = lo + static_cast<int>(score_rng.Categorical(w));
      total += users[i].score;
    }
    // Pin the observed extremes to the configured bounds; the pinned users
    // are then left out of the mean adjustment.
    std::vector<std::size_t> movable = members;
    if (members.size() >= 2) {
      auto by_score = [&](std::size_t a, std::size_t b) { return users[a].score < users[b].score; };
      const std::size_t i_lo = *std::min_element(members.begin(), members.end(), by_score);
      std::size_t i_hi = *std::max_element(members.begin(), members.end(), by_score);
      if (i_hi == i_lo) i_hi = members[i_lo == members[0] ? 1 : 0];
      total += (lo - users[i_lo].score) + (hi - users[i_hi].score);
      users[i_lo].score = lo;
      users[i_hi].score = hi;
      std::erase_if(movable, [&](std::size_t i) { return i == i_lo || i == i_hi; });
    }
    const double target = r.mean * static_cast<double>(members.size());
    for (int guard = 0; guard < 100000 && !movable.empty(); ++guard) {
      const double diff = static_cast<double>(total) - target;
      if (std::abs(diff) <= 0.5 * static_cast<double>(members.size())) break;
      UserRecord& u = users[movable[score_rng.Index(movable.size())]];
      if (diff > 0 && u.score > lo) {
        --u.score;
        --total;
      } else if (diff < 0 && u.score < hi) {
        ++u.score;
        ++total;
      }
    }
  }

  // Content volume per channel; s interpolates between pooled and group
  // statistics.
  Rng content_rng = Rng::Stream(config.seed, kTagContent);
  static constexpr std::string_view kChannelCols[] = {"posts", "stories", "comments"};
  for (std::size_t c = 0; c < 3; ++c) {
    RangeStats pooled{0.0, HUGE_VAL, 0.0};
    for (std::size_t g = 0; g < kNumGroups; ++g) {
      pooled.min = std::max(pooled.min, config.content_stats[g][c].min);
      pooled.max = std::min(pooled.max, config.content_stats[g][c].max);
      pooled.mean += config.content_stats[g][c].mean * static_cast<double>(config.group_sizes[g]);
    }
    pooled.mean /= static_cast<double>(n);
    if (pooled.min >= pooled.max) {
      throw ConfigError("content ranges of channel " + std::string(kChannelCols[c]) +
                        " do not overlap across groups");
    }
    const double span = pooled.max - pooled.min;
    pooled.mean = std::clamp(pooled.mean, pooled.min + 0.01 * span, pooled.max - 0.01 * span);
    std::array<RangeStats, kNumGroups> eff;
    std::array<double, kNumGroups> mu{};
    for (std::size_t g = 0; g < kNumGroups; ++g) {
      const RangeStats& gs = config.content_stats[g][c];
      eff[g] = {Lerp(pooled.min, gs.min, s), Lerp(pooled.max, gs.max, s),
                Lerp(pooled.mean, gs.mean, s)};
      mu[g] = FitTruncatedLogNormalMu(eff[g].min, eff[g].max, kCountSigma, eff[g].mean);
    }
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t g = group_of[i];
      const double x = SampleTruncatedLogNormal(eff[g].min, eff[g].max, mu[g], kCountSigma, content_rng);
      users[i].feature(kChannelCols[c]) =
          std::clamp(std::round(x), std::ceil(eff[g].min), std::floor(eff[g].max));
    }
  }

  // Remaining features, independent of the label before the signal is planted.
  Rng feat_rng = Rng::Stream(config.seed, kTagFeatures);
  auto lognormal = [&](double mu, double sigma) { return std::round(std::exp(feat_rng.Normal(mu, sigma))); };
  for (UserRecord& u : users) {
    u.feature("age") = std::clamp(std::round(feat_rng.Normal(22.0, 3.0)), 15.0, 40.0);
    u.feature("gender") = feat_rng.Bernoulli(0.5) ? 1.0 : 0.0;
    u.feature("edu") = static_cast<double>(feat_rng.Categorical(std::vector<double>{0.15, 0.55, 0.25, 0.05}));
    u.feature("platforms") = std::clamp(1.0 + feat_rng.Poisson(2.0), 1.0, 8.0);
    for (std::string_view b : {"big5_o", "big5_c", "big5_e", "big5_a", "big5_n"}) {
      u.feature(b) = std::clamp(feat_rng.Normal(3.0, 0.7), 1.0, 5.0);
    }
    u.feature("sias") = std::clamp(feat_rng.Normal(30.0, 12.0), 0.0, 80.0);
    u.feature("followers") = lognormal(5.5, 1.2);
    u.feature("following") = lognormal(5.8, 0.9);
    u.feature("bidir_ratio") = Logistic(feat_rng.Normal(-0.4, 0.8));
    u.feature("mean_len") = std::clamp(feat_rng.Normal(40.0, 15.0), 5.0, 300.0);
    u.feature("searches") = lognormal(4.0, 1.0);
    u.feature("social_searches") =
        std::round(u.feature("searches") * Logistic(feat_rng.Normal(-1.0, 0.8)));
    u.feature("friend_ratio") = Logistic(feat_rng.Normal(-0.5, 0.8));
    u.feature("likes") = lognormal(6.0, 1.2);
    u.feature("comment_inter") = lognormal(3.0, 1.1);
    u.feature("story_inter") = lognormal(3.5, 1.0);
  }
  for (std::size_t i = 0; i < n; ++i) {
    // Scores were drawn per group, so labels are consistent by construction.
    if (GroupIndex(users[i].label()) != group_of[i]) throw Error("score/group mismatch");
  }
  PlantSignal(users, s, config.effects);

  // Latent topic distributions, shrunk toward the pooled mix when s < 1.
  auto shrink = [&](std::array<std::vector<double>, kNumGroups>& dists) {
    if (dists[0].empty()) return;
    std::vector<double> pooled(dists[0].size(), 0.0);
    for (std::size_t g = 0; g < kNumGroups; ++g) {
      const double w = static_cast<double>(config.group_sizes[g]) / static_cast<double>(n);
      for (std::size_t i = 0; i < pooled.size(); ++i) pooled[i] += w * dists[g][i];
    }
    for (auto& d : dists) {
      for (std::size_t i = 0; i < d.size(); ++i) d[i] = Lerp(pooled[i], d[i], s);
      NormalizeInPlace(d);
    }
  };
  auto make_latent = [&](const std::array<double, kNumGroups>& targets) {
    LatentTopics latent = CalibrateTopicDivergence(
        targets, config.topic_count_original, Rng::Stream(config.seed, kTagCalibOriginal).NextU64());
    if (config.topic_count_novel >= kNumGroups) {
      latent.novel = CalibrateTopicDivergence(targets, config.topic_count_novel,
                                              Rng::Stream(config.seed, kTagCalibNovel).NextU64())
                         .original;
    } else {
      for (auto& v : latent.novel) {
        v.assign(config.topic_count_novel, config.topic_count_novel ? 1.0 / config.topic_count_novel : 0.0);
      }
    }
    shrink(latent.original);
    shrink(latent.novel);
    return latent;
  };

  // Per-user interests: given and hidden original topics, and novel ones.
  struct Picks {
    std::vector<std::size_t> given;
    std::vector<std::size_t> hidden;
    std::vector<std::size_t> novel;
  };
  auto sample_picks = [&](const LatentTopics& latent) {
    Rng topic_rng = Rng::Stream(config.seed, kTagTopics);
    std::vector<Picks> picks(n);
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t g = group_of[i];
      const int k_given = std::clamp(topic_rng.Poisson(config.mean_topics_per_user), 1,
                                     static_cast<int>(config.max_topics_per_user));
      const int k_hidden = topic_rng.Poisson(config.mean_hidden_topics);
      const std::size_t k_total =
          std::min(static_cast<std::size_t>(k_given + k_hidden), config.topic_count_original);
      std::vector<std::size_t> picked = topic_rng.SampleWithoutReplacement(latent.original[g], k_total);
      topic_rng.Shuffle(picked);
      const auto n_given = static_cast<std::ptrdiff_t>(std::min(picked.size(), static_cast<std::size_t>(k_given)));
      picks[i].given.assign(picked.begin(), picked.begin() + n_given);
      picks[i].hidden.assign(picked.begin() + n_given, picked.end());
      std::sort(picks[i].given.begin(), picks[i].given.end());
      std::sort(picks[i].hidden.begin(), picks[i].hidden.end());
      if (config.topic_count_novel > 0) {
        const std::size_t k_novel = std::min<std::size_t>(
            config.max_novel_topics, static_cast<std::size_t>(topic_rng.Poisson(config.mean_novel_topics)));
        picks[i].novel = topic_rng.SampleWithoutReplacement(latent.novel[g], k_novel);
      }
    }
    return picks;
  };
  // Pairwise JSD of the per-group given-edge topic counts.
  auto observed_jsd = [&](const std::vector<Picks>& picks) {
    std::array<std::vector<double>, kNumGroups> counts;
    for (auto& c : counts) c.assign(config.topic_count_original, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t t : picks[i].given) counts[group_of[i]][t] += 1.0;
    }
    for (auto& c : counts) NormalizeInPlace(c);
    return std::array<double, kNumGroups>{PairJsd(counts[0], counts[1]), PairJsd(counts[0], counts[2]),
                                          PairJsd(counts[1], counts[2])};
  };

  // Finite samples inflate the observed divergence, so the latent targets
  // are lowered until the sampled edges themselves land on the targets.
  // With s < 1 the divergence is deliberately reduced and no correction runs.
  std::array<double, kNumGroups> latent_targets = config.jsd_targets;
  LatentTopics latent = make_latent(latent_targets);
  std::vector<Picks> picks = sample_picks(latent);
  if (s == 1.0) {
    double best_dev = HUGE_VAL;
    for (int round = 0; round < kMaxJsdCorrectionRounds; ++round) {
      const auto obs = observed_jsd(picks);
      double dev = 0.0;
      for (std::size_t k = 0; k < kNumGroups; ++k) dev = std::max(dev, std::abs(obs[k] - config.jsd_targets[k]));
      if (dev >= best_dev) break;
      best_dev = dev;
      if (dev < kJsdCorrectionTolerance) break;
      std::array<double, kNumGroups> next = latent_targets;
      for (std::size_t k = 0; k < kNumGroups; ++k) {
        next[k] = std::clamp(next[k] - (obs[k] - config.jsd_targets[k]), 0.0, 1.0);
      }
      LatentTopics next_latent;
      try {
        next_latent = make_latent(next);
      } catch (const CalibrationError&) {
        break;
      }
      std::vector<Picks> next_picks = sample_picks(next_latent);
      const auto next_obs = observed_jsd(next_picks);
      double next_dev = 0.0;
      for (std::size_t k = 0; k < kNumGroups; ++k) {
        next_dev = std::max(next_dev, std::abs(next_obs[k] - config.jsd_targets[k]));
      }
      if (next_dev >= dev) break;
      latent_targets = next;
      latent = std::move(next_latent);
      picks = std::move(next_picks);
    }
  }

  const std::vector<std::string> names = OriginalTopicNames(config.topic_count_original);
  const std::vector<std::string> novel_names = NovelTopicNames(config.topic_count_novel);

  Cohort out;
  Dataset& data = out.data;
  const int twidth = std::max<int>(4, static_cast<int>(std::to_string(names.size()).size()));
  enhancer::StubEnhancer embedder(enhancer::StubOptions{.embedding_dim = config.embedding_dim});
  for (std::size_t t = 0; t < names.size(); ++t) {
    std::string id = std::to_string(t + 1);
    id = "t" + std::string(static_cast<std::size_t>(twidth) - id.size(), '0') + id;
    TopicNode node{std::move(id), names[t], TopicOrigin::kOriginal, {}};
    if (config.with_embeddings) node.embedding = embedder.EmbedTopic(names[t]);
    data.topics.push_back(std::move(node));
  }

  GroundTruth& truth = out.truth;
  truth.novel_names = novel_names;
  Rng snippet_rng = Rng::Stream(config.seed, kTagSnippets);
  for (std::size_t i = 0; i < n; ++i) {
    const std::vector<std::size_t>& given = picks[i].given;
    const std::vector<std::size_t>& hidden = picks[i].hidden;
    const std::vector<std::size_t>& novel = picks[i].novel;
    for (std::size_t t : given) data.ut_links.push_back({users[i].id, data.topics[t].id, EdgeOrigin::kGiven});

    // Mentions: every hidden and novel interest, plus about half the given ones.
    std::vector<std::string> mentions;
    for (std::size_t t : hidden) mentions.push_back(names[t]);
    for (std::size_t t : novel) mentions.push_back(novel_names[t]);
    for (std::size_t t : given) {
      if (snippet_rng.Bernoulli(0.5)) mentions.push_back(names[t]);
    }
    snippet_rng.Shuffle(mentions);
    const std::size_t want = std::clamp<std::size_t>(
        config.min_snippets + static_cast<std::size_t>(snippet_rng.Poisson(4.0)), config.min_snippets,
        config.max_snippets);
    std::size_t next = 0;
    auto next_topic = [&]() -> std::string {
      if (next < mentions.size()) return mentions[next++];
      return names[given[snippet_rng.Index(given.size())]];
    };
    std::vector<std::string>& content = users[i].content;
    while (content.size() < want || (next < mentions.size() && content.size() < config.max_snippets * 2)) {
      const Template& tpl = kTemplates[snippet_rng.Index(std::size(kTemplates))];
      std::string text(tpl.text);
      const std::string a = next_topic();
      text.replace(text.find("{a}"), 3, a);
      if (tpl.slots == 2) {
        std::string b = next_topic();
        if (b == a) b = names[given[snippet_rng.Index(given.size())]];
        text.replace(text.find("{b}"), 3, b);
      }
      content.push_back(std::move(text));
    }

    truth.user_ids.push_back(users[i].id);
    truth.labels.push_back(users[i].label());
    std::vector<std::string> hn;
    for (std::size_t t : hidden) hn.push_back(names[t]);
    truth.hidden_topics.push_back(std::move(hn));
    std::vector<std::string> nn;
    for (std::size_t t : novel) nn.push_back(novel_names[t]);
    truth.novel_topics.push_back(std::move(nn));
  }
  truth.latent = std::move(latent);
  data.users = std::move(users);
  return out;
}

void SaveGroundTruth(const Cohort& cohort, const std::filesystem::path& dir) {
  const GroundTruth& gt = cohort.truth;
  std::ostringstream users;
  CsvWriter w(users);
  w.Row({"user_id", "score", "label", "binary_label", "hidden_topics", "novel_topics"});
  for (std::size_t i = 0; i < gt.user_ids.size(); ++i) {
    const UserRecord& u = cohort.data.users[i];
    w.Row({u.id, std::to_string(u.score), std::string(LabelName(gt.labels[i])),
           u.binary_label() == BinaryLabel::kPositive ? "1" : "0", Join(gt.hidden_topics[i], ";"),
           Join(gt.novel_topics[i], ";")});
  }
  WriteTextFile(dir / "ground_truth.csv", users.str());

  std::ostringstream topics;
  CsvWriter tw(topics);
  tw.Row({"kind", "name", "p_non", "p_sfva", "p_potential"});
  const std::vector<std::string> names = OriginalTopicNames(gt.latent.original[0].size());
  for (std::size_t t = 0; t < names.size(); ++t) {
    tw.Row({"original", names[t], FormatDouble(gt.latent.original[0][t]),
            FormatDouble(gt.latent.original[1][t]), FormatDouble(gt.latent.original[2][t])});
  }
  for (std::size_t t = 0; t < gt.novel_names.size(); ++t) {
    tw.Row({"novel", gt.novel_names[t], FormatDouble(gt.latent.novel[0][t]),
            FormatDouble(gt.latent.novel[1][t]), FormatDouble(gt.latent.novel[2][t])});
  }
  WriteTextFile(dir / "ground_truth_topics.csv", topics.str());
}

}  // namespace earlysd::synth
