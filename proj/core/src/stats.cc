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

#include "earlysd/stats.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include <fmt/format.h>

#include "earlysd/error.h"

namespace earlysd::stats {
namespace {

constexpr double kSumTolerance = 1e-9;

// Modified Lentz evaluation of the incomplete beta continued fraction.
double BetaContinuedFraction(double a, double b, double x) {
  constexpr int kMaxIter = 10000;
  constexpr double kEps = 1e-16;
  constexpr double kTiny = 1e-300;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) return h;
  }
  throw NumericError(fmt::format(
      "incomplete beta continued fraction did not converge (a={}, b={}, x={})", a, b, x));
}

double Mean(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

}  // namespace

Distribution::Distribution(std::vector<double> probs) : probs_(std::move(probs)) {
  if (probs_.empty()) throw DomainError("distribution must be nonempty");
  double total = 0.0;
  for (double p : probs_) {
    if (!std::isfinite(p) || p < 0.0) {
      throw DomainError("distribution entries must be finite and nonnegative");
    }
    total += p;
  }
  if (std::abs(total - 1.0) > kSumTolerance) {
    throw DomainError(fmt::format("distribution sums to {} (expected 1)", total));
  }
}

Distribution Distribution::FromCounts(std::span<const double> counts) {
  const double total = std::accumulate(counts.begin(), counts.end(), 0.0);
  if (!(total > 0.0)) throw DomainError("cannot normalize counts with zero total");
  std::vector<double> p(counts.begin(), counts.end());
  for (double& x : p) x /= total;
  return Distribution(std::move(p));
}

Divergence KlDivergence(const Distribution& p, const Distribution& q) {
  if (p.size() != q.size()) {
    throw DomainError(fmt::format("KL divergence length mismatch: {} vs {}", p.size(), q.size()));
  }
  double bits = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] == 0.0) continue;
    if (q[i] == 0.0) return Divergence::Infinite();
    bits += p[i] * std::log2(p[i] / q[i]);
  }
  return Divergence::Finite(bits);
}

double Jsd(const Distribution& p, const Distribution& q) {
  if (p.size() != q.size()) {
    throw DomainError(fmt::format("JSD length mismatch: {} vs {}", p.size(), q.size()));
  }
  double total = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double a = p[i];
    const double b = q[i];
    const double s = a + b;
    if (s == 0.0) continue;
    const double ta = a > 0.0 ? a * std::log2(2.0 * a / s) : 0.0;
    const double tb = b > 0.0 ? b * std::log2(2.0 * b / s) : 0.0;
    total += 0.5 * (ta + tb);
  }
  return std::clamp(total, 0.0, 1.0);
}

double RegularizedIncompleteBeta(double x, double a, double b) {
  if (!(a > 0.0) || !(b > 0.0)) throw DomainError("incomplete beta needs a, b > 0");
  if (!(x >= 0.0 && x <= 1.0)) throw DomainError("incomplete beta needs x in [0, 1]");
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                           a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return front * BetaContinuedFraction(a, b, x) / a;
  }
  return 1.0 - front * BetaContinuedFraction(b, a, 1.0 - x) / b;
}

double FCdf(double f, double df1, double df2) {
  if (!(df1 > 0.0) || !(df2 > 0.0)) throw DomainError("F distribution needs positive df");
  if (f <= 0.0) return 0.0;
  if (std::isinf(f)) return 1.0;
  return RegularizedIncompleteBeta(df1 * f / (df1 * f + df2), df1 / 2.0, df2 / 2.0);
}

double FSurvival(double f, double df1, double df2) {
  if (!(df1 > 0.0) || !(df2 > 0.0)) throw DomainError("F distribution needs positive df");
  if (f <= 0.0) return 1.0;
  if (std::isinf(f)) return 0.0;
  return RegularizedIncompleteBeta(df2 / (df2 + df1 * f), df2 / 2.0, df1 / 2.0);
}

AnovaResult AnovaOneWay(std::span<const std::vector<double>> groups) {
  if (groups.size() < 2) throw DomainError("ANOVA needs at least two groups");
  std::size_t n = 0;
  double grand = 0.0;
  for (const auto& g : groups) {
    if (g.size() < 2) throw DomainError("ANOVA needs at least two samples per group");
    for (double x : g) {
      if (!std::isfinite(x)) throw DomainError("ANOVA input must be finite");
      grand += x;
    }
    n += g.size();
  }
  grand /= static_cast<double>(n);

  double ss_between = 0.0;
  double ss_within = 0.0;
  for (const auto& g : groups) {
    const double m = Mean(g);
    ss_between += static_cast<double>(g.size()) * (m - grand) * (m - grand);
    for (double x : g) ss_within += (x - m) * (x - m);
  }

  AnovaResult r;
  r.df_between = static_cast<int>(groups.size()) - 1;
  r.df_within = static_cast<int>(n - groups.size());
  const double ms_between = ss_between / r.df_between;
  const double ms_within = ss_within / r.df_within;
  if (ms_within == 0.0) {
    r.f_stat = ms_between == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  } else {
    r.f_stat = ms_between / ms_within;
  }
  r.p_value = FSurvival(r.f_stat, r.df_between, r.df_within);
  return r;
}

std::vector<std::string> DefaultSignificanceFeatures() {
  return {"age", "sias", "big5_n", "social_searches", "comment_inter", "bidir_ratio"};
}

std::vector<FeatureSignificance> FeatureSignificanceReport(
    std::span<const UserRecord> users, std::span<const std::string> features) {
  std::vector<FeatureSignificance> out;
  for (const std::string& name : features) {
    std::array<std::vector<double>, 3> by_label;
    double sum_pos = 0.0, sum_neg = 0.0;
    std::size_t n_pos = 0, n_neg = 0;
    for (const UserRecord& u : users) {
      const double x = u.feature(name);
      by_label[static_cast<std::size_t>(u.label())].push_back(x);
      if (u.binary_label() == BinaryLabel::kPositive) {
        sum_pos += x;
        ++n_pos;
      } else {
        sum_neg += x;
        ++n_neg;
      }
    }
    std::vector<std::vector<double>> groups;
    for (auto& g : by_label) {
      if (g.size() >= 2) groups.push_back(std::move(g));
    }
    if (groups.size() < 2) {
      throw DomainError("significance report needs at least two label groups");
    }
    FeatureSignificance fs;
    fs.feature = name;
    fs.anova = AnovaOneWay(groups);
    fs.mean_positive = n_pos ? sum_pos / n_pos : 0.0;
    fs.mean_negative = n_neg ? sum_neg / n_neg : 0.0;
    fs.direction = fs.mean_positive > fs.mean_negative   ? 1
                   : fs.mean_positive < fs.mean_negative ? -1
                                                         : 0;
    out.push_back(std::move(fs));
  }
  return out;
}

std::vector<GroupDivergence> GroupTopicDivergence(const HeteroSocialGraph& g) {
  std::array<std::vector<double>, 3> counts;
  for (auto& c : counts) c.assign(g.num_topics(), 0.0);
  std::array<double, 3> totals{};
  for (const TopicEdge& e : g.ut_edges()) {
    const auto label = static_cast<std::size_t>(g.users()[e.user].label());
    counts[label][e.topic] += 1.0;
    totals[label] += 1.0;
  }
  // Table order: (Non, SFVA), (Non, Potential), (SFVA, Potential).
  const std::array<std::pair<SfvaLabel, SfvaLabel>, 3> pairs = {{
      {SfvaLabel::kNonSfva, SfvaLabel::kSfva},
      {SfvaLabel::kNonSfva, SfvaLabel::kPotentialSfva},
      {SfvaLabel::kSfva, SfvaLabel::kPotentialSfva},
  }};
  std::vector<GroupDivergence> out;
  for (const auto& [a, b] : pairs) {
    const auto ia = static_cast<std::size_t>(a);
    const auto ib = static_cast<std::size_t>(b);
    if (totals[ia] == 0.0 || totals[ib] == 0.0) continue;
    out.push_back({a, b,
                   Jsd(Distribution::FromCounts(counts[ia]),
                       Distribution::FromCounts(counts[ib]))});
  }
  return out;
}

nlohmann::json AnalysisReportJson(const std::vector<FeatureSignificance>& features,
                                  const std::vector<GroupDivergence>& divergence,
                                  const std::vector<std::size_t>& group_sizes) {
  nlohmann::json j;
  j["anova"] = nlohmann::json::array();
  for (const auto& f : features) {
    j["anova"].push_back({
        {"feature", f.feature},
        {"f_stat", std::isinf(f.anova.f_stat) ? nlohmann::json("inf") : nlohmann::json(f.anova.f_stat)},
        {"df_between", f.anova.df_between},
        {"df_within", f.anova.df_within},
        {"p_value", f.anova.p_value},
        {"mean_positive", f.mean_positive},
        {"mean_negative", f.mean_negative},
        {"direction", f.direction},
        {"significant_0.05", f.anova.p_value < 0.05},
        {"significant_0.01", f.anova.p_value < 0.01},
    });
  }
  j["jsd"] = nlohmann::json::array();
  for (const auto& d : divergence) {
    j["jsd"].push_back({{"a", LabelName(d.a)}, {"b", LabelName(d.b)}, {"jsd", d.jsd}});
  }
  j["groups"] = nlohmann::json::object();
  for (std::size_t i = 0; i < group_sizes.size() && i < 3; ++i) {
    j["groups"][std::string(LabelName(static_cast<SfvaLabel>(i)))] = group_sizes[i];
  }
  j["notes"] = {"ANOVA across the three score groups; direction from positive-vs-negative means.",
                "JSD in bits over per-group topic frequency distributions."};
  return j;
}

std::string AnalysisReportMarkdown(const std::vector<FeatureSignificance>& features,
                                   const std::vector<GroupDivergence>& divergence) {
  std::ostringstream os;
  os << "## Feature significance (one-way ANOVA)\n\n"
     << "| Feature | F | df | p-value | Direction (pos vs neg) |\n"
     << "|---|---|---|---|---|\n";
  for (const auto& f : features) {
    const char* mark = f.anova.p_value < 0.01 ? "**" : f.anova.p_value < 0.05 ? "*" : "";
    os << fmt::format("| {} | {:.4f} | ({}, {}) | {:.4g}{} | {} |\n", f.feature,
                      f.anova.f_stat, f.anova.df_between, f.anova.df_within,
                      f.anova.p_value, mark,
                      f.direction > 0 ? "higher" : f.direction < 0 ? "lower" : "equal");
  }
  os << "\n\\* p < 0.05, \\*\\* p < 0.01\n\n## Topic divergence (JSD, bits)\n\n"
     << "| Groups | JSD |\n|---|---|\n";
  for (const auto& d : divergence) {
    os << fmt::format("| {} & {} | {:.4f} |\n", LabelName(d.a), LabelName(d.b), d.jsd);
  }
  return os.str();
}

}  // namespace earlysd::stats
