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

#ifndef EARLYSD_STATS_H_
#define EARLYSD_STATS_H_

#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "earlysd/graph.h"

namespace earlysd::stats {

// Probability vector: finite, nonnegative, summing to 1 within 1e-9.
class Distribution {
 public:
  // Throws DomainError when the invariants do not hold.
  explicit Distribution(std::vector<double> probs);
  // Normalizes nonnegative counts; throws DomainError on a zero total.
  static Distribution FromCounts(std::span<const double> counts);

  std::span<const double> probs() const { return probs_; }
  std::size_t size() const { return probs_.size(); }
  double operator[](std::size_t i) const { return probs_[i]; }

 private:
  std::vector<double> probs_;
};

// Result of a KL divergence: finite bits, or the infinite variant when P puts
// mass where Q has none.
class Divergence {
 public:
  static Divergence Finite(double bits) { return Divergence(bits); }
  static Divergence Infinite() { return Divergence(HUGE_VAL); }

  bool is_infinite() const { return std::isinf(bits_); }
  double bits() const { return bits_; }

 private:
  explicit Divergence(double b) : bits_(b) {}
  double bits_;
};

// D_KL(P || Q) in bits, with 0 log(0/q) = 0. Throws DomainError on a length
// mismatch.
Divergence KlDivergence(const Distribution& p, const Distribution& q);

// Jensen-Shannon divergence in bits, in [0, 1]. Exactly symmetric: the
// per-index terms are summed in index order and each term is symmetric in
// its two arguments.
double Jsd(const Distribution& p, const Distribution& q);

// Regularized incomplete beta I_x(a, b) by continued fraction, absolute
// accuracy ~1e-14. Throws DomainError for x outside [0, 1] or a, b <= 0.
double RegularizedIncompleteBeta(double x, double a, double b);

// F distribution CDF and upper tail.
double FCdf(double f, double df1, double df2);
double FSurvival(double f, double df1, double df2);

struct AnovaResult {
  double f_stat = 0.0;
  int df_between = 0;
  int df_within = 0;
  double p_value = 1.0;
};

// Classical one-way ANOVA. Needs >= 2 groups of >= 2 samples (DomainError
// otherwise). All-equal input gives F = 0, p = 1; zero within-group variance
// with distinct group means gives F = +inf, p = 0.
AnovaResult AnovaOneWay(std::span<const std::vector<double>> groups);

struct FeatureSignificance {
  std::string feature;
  AnovaResult anova;
  double mean_positive = 0.0;
  double mean_negative = 0.0;
  // Sign of mean_positive - mean_negative.
  int direction = 0;
};

// The features called out by the preliminary study: age, social anxiety,
// neuroticism, social searching, commenting, bidirectional friendship.
std::vector<std::string> DefaultSignificanceFeatures();

// One three-group ANOVA per feature (groups with fewer than two members are
// dropped; fewer than two usable groups is a DomainError).
std::vector<FeatureSignificance> FeatureSignificanceReport(
    std::span<const UserRecord> users, std::span<const std::string> features);

struct GroupDivergence {
  SfvaLabel a;
  SfvaLabel b;
  double jsd = 0.0;
};

// Per-group topic frequency distributions (counts of u-t edges per topic)
// and their pairwise JSD. Groups without any u-t edge are skipped.
std::vector<GroupDivergence> GroupTopicDivergence(const HeteroSocialGraph& g);

nlohmann::json AnalysisReportJson(const std::vector<FeatureSignificance>& features,
                                  const std::vector<GroupDivergence>& divergence,
                                  const std::vector<std::size_t>& group_sizes);
std::string AnalysisReportMarkdown(const std::vector<FeatureSignificance>& features,
                                   const std::vector<GroupDivergence>& divergence);

}  // namespace earlysd::stats

#endif  // EARLYSD_STATS_H_
