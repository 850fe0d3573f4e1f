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

#ifndef EARLYSD_METRICS_H_
#define EARLYSD_METRICS_H_

#include <cstddef>
#include <span>

#include <nlohmann/json.hpp>

namespace earlysd {

struct ConfusionCounts {
  std::size_t tp = 0;
  std::size_t tn = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;

  std::size_t total() const { return tp + tn + fp + fn; }
  bool operator==(const ConfusionCounts&) const = default;
};

// Binary metrics for the positive class. Any 0/0 ratio is defined as 0.
// Macro variants average the positive- and negative-class values.
struct MetricsReport {
  double acc = 0.0;
  double pre = 0.0;
  double rec = 0.0;
  double f1 = 0.0;
  double macro_pre = 0.0;
  double macro_rec = 0.0;
  double macro_f1 = 0.0;
  ConfusionCounts counts;

  // Throws DomainError on an empty confusion matrix.
  static MetricsReport FromCounts(const ConfusionCounts& c);
  bool operator==(const MetricsReport&) const = default;
};

// Labels and predictions are 0/1 with 1 the positive class. Throws
// DomainError when empty or of different lengths.
ConfusionCounts CountConfusion(std::span<const int> truth, std::span<const int> predicted);
MetricsReport Evaluate(std::span<const int> truth, std::span<const int> predicted);

nlohmann::json ToJson(const MetricsReport& m);

}  // namespace earlysd

#endif  // EARLYSD_METRICS_H_
