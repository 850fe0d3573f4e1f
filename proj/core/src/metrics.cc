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

#include "earlysd/metrics.h"

#include "earlysd/error.h"

namespace earlysd {
namespace {

double Ratio(double num, double den) { return den == 0.0 ? 0.0 : num / den; }

double F1(double p, double r) { return p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r); }

}  // namespace

MetricsReport MetricsReport::FromCounts(const ConfusionCounts& c) {
  if (c.total() == 0) throw DomainError("metrics of an empty evaluation set");
  const auto tp = static_cast<double>(c.tp);
  const auto tn = static_cast<double>(c.tn);
  const auto fp = static_cast<double>(c.fp);
  const auto fn = static_cast<double>(c.fn);
  MetricsReport m;
  m.counts = c;
  m.acc = (tp + tn) / (tp + tn + fp + fn);
  m.pre = Ratio(tp, tp + fp);
  m.rec = Ratio(tp, tp + fn);
  m.f1 = F1(m.pre, m.rec);
  const double npre = Ratio(tn, tn + fn);
  const double nrec = Ratio(tn, tn + fp);
  m.macro_pre = 0.5 * (m.pre + npre);
  m.macro_rec = 0.5 * (m.rec + nrec);
  m.macro_f1 = 0.5 * (m.f1 + F1(npre, nrec));
  return m;
}

ConfusionCounts CountConfusion(std::span<const int> truth, std::span<const int> predicted) {
  if (truth.size() != predicted.size()) throw DomainError("label and prediction counts differ");
  if (truth.empty()) throw DomainError("metrics of an empty evaluation set");
  ConfusionCounts c;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const bool y = truth[i] != 0;
    const bool p = predicted[i] != 0;
    if (y && p) ++c.tp;
    else if (!y && !p) ++c.tn;
    else if (p) ++c.fp;
    else ++c.fn;
  }
  return c;
}

MetricsReport Evaluate(std::span<const int> truth, std::span<const int> predicted) {
  return MetricsReport::FromCounts(CountConfusion(truth, predicted));
}

nlohmann::json ToJson(const MetricsReport& m) {
  return {{"acc", m.acc},
          {"pre", m.pre},
          {"rec", m.rec},
          {"f1", m.f1},
          {"macro_pre", m.macro_pre},
          {"macro_rec", m.macro_rec},
          {"macro_f1", m.macro_f1},
          {"tp", m.counts.tp},
          {"tn", m.counts.tn},
          {"fp", m.counts.fp},
          {"fn", m.counts.fn}};
}

}  // namespace earlysd
