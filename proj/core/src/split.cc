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

#include "earlysd/split.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "earlysd/csv.h"
#include "earlysd/error.h"
#include "earlysd/rng.h"

namespace earlysd {
namespace {

// Integer apportionment of `total` by `shares` (largest remainder, ties to
// the earlier index).
std::array<std::size_t, 3> Apportion(std::size_t total, const std::array<double, 3>& shares) {
  std::array<std::size_t, 3> out{};
  std::array<double, 3> frac{};
  std::size_t used = 0;
  for (std::size_t k = 0; k < 3; ++k) {
    const double q = static_cast<double>(total) * shares[k];
    out[k] = static_cast<std::size_t>(std::floor(q + 1e-9));
    frac[k] = q - static_cast<double>(out[k]);
    used += out[k];
  }
  std::array<std::size_t, 3> order = {0, 1, 2};
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return frac[a] > frac[b] + 1e-12; });
  for (std::size_t i = 0; used < total; ++i, ++used) ++out[order[i % 3]];
  return out;
}

}  // namespace

DatasetSplit StratifiedSplit(std::span<const UserRecord> users,
                             const SplitRatios& ratios, std::uint64_t seed) {
  const std::array<double, 3> r = {ratios.train, ratios.val, ratios.test};
  for (double x : r) {
    if (!(x > 0.0)) throw DomainError("split ratios must be positive");
  }
  if (std::abs(r[0] + r[1] + r[2] - 1.0) > 1e-9) {
    throw DomainError("split ratios must sum to 1");
  }

  std::vector<std::size_t> pos;
  std::vector<std::size_t> neg;
  // Work in id order so the result does not depend on input order.
  std::vector<std::size_t> order(users.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return users[a].id < users[b].id; });
  for (std::size_t i : order) {
    (users[i].binary_label() == BinaryLabel::kPositive ? pos : neg).push_back(i);
  }
  if (pos.size() < 3 || neg.size() < 3) {
    throw DomainError("stratified split infeasible: a class has " +
                      std::to_string(std::min(pos.size(), neg.size())) +
                      " members for 3 splits");
  }

  const std::size_t n = users.size();
  const std::array<std::size_t, 3> sizes = Apportion(n, r);
  std::array<double, 3> pos_share{};
  for (std::size_t k = 0; k < 3; ++k) {
    pos_share[k] = static_cast<double>(sizes[k]) / static_cast<double>(n);
  }
  std::array<std::size_t, 3> pos_count = Apportion(pos.size(), pos_share);
  for (std::size_t k = 0; k < 3; ++k) {
    if (pos_count[k] > sizes[k] || sizes[k] - pos_count[k] > neg.size()) {
      throw DomainError("stratified split infeasible for the requested ratios");
    }
  }

  Rng rng = Rng::Stream(seed, 0x5b117);
  rng.Shuffle(pos);
  rng.Shuffle(neg);

  DatasetSplit split;
  split.seed = seed;
  std::array<std::vector<std::string>*, 3> dst = {&split.train, &split.val, &split.test};
  std::size_t pi = 0;
  std::size_t ni = 0;
  for (std::size_t k = 0; k < 3; ++k) {
    for (std::size_t j = 0; j < pos_count[k]; ++j) dst[k]->push_back(users[pos[pi++]].id);
    for (std::size_t j = 0; j < sizes[k] - pos_count[k]; ++j) {
      dst[k]->push_back(users[neg[ni++]].id);
    }
    std::sort(dst[k]->begin(), dst[k]->end());
  }
  return split;
}

void SaveSplit(const DatasetSplit& split, const std::filesystem::path& path) {
  std::ostringstream os;
  CsvWriter w(os);
  w.Row({"user_id", "split"});
  for (const auto& id : split.train) w.Row({id, "train"});
  for (const auto& id : split.val) w.Row({id, "val"});
  for (const auto& id : split.test) w.Row({id, "test"});
  WriteTextFile(path, os.str());
}

DatasetSplit LoadSplit(const std::filesystem::path& path) {
  CsvReader r(path);
  const std::size_t c_id = r.Column("user_id");
  const std::size_t c_split = r.Column("split");
  DatasetSplit s;
  for (const CsvRow& row : r.rows()) {
    const std::string& which = row.fields[c_split];
    if (which == "train") {
      s.train.push_back(row.fields[c_id]);
    } else if (which == "val") {
      s.val.push_back(row.fields[c_id]);
    } else if (which == "test") {
      s.test.push_back(row.fields[c_id]);
    } else {
      throw ParseError(r.file(), row.line, "unknown split '" + which + "'");
    }
  }
  return s;
}

}  // namespace earlysd
