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

#ifndef EARLYSD_SPLIT_H_
#define EARLYSD_SPLIT_H_

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "earlysd/graph.h"

namespace earlysd {

struct DatasetSplit {
  std::vector<std::string> train;
  std::vector<std::string> val;
  std::vector<std::string> test;
  std::uint64_t seed = 0;

  bool operator==(const DatasetSplit&) const = default;
};

struct SplitRatios {
  double train = 0.7;
  double val = 0.15;
  double test = 0.15;
};

// Stratified by binary label. Split sizes follow the ratios by largest
// remainder; within each split the positive count is the floor or ceiling of
// its proportional share. Deterministic for a fixed seed.
//
// Throws DomainError for non-positive ratios or ratios not summing to 1, and
// when either class has fewer members than there are splits.
DatasetSplit StratifiedSplit(std::span<const UserRecord> users,
                             const SplitRatios& ratios, std::uint64_t seed);

void SaveSplit(const DatasetSplit& split, const std::filesystem::path& path);
DatasetSplit LoadSplit(const std::filesystem::path& path);

}  // namespace earlysd

#endif  // EARLYSD_SPLIT_H_
