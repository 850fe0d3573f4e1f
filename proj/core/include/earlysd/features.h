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

#ifndef EARLYSD_FEATURES_H_
#define EARLYSD_FEATURES_H_

#include <span>
#include <string>
#include <vector>

#include "earlysd/graph.h"
#include "earlysd/nn.h"

namespace earlysd {

enum class FeatureScaling {
  kRaw,
  // log1p on heavy-tailed count columns, then per-column z-score over the
  // given users (constant columns become 0).
  kStandardized,
};

// Rows follow `users`, columns the enabled modality blocks in P, C, T, S, I
// order. Throws ConfigError on an empty mask.
nn::Matrix BuildFeatureMatrix(std::span<const UserRecord> users, const ModalityMask& mask,
                              FeatureScaling scaling);

std::vector<std::string> FeatureColumns(const ModalityMask& mask);

bool IsCountColumn(std::string_view column);

// Topic embeddings stacked row-wise (num_topics x d_t).
nn::Matrix TopicEmbeddingMatrix(const HeteroSocialGraph& g);

}  // namespace earlysd

#endif  // EARLYSD_FEATURES_H_
