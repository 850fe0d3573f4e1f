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

#include "earlysd/features.h"

#include <cmath>

#include "earlysd/error.h"

namespace earlysd {

bool IsCountColumn(std::string_view c) {
  return c == "followers" || c == "following" || c == "posts" || c == "stories" ||
         c == "comments" || c == "searches" || c == "social_searches" || c == "likes" ||
         c == "comment_inter" || c == "story_inter";
}

std::vector<std::string> FeatureColumns(const ModalityMask& mask) {
  std::vector<std::string> cols;
  for (Modality m : kAllModalities) {
    if (!mask.contains(m)) continue;
    for (std::string_view c : ModalityColumns(m)) cols.emplace_back(c);
  }
  return cols;
}

nn::Matrix BuildFeatureMatrix(std::span<const UserRecord> users, const ModalityMask& mask,
                              FeatureScaling scaling) {
  if (mask.empty()) throw ConfigError("feature matrix needs at least one modality");
  const std::vector<std::string> cols = FeatureColumns(mask);
  nn::Matrix x(static_cast<Eigen::Index>(users.size()), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t i = 0; i < users.size(); ++i) {
    Eigen::Index c = 0;
    for (Modality m : kAllModalities) {
      if (!mask.contains(m)) continue;
      const auto& block = users[i].block(m);
      if (block.size() != ModalityColumns(m).size()) {
        throw ShapeError("user '" + users[i].id + "' has a malformed " +
                         std::string(ModalityName(m)) + " block");
      }
      for (double v : block) x(static_cast<Eigen::Index>(i), c++) = v;
    }
  }
  if (scaling == FeatureScaling::kRaw || users.empty()) return x;

  for (Eigen::Index c = 0; c < x.cols(); ++c) {
    if (IsCountColumn(cols[static_cast<std::size_t>(c)])) {
      x.col(c) = x.col(c).array().log1p().matrix();
    }
    const double mean = x.col(c).mean();
    const double var = (x.col(c).array() - mean).square().mean();
    const double sd = std::sqrt(var);
    if (sd < 1e-12) {
      x.col(c).setZero();
    } else {
      x.col(c) = ((x.col(c).array() - mean) / sd).matrix();
    }
  }
  return x;
}

nn::Matrix TopicEmbeddingMatrix(const HeteroSocialGraph& g) {
  const auto d = static_cast<Eigen::Index>(g.topic_embedding_dim());
  nn::Matrix m(static_cast<Eigen::Index>(g.num_topics()), d);
  for (std::size_t t = 0; t < g.num_topics(); ++t) {
    const auto& e = g.topics()[t].embedding;
    for (Eigen::Index k = 0; k < d; ++k) m(static_cast<Eigen::Index>(t), k) = e[static_cast<std::size_t>(k)];
  }
  return m;
}

}  // namespace earlysd
