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

#ifndef EARLYSD_DATASET_H_
#define EARLYSD_DATASET_H_

#include <array>
#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "earlysd/graph.h"

namespace earlysd {

// A dataset directory:
//   users.csv            one row per user, columns as in ModalityColumns()
//   topics.csv           id,name,origin
//   ut_edges.csv         user_id,topic_id[,provenance]
//   uu_edges.csv         optional: u,v,weight,provenance,sim_f,sim_t
//   content.jsonl        {"user": id, "texts": [...]} per line
//   topic_embeddings.csv optional: id,e0..e{d-1}
//   manifest.toml        modality dimensions, d_t, counts
struct Dataset {
  std::vector<UserRecord> users;
  std::vector<TopicNode> topics;
  std::vector<UserLink> uu_links;
  std::vector<TopicLink> ut_links;

  HeteroSocialGraph ToGraph() const {
    return HeteroSocialGraph::Build(users, topics, uu_links, ut_links);
  }
  static Dataset FromGraph(const HeteroSocialGraph& g);
};

struct Manifest {
  std::array<std::size_t, kNumModalities> modality_dims{};
  std::size_t topic_embedding_dim = 0;
  std::size_t num_users = 0;
  std::size_t num_topics = 0;
  std::size_t num_ut_edges = 0;
  std::size_t num_uu_edges = 0;
};

// Writes every file of the layout. Doubles are written in shortest
// round-trip form, so Load(Save(d)) reproduces bit-equal records.
void SaveDataset(const Dataset& data, const std::filesystem::path& dir);

// Throws IoError for missing files and ParseError (with line number) for
// malformed rows, unknown ids and out-of-range values.
Dataset LoadDataset(const std::filesystem::path& dir);

Manifest ReadManifest(const std::filesystem::path& dir);

// Users' feature column header, in file order (after "id,score").
std::vector<std::string> UserFeatureColumns();

}  // namespace earlysd

#endif  // EARLYSD_DATASET_H_
