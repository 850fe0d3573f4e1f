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

#ifndef EARLYSD_GRAPH_H_
#define EARLYSD_GRAPH_H_

#include <array>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace earlysd {

enum class SfvaLabel { kNonSfva = 0, kPotentialSfva = 1, kSfva = 2 };
enum class BinaryLabel { kNegative = 0, kPositive = 1 };

inline constexpr int kMinScore = 0;
inline constexpr int kMaxScore = 120;

// Non-SFVA below 58, Potential 58..63, SFVA from 64. Throws DomainError
// outside [kMinScore, kMaxScore].
SfvaLabel LabelFromScore(int score);
BinaryLabel ToBinary(SfvaLabel label);
std::string_view LabelName(SfvaLabel label);

// Feature modalities: personal, connection, textual, search, interaction.
enum class Modality { kPersonal = 0, kConnection, kTextual, kSearch, kInteraction };
inline constexpr std::size_t kNumModalities = 5;
inline constexpr std::array<Modality, kNumModalities> kAllModalities = {
    Modality::kPersonal, Modality::kConnection, Modality::kTextual,
    Modality::kSearch, Modality::kInteraction};

char ModalityLetter(Modality m);
std::string_view ModalityName(Modality m);
// Column names of one modality block, in storage order.
std::span<const std::string_view> ModalityColumns(Modality m);

// Subset of modalities, written as letters ("PCTSI", "P", "CTSI").
class ModalityMask {
 public:
  ModalityMask() = default;
  static ModalityMask All();
  // Throws ConfigError on unknown letters or an empty mask.
  static ModalityMask Parse(std::string_view letters);

  bool contains(Modality m) const { return bits_[static_cast<std::size_t>(m)]; }
  void set(Modality m, bool on = true) { bits_[static_cast<std::size_t>(m)] = on; }
  bool empty() const;
  std::string ToString() const;
  bool operator==(const ModalityMask&) const = default;

 private:
  std::array<bool, kNumModalities> bits_{};
};

struct UserRecord {
  std::string id;
  int score = 0;
  std::array<std::vector<double>, kNumModalities> features;
  std::vector<std::string> content;

  SfvaLabel label() const { return LabelFromScore(score); }
  BinaryLabel binary_label() const { return ToBinary(label()); }

  std::vector<double>& block(Modality m) {
    return features[static_cast<std::size_t>(m)];
  }
  const std::vector<double>& block(Modality m) const {
    return features[static_cast<std::size_t>(m)];
  }
  // Named feature lookup across all blocks; throws LookupError.
  double feature(std::string_view column) const;
  double& feature(std::string_view column);

  bool operator==(const UserRecord&) const = default;
};

// Zero-filled record with every block sized to its column list.
UserRecord MakeUser(std::string id, int score);

enum class TopicOrigin { kOriginal, kExpanded };
enum class EdgeOrigin { kGiven, kAugmented };
std::string_view OriginName(TopicOrigin o);
std::string_view OriginName(EdgeOrigin o);

struct TopicNode {
  std::string id;
  std::string name;
  TopicOrigin origin = TopicOrigin::kOriginal;
  std::vector<double> embedding;

  bool operator==(const TopicNode&) const = default;
};

// Input-side edge descriptions, keyed by node id.
struct UserLink {
  std::string u;
  std::string v;
  double weight = 1.0;
  EdgeOrigin origin = EdgeOrigin::kGiven;
  // Similarity components behind an augmented edge's weight; NaN otherwise.
  double sim_f = std::numeric_limits<double>::quiet_NaN();
  double sim_t = std::numeric_limits<double>::quiet_NaN();
};

struct TopicLink {
  std::string user;
  std::string topic;
  EdgeOrigin origin = EdgeOrigin::kGiven;
};

// Stored edges reference users/topics by index into the graph's sorted
// node lists.
struct UserEdge {
  std::size_t u = 0;  // u < v
  std::size_t v = 0;
  double weight = 1.0;
  EdgeOrigin origin = EdgeOrigin::kGiven;
  double sim_f = std::numeric_limits<double>::quiet_NaN();
  double sim_t = std::numeric_limits<double>::quiet_NaN();
};

struct TopicEdge {
  std::size_t user = 0;
  std::size_t topic = 0;
  EdgeOrigin origin = EdgeOrigin::kGiven;
};

enum class Relation { kUserUser, kUserTopic };

struct Neighbor {
  std::string id;
  double weight = 1.0;
  bool operator==(const Neighbor&) const = default;
};

// Heterogeneous user/topic graph. Immutable once built: users and topics are
// sorted by id, u-u edges are undirected and stored once with u < v, and all
// adjacency lists are in ascending index (hence id) order.
class HeteroSocialGraph {
 public:
  // Validates and canonicalizes. Throws ValidationError listing every
  // duplicate node id, dangling endpoint, self-loop, out-of-range weight or
  // inconsistent feature/embedding dimension.
  static HeteroSocialGraph Build(std::vector<UserRecord> users,
                                 std::vector<TopicNode> topics,
                                 std::span<const UserLink> uu_links,
                                 std::span<const TopicLink> ut_links);

  HeteroSocialGraph() = default;

  const std::vector<UserRecord>& users() const { return users_; }
  const std::vector<TopicNode>& topics() const { return topics_; }
  const std::vector<UserEdge>& uu_edges() const { return uu_edges_; }
  const std::vector<TopicEdge>& ut_edges() const { return ut_edges_; }

  std::size_t num_users() const { return users_.size(); }
  std::size_t num_topics() const { return topics_.size(); }
  // F: total feature dimension summed over all modality blocks.
  std::size_t feature_dim() const;
  std::size_t block_dim(Modality m) const { return block_dims_[static_cast<std::size_t>(m)]; }
  // d_t, or 0 when topics carry no embeddings.
  std::size_t topic_embedding_dim() const { return embedding_dim_; }

  std::optional<std::size_t> user_index(std::string_view id) const;
  std::optional<std::size_t> topic_index(std::string_view id) const;
  std::optional<std::size_t> topic_index_by_name(std::string_view name) const;

  // a_uv = 1 iff an u-u edge exists; symmetric. Throws LookupError.
  bool Adjacent(std::string_view u, std::string_view v) const;

  // One-hop neighbors of a node under a relation. For kUserUser the node must
  // be a user; for kUserTopic it may be a user (returns topics) or a topic
  // (returns users). Throws LookupError for unknown nodes.
  std::vector<Neighbor> Neighbors(std::string_view node, Relation relation) const;

  // Index-level adjacency used by the numeric code. Each user-user entry is
  // (neighbor index, edge index into uu_edges()).
  struct UserAdj {
    std::size_t neighbor;
    std::size_t edge;
  };
  std::span<const UserAdj> user_neighbors(std::size_t u) const {
    return user_adj_[u];
  }
  std::span<const std::size_t> user_topics(std::size_t u) const {
    return user_topics_[u];
  }
  std::span<const std::size_t> topic_users(std::size_t t) const {
    return topic_users_[t];
  }
  bool HasTopicEdge(std::size_t user, std::size_t topic) const;

  // Links in input form, for rebuilding a refined graph.
  std::vector<UserLink> UserLinks() const;
  std::vector<TopicLink> TopicLinks() const;

  // New graph with the extra nodes and edges appended. Existing edges keep
  // their origin and weight; duplicates of existing edges are ignored.
  HeteroSocialGraph WithAdditions(std::vector<TopicNode> new_topics,
                                  std::span<const UserLink> new_uu,
                                  std::span<const TopicLink> new_ut) const;

 private:
  std::vector<UserRecord> users_;
  std::vector<TopicNode> topics_;
  std::vector<UserEdge> uu_edges_;
  std::vector<TopicEdge> ut_edges_;
  std::array<std::size_t, kNumModalities> block_dims_{};
  std::size_t embedding_dim_ = 0;

  std::unordered_map<std::string, std::size_t> user_by_id_;
  std::unordered_map<std::string, std::size_t> topic_by_id_;
  std::unordered_map<std::string, std::size_t> topic_by_name_;
  std::vector<std::vector<UserAdj>> user_adj_;
  std::vector<std::vector<std::size_t>> user_topics_;
  std::vector<std::vector<std::size_t>> topic_users_;
};

}  // namespace earlysd

#endif  // EARLYSD_GRAPH_H_
