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

#include "earlysd/graph.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <set>
#include <sstream>
#include <utility>

#include "earlysd/error.h"
#include "earlysd/text.h"

namespace earlysd {
namespace {

constexpr std::string_view kPersonalCols[] = {
    "age",    "gender", "edu",    "platforms", "big5_o",
    "big5_c", "big5_e", "big5_a", "big5_n",    "sias"};
constexpr std::string_view kConnectionCols[] = {"followers", "following",
                                                "bidir_ratio"};
constexpr std::string_view kTextualCols[] = {"posts", "stories", "comments",
                                             "mean_len"};
constexpr std::string_view kSearchCols[] = {"searches", "social_searches",
                                            "friend_ratio"};
constexpr std::string_view kInteractionCols[] = {"likes", "comment_inter",
                                                 "story_inter"};

bool IsRatioColumn(std::string_view c) {
  return c == "bidir_ratio" || c == "friend_ratio";
}

// Collects validation failures so one error can list all offenders.
class Problems {
 public:
  void Add(std::string msg) { items_.push_back(std::move(msg)); }
  void ThrowIfAny() const {
    if (items_.empty()) return;
    std::ostringstream os;
    os << "graph validation failed (" << items_.size() << " problem"
       << (items_.size() == 1 ? "" : "s") << ")";
    const std::size_t shown = std::min<std::size_t>(items_.size(), 20);
    for (std::size_t i = 0; i < shown; ++i) os << "\n  - " << items_[i];
    if (shown < items_.size()) os << "\n  ... " << items_.size() - shown << " more";
    throw ValidationError(os.str());
  }

 private:
  std::vector<std::string> items_;
};

}  // namespace

SfvaLabel LabelFromScore(int score) {
  if (score < kMinScore || score > kMaxScore) {
    throw DomainError("SFVA score " + std::to_string(score) +
                      " outside [0, 120]");
  }
  if (score < 58) return SfvaLabel::kNonSfva;
  if (score <= 63) return SfvaLabel::kPotentialSfva;
  return SfvaLabel::kSfva;
}

BinaryLabel ToBinary(SfvaLabel label) {
  return label == SfvaLabel::kNonSfva ? BinaryLabel::kNegative
                                      : BinaryLabel::kPositive;
}

std::string_view LabelName(SfvaLabel label) {
  switch (label) {
    case SfvaLabel::kNonSfva: return "Non-SFVA";
    case SfvaLabel::kPotentialSfva: return "Potential-SFVA";
    case SfvaLabel::kSfva: return "SFVA";
  }
  return "?";
}

char ModalityLetter(Modality m) {
  static constexpr char kLetters[] = {'P', 'C', 'T', 'S', 'I'};
  return kLetters[static_cast<std::size_t>(m)];
}

std::string_view ModalityName(Modality m) {
  static constexpr std::string_view kNames[] = {
      "personal", "connection", "textual", "search", "interaction"};
  return kNames[static_cast<std::size_t>(m)];
}

std::span<const std::string_view> ModalityColumns(Modality m) {
  switch (m) {
    case Modality::kPersonal: return kPersonalCols;
    case Modality::kConnection: return kConnectionCols;
    case Modality::kTextual: return kTextualCols;
    case Modality::kSearch: return kSearchCols;
    case Modality::kInteraction: return kInteractionCols;
  }
  return {};
}

ModalityMask ModalityMask::All() {
  ModalityMask m;
  m.bits_.fill(true);
  return m;
}

ModalityMask ModalityMask::Parse(std::string_view letters) {
  ModalityMask mask;
  for (char c : letters) {
    if (c == '+' || c == ' ' || c == ',') continue;
    bool found = false;
    for (Modality m : kAllModalities) {
      if (ModalityLetter(m) == std::toupper(static_cast<unsigned char>(c))) {
        mask.set(m);
        found = true;
      }
    }
    if (!found) {
      throw ConfigError(std::string("unknown modality letter '") + c +
                        "' (expected P, C, T, S, I)");
    }
  }
  if (mask.empty()) throw ConfigError("modality mask must enable at least one modality");
  return mask;
}

bool ModalityMask::empty() const {
  return std::none_of(bits_.begin(), bits_.end(), [](bool b) { return b; });
}

std::string ModalityMask::ToString() const {
  std::string s;
  for (Modality m : kAllModalities) {
    if (contains(m)) s.push_back(ModalityLetter(m));
  }
  return s;
}

double UserRecord::feature(std::string_view column) const {
  for (Modality m : kAllModalities) {
    const auto cols = ModalityColumns(m);
    for (std::size_t i = 0; i < cols.size(); ++i) {
      if (cols[i] == column && i < block(m).size()) return block(m)[i];
    }
  }
  throw LookupError("unknown feature column '" + std::string(column) + "'");
}

double& UserRecord::feature(std::string_view column) {
  for (Modality m : kAllModalities) {
    const auto cols = ModalityColumns(m);
    for (std::size_t i = 0; i < cols.size(); ++i) {
      if (cols[i] == column && i < block(m).size()) return block(m)[i];
    }
  }
  throw LookupError("unknown feature column '" + std::string(column) + "'");
}

UserRecord MakeUser(std::string id, int score) {
  UserRecord u;
  u.id = std::move(id);
  u.score = score;
  for (Modality m : kAllModalities) u.block(m).assign(ModalityColumns(m).size(), 0.0);
  return u;
}

std::string_view OriginName(TopicOrigin o) {
  return o == TopicOrigin::kOriginal ? "Original" : "Expanded";
}

std::string_view OriginName(EdgeOrigin o) {
  return o == EdgeOrigin::kGiven ? "Given" : "Augmented";
}

HeteroSocialGraph HeteroSocialGraph::Build(std::vector<UserRecord> users,
                                           std::vector<TopicNode> topics,
                                           std::span<const UserLink> uu_links,
                                           std::span<const TopicLink> ut_links) {
  Problems problems;
  HeteroSocialGraph g;

  std::sort(users.begin(), users.end(),
            [](const UserRecord& a, const UserRecord& b) { return a.id < b.id; });
  std::sort(topics.begin(), topics.end(),
            [](const TopicNode& a, const TopicNode& b) { return a.id < b.id; });

  for (std::size_t i = 0; i < users.size(); ++i) {
    const UserRecord& u = users[i];
    if (u.id.empty()) problems.Add("user with empty id");
    if (i > 0 && users[i - 1].id == u.id) {
      problems.Add("duplicate user id '" + u.id + "'");
    }
    if (u.score < kMinScore || u.score > kMaxScore) {
      problems.Add("user '" + u.id + "' score " + std::to_string(u.score) +
                   " outside [0, 120]");
    }
    for (Modality m : kAllModalities) {
      const auto& block = u.block(m);
      if (i == 0) g.block_dims_[static_cast<std::size_t>(m)] = block.size();
      if (block.size() != g.block_dims_[static_cast<std::size_t>(m)]) {
        problems.Add("user '" + u.id + "' " + std::string(ModalityName(m)) +
                     " block has dimension " + std::to_string(block.size()));
        continue;
      }
      const auto cols = ModalityColumns(m);
      for (std::size_t j = 0; j < block.size(); ++j) {
        const double x = block[j];
        const std::string_view col = j < cols.size() ? cols[j] : "extra";
        if (!std::isfinite(x) || x < 0.0 || (IsRatioColumn(col) && x > 1.0)) {
          problems.Add("user '" + u.id + "' feature " + std::string(col) +
                       " = " + std::to_string(x) + " violates its range");
        }
      }
    }
  }

  for (std::size_t i = 0; i < topics.size(); ++i) {
    const TopicNode& t = topics[i];
    if (t.id.empty()) problems.Add("topic with empty id");
    if (i > 0 && topics[i - 1].id == t.id) {
      problems.Add("duplicate topic id '" + t.id + "'");
    }
    if (CanonicalName(t.name).empty()) {
      problems.Add("topic '" + t.id + "' has an empty name");
    }
    if (i == 0) g.embedding_dim_ = t.embedding.size();
    if (t.embedding.size() != g.embedding_dim_) {
      problems.Add("topic '" + t.id + "' embedding dimension " +
                   std::to_string(t.embedding.size()) + " != " +
                   std::to_string(g.embedding_dim_));
    }
  }
  for (std::size_t i = 0; i < users.size(); ++i) g.user_by_id_.emplace(users[i].id, i);
  for (std::size_t i = 0; i < topics.size(); ++i) {
    g.topic_by_id_.emplace(topics[i].id, i);
    const std::string canon = CanonicalName(topics[i].name);
    if (!g.topic_by_name_.emplace(canon, i).second) {
      problems.Add("duplicate topic name '" + canon + "'");
    }
  }

  // u-u: canonical (min, max) by index, first occurrence wins except that a
  // Given duplicate overrides an Augmented one.
  std::map<std::pair<std::size_t, std::size_t>, UserEdge> uu;
  for (const UserLink& link : uu_links) {
    const auto iu = g.user_by_id_.find(link.u);
    const auto iv = g.user_by_id_.find(link.v);
    if (iu == g.user_by_id_.end() || iv == g.user_by_id_.end()) {
      problems.Add("u-u edge (" + link.u + ", " + link.v +
                   ") references an unknown user");
      continue;
    }
    if (iu->second == iv->second) {
      problems.Add("self-loop on user '" + link.u + "'");
      continue;
    }
    if (!(link.weight >= 0.0 && link.weight <= 1.0)) {
      problems.Add("u-u edge (" + link.u + ", " + link.v + ") weight " +
                   std::to_string(link.weight) + " outside [0, 1]");
      continue;
    }
    UserEdge e;
    e.u = std::min(iu->second, iv->second);
    e.v = std::max(iu->second, iv->second);
    e.origin = link.origin;
    e.weight = link.origin == EdgeOrigin::kGiven ? 1.0 : link.weight;
    if (link.origin == EdgeOrigin::kAugmented) {
      e.sim_f = link.sim_f;
      e.sim_t = link.sim_t;
    }
    auto [it, inserted] = uu.emplace(std::make_pair(e.u, e.v), e);
    if (!inserted && it->second.origin == EdgeOrigin::kAugmented &&
        e.origin == EdgeOrigin::kGiven) {
      it->second = e;
    }
  }

  std::map<std::pair<std::size_t, std::size_t>, EdgeOrigin> ut;
  for (const TopicLink& link : ut_links) {
    const auto iu = g.user_by_id_.find(link.user);
    const auto it = g.topic_by_id_.find(link.topic);
    if (iu == g.user_by_id_.end() || it == g.topic_by_id_.end()) {
      problems.Add("u-t edge (" + link.user + ", " + link.topic +
                   ") references an unknown user or topic");
      continue;
    }
    auto [pos, inserted] = ut.emplace(std::make_pair(iu->second, it->second), link.origin);
    if (!inserted && link.origin == EdgeOrigin::kGiven) pos->second = EdgeOrigin::kGiven;
  }

  problems.ThrowIfAny();

  g.users_ = std::move(users);
  g.topics_ = std::move(topics);
  g.uu_edges_.reserve(uu.size());
  for (const auto& [key, e] : uu) g.uu_edges_.push_back(e);
  g.ut_edges_.reserve(ut.size());
  for (const auto& [key, origin] : ut) {
    g.ut_edges_.push_back(TopicEdge{key.first, key.second, origin});
  }

  g.user_adj_.assign(g.users_.size(), {});
  g.user_topics_.assign(g.users_.size(), {});
  g.topic_users_.assign(g.topics_.size(), {});
  for (std::size_t k = 0; k < g.uu_edges_.size(); ++k) {
    const UserEdge& e = g.uu_edges_[k];
    g.user_adj_[e.u].push_back({e.v, k});
    g.user_adj_[e.v].push_back({e.u, k});
  }
  for (auto& adj : g.user_adj_) {
    std::sort(adj.begin(), adj.end(),
              [](const UserAdj& a, const UserAdj& b) { return a.neighbor < b.neighbor; });
  }
  for (const TopicEdge& e : g.ut_edges_) {
    g.user_topics_[e.user].push_back(e.topic);
    g.topic_users_[e.topic].push_back(e.user);
  }
  for (auto& v : g.topic_users_) std::sort(v.begin(), v.end());
  return g;
}

std::size_t HeteroSocialGraph::feature_dim() const {
  std::size_t f = 0;
  for (std::size_t d : block_dims_) f += d;
  return f;
}

std::optional<std::size_t> HeteroSocialGraph::user_index(std::string_view id) const {
  const auto it = user_by_id_.find(std::string(id));
  if (it == user_by_id_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::size_t> HeteroSocialGraph::topic_index(std::string_view id) const {
  const auto it = topic_by_id_.find(std::string(id));
  if (it == topic_by_id_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::size_t> HeteroSocialGraph::topic_index_by_name(
    std::string_view name) const {
  const auto it = topic_by_name_.find(CanonicalName(name));
  if (it == topic_by_name_.end()) return std::nullopt;
  return it->second;
}

bool HeteroSocialGraph::Adjacent(std::string_view u, std::string_view v) const {
  const auto iu = user_index(u);
  const auto iv = user_index(v);
  if (!iu || !iv) {
    throw LookupError("unknown user in adjacency query (" + std::string(u) +
                      ", " + std::string(v) + ")");
  }
  const auto& adj = user_adj_[*iu];
  return std::binary_search(
      adj.begin(), adj.end(), UserAdj{*iv, 0},
      [](const UserAdj& a, const UserAdj& b) { return a.neighbor < b.neighbor; });
}

std::vector<Neighbor> HeteroSocialGraph::Neighbors(std::string_view node,
                                                   Relation relation) const {
  std::vector<Neighbor> out;
  if (const auto iu = user_index(node)) {
    if (relation == Relation::kUserUser) {
      for (const UserAdj& a : user_adj_[*iu]) {
        out.push_back({users_[a.neighbor].id, uu_edges_[a.edge].weight});
      }
    } else {
      for (std::size_t t : user_topics_[*iu]) out.push_back({topics_[t].id, 1.0});
    }
    return out;
  }
  if (const auto it = topic_index(node); it && relation == Relation::kUserTopic) {
    for (std::size_t u : topic_users_[*it]) out.push_back({users_[u].id, 1.0});
    return out;
  }
  throw LookupError("unknown node '" + std::string(node) + "' for relation");
}

bool HeteroSocialGraph::HasTopicEdge(std::size_t user, std::size_t topic) const {
  const auto& ts = user_topics_[user];
  return std::binary_search(ts.begin(), ts.end(), topic);
}

std::vector<UserLink> HeteroSocialGraph::UserLinks() const {
  std::vector<UserLink> out;
  out.reserve(uu_edges_.size());
  for (const UserEdge& e : uu_edges_) {
    out.push_back(UserLink{users_[e.u].id, users_[e.v].id, e.weight, e.origin,
                           e.sim_f, e.sim_t});
  }
  return out;
}

std::vector<TopicLink> HeteroSocialGraph::TopicLinks() const {
  std::vector<TopicLink> out;
  out.reserve(ut_edges_.size());
  for (const TopicEdge& e : ut_edges_) {
    out.push_back(TopicLink{users_[e.user].id, topics_[e.topic].id, e.origin});
  }
  return out;
}

HeteroSocialGraph HeteroSocialGraph::WithAdditions(
    std::vector<TopicNode> new_topics, std::span<const UserLink> new_uu,
    std::span<const TopicLink> new_ut) const {
  std::vector<TopicNode> topics = topics_;
  for (auto& t : new_topics) topics.push_back(std::move(t));
  std::vector<UserLink> uu = UserLinks();
  for (const UserLink& l : new_uu) {
    const auto iu = user_index(l.u);
    const auto iv = user_index(l.v);
    if (iu && iv && *iu != *iv && Adjacent(l.u, l.v)) continue;
    uu.push_back(l);
  }
  std::vector<TopicLink> ut = TopicLinks();
  ut.insert(ut.end(), new_ut.begin(), new_ut.end());
  return Build(users_, std::move(topics), uu, ut);
}

}  // namespace earlysd
