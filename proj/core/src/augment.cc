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

#include "earlysd/augment.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <tuple>
#include <unordered_set>

#include "earlysd/dataset.h"
#include "earlysd/error.h"
#include "earlysd/features.h"
#include "earlysd/rng.h"
#include "earlysd/text.h"

namespace earlysd::augment {
namespace {

std::vector<std::string> TopicNames(const HeteroSocialGraph& g, std::size_t u) {
  std::vector<std::string> names;
  for (std::size_t t : g.user_topics(u)) names.push_back(CanonicalName(g.topics()[t].name));
  std::sort(names.begin(), names.end());
  return names;
}

std::string PaddedId(char prefix, std::size_t n) {
  std::string digits = std::to_string(n);
  if (digits.size() < 4) digits.insert(0, 4 - digits.size(), '0');
  return std::string(1, prefix) + digits;
}

}  // namespace

void AugmentConfig::Validate() const {
  if (!(tau_uu > 0.0 && tau_uu <= 1.0)) throw ConfigError("tau_uu must lie in (0, 1]");
  if (!(theta_ut >= 0.0 && theta_ut <= 1.0)) throw ConfigError("theta_ut must lie in [0, 1]");
  if (negative_ratio == 0) throw ConfigError("negative_ratio must be positive");
  if (lp_hidden == 0 || lp_layers == 0) throw ConfigError("link predictor needs a hidden layer");
  if (!(lp_lr > 0.0)) throw ConfigError("lp_lr must be positive");
  if (!(lp_holdout >= 0.0 && lp_holdout < 1.0)) throw ConfigError("lp_holdout must lie in [0, 1)");
  if (blocking && (blocking_bits == 0 || blocking_bits > 30)) {
    throw ConfigError("blocking_bits must lie in [1, 30]");
  }
}

double BlendedScore(const nn::KanEdgeModule& kan, double sim_f, double sim_t, double* alpha) {
  if (std::isnan(sim_t)) {
    if (alpha) *alpha = 1.0;
    return sim_f;
  }
  const double a = kan.Alpha(sim_f, sim_t);
  if (alpha) *alpha = a;
  return a * sim_f + (1.0 - a) * sim_t;
}

double FeatureSimilarity(const nn::Matrix& x, std::size_t u, std::size_t v) {
  const auto a = x.row(static_cast<Eigen::Index>(u));
  const auto b = x.row(static_cast<Eigen::Index>(v));
  const double na = a.norm();
  const double nb = b.norm();
  if (na < 1e-12 || nb < 1e-12) return 0.0;
  return std::clamp(a.dot(b) / (na * nb), -1.0, 1.0);
}

UuResult UuAugment(const HeteroSocialGraph& g, const nn::KanEdgeModule& kan,
                   enhancer::EnhancerClient& client, const AugmentConfig& config) {
  const std::size_t n = g.num_users();
  UuResult out;
  if (n < 2) {
    out.graph = g;
    return out;
  }
  const nn::Matrix x = BuildFeatureMatrix(g.users(), ModalityMask::All(), FeatureScaling::kStandardized);

  std::vector<std::vector<std::size_t>> blocks;
  if (config.blocking) {
    // Random-hyperplane signatures; only users sharing a signature are paired.
    Rng rng = Rng::Stream(config.seed, 0xb10c);
    nn::Matrix planes(static_cast<Eigen::Index>(config.blocking_bits), x.cols());
    for (Eigen::Index i = 0; i < planes.size(); ++i) planes.data()[i] = rng.Normal();
    std::map<std::uint32_t, std::vector<std::size_t>> by_key;
    for (std::size_t u = 0; u < n; ++u) {
      std::uint32_t key = 0;
      for (Eigen::Index b = 0; b < planes.rows(); ++b) {
        if (planes.row(b).dot(x.row(static_cast<Eigen::Index>(u))) >= 0.0) key |= 1u << b;
      }
      by_key[key].push_back(u);
    }
    for (auto& [key, members] : by_key) blocks.push_back(std::move(members));
  } else {
    const double pairs = 0.5 * static_cast<double>(n) * static_cast<double>(n - 1);
    if (pairs > static_cast<double>(config.max_candidate_pairs)) {
      throw ConfigError("all-pairs u-u candidates (" + std::to_string(static_cast<long long>(pairs)) +
                        ") exceed max_candidate_pairs; enable blocking");
    }
    blocks.emplace_back(n);
    for (std::size_t u = 0; u < n; ++u) blocks[0][u] = u;
  }

  std::vector<std::vector<std::string>> topics(n);
  for (std::size_t u = 0; u < n; ++u) topics[u] = TopicNames(g, u);

  std::vector<std::unordered_set<std::size_t>> adjacent(n);
  std::vector<std::size_t> load(n, 0);
  for (const UserEdge& e : g.uu_edges()) {
    adjacent[e.u].insert(e.v);
    if (e.origin == EdgeOrigin::kAugmented) {
      ++load[e.u];
      ++load[e.v];
    }
  }

  std::vector<UuCandidate> admitted;
  for (const auto& block : blocks) {
    for (std::size_t i = 0; i < block.size(); ++i) {
      for (std::size_t j = i + 1; j < block.size(); ++j) {
        const std::size_t u = std::min(block[i], block[j]);
        const std::size_t v = std::max(block[i], block[j]);
        if (adjacent[u].contains(v)) continue;
        ++out.candidates;
        UuCandidate c{u, v, FeatureSimilarity(x, u, v), std::nan(""), 1.0, 0.0};
        if (!topics[u].empty() && !topics[v].empty()) {
          c.sim_t = client.TopicSimilarity(topics[u], topics[v]);
        }
        c.score = BlendedScore(kan, c.sim_f, c.sim_t, &c.alpha);
        if (c.score >= config.tau_uu) admitted.push_back(c);
      }
    }
  }
  out.admitted_before_cap = admitted.size();
  std::sort(admitted.begin(), admitted.end(), [](const UuCandidate& a, const UuCandidate& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.u != b.u ? a.u < b.u : a.v < b.v;
  });

  std::vector<UserLink> links;
  for (const UuCandidate& c : admitted) {
    if (load[c.u] >= config.max_new_uu_per_node || load[c.v] >= config.max_new_uu_per_node) continue;
    ++load[c.u];
    ++load[c.v];
    links.push_back({g.users()[c.u].id, g.users()[c.v].id, std::clamp(c.score, 0.0, 1.0),
                     EdgeOrigin::kAugmented, c.sim_f, c.sim_t});
    out.added.push_back(c);
  }
  out.graph = g.WithAdditions({}, links, {});
  return out;
}

HeteroSocialGraph EnsureTopicEmbeddings(const HeteroSocialGraph& g,
                                        enhancer::EnhancerClient& client) {
  if (g.topic_embedding_dim() == client.embedding_dim()) return g;
  Dataset d = Dataset::FromGraph(g);
  for (TopicNode& t : d.topics) t.embedding = client.EmbedTopic(t.name);
  return d.ToGraph();
}

ExpandResult ExpandTopicSet(const HeteroSocialGraph& g, enhancer::EnhancerClient& client) {
  const enhancer::TopicLexicon lexicon = enhancer::TopicLexicon::FromGraph(g);
  std::vector<std::vector<std::string>> docs;
  docs.reserve(g.num_users());
  for (const UserRecord& u : g.users()) docs.push_back(u.content);
  client.FitCorpus(docs);

  const bool embed = g.topic_embedding_dim() > 0;
  if (embed && g.topic_embedding_dim() != client.embedding_dim()) {
    throw ConfigError("graph topic embeddings have dimension " +
                      std::to_string(g.topic_embedding_dim()) + " but the enhancer produces " +
                      std::to_string(client.embedding_dim()));
  }

  ExpandResult out;
  std::vector<TopicNode> created;
  std::map<std::string, std::string> created_ids;  // name -> id
  std::size_t next_id = 1;
  std::vector<TopicLink> links;
  std::set<std::pair<std::string, std::string>> seen;
  for (std::size_t u = 0; u < g.num_users(); ++u) {
    const UserRecord& user = g.users()[u];
    for (const enhancer::ExtractedTopic& hit : client.ExtractTopics(user.content, lexicon)) {
      std::string topic_id;
      if (auto idx = g.topic_index_by_name(hit.name)) {
        if (g.HasTopicEdge(u, *idx)) continue;
        topic_id = g.topics()[*idx].id;
      } else if (auto it = created_ids.find(hit.name); it != created_ids.end()) {
        topic_id = it->second;
      } else {
        do {
          topic_id = PaddedId('x', next_id++);
        } while (g.topic_index(topic_id).has_value());
        TopicNode node{topic_id, hit.name, TopicOrigin::kExpanded, {}};
        if (embed) node.embedding = client.EmbedTopic(hit.name);
        created.push_back(std::move(node));
        created_ids.emplace(hit.name, topic_id);
        out.new_topics.push_back(hit.name);
      }
      if (seen.emplace(user.id, topic_id).second) {
        links.push_back({user.id, topic_id, EdgeOrigin::kAugmented});
      }
    }
  }
  out.added_edges = links.size();
  out.graph = g.WithAdditions(std::move(created), {}, links);
  return out;
}

UtResult UtAugment(const HeteroSocialGraph& g, const LinkPredictor& predictor,
                   const AugmentConfig& config) {
  if (!predictor.trained()) throw Error("u-t augmentation needs a trained link predictor");
  UtResult out;
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t u = 0; u < g.num_users(); ++u) {
    for (std::size_t t = 0; t < g.num_topics(); ++t) {
      if (!g.HasTopicEdge(u, t)) pairs.emplace_back(u, t);
    }
  }
  out.scored = pairs.size();
  const std::vector<double> scores = predictor.Score(g, pairs);

  std::vector<TopicLink> links;
  std::size_t i = 0;
  while (i < pairs.size()) {
    const std::size_t u = pairs[i].first;
    std::vector<std::pair<double, std::size_t>> mine;
    for (; i < pairs.size() && pairs[i].first == u; ++i) {
      if (scores[i] >= config.theta_ut) mine.emplace_back(scores[i], pairs[i].second);
    }
    std::sort(mine.begin(), mine.end(), [](const auto& a, const auto& b) {
      return a.first != b.first ? a.first > b.first : a.second < b.second;
    });
    if (config.max_new_ut_per_user > 0 && mine.size() > config.max_new_ut_per_user) {
      mine.resize(config.max_new_ut_per_user);
    }
    for (const auto& [s, t] : mine) {
      links.push_back({g.users()[u].id, g.topics()[t].id, EdgeOrigin::kAugmented});
    }
  }
  out.added = links.size();
  out.graph = g.WithAdditions({}, {}, links);
  return out;
}

double RocAuc(const std::vector<double>& pos, const std::vector<double>& neg) {
  if (pos.empty() || neg.empty()) throw DomainError("AUC needs positive and negative scores");
  std::vector<std::pair<double, int>> all;
  all.reserve(pos.size() + neg.size());
  for (double s : pos) all.emplace_back(s, 1);
  for (double s : neg) all.emplace_back(s, 0);
  std::sort(all.begin(), all.end());
  // Mann-Whitney U with mid-ranks for ties.
  double rank_sum = 0.0;
  std::size_t i = 0;
  while (i < all.size()) {
    std::size_t j = i;
    while (j < all.size() && all[j].first == all[i].first) ++j;
    const double mid = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t k = i; k < j; ++k) {
      if (all[k].second == 1) rank_sum += mid;
    }
    i = j;
  }
  const double np = static_cast<double>(pos.size());
  const double nn = static_cast<double>(neg.size());
  return (rank_sum - np * (np + 1.0) / 2.0) / (np * nn);
}

std::pair<double, double> UuHomophily(const HeteroSocialGraph& g) {
  std::size_t aug = 0;
  std::size_t same = 0;
  for (const UserEdge& e : g.uu_edges()) {
    if (e.origin != EdgeOrigin::kAugmented) continue;
    ++aug;
    if (g.users()[e.u].binary_label() == g.users()[e.v].binary_label()) ++same;
  }
  double pos = 0.0;
  for (const UserRecord& u : g.users()) pos += u.binary_label() == BinaryLabel::kPositive ? 1.0 : 0.0;
  const double n = static_cast<double>(g.num_users());
  const double neg = n - pos;
  const double base = n < 2 ? 0.0 : (pos * (pos - 1.0) + neg * (neg - 1.0)) / (n * (n - 1.0));
  return {aug ? static_cast<double>(same) / static_cast<double>(aug) : 0.0, base};
}

std::pair<HeteroSocialGraph, RefinementReport> Refine(const HeteroSocialGraph& input,
                                                      const nn::KanEdgeModule& kan,
                                                      enhancer::EnhancerClient& client,
                                                      const AugmentConfig& config,
                                                      const PipelineToggles& toggles) {
  config.Validate();
  RefinementReport report;
  HeteroSocialGraph g = EnsureTopicEmbeddings(input, client);
  if (toggles.expand) {
    ExpandResult e = ExpandTopicSet(g, client);
    report.new_topics = e.new_topics.size();
    report.expansion_edges = e.added_edges;
    g = std::move(e.graph);
  }
  if (toggles.uu) {
    UuResult r = UuAugment(g, kan, client, config);
    report.uu_added = r.added.size();
    g = std::move(r.graph);
  }
  if (toggles.ut) {
    auto [predictor, lp] = LinkPredictor::Train(g, config);
    report.lp = lp;
    UtResult r = UtAugment(g, predictor, config);
    report.ut_added = r.added;
    g = std::move(r.graph);
  }
  std::tie(report.uu_homophily, report.label_agreement_base) = UuHomophily(g);
  return {std::move(g), report};
}

}  // namespace earlysd::augment
