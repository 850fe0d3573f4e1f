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

#ifndef EARLYSD_ENHANCER_H_
#define EARLYSD_ENHANCER_H_

#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "earlysd/graph.h"

// Text-intelligence capabilities behind one interface: topic-set similarity,
// topic extraction from user content, and topic-name embedding. The stub is a
// deterministic local implementation; the remote client talks JSON over HTTP
// and replays responses from an append-only cache.
namespace earlysd::enhancer {

enum class Mode { kStub, kRemote };

class TopicLexicon {
 public:
  struct Entry {
    std::string name;  // canonical
    std::vector<std::string> aliases;  // canonical, includes name
  };

  // Throws DomainError for an empty or duplicate canonical name.
  void Add(std::string_view name, const std::vector<std::string>& aliases = {});
  static TopicLexicon FromGraph(const HeteroSocialGraph& g);

  // Canonical topic for a name or alias phrase.
  std::optional<std::string> Resolve(std::string_view phrase) const;
  bool Contains(std::string_view name) const;
  const std::vector<Entry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  std::size_t max_alias_tokens() const { return max_tokens_; }

 private:
  std::vector<Entry> entries_;
  std::unordered_map<std::string, std::size_t> by_name_;
  // Alias keyed by its tokens joined with single spaces.
  std::unordered_map<std::string, std::size_t> by_alias_;
  std::size_t max_tokens_ = 1;
};

struct ExtractedTopic {
  std::string name;        // canonical
  bool is_new = false;     // not in the lexicon: proposed as an Expanded topic
  std::size_t source = 0;  // index of the first snippet it was found in
  double score = 0.0;      // tf-idf
};

class EnhancerClient {
 public:
  virtual ~EnhancerClient() = default;
  virtual Mode mode() const = 0;

  // Similarity of two topic sets in [-1, 1]. Throws DomainError on an empty
  // set.
  virtual double TopicSimilarity(std::span<const std::string> a,
                                 std::span<const std::string> b) = 0;
  // Topics found in a user's content; empty content gives an empty result.
  virtual std::vector<ExtractedTopic> ExtractTopics(std::span<const std::string> content,
                                                    const TopicLexicon& lexicon) = 0;
  // Unit-norm embedding of dimension embedding_dim(). Throws DomainError on an
  // empty (after trimming) name.
  virtual std::vector<double> EmbedTopic(std::string_view name) = 0;
  virtual std::size_t embedding_dim() const = 0;
  // Corpus statistics (one document per user) for clients that use them.
  virtual void FitCorpus(std::span<const std::vector<std::string>> documents) { (void)documents; }
};

struct StubOptions {
  std::size_t embedding_dim = 64;
  // Proposals per user for unmatched terms.
  std::size_t max_new_per_user = 3;
  // Terms found in more than this fraction of documents are not proposed.
  double max_df = 0.3;
  // Minimum document frequency for proposals once a corpus is fitted.
  std::size_t min_df = 2;
  double min_score = 0.0;
};

class StubEnhancer final : public EnhancerClient {
 public:
  explicit StubEnhancer(StubOptions options = {});

  Mode mode() const override { return Mode::kStub; }
  // Cosine of the canonicalized sets' indicator vectors, in [0, 1].
  double TopicSimilarity(std::span<const std::string> a,
                         std::span<const std::string> b) override;
  // Lexicon alias matches (longest match first) plus the highest tf-idf
  // unmatched terms as new topics.
  std::vector<ExtractedTopic> ExtractTopics(std::span<const std::string> content,
                                            const TopicLexicon& lexicon) override;
  // Hashed character 3-gram random projection of the canonical name.
  std::vector<double> EmbedTopic(std::string_view name) override;
  std::size_t embedding_dim() const override { return options_.embedding_dim; }

  // Document frequencies for idf, one document per user.
  void FitCorpus(std::span<const std::vector<std::string>> documents) override;
  bool fitted() const { return num_docs_ > 0; }
  const StubOptions& options() const { return options_; }

 private:
  StubOptions options_;
  std::size_t num_docs_ = 0;
  std::unordered_map<std::string, std::size_t> doc_freq_;
};

// Append-only (key, body) store. Concurrent readers, serialized writers.
class ResponseCache {
 public:
  // Loads existing records; an empty path keeps the cache in memory only.
  explicit ResponseCache(std::filesystem::path path = {});

  std::optional<std::string> Get(const std::string& key) const;
  void Put(const std::string& key, const std::string& body);
  std::size_t size() const;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
  mutable std::shared_mutex mu_;
  std::map<std::string, std::string> entries_;
};

struct RemoteOptions {
  std::string endpoint;  // http(s)://host[:port]/path
  std::string api_key;
  bool allow_network = false;
  bool fallback_to_stub = false;
  std::filesystem::path cache_path;
  std::size_t embedding_dim = 64;
  int timeout_seconds = 60;

  // Endpoint and key from $EARLYSD_LLM_ENDPOINT / $EARLYSD_LLM_KEY.
  static RemoteOptions FromEnvironment();
};

// Prompt template text and its version tag (first 12 hex digits of the
// template's SHA-256). Throws LookupError for unknown ids.
std::string_view PromptTemplate(std::string_view id);
std::string PromptVersion(std::string_view id);
std::string Sha256Hex(std::string_view data);

class RemoteEnhancer final : public EnhancerClient {
 public:
  explicit RemoteEnhancer(RemoteOptions options);

  Mode mode() const override { return Mode::kRemote; }
  double TopicSimilarity(std::span<const std::string> a,
                         std::span<const std::string> b) override;
  std::vector<ExtractedTopic> ExtractTopics(std::span<const std::string> content,
                                            const TopicLexicon& lexicon) override;
  std::vector<double> EmbedTopic(std::string_view name) override;
  std::size_t embedding_dim() const override { return options_.embedding_dim; }

  // Raw response body for a request, from cache or (if allowed) the network.
  // Throws ProtocolError when neither is available or the server fails.
  std::string Request(std::string_view template_id, const nlohmann::json& inputs);
  // Cache key: hash over versioned template id and canonical inputs.
  static std::string CacheKey(std::string_view template_id, const nlohmann::json& inputs);

  const ResponseCache& cache() const { return cache_; }
  std::size_t network_calls() const { return network_calls_; }

 private:
  std::string Post(const std::string& body);

  RemoteOptions options_;
  ResponseCache cache_;
  StubEnhancer fallback_;
  std::mutex inflight_;
  std::size_t network_calls_ = 0;
};

struct EnhancerConfig {
  Mode mode = Mode::kStub;
  StubOptions stub;
  RemoteOptions remote;
};

std::unique_ptr<EnhancerClient> MakeEnhancer(const EnhancerConfig& config);

}  // namespace earlysd::enhancer

#endif  // EARLYSD_ENHANCER_H_
