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

#include "earlysd/enhancer.h"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <set>
#include <unordered_set>

#include <httplib.h>
#include <openssl/evp.h>

#include "earlysd/error.h"
#include "earlysd/text.h"
#include "earlysd/prompts_generated.h"

namespace earlysd::enhancer {
namespace {

const std::unordered_set<std::string>& StopWords() {
  static const std::unordered_set<std::string> kWords = {
      "a",     "about", "after", "again", "all",   "also",  "am",    "an",    "and",
      "any",   "are",   "as",    "at",    "be",    "been",  "but",   "by",    "can",
      "did",   "do",    "does",  "for",   "from",  "had",   "has",   "have",  "he",
      "her",   "here",  "him",   "his",   "how",   "i",     "i'm",   "if",    "in",
      "into",  "is",    "it",    "it's",  "its",   "just",  "me",    "more",  "most",
      "my",    "no",    "not",   "now",   "of",    "on",    "one",   "or",    "our",
      "out",   "over",  "she",   "so",    "some",  "than",  "that",  "the",   "their",
      "them",  "then",  "there", "these", "they",  "this",  "those", "to",    "too",
      "up",    "us",    "very",  "was",   "we",    "were",  "what",  "when",  "which",
      "who",   "why",   "will",  "with",  "would", "you",   "your",  "don't", "can't",
      "today", "really", "still", "much", "get",   "got",   "going", "been",  "being"};
  return kWords;
}

bool HasLetter(const std::string& s) {
  return std::any_of(s.begin(), s.end(), [](char c) {
    return (c >= 'a' && c <= 'z') || static_cast<unsigned char>(c) >= 0x80;
  });
}

bool Proposable(const std::string& token) {
  return token.size() >= 3 && HasLetter(token) && !StopWords().contains(token);
}

std::string PhraseKey(std::string_view phrase) { return Join(Tokenize(phrase), " "); }

std::uint64_t Fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t SplitMix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

void Normalize(std::vector<double>& v) {
  double n = 0.0;
  for (double x : v) n += x * x;
  n = std::sqrt(n);
  if (n < 1e-300) throw NumericError("cannot normalize a zero embedding");
  for (double& x : v) x /= n;
}

std::vector<std::string> CanonicalSet(std::span<const std::string> topics) {
  std::set<std::string> s;
  for (const auto& t : topics) {
    std::string c = CanonicalName(t);
    if (!c.empty()) s.insert(std::move(c));
  }
  return {s.begin(), s.end()};
}

// Topic phrase occurs in the snippet as a contiguous token sequence.
std::optional<std::size_t> FindSource(std::span<const std::string> content,
                                      const std::vector<std::string>& phrase_tokens) {
  if (phrase_tokens.empty()) return std::nullopt;
  for (std::size_t s = 0; s < content.size(); ++s) {
    const std::vector<std::string> toks = Tokenize(content[s]);
    if (toks.size() < phrase_tokens.size()) continue;
    for (std::size_t i = 0; i + phrase_tokens.size() <= toks.size(); ++i) {
      if (std::equal(phrase_tokens.begin(), phrase_tokens.end(), toks.begin() + i)) return s;
    }
  }
  return std::nullopt;
}

std::string Render(std::string_view text,
                   const std::vector<std::pair<std::string, std::string>>& vars) {
  std::string out(text);
  for (const auto& [name, value] : vars) {
    const std::string slot = "{{" + name + "}}";
    for (std::size_t pos = out.find(slot); pos != std::string::npos;
         pos = out.find(slot, pos + value.size())) {
      out.replace(pos, slot.size(), value);
    }
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------- lexicon

void TopicLexicon::Add(std::string_view name, const std::vector<std::string>& aliases) {
  std::string canon = CanonicalName(name);
  if (canon.empty()) throw DomainError("topic name is empty");
  if (by_name_.contains(canon)) throw DomainError("duplicate topic '" + canon + "'");
  const std::size_t idx = entries_.size();
  Entry e{canon, {canon}};
  for (const auto& a : aliases) {
    std::string ca = CanonicalName(a);
    if (!ca.empty() && std::find(e.aliases.begin(), e.aliases.end(), ca) == e.aliases.end()) {
      e.aliases.push_back(std::move(ca));
    }
  }
  for (const auto& a : e.aliases) {
    const std::vector<std::string> toks = Tokenize(a);
    if (toks.empty()) continue;
    by_alias_.emplace(Join(toks, " "), idx);
    max_tokens_ = std::max(max_tokens_, toks.size());
  }
  by_name_.emplace(canon, idx);
  entries_.push_back(std::move(e));
}

TopicLexicon TopicLexicon::FromGraph(const HeteroSocialGraph& g) {
  TopicLexicon lex;
  for (const TopicNode& t : g.topics()) {
    std::vector<std::string> aliases;
    std::string canon = CanonicalName(t.name);
    if (canon.find('-') != std::string::npos) {
      std::string spaced = canon;
      std::replace(spaced.begin(), spaced.end(), '-', ' ');
      std::string joined;
      std::copy_if(canon.begin(), canon.end(), std::back_inserter(joined),
                   [](char c) { return c != '-'; });
      aliases.push_back(spaced);
      aliases.push_back(joined);
    }
    lex.Add(t.name, aliases);
  }
  return lex;
}

std::optional<std::string> TopicLexicon::Resolve(std::string_view phrase) const {
  if (auto it = by_name_.find(CanonicalName(phrase)); it != by_name_.end()) {
    return entries_[it->second].name;
  }
  if (auto it = by_alias_.find(PhraseKey(phrase)); it != by_alias_.end()) {
    return entries_[it->second].name;
  }
  return std::nullopt;
}

bool TopicLexicon::Contains(std::string_view name) const {
  return by_name_.contains(CanonicalName(name));
}

// ------------------------------------------------------------------- stub

StubEnhancer::StubEnhancer(StubOptions options) : options_(options) {
  if (options_.embedding_dim == 0) throw ConfigError("embedding_dim must be positive");
  if (!(options_.max_df > 0.0 && options_.max_df <= 1.0)) {
    throw ConfigError("max_df must lie in (0, 1]");
  }
}

double StubEnhancer::TopicSimilarity(std::span<const std::string> a,
                                     std::span<const std::string> b) {
  const std::vector<std::string> sa = CanonicalSet(a);
  const std::vector<std::string> sb = CanonicalSet(b);
  if (sa.empty() || sb.empty()) throw DomainError("topic similarity needs nonempty sets");
  std::vector<std::string> inter;
  std::set_intersection(sa.begin(), sa.end(), sb.begin(), sb.end(), std::back_inserter(inter));
  return static_cast<double>(inter.size()) /
         std::sqrt(static_cast<double>(sa.size()) * static_cast<double>(sb.size()));
}

void StubEnhancer::FitCorpus(std::span<const std::vector<std::string>> documents) {
  doc_freq_.clear();
  num_docs_ = documents.size();
  for (const auto& doc : documents) {
    std::unordered_set<std::string> seen;
    for (const auto& snippet : doc) {
      for (auto& tok : Tokenize(snippet)) seen.insert(std::move(tok));
    }
    for (const auto& tok : seen) ++doc_freq_[tok];
  }
}

std::vector<ExtractedTopic> StubEnhancer::ExtractTopics(std::span<const std::string> content,
                                                        const TopicLexicon& lexicon) {
  std::vector<ExtractedTopic> out;
  if (content.empty()) return out;

  std::map<std::string, std::size_t> matched_at;  // canonical -> first snippet
  std::map<std::string, double> matched_tf;
  std::map<std::string, std::size_t> term_at;
  std::map<std::string, double> term_tf;
  std::unordered_map<std::string, std::size_t> local_df;

  const std::size_t max_n = lexicon.max_alias_tokens();
  for (std::size_t s = 0; s < content.size(); ++s) {
    const std::vector<std::string> toks = Tokenize(content[s]);
    std::unordered_set<std::string> seen;
    std::size_t i = 0;
    while (i < toks.size()) {
      bool hit = false;
      for (std::size_t n = std::min(max_n, toks.size() - i); n >= 1; --n) {
        std::vector<std::string> window(toks.begin() + i, toks.begin() + i + n);
        if (auto name = lexicon.Resolve(Join(window, " "))) {
          matched_at.try_emplace(*name, s);
          matched_tf[*name] += 1.0;
          i += n;
          hit = true;
          break;
        }
      }
      if (hit) continue;
      const std::string& t = toks[i];
      if (Proposable(t)) {
        term_at.try_emplace(t, s);
        term_tf[t] += 1.0;
        seen.insert(t);
      }
      ++i;
    }
    for (const auto& t : seen) ++local_df[t];
  }

  for (const auto& [name, s] : matched_at) {
    out.push_back({name, false, s, matched_tf[name]});
  }

  std::vector<ExtractedTopic> proposals;
  for (const auto& [term, tf] : term_tf) {
    double idf = 1.0;
    if (fitted()) {
      auto it = doc_freq_.find(term);
      const std::size_t df = it == doc_freq_.end() ? 0 : it->second;
      if (df < options_.min_df) continue;
      if (static_cast<double>(df) > options_.max_df * static_cast<double>(num_docs_)) continue;
      idf = std::log((1.0 + static_cast<double>(num_docs_)) / (1.0 + static_cast<double>(df))) + 1.0;
    }
    const double score = tf * idf;
    if (score <= options_.min_score) continue;
    proposals.push_back({term, true, term_at[term], score});
  }
  std::sort(proposals.begin(), proposals.end(), [](const auto& a, const auto& b) {
    return a.score != b.score ? a.score > b.score : a.name < b.name;
  });
  if (proposals.size() > options_.max_new_per_user) proposals.resize(options_.max_new_per_user);
  out.insert(out.end(), proposals.begin(), proposals.end());
  return out;
}

std::vector<double> StubEnhancer::EmbedTopic(std::string_view name) {
  const std::string canon = CanonicalName(name);
  if (canon.empty()) throw DomainError("cannot embed an empty topic name");
  const std::string padded = "<" + canon + ">";
  const std::size_t d = options_.embedding_dim;
  std::vector<double> v(d, 0.0);
  for (std::size_t i = 0; i + 3 <= padded.size(); ++i) {
    const std::uint64_t h = Fnv1a(std::string_view(padded).substr(i, 3));
    for (std::size_t k = 0; k < d; ++k) {
      const std::uint64_t r = SplitMix(h + 0x632be59bd9b4e019ULL * (k + 1));
      v[k] += static_cast<double>(r >> 11) * 0x1.0p-52 - 1.0;
    }
  }
  Normalize(v);
  return v;
}

// ------------------------------------------------------------------ cache

ResponseCache::ResponseCache(std::filesystem::path path) : path_(std::move(path)) {
  if (path_.empty() || !std::filesystem::exists(path_)) return;
  std::ifstream in(path_);
  if (!in) throw IoError("cannot open cache " + path_.string());
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    nlohmann::json rec = nlohmann::json::parse(line, nullptr, false);
    if (rec.is_discarded() || !rec.is_object() || !rec.contains("key") ||
        !rec.contains("body") || !rec["key"].is_string() || !rec["body"].is_string()) {
      throw ParseError(path_.string(), line_no, "malformed cache record");
    }
    entries_.emplace(rec["key"].get<std::string>(), rec["body"].get<std::string>());
  }
}

std::optional<std::string> ResponseCache::Get(const std::string& key) const {
  std::shared_lock lock(mu_);
  auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

void ResponseCache::Put(const std::string& key, const std::string& body) {
  std::unique_lock lock(mu_);
  if (!entries_.emplace(key, body).second) return;
  if (path_.empty()) return;
  if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path());
  std::ofstream out(path_, std::ios::app);
  if (!out) throw IoError("cannot append to cache " + path_.string());
  out << nlohmann::json{{"key", key}, {"body", body}}.dump() << '\n';
}

std::size_t ResponseCache::size() const {
  std::shared_lock lock(mu_);
  return entries_.size();
}

// ----------------------------------------------------------------- remote

RemoteOptions RemoteOptions::FromEnvironment() {
  RemoteOptions o;
  if (const char* e = std::getenv("EARLYSD_LLM_ENDPOINT")) o.endpoint = e;
  if (const char* k = std::getenv("EARLYSD_LLM_KEY")) o.api_key = k;
  return o;
}

std::string_view PromptTemplate(std::string_view id) {
  for (const auto& [name, text] : prompts::kTemplates) {
    if (name == id) return text;
  }
  throw LookupError("unknown prompt template '" + std::string(id) + "'");
}

std::string Sha256Hex(std::string_view data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1) {
    throw Error("sha256 failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(kHex[md[i] >> 4]);
    out.push_back(kHex[md[i] & 15]);
  }
  return out;
}

std::string PromptVersion(std::string_view id) {
  return Sha256Hex(PromptTemplate(id)).substr(0, 12);
}

RemoteEnhancer::RemoteEnhancer(RemoteOptions options)
    : options_(std::move(options)),
      cache_(options_.cache_path),
      fallback_(StubOptions{.embedding_dim = options_.embedding_dim}) {
  if (options_.embedding_dim == 0) throw ConfigError("embedding_dim must be positive");
}

std::string RemoteEnhancer::CacheKey(std::string_view template_id, const nlohmann::json& inputs) {
  const std::string versioned = std::string(template_id) + "@" + PromptVersion(template_id);
  return Sha256Hex(versioned + "\n" + inputs.dump());
}

std::string RemoteEnhancer::Post(const std::string& body) {
  const std::string& url = options_.endpoint;
  const std::size_t scheme = url.find("://");
  if (url.empty() || scheme == std::string::npos) {
    throw ConfigError("remote endpoint must be an http(s) URL, got '" + url + "'");
  }
  const std::size_t slash = url.find('/', scheme + 3);
  const std::string base = url.substr(0, slash);
  const std::string path = slash == std::string::npos ? "/" : url.substr(slash);

  httplib::Client client(base);
  client.set_connection_timeout(options_.timeout_seconds);
  client.set_read_timeout(options_.timeout_seconds);
  if (!options_.api_key.empty()) client.set_bearer_token_auth(options_.api_key);
  auto res = client.Post(path, body, "application/json");
  if (!res) {
    throw ProtocolError("request to " + url + " failed: " + httplib::to_string(res.error()));
  }
  if (res->status != 200) {
    throw ProtocolError("endpoint " + url + " answered HTTP " + std::to_string(res->status));
  }
  return res->body;
}

std::string RemoteEnhancer::Request(std::string_view template_id, const nlohmann::json& inputs) {
  const std::string key = CacheKey(template_id, inputs);
  if (auto hit = cache_.Get(key)) return *hit;
  if (!options_.allow_network) {
    throw ProtocolError("no cached response for " + std::string(template_id) +
                        " and network access is disabled");
  }
  std::lock_guard lock(inflight_);
  if (auto hit = cache_.Get(key)) return *hit;
  const nlohmann::json request = {
      {"template_id", std::string(template_id) + "@" + PromptVersion(template_id)},
      {"inputs", inputs}};
  std::string body = Post(request.dump());
  ++network_calls_;
  if (nlohmann::json::parse(body, nullptr, false).is_discarded()) {
    throw ProtocolError("endpoint returned a non-JSON body");
  }
  cache_.Put(key, body);
  return body;
}

double RemoteEnhancer::TopicSimilarity(std::span<const std::string> a,
                                       std::span<const std::string> b) {
  std::vector<std::string> sa = CanonicalSet(a);
  std::vector<std::string> sb = CanonicalSet(b);
  if (sa.empty() || sb.empty()) throw DomainError("topic similarity needs nonempty sets");
  if (sa == sb) return 1.0;
  // Order the pair so that both argument orders share one cache entry.
  if (sb < sa) std::swap(sa, sb);
  const std::string tid = "topic_similarity";
  nlohmann::json inputs = {{"topics_u", sa}, {"topics_v", sb}};
  inputs["prompt"] = Render(PromptTemplate(tid),
                            {{"topics_u", Join(sa, ", ")}, {"topics_v", Join(sb, ", ")}});
  try {
    const nlohmann::json reply = nlohmann::json::parse(Request(tid, inputs), nullptr, false);
    if (!reply.is_object() || !reply.contains("score") || !reply["score"].is_number()) {
      throw ProtocolError("similarity reply lacks a numeric 'score'");
    }
    const double s = reply["score"].get<double>();
    if (!std::isfinite(s)) throw ProtocolError("similarity score is not finite");
    return std::clamp(s, -1.0, 1.0);
  } catch (const ProtocolError&) {
    if (!options_.fallback_to_stub) throw;
    return fallback_.TopicSimilarity(sa, sb);
  }
}

std::vector<ExtractedTopic> RemoteEnhancer::ExtractTopics(std::span<const std::string> content,
                                                          const TopicLexicon& lexicon) {
  if (content.empty()) return {};
  std::vector<std::string> sample;
  for (std::size_t i = 0; i < lexicon.size() && i < 50; ++i) {
    sample.push_back(lexicon.entries()[i].name);
  }
  const std::vector<std::string> texts(content.begin(), content.end());
  std::string listing;
  for (const auto& t : texts) listing += "- " + t + "\n";
  const std::string tid = "extract_topics";
  nlohmann::json inputs = {{"texts", texts}, {"lexicon_sample", sample}};
  inputs["prompt"] = Render(PromptTemplate(tid),
                            {{"lexicon_sample", Join(sample, ", ")}, {"texts", listing}});
  nlohmann::json reply;
  try {
    reply = nlohmann::json::parse(Request(tid, inputs), nullptr, false);
    if (!reply.is_object() || !reply.contains("topics") || !reply["topics"].is_array()) {
      throw ProtocolError("extraction reply lacks a 'topics' array");
    }
    for (const auto& t : reply["topics"]) {
      if (!t.is_string()) throw ProtocolError("extraction reply has a non-string topic");
    }
  } catch (const ProtocolError&) {
    if (!options_.fallback_to_stub) throw;
    return fallback_.ExtractTopics(content, lexicon);
  }

  std::vector<ExtractedTopic> out;
  std::unordered_set<std::string> seen;
  for (const auto& t : reply["topics"]) {
    const std::string raw = CanonicalName(t.get<std::string>());
    if (raw.empty()) continue;
    const std::optional<std::string> known = lexicon.Resolve(raw);
    const std::string name = known.value_or(raw);
    if (!seen.insert(name).second) continue;
    // Keep only topics that some snippet actually mentions.
    std::optional<std::size_t> src = FindSource(content, Tokenize(raw));
    if (!src && known) {
      for (const auto& e : lexicon.entries()) {
        if (e.name != *known) continue;
        for (const auto& a : e.aliases) {
          if ((src = FindSource(content, Tokenize(a)))) break;
        }
        break;
      }
    }
    if (!src) continue;
    out.push_back({name, !known.has_value(), *src, 1.0});
  }
  return out;
}

std::vector<double> RemoteEnhancer::EmbedTopic(std::string_view name) {
  const std::string canon = CanonicalName(name);
  if (canon.empty()) throw DomainError("cannot embed an empty topic name");
  const std::string tid = "embed_topic";
  nlohmann::json inputs = {{"name", canon}, {"dim", options_.embedding_dim}};
  inputs["prompt"] = Render(PromptTemplate(tid),
                            {{"name", canon}, {"dim", std::to_string(options_.embedding_dim)}});
  try {
    const nlohmann::json reply = nlohmann::json::parse(Request(tid, inputs), nullptr, false);
    if (!reply.is_object() || !reply.contains("embedding") || !reply["embedding"].is_array()) {
      throw ProtocolError("embedding reply lacks an 'embedding' array");
    }
    const auto& arr = reply["embedding"];
    if (arr.size() != options_.embedding_dim) {
      throw ProtocolError("embedding has " + std::to_string(arr.size()) + " entries, expected " +
                          std::to_string(options_.embedding_dim));
    }
    std::vector<double> v;
    v.reserve(arr.size());
    for (const auto& x : arr) {
      if (!x.is_number() || !std::isfinite(x.get<double>())) {
        throw ProtocolError("embedding has a non-numeric entry");
      }
      v.push_back(x.get<double>());
    }
    try {
      Normalize(v);
    } catch (const NumericError&) {
      throw ProtocolError("embedding is the zero vector");
    }
    return v;
  } catch (const ProtocolError&) {
    if (!options_.fallback_to_stub) throw;
    return fallback_.EmbedTopic(canon);
  }
}

std::unique_ptr<EnhancerClient> MakeEnhancer(const EnhancerConfig& config) {
  if (config.mode == Mode::kStub) return std::make_unique<StubEnhancer>(config.stub);
  RemoteOptions r = config.remote;
  r.embedding_dim = config.stub.embedding_dim;
  return std::make_unique<RemoteEnhancer>(std::move(r));
}

}  // namespace earlysd::enhancer
