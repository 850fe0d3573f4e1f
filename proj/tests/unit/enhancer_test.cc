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

#include <atomic>
#include <cmath>
#include <thread>

#include <gtest/gtest.h>
#include <httplib.h>
#include <nlohmann/json.hpp>

#include "earlysd/enhancer.h"
#include "earlysd/error.h"
#include "test_util.h"

namespace earlysd::enhancer {
namespace {

using Set = std::vector<std::string>;

double Norm(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

double Dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

TEST(StubSimilarityTest, SetCosine) {
  StubEnhancer stub;
  const Set a = {"music", "travel"};
  EXPECT_EQ(stub.TopicSimilarity(a, a), 1.0);
  EXPECT_EQ(stub.TopicSimilarity(a, Set{"  Travel", "MUSIC"}), 1.0);
  EXPECT_EQ(stub.TopicSimilarity(a, Set{"food"}), 0.0);
  // |A & B| = 1, |A| = 2, |B| = 3
  EXPECT_NEAR(stub.TopicSimilarity(a, Set{"music", "food", "art"}), 1.0 / std::sqrt(6.0), 1e-15);
  EXPECT_THROW(stub.TopicSimilarity(a, Set{}), DomainError);
}

TEST(StubSimilarityTest, Symmetric) {
  StubEnhancer stub;
  const Set a = {"a", "b", "c", "d"};
  const Set b = {"c", "d", "e"};
  EXPECT_EQ(stub.TopicSimilarity(a, b), stub.TopicSimilarity(b, a));
}

TopicLexicon SmallLexicon() {
  TopicLexicon lex;
  lex.Add("K-pop", {"kpop", "korean pop"});
  lex.Add("travel");
  lex.Add("street food", {"food stalls"});
  return lex;
}

TEST(StubExtractionTest, FindsAliasOfKnownTopic) {
  StubEnhancer stub;
  const Set content = {"Been listening to korean pop all week!"};
  const auto found = stub.ExtractTopics(content, SmallLexicon());
  bool has = false;
  for (const auto& t : found) has = has || (t.name == "k-pop" && !t.is_new);
  EXPECT_TRUE(has);
}

TEST(StubExtractionTest, EmptyContentGivesNothing) {
  StubEnhancer stub;
  EXPECT_TRUE(stub.ExtractTopics(Set{}, SmallLexicon()).empty());
}

TEST(StubExtractionTest, FixtureCorpusIsStable) {
  StubOptions opt;
  opt.max_new_per_user = 2;
  opt.max_df = 0.5;
  StubEnhancer stub(opt);
  const std::vector<Set> corpus = {
      {"Travel vlog from the food stalls in Seoul", "kpop concert tonight"},
      {"pottery class again, pottery is relaxing", "weekend travel plans"},
      {"new pottery glaze experiments", "korean pop dance cover"},
      {"studying for exams", "coffee and exams"},
      {"morning run then coffee", "exams are over, travel time"},
  };
  stub.FitCorpus(corpus);
  std::vector<std::string> got;
  for (const auto& doc : corpus) {
    std::string line;
    for (const auto& t : stub.ExtractTopics(doc, SmallLexicon())) {
      line += t.name + (t.is_new ? "*" : "") + " ";
    }
    got.push_back(line);
  }
  const std::vector<std::string> expected = {
      "k-pop street food travel ",
      "travel pottery* ",
      "k-pop pottery* ",
      "exams* coffee* ",
      "travel coffee* exams* ",
  };
  EXPECT_EQ(got, expected);
}

TEST(StubEmbeddingTest, DeterministicUnitNormAndCanonical) {
  StubEnhancer stub;
  const auto a = stub.EmbedTopic("music");
  EXPECT_EQ(a, stub.EmbedTopic("music"));
  EXPECT_EQ(a.size(), 64u);
  EXPECT_NEAR(Norm(a), 1.0, 1e-9);
  EXPECT_NEAR(Dot(a, stub.EmbedTopic("music ")), 1.0, 1e-12);
  EXPECT_NEAR(Norm(stub.EmbedTopic("a")), 1.0, 1e-9);
  EXPECT_LT(Dot(a, stub.EmbedTopic("pottery")), 0.99);
  EXPECT_THROW(stub.EmbedTopic("   "), DomainError);
}

TEST(PromptTest, VersionTagIsTemplateHashPrefix) {
  for (const char* id : {"topic_similarity", "extract_topics", "embed_topic"}) {
    EXPECT_EQ(PromptVersion(id), Sha256Hex(PromptTemplate(id)).substr(0, 12));
  }
  EXPECT_THROW(PromptTemplate("nope"), LookupError);
  EXPECT_EQ(Sha256Hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(CacheTest, PersistsAcrossInstances) {
  testing::TempDir dir("cache");
  const auto path = dir.path() / "cache.jsonl";
  {
    ResponseCache c(path);
    c.Put("k1", "{\"score\":0.5}");
    c.Put("k2", "{}");
  }
  ResponseCache again(path);
  EXPECT_EQ(again.size(), 2u);
  EXPECT_EQ(again.Get("k1"), std::optional<std::string>("{\"score\":0.5}"));
  EXPECT_FALSE(again.Get("k3").has_value());
}

// Local JSON endpoint standing in for a hosted model.
class FakeEndpoint {
 public:
  FakeEndpoint() {
    server_.Post("/v1", [this](const httplib::Request& req, httplib::Response& res) {
      ++hits_;
      const auto body = nlohmann::json::parse(req.body);
      const std::string tid = body["template_id"];
      nlohmann::json reply;
      if (malformed_) {
        res.set_content("{\"unexpected\": true}", "application/json");
        return;
      }
      if (tid.rfind("topic_similarity@", 0) == 0) {
        reply = {{"score", 0.25}};
      } else if (tid.rfind("extract_topics@", 0) == 0) {
        reply = {{"topics", {"K-pop", "Pottery"}}};
      } else {
        std::vector<double> e(8, 0.0);
        e[0] = 3.0;
        e[1] = 4.0;
        reply = {{"embedding", e}};
      }
      res.set_content(reply.dump(), "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~FakeEndpoint() {
    server_.stop();
    thread_.join();
  }
  std::string url() const { return "http://127.0.0.1:" + std::to_string(port_) + "/v1"; }
  int hits() const { return hits_; }
  void set_malformed(bool m) { malformed_ = m; }

 private:
  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
  std::atomic<int> hits_{0};
  std::atomic<bool> malformed_{false};
};

RemoteOptions Options(const std::string& url, const std::filesystem::path& cache) {
  RemoteOptions o;
  o.endpoint = url;
  o.allow_network = true;
  o.cache_path = cache;
  o.embedding_dim = 8;
  o.timeout_seconds = 5;
  return o;
}

TEST(RemoteTest, RepliesAreParsedAndCached) {
  FakeEndpoint server;
  testing::TempDir dir("remote");
  RemoteEnhancer remote(Options(server.url(), dir.path() / "cache.jsonl"));
  const Set a = {"music"};
  const Set b = {"travel"};
  EXPECT_EQ(remote.TopicSimilarity(a, b), 0.25);
  EXPECT_EQ(remote.TopicSimilarity(b, a), 0.25);
  EXPECT_EQ(server.hits(), 1);

  const auto e = remote.EmbedTopic("Music");
  ASSERT_EQ(e.size(), 8u);
  EXPECT_NEAR(e[0], 0.6, 1e-15);
  EXPECT_NEAR(e[1], 0.8, 1e-15);

  TopicLexicon lex = SmallLexicon();
  const auto topics = remote.ExtractTopics(Set{"kpop dance practice", "pottery wheel"}, lex);
  ASSERT_EQ(topics.size(), 2u);
  EXPECT_EQ(topics[0].name, "k-pop");
  EXPECT_FALSE(topics[0].is_new);
  EXPECT_EQ(topics[1].name, "pottery");
  EXPECT_TRUE(topics[1].is_new);

  // A fresh client replays everything from the cache without the network.
  auto offline = Options("", dir.path() / "cache.jsonl");
  offline.allow_network = false;
  RemoteEnhancer replay(offline);
  EXPECT_EQ(replay.TopicSimilarity(a, b), 0.25);
  EXPECT_EQ(replay.network_calls(), 0u);
  EXPECT_THROW(replay.TopicSimilarity(a, Set{"food"}), ProtocolError);
}

TEST(RemoteTest, MalformedReplyFailsOrFallsBack) {
  FakeEndpoint server;
  server.set_malformed(true);
  const Set a = {"music", "art"};
  const Set b = {"music"};
  RemoteEnhancer strict(Options(server.url(), {}));
  EXPECT_THROW(strict.TopicSimilarity(a, b), ProtocolError);

  auto lenient_opt = Options(server.url(), {});
  lenient_opt.fallback_to_stub = true;
  RemoteEnhancer lenient(lenient_opt);
  EXPECT_NEAR(lenient.TopicSimilarity(a, b), StubEnhancer().TopicSimilarity(a, b), 1e-15);
}

TEST(RemoteTest, UnreachableEndpointIsProtocolError) {
  auto opt = Options("http://127.0.0.1:1/v1", {});
  opt.timeout_seconds = 1;
  RemoteEnhancer remote(opt);
  EXPECT_THROW(remote.EmbedTopic("music"), ProtocolError);
}

TEST(RemoteTest, CacheKeyDependsOnInputs) {
  const nlohmann::json a = {{"x", 1}};
  const nlohmann::json b = {{"x", 2}};
  EXPECT_EQ(RemoteEnhancer::CacheKey("embed_topic", a), RemoteEnhancer::CacheKey("embed_topic", a));
  EXPECT_NE(RemoteEnhancer::CacheKey("embed_topic", a), RemoteEnhancer::CacheKey("embed_topic", b));
  EXPECT_NE(RemoteEnhancer::CacheKey("embed_topic", a), RemoteEnhancer::CacheKey("extract_topics", a));
}

}  // namespace
}  // namespace earlysd::enhancer
