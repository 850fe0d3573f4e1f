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

#ifndef EARLYSD_TESTS_UNIT_TEST_UTIL_H_
#define EARLYSD_TESTS_UNIT_TEST_UTIL_H_

#include <unistd.h>

#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "earlysd/graph.h"
#include "earlysd/rng.h"

namespace earlysd::testing {

// Unique scratch directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("earlysd_test_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

// User with every feature drawn from N(0, 1) and a given score.
inline UserRecord RandomUser(const std::string& id, int score, Rng& rng) {
  UserRecord u = MakeUser(id, score);
  for (auto& block : u.features) {
    for (double& x : block) x = rng.Uniform();
  }
  return u;
}

// Small graph: `n` users alternating negative/positive scores, `k` topics,
// each user linked to three topics, topics embedded in `d_t` dims (0: none).
inline HeteroSocialGraph SmallGraph(std::size_t n, std::size_t k, std::size_t d_t, std::uint64_t seed = 7) {
  Rng rng(seed);
  std::vector<UserRecord> users;
  for (std::size_t i = 0; i < n; ++i) {
    char id[32];
    std::snprintf(id, sizeof(id), "u%03zu", i);
    users.push_back(RandomUser(id, i % 2 == 0 ? 40 : 70, rng));
    users.back().content = {"i like topic number " + std::to_string(i % k)};
  }
  std::vector<TopicNode> topics;
  for (std::size_t t = 0; t < k; ++t) {
    char id[32];
    std::snprintf(id, sizeof(id), "t%03zu", t);
    TopicNode node{id, "topic " + std::to_string(t), TopicOrigin::kOriginal, {}};
    for (std::size_t j = 0; j < d_t; ++j) node.embedding.push_back(rng.Normal());
    topics.push_back(node);
  }
  std::vector<TopicLink> ut;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < 3 && j < k; ++j) {
      ut.push_back({users[i].id, topics[(i + j * (i % 2 + 1)) % k].id, EdgeOrigin::kGiven});
    }
  }
  std::vector<TopicLink> dedup;
  for (const auto& l : ut) {
    bool seen = false;
    for (const auto& d : dedup) seen = seen || (d.user == l.user && d.topic == l.topic);
    if (!seen) dedup.push_back(l);
  }
  return HeteroSocialGraph::Build(users, topics, {}, dedup);
}

}  // namespace earlysd::testing

#endif  // EARLYSD_TESTS_UNIT_TEST_UTIL_H_
