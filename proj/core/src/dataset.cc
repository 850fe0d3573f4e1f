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

#include "earlysd/dataset.h"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_map>

#include <nlohmann/json.hpp>
#include <toml++/toml.hpp>

#include "earlysd/csv.h"
#include "earlysd/error.h"

namespace earlysd {
namespace fs = std::filesystem;
namespace {

bool IsRatio(std::string_view c) { return c == "bidir_ratio" || c == "friend_ratio"; }

EdgeOrigin ParseEdgeOrigin(const CsvReader& r, const CsvRow& row, const std::string& s) {
  if (s == "Given") return EdgeOrigin::kGiven;
  if (s == "Augmented") return EdgeOrigin::kAugmented;
  throw ParseError(r.file(), row.line, "unknown provenance '" + s + "'");
}

double Number(const CsvReader& r, const CsvRow& row, std::size_t col) {
  double x = 0.0;
  if (!ParseDouble(row.fields[col], x)) {
    throw ParseError(r.file(), row.line,
                     "column '" + r.header()[col] + "': not a number: '" +
                         row.fields[col] + "'");
  }
  return x;
}

std::string ManifestText(const Dataset& data, const Manifest& m) {
  std::ostringstream os;
  os << "# EarlySD dataset manifest\n[modalities]\n";
  for (Modality mod : kAllModalities) {
    os << ModalityLetter(mod) << " = " << m.modality_dims[static_cast<std::size_t>(mod)] << "\n";
  }
  os << "\n[topics]\nd_t = " << m.topic_embedding_dim << "\n";
  os << "\n[counts]\nusers = " << m.num_users << "\ntopics = " << m.num_topics
     << "\nut_edges = " << m.num_ut_edges << "\nuu_edges = " << m.num_uu_edges << "\n";
  (void)data;
  return os.str();
}

}  // namespace

std::vector<std::string> UserFeatureColumns() {
  std::vector<std::string> cols;
  for (Modality m : kAllModalities) {
    for (std::string_view c : ModalityColumns(m)) cols.emplace_back(c);
  }
  return cols;
}

Dataset Dataset::FromGraph(const HeteroSocialGraph& g) {
  Dataset d;
  d.users = g.users();
  d.topics = g.topics();
  d.uu_links = g.UserLinks();
  d.ut_links = g.TopicLinks();
  return d;
}

void SaveDataset(const Dataset& data, const fs::path& dir) {
  fs::create_directories(dir);

  {
    std::ostringstream os;
    CsvWriter w(os);
    std::vector<std::string> header = {"id", "score"};
    for (auto& c : UserFeatureColumns()) header.push_back(c);
    w.Row(header);
    for (const UserRecord& u : data.users) {
      std::vector<std::string> row = {u.id, std::to_string(u.score)};
      for (Modality m : kAllModalities) {
        const auto& block = u.block(m);
        if (block.size() != ModalityColumns(m).size()) {
          throw ValidationError("user '" + u.id + "' has a " +
                                std::string(ModalityName(m)) +
                                " block of unexpected size");
        }
        for (double x : block) row.push_back(FormatDouble(x));
      }
      w.Row(row);
    }
    WriteTextFile(dir / "users.csv", os.str());
  }

  std::size_t d_t = 0;
  {
    std::ostringstream os;
    CsvWriter w(os);
    w.Row({"id", "name", "origin"});
    for (const TopicNode& t : data.topics) {
      w.Row({t.id, t.name, std::string(OriginName(t.origin))});
      d_t = std::max(d_t, t.embedding.size());
    }
    WriteTextFile(dir / "topics.csv", os.str());
  }

  if (d_t > 0) {
    std::ostringstream os;
    CsvWriter w(os);
    std::vector<std::string> header = {"id"};
    for (std::size_t i = 0; i < d_t; ++i) header.push_back("e" + std::to_string(i));
    w.Row(header);
    for (const TopicNode& t : data.topics) {
      std::vector<std::string> row = {t.id};
      for (double x : t.embedding) row.push_back(FormatDouble(x));
      w.Row(row);
    }
    WriteTextFile(dir / "topic_embeddings.csv", os.str());
  } else {
    fs::remove(dir / "topic_embeddings.csv");
  }

  {
    std::ostringstream os;
    CsvWriter w(os);
    w.Row({"user_id", "topic_id", "provenance"});
    for (const TopicLink& l : data.ut_links) {
      w.Row({l.user, l.topic, std::string(OriginName(l.origin))});
    }
    WriteTextFile(dir / "ut_edges.csv", os.str());
  }

  if (!data.uu_links.empty()) {
    std::ostringstream os;
    CsvWriter w(os);
    w.Row({"u", "v", "weight", "provenance", "sim_f", "sim_t"});
    for (const UserLink& l : data.uu_links) {
      w.Row({l.u, l.v, FormatDouble(l.weight), std::string(OriginName(l.origin)),
             std::isnan(l.sim_f) ? "" : FormatDouble(l.sim_f),
             std::isnan(l.sim_t) ? "" : FormatDouble(l.sim_t)});
    }
    WriteTextFile(dir / "uu_edges.csv", os.str());
  } else {
    fs::remove(dir / "uu_edges.csv");
  }

  {
    std::ostringstream os;
    for (const UserRecord& u : data.users) {
      nlohmann::json j;
      j["user"] = u.id;
      j["texts"] = u.content;
      os << j.dump() << "\n";
    }
    WriteTextFile(dir / "content.jsonl", os.str());
  }

  Manifest m;
  for (Modality mod : kAllModalities) {
    m.modality_dims[static_cast<std::size_t>(mod)] = ModalityColumns(mod).size();
  }
  m.topic_embedding_dim = d_t;
  m.num_users = data.users.size();
  m.num_topics = data.topics.size();
  m.num_ut_edges = data.ut_links.size();
  m.num_uu_edges = data.uu_links.size();
  WriteTextFile(dir / "manifest.toml", ManifestText(data, m));
}

Manifest ReadManifest(const fs::path& dir) {
  const fs::path path = dir / "manifest.toml";
  if (!fs::exists(path)) throw IoError("missing " + path.string());
  toml::table tbl;
  try {
    tbl = toml::parse_file(path.string());
  } catch (const toml::parse_error& e) {
    throw ParseError("manifest.toml", e.source().begin.line,
                     std::string(e.description()));
  }
  Manifest m;
  for (Modality mod : kAllModalities) {
    const std::string key(1, ModalityLetter(mod));
    const auto v = tbl["modalities"][key].value<std::int64_t>();
    if (!v || *v < 0) {
      throw ParseError("manifest.toml", 1, "missing modalities." + key);
    }
    m.modality_dims[static_cast<std::size_t>(mod)] = static_cast<std::size_t>(*v);
  }
  m.topic_embedding_dim = static_cast<std::size_t>(tbl["topics"]["d_t"].value_or<std::int64_t>(0));
  m.num_users = static_cast<std::size_t>(tbl["counts"]["users"].value_or<std::int64_t>(0));
  m.num_topics = static_cast<std::size_t>(tbl["counts"]["topics"].value_or<std::int64_t>(0));
  m.num_ut_edges = static_cast<std::size_t>(tbl["counts"]["ut_edges"].value_or<std::int64_t>(0));
  m.num_uu_edges = static_cast<std::size_t>(tbl["counts"]["uu_edges"].value_or<std::int64_t>(0));
  return m;
}

Dataset LoadDataset(const fs::path& dir) {
  for (const char* required : {"users.csv", "topics.csv", "ut_edges.csv", "manifest.toml"}) {
    if (!fs::exists(dir / required)) {
      throw IoError("dataset " + dir.string() + " is missing " + required);
    }
  }
  const Manifest manifest = ReadManifest(dir);
  for (Modality mod : kAllModalities) {
    if (manifest.modality_dims[static_cast<std::size_t>(mod)] != ModalityColumns(mod).size()) {
      throw ParseError("manifest.toml", 1,
                       "modality " + std::string(1, ModalityLetter(mod)) +
                           " dimension does not match the users.csv schema");
    }
  }

  Dataset data;
  std::set<std::string> user_ids;
  {
    CsvReader r(dir / "users.csv");
    const std::size_t c_id = r.Column("id");
    const std::size_t c_score = r.Column("score");
    std::vector<std::pair<Modality, std::vector<std::size_t>>> cols;
    for (Modality m : kAllModalities) {
      std::vector<std::size_t> idx;
      for (std::string_view c : ModalityColumns(m)) idx.push_back(r.Column(c));
      cols.emplace_back(m, std::move(idx));
    }
    for (const CsvRow& row : r.rows()) {
      UserRecord u;
      u.id = row.fields[c_id];
      if (u.id.empty()) throw ParseError(r.file(), row.line, "empty user id");
      if (!user_ids.insert(u.id).second) {
        throw ParseError(r.file(), row.line, "duplicate user id '" + u.id + "'");
      }
      long long score = 0;
      if (!ParseInt(row.fields[c_score], score) || score < kMinScore || score > kMaxScore) {
        throw ParseError(r.file(), row.line, "invalid score '" + row.fields[c_score] + "'");
      }
      u.score = static_cast<int>(score);
      for (const auto& [m, idx] : cols) {
        auto& block = u.block(m);
        const auto names = ModalityColumns(m);
        for (std::size_t k = 0; k < idx.size(); ++k) {
          const double x = Number(r, row, idx[k]);
          if (!std::isfinite(x) || x < 0.0 || (IsRatio(names[k]) && x > 1.0)) {
            throw ParseError(r.file(), row.line,
                             "column '" + std::string(names[k]) + "' value " +
                                 row.fields[idx[k]] + " out of range");
          }
          block.push_back(x);
        }
      }
      data.users.push_back(std::move(u));
    }
  }

  std::unordered_map<std::string, std::size_t> topic_pos;
  {
    CsvReader r(dir / "topics.csv");
    const std::size_t c_id = r.Column("id");
    const std::size_t c_name = r.Column("name");
    const std::size_t c_origin = r.Column("origin");
    for (const CsvRow& row : r.rows()) {
      TopicNode t;
      t.id = row.fields[c_id];
      t.name = row.fields[c_name];
      const std::string& o = row.fields[c_origin];
      if (o == "Original") {
        t.origin = TopicOrigin::kOriginal;
      } else if (o == "Expanded") {
        t.origin = TopicOrigin::kExpanded;
      } else {
        throw ParseError(r.file(), row.line, "unknown topic origin '" + o + "'");
      }
      if (t.id.empty() || t.name.empty()) {
        throw ParseError(r.file(), row.line, "topic id and name must be nonempty");
      }
      if (!topic_pos.emplace(t.id, data.topics.size()).second) {
        throw ParseError(r.file(), row.line, "duplicate topic id '" + t.id + "'");
      }
      data.topics.push_back(std::move(t));
    }
  }

  if (fs::exists(dir / "topic_embeddings.csv")) {
    CsvReader r(dir / "topic_embeddings.csv");
    const std::size_t c_id = r.Column("id");
    const std::size_t d_t = r.header().size() - 1;
    if (manifest.topic_embedding_dim != 0 && manifest.topic_embedding_dim != d_t) {
      throw ParseError(r.file(), 1, "embedding width disagrees with manifest d_t");
    }
    for (const CsvRow& row : r.rows()) {
      const auto it = topic_pos.find(row.fields[c_id]);
      if (it == topic_pos.end()) {
        throw ParseError(r.file(), row.line, "unknown topic id '" + row.fields[c_id] + "'");
      }
      auto& emb = data.topics[it->second].embedding;
      emb.clear();
      for (std::size_t k = 0; k < r.header().size(); ++k) {
        if (k == c_id) continue;
        emb.push_back(Number(r, row, k));
      }
    }
  }

  {
    CsvReader r(dir / "ut_edges.csv");
    const std::size_t c_user = r.Column("user_id");
    const std::size_t c_topic = r.Column("topic_id");
    const bool has_prov = r.HasColumn("provenance");
    const std::size_t c_prov = has_prov ? r.Column("provenance") : 0;
    for (const CsvRow& row : r.rows()) {
      TopicLink l;
      l.user = row.fields[c_user];
      l.topic = row.fields[c_topic];
      if (!user_ids.count(l.user)) {
        throw ParseError(r.file(), row.line, "unknown user id '" + l.user + "'");
      }
      if (!topic_pos.count(l.topic)) {
        throw ParseError(r.file(), row.line, "unknown topic id '" + l.topic + "'");
      }
      if (has_prov) l.origin = ParseEdgeOrigin(r, row, row.fields[c_prov]);
      data.ut_links.push_back(std::move(l));
    }
  }

  if (fs::exists(dir / "uu_edges.csv")) {
    CsvReader r(dir / "uu_edges.csv");
    const std::size_t c_u = r.Column("u");
    const std::size_t c_v = r.Column("v");
    const bool has_w = r.HasColumn("weight");
    const bool has_prov = r.HasColumn("provenance");
    const bool has_sims = r.HasColumn("sim_f") && r.HasColumn("sim_t");
    for (const CsvRow& row : r.rows()) {
      UserLink l;
      l.u = row.fields[c_u];
      l.v = row.fields[c_v];
      if (!user_ids.count(l.u) || !user_ids.count(l.v)) {
        throw ParseError(r.file(), row.line, "unknown user in edge (" + l.u + ", " + l.v + ")");
      }
      if (has_w) {
        l.weight = Number(r, row, r.Column("weight"));
        if (!(l.weight >= 0.0 && l.weight <= 1.0)) {
          throw ParseError(r.file(), row.line, "edge weight outside [0, 1]");
        }
      }
      if (has_prov) l.origin = ParseEdgeOrigin(r, row, row.fields[r.Column("provenance")]);
      if (has_sims) {
        const std::size_t cf = r.Column("sim_f");
        const std::size_t ct = r.Column("sim_t");
        if (!row.fields[cf].empty()) l.sim_f = Number(r, row, cf);
        if (!row.fields[ct].empty()) l.sim_t = Number(r, row, ct);
      }
      data.uu_links.push_back(std::move(l));
    }
  }

  if (fs::exists(dir / "content.jsonl")) {
    std::unordered_map<std::string, std::size_t> user_pos;
    for (std::size_t i = 0; i < data.users.size(); ++i) user_pos.emplace(data.users[i].id, i);
    std::istringstream in(ReadTextFile(dir / "content.jsonl"));
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (line.empty()) continue;
      nlohmann::json j;
      try {
        j = nlohmann::json::parse(line);
      } catch (const nlohmann::json::exception& e) {
        throw ParseError("content.jsonl", lineno, e.what());
      }
      if (!j.is_object() || !j.contains("user") || !j["user"].is_string() ||
          !j.contains("texts") || !j["texts"].is_array()) {
        throw ParseError("content.jsonl", lineno, "expected {\"user\": id, \"texts\": [...]}");
      }
      const auto it = user_pos.find(j["user"].get<std::string>());
      if (it == user_pos.end()) {
        throw ParseError("content.jsonl", lineno, "unknown user id '" + j["user"].get<std::string>() + "'");
      }
      auto& content = data.users[it->second].content;
      for (const auto& t : j["texts"]) {
        if (!t.is_string()) throw ParseError("content.jsonl", lineno, "texts must be strings");
        content.push_back(t.get<std::string>());
      }
    }
  }
  return data;
}

}  // namespace earlysd
