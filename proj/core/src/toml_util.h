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

#ifndef EARLYSD_SRC_TOML_UTIL_H_
#define EARLYSD_SRC_TOML_UTIL_H_

// Typed reads from toml++ tables that report problems as ConfigError.
// Library-internal; not installed.

#include <cstdint>
#include <initializer_list>
#include <string>
#include <string_view>
#include <vector>

#include <toml++/toml.hpp>

#include "earlysd/error.h"

namespace earlysd::internal {

inline toml::table ParseToml(std::string_view text, const std::string& source) {
  try {
    return toml::parse(text, source);
  } catch (const toml::parse_error& e) {
    throw ConfigError(source + ":" + std::to_string(e.source().begin.line) + ": " +
                      std::string(e.description()));
  }
}

// Rejects keys outside `allowed` so that typos do not pass silently.
inline void CheckKeys(const toml::table& t, std::initializer_list<std::string_view> allowed,
                      const std::string& where) {
  for (const auto& [key, node] : t) {
    bool ok = false;
    for (auto a : allowed) ok = ok || key.str() == a;
    if (!ok) throw ConfigError(where + ": unknown key '" + std::string(key.str()) + "'");
  }
}

inline double ReadDouble(const toml::table& t, std::string_view key, double fallback,
                         const std::string& where) {
  const toml::node* n = t.get(key);
  if (!n) return fallback;
  if (auto v = n->value<double>()) return *v;
  throw ConfigError(where + ": '" + std::string(key) + "' must be a number");
}

inline std::int64_t ReadInt(const toml::table& t, std::string_view key, std::int64_t fallback,
                            const std::string& where) {
  const toml::node* n = t.get(key);
  if (!n) return fallback;
  if (n->is_integer()) return *n->value<std::int64_t>();
  throw ConfigError(where + ": '" + std::string(key) + "' must be an integer");
}

inline std::size_t ReadSize(const toml::table& t, std::string_view key, std::size_t fallback,
                            const std::string& where) {
  const std::int64_t v = ReadInt(t, key, static_cast<std::int64_t>(fallback), where);
  if (v < 0) throw ConfigError(where + ": '" + std::string(key) + "' must be >= 0");
  return static_cast<std::size_t>(v);
}

inline bool ReadBool(const toml::table& t, std::string_view key, bool fallback,
                     const std::string& where) {
  const toml::node* n = t.get(key);
  if (!n) return fallback;
  if (auto v = n->value<bool>()) return *v;
  throw ConfigError(where + ": '" + std::string(key) + "' must be a boolean");
}

inline std::string ReadString(const toml::table& t, std::string_view key,
                              const std::string& fallback, const std::string& where) {
  const toml::node* n = t.get(key);
  if (!n) return fallback;
  if (auto v = n->value<std::string>()) return *v;
  throw ConfigError(where + ": '" + std::string(key) + "' must be a string");
}

inline std::vector<double> ReadDoubleArray(const toml::table& t, std::string_view key,
                                           const std::vector<double>& fallback,
                                           const std::string& where) {
  const toml::node* n = t.get(key);
  if (!n) return fallback;
  const toml::array* arr = n->as_array();
  if (!arr) throw ConfigError(where + ": '" + std::string(key) + "' must be an array");
  std::vector<double> out;
  for (const auto& e : *arr) {
    auto v = e.value<double>();
    if (!v) throw ConfigError(where + ": '" + std::string(key) + "' must hold numbers");
    out.push_back(*v);
  }
  return out;
}

inline std::vector<std::string> ReadStringArray(const toml::table& t, std::string_view key,
                                                const std::vector<std::string>& fallback,
                                                const std::string& where) {
  const toml::node* n = t.get(key);
  if (!n) return fallback;
  const toml::array* arr = n->as_array();
  if (!arr) throw ConfigError(where + ": '" + std::string(key) + "' must be an array");
  std::vector<std::string> out;
  for (const auto& e : *arr) {
    auto v = e.value<std::string>();
    if (!v) throw ConfigError(where + ": '" + std::string(key) + "' must hold strings");
    out.push_back(*v);
  }
  return out;
}

inline const toml::table* SubTable(const toml::table& t, std::string_view key,
                                   const std::string& where) {
  const toml::node* n = t.get(key);
  if (!n) return nullptr;
  if (const toml::table* sub = n->as_table()) return sub;
  throw ConfigError(where + ": '" + std::string(key) + "' must be a table");
}

}  // namespace earlysd::internal

#endif  // EARLYSD_SRC_TOML_UTIL_H_
