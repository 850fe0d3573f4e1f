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

#ifndef EARLYSD_TEXT_H_
#define EARLYSD_TEXT_H_

#include <string>
#include <string_view>
#include <vector>

namespace earlysd {

// Trim ASCII whitespace and case-fold ASCII letters. Bytes outside ASCII
// pass through untouched.
std::string CanonicalName(std::string_view s);

// Lower-cased word tokens made of [a-z0-9] plus inner '-' and '\''.
// '#' prefixes and surrounding punctuation are dropped.
std::vector<std::string> Tokenize(std::string_view text);

std::string Join(const std::vector<std::string>& parts, std::string_view sep);

}  // namespace earlysd

#endif  // EARLYSD_TEXT_H_
