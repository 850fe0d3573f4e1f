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

#ifndef EARLYSD_CSV_H_
#define EARLYSD_CSV_H_

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace earlysd {

// Shortest decimal string that parses back to exactly `x`.
std::string FormatDouble(double x);
// Strict full-string parses; return false on any trailing garbage.
bool ParseDouble(std::string_view s, double& out);
bool ParseInt(std::string_view s, long long& out);

// Minimal RFC 4180 reader/writer: comma separated, '"' quoting, LF line ends.
class CsvWriter {
 public:
  explicit CsvWriter(std::ostream& os) : os_(os) {}
  void Row(const std::vector<std::string>& fields);

 private:
  std::ostream& os_;
};

struct CsvRow {
  std::size_t line = 0;  // 1-based, of the row's first line
  std::vector<std::string> fields;
};

class CsvReader {
 public:
  // Throws IoError when the file cannot be opened.
  explicit CsvReader(const std::filesystem::path& path);

  const std::vector<std::string>& header() const { return header_; }
  const std::vector<CsvRow>& rows() const { return rows_; }
  const std::string& file() const { return file_; }
  // Column index; throws ParseError naming the header line.
  std::size_t Column(std::string_view name) const;
  bool HasColumn(std::string_view name) const;

 private:
  std::string file_;
  std::vector<std::string> header_;
  std::vector<CsvRow> rows_;
};

// Writes `contents` to `path`, creating parent directories. Throws IoError.
void WriteTextFile(const std::filesystem::path& path, std::string_view contents);
std::string ReadTextFile(const std::filesystem::path& path);

}  // namespace earlysd

#endif  // EARLYSD_CSV_H_
