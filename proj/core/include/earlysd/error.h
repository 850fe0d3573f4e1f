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

#ifndef EARLYSD_ERROR_H_
#define EARLYSD_ERROR_H_

#include <stdexcept>
#include <string>

namespace earlysd {

// Root of every exception thrown by the library. The CLI maps ConfigError to
// exit code 2 and everything else to exit code 3.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual const char* kind() const noexcept { return "error"; }
};

#define EARLYSD_DEFINE_ERROR(Name, Kind)                          \
  class Name : public Error {                                     \
   public:                                                        \
    using Error::Error;                                           \
    const char* kind() const noexcept override { return Kind; }   \
  };

EARLYSD_DEFINE_ERROR(DomainError, "domain")
EARLYSD_DEFINE_ERROR(ValidationError, "validation")
EARLYSD_DEFINE_ERROR(LookupError, "lookup")
EARLYSD_DEFINE_ERROR(ConfigError, "config")
EARLYSD_DEFINE_ERROR(ShapeError, "shape")
EARLYSD_DEFINE_ERROR(NumericError, "numeric")
EARLYSD_DEFINE_ERROR(TrainingError, "training")
EARLYSD_DEFINE_ERROR(CalibrationError, "calibration")
EARLYSD_DEFINE_ERROR(ProtocolError, "protocol")
EARLYSD_DEFINE_ERROR(IoError, "io")

#undef EARLYSD_DEFINE_ERROR

// Parse failures carry the offending file and 1-based line number.
class ParseError : public Error {
 public:
  ParseError(std::string file, std::size_t line, const std::string& what)
      : Error(file + ":" + std::to_string(line) + ": " + what),
        file_(std::move(file)),
        line_(line) {}
  const char* kind() const noexcept override { return "parse"; }
  const std::string& file() const noexcept { return file_; }
  std::size_t line() const noexcept { return line_; }

 private:
  std::string file_;
  std::size_t line_;
};

}  // namespace earlysd

#endif  // EARLYSD_ERROR_H_
