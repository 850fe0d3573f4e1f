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

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

#include <toml++/toml.hpp>

#include "earlysd/error.h"
#include "earlysd/model.h"
#include "toml_util.h"

namespace earlysd {
namespace {

constexpr char kMagic[8] = {'E', 'S', 'D', 'C', 'K', 'P', 'T', '1'};
constexpr std::uint32_t kVersion = 1;

void PutU32(std::ostream& os, std::uint32_t v) {
  unsigned char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  os.write(reinterpret_cast<const char*>(b), 4);
}

void PutF64(std::ostream& os, double d) {
  const auto v = std::bit_cast<std::uint64_t>(d);
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  os.write(reinterpret_cast<const char*>(b), 8);
}

class Reader {
 public:
  Reader(std::string data, std::string file) : data_(std::move(data)), file_(std::move(file)) {}

  void Bytes(char* out, std::size_t n) {
    if (pos_ + n > data_.size()) throw ParseError(file_, 0, "truncated checkpoint");
    std::memcpy(out, data_.data() + pos_, n);
    pos_ += n;
  }
  std::uint32_t U32() {
    unsigned char b[4];
    Bytes(reinterpret_cast<char*>(b), 4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
    return v;
  }
  double F64() {
    unsigned char b[8];
    Bytes(reinterpret_cast<char*>(b), 8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return std::bit_cast<double>(v);
  }
  bool done() const { return pos_ == data_.size(); }

 private:
  std::string data_;
  std::string file_;
  std::size_t pos_ = 0;
};

std::filesystem::path Sidecar(const std::filesystem::path& path) {
  return std::filesystem::path(path.string() + ".toml");
}

std::string AggregationName(nn::Aggregation a) {
  return a == nn::Aggregation::kSum ? "sum" : "degree_mean";
}

}  // namespace

void SaveCheckpoint(const EarlySdModel& model, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot write checkpoint " + path.string());
  os.write(kMagic, sizeof(kMagic));
  PutU32(os, kVersion);
  const auto params = model.params();
  PutU32(os, static_cast<std::uint32_t>(params.size()));
  for (const nn::Param* p : params) {
    PutU32(os, static_cast<std::uint32_t>(p->name.size()));
    os.write(p->name.data(), static_cast<std::streamsize>(p->name.size()));
    PutU32(os, static_cast<std::uint32_t>(p->value.rows()));
    PutU32(os, static_cast<std::uint32_t>(p->value.cols()));
    for (Eigen::Index i = 0; i < p->value.size(); ++i) PutF64(os, p->value.data()[i]);
  }
  if (!os) throw IoError("failed writing checkpoint " + path.string());

  const ModelConfig& c = model.config();
  toml::table t{
      {"format_version", static_cast<std::int64_t>(kVersion)},
      {"mask", c.mask.ToString()},
      {"hidden", static_cast<std::int64_t>(c.hidden)},
      {"layers", static_cast<std::int64_t>(c.layers)},
      {"dropout", c.dropout},
      {"lr", c.lr},
      {"weight_decay", c.weight_decay},
      {"max_epochs", static_cast<std::int64_t>(c.max_epochs)},
      {"patience", static_cast<std::int64_t>(c.patience)},
      {"min_epochs", static_cast<std::int64_t>(c.min_epochs)},
      {"aggregation", AggregationName(c.aggregation)},
      {"self_loop", c.self_loop},
      {"homogeneous", c.homogeneous},
      {"learn_edge_weights", c.learn_edge_weights},
      {"seed", static_cast<std::int64_t>(c.seed)},
      {"user_in", static_cast<std::int64_t>(model.user_in())},
      {"topic_in", static_cast<std::int64_t>(model.topic_in())},
  };
  std::ofstream side(Sidecar(path));
  if (!side) throw IoError("cannot write " + Sidecar(path).string());
  side << t << "\n";
}

EarlySdModel LoadCheckpoint(const std::filesystem::path& path) {
  const std::filesystem::path side_path = Sidecar(path);
  std::ifstream side(side_path);
  if (!side) throw IoError("missing checkpoint sidecar " + side_path.string());
  std::stringstream ss;
  ss << side.rdbuf();
  const toml::table t = internal::ParseToml(ss.str(), side_path.string());
  const std::string where = side_path.string();
  if (internal::ReadInt(t, "format_version", -1, where) != kVersion) {
    throw ParseError(where, 0, "unsupported checkpoint format version");
  }
  ModelConfig c;
  c.mask = ModalityMask::Parse(internal::ReadString(t, "mask", "", where));
  c.hidden = internal::ReadSize(t, "hidden", c.hidden, where);
  c.layers = internal::ReadSize(t, "layers", c.layers, where);
  c.dropout = internal::ReadDouble(t, "dropout", c.dropout, where);
  c.lr = internal::ReadDouble(t, "lr", c.lr, where);
  c.weight_decay = internal::ReadDouble(t, "weight_decay", c.weight_decay, where);
  c.max_epochs = internal::ReadSize(t, "max_epochs", c.max_epochs, where);
  c.patience = internal::ReadSize(t, "patience", c.patience, where);
  c.min_epochs = internal::ReadSize(t, "min_epochs", c.min_epochs, where);
  const std::string agg = internal::ReadString(t, "aggregation", "sum", where);
  if (agg == "sum") {
    c.aggregation = nn::Aggregation::kSum;
  } else if (agg == "degree_mean") {
    c.aggregation = nn::Aggregation::kDegreeMean;
  } else {
    throw ParseError(where, 0, "unknown aggregation '" + agg + "'");
  }
  c.self_loop = internal::ReadBool(t, "self_loop", c.self_loop, where);
  c.homogeneous = internal::ReadBool(t, "homogeneous", c.homogeneous, where);
  c.learn_edge_weights = internal::ReadBool(t, "learn_edge_weights", c.learn_edge_weights, where);
  c.seed = static_cast<std::uint64_t>(internal::ReadInt(t, "seed", 1, where));
  const std::size_t user_in = internal::ReadSize(t, "user_in", 0, where);
  const std::size_t topic_in = internal::ReadSize(t, "topic_in", 0, where);
  if (user_in == 0 || topic_in == 0) throw ParseError(where, 0, "missing input dimensions");

  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot read checkpoint " + path.string());
  std::stringstream bs;
  bs << is.rdbuf();
  Reader r(bs.str(), path.string());
  char magic[8];
  r.Bytes(magic, 8);
  if (std::memcmp(magic, kMagic, 8) != 0) throw ParseError(path.string(), 0, "not a checkpoint file");
  if (r.U32() != kVersion) throw ParseError(path.string(), 0, "unsupported checkpoint version");

  EarlySdModel model(c, user_in, topic_in);
  auto params = model.params();
  const std::uint32_t count = r.U32();
  if (count != params.size()) throw ParseError(path.string(), 0, "parameter count mismatch");
  for (nn::Param* p : params) {
    const std::uint32_t len = r.U32();
    std::string name(len, '\0');
    r.Bytes(name.data(), len);
    if (name != p->name) throw ParseError(path.string(), 0, "unexpected parameter '" + name + "'");
    const std::uint32_t rows = r.U32();
    const std::uint32_t cols = r.U32();
    if (rows != p->value.rows() || cols != p->value.cols()) {
      throw ParseError(path.string(), 0, "shape mismatch for '" + name + "'");
    }
    for (Eigen::Index i = 0; i < p->value.size(); ++i) p->value.data()[i] = r.F64();
  }
  if (!r.done()) throw ParseError(path.string(), 0, "trailing bytes in checkpoint");
  return model;
}

}  // namespace earlysd
