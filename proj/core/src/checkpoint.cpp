// Copyright 2026 The JuryLearn Authors
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

// Layout (all integers little-endian):
//   "JURYCKPT" u32 version u32 reserved
//   str config_json
//   u64 n_annotators { str id, u64 k, k x u64 group row }
//   u64 n_attributes { str name, u64 n, n x str value }
//   u64 n_blocks { str name, u64 rows, u64 cols, rows*cols x f64 }
//   u64 fnv1a64 of every preceding byte
// where str = u64 length + bytes.

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "jury/config_json.hpp"
#include "jury/error.hpp"
#include "jury/model.hpp"

namespace jury {

namespace {

constexpr char kMagic[8] = {'J', 'U', 'R', 'Y', 'C', 'K', 'P', 'T'};

class Writer {
 public:
  void Bytes(const void* p, std::size_t n) {
    const auto* c = static_cast<const char*>(p);
    buf_.append(c, n);
  }
  void U32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) buf_.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  }
  void U64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) buf_.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  }
  void F64(double d) { U64(std::bit_cast<std::uint64_t>(d)); }
  void Str(const std::string& s) {
    U64(s.size());
    Bytes(s.data(), s.size());
  }
  const std::string& buffer() const { return buf_; }

 private:
  std::string buf_;
};

class Reader {
 public:
  explicit Reader(std::string_view data) : data_(data) {}

  void Need(std::size_t n) const {
    if (data_.size() - pos_ < n) {
      throw Error(ErrorCode::kCorruptCheckpoint, "checkpoint truncated");
    }
  }
  std::uint32_t U32() {
    Need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= std::uint32_t(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i);
    pos_ += 4;
    return v;
  }
  std::uint64_t U64() {
    Need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= std::uint64_t(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i);
    pos_ += 8;
    return v;
  }
  double F64() { return std::bit_cast<double>(U64()); }
  std::uint64_t Count(std::size_t min_bytes_each) {
    const std::uint64_t n = U64();
    if (min_bytes_each > 0 && n > (data_.size() - pos_) / min_bytes_each) {
      throw Error(ErrorCode::kCorruptCheckpoint, "checkpoint count exceeds file size");
    }
    return n;
  }
  std::string Str() {
    const std::uint64_t n = Count(1);
    Need(n);
    std::string s(data_.substr(pos_, n));
    pos_ += n;
    return s;
  }
  std::size_t pos() const { return pos_; }

 private:
  std::string_view data_;
  std::size_t pos_ = 0;
};

Json SidecarJson(const JuryModel& model) {
  return Json{{"format_version", kCheckpointVersion},
              {"kind", ModelKindName(model.kind())},
              {"config", model.config()},
              {"metadata", model.metadata()}};
}

}  // namespace

void SaveCheckpoint(const JuryModel& model, const std::filesystem::path& path) {
  Writer w;
  w.Bytes(kMagic, sizeof(kMagic));
  w.U32(kCheckpointVersion);
  w.U32(0);
  w.Str(SidecarJson(model).dump());
  w.U64(model.annotator_ids_.size());
  for (std::size_t i = 0; i < model.annotator_ids_.size(); ++i) {
    w.Str(model.annotator_ids_[i]);
    w.U64(model.annotator_groups_[i].size());
    for (std::size_t r : model.annotator_groups_[i]) w.U64(r);
  }
  w.U64(model.attributes_.size());
  for (std::size_t k = 0; k < model.attributes_.size(); ++k) {
    w.Str(model.attributes_[k]);
    w.U64(model.values_[k].size());
    for (const auto& v : model.values_[k]) w.Str(v);
  }
  const auto blocks = model.Blocks();
  w.U64(blocks.size());
  for (const Tensor* t : blocks) {
    w.Str(t->name);
    w.U64(t->rows);
    w.U64(t->cols);
    for (double d : t->data) w.F64(d);
  }
  const std::uint64_t checksum = Fnv1a64(w.buffer());
  w.U64(checksum);

  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::kIoError, "cannot write checkpoint", path.string());
    out.write(w.buffer().data(), static_cast<std::streamsize>(w.buffer().size()));
    if (!out) throw Error(ErrorCode::kIoError, "failed writing checkpoint", path.string());
  }
  std::filesystem::path sidecar = path;
  sidecar += ".json";
  WriteJsonFile(sidecar, SidecarJson(model));
}

JuryModel LoadCheckpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open checkpoint", path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string data = ss.str();

  if (data.size() < sizeof(kMagic) + 8 ||
      std::memcmp(data.data(), kMagic, sizeof(kMagic)) != 0) {
    throw Error(ErrorCode::kCorruptCheckpoint, "not a checkpoint file", path.string());
  }
  Reader header(std::string_view(data).substr(sizeof(kMagic)));
  const std::uint32_t version = header.U32();
  if (version != kCheckpointVersion) {
    throw Error(ErrorCode::kVersionMismatch, "unsupported checkpoint version",
                "file=" + std::to_string(version) + " expected=" + std::to_string(kCheckpointVersion));
  }
  if (data.size() < sizeof(kMagic) + 16 + 8) {
    throw Error(ErrorCode::kCorruptCheckpoint, "checkpoint truncated", path.string());
  }
  const std::string_view payload(data.data(), data.size() - 8);
  Reader tail(std::string_view(data).substr(data.size() - 8));
  if (Fnv1a64(payload) != tail.U64()) {
    throw Error(ErrorCode::kCorruptCheckpoint, "checkpoint checksum mismatch", path.string());
  }

  Reader body(payload.substr(sizeof(kMagic) + 8));
  JuryModel m;
  try {
    const Json meta = Json::parse(body.Str());
    m.kind_ = ParseModelKind(meta.at("kind").get<std::string>());
    m.config_ = meta.at("config").get<ModelConfig>();
    m.metadata_ = meta.at("metadata").get<TrainingMetadata>();
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::kCorruptCheckpoint, "checkpoint header JSON invalid", e.what());
  }
  const std::uint64_t n_annotators = body.Count(16);
  for (std::uint64_t i = 0; i < n_annotators; ++i) {
    m.annotator_ids_.push_back(body.Str());
    const std::uint64_t k = body.Count(8);
    std::vector<std::size_t> rows(k);
    for (auto& x : rows) x = body.U64();
    m.annotator_groups_.push_back(std::move(rows));
  }
  const std::uint64_t n_attributes = body.Count(16);
  for (std::uint64_t k = 0; k < n_attributes; ++k) {
    m.attributes_.push_back(body.Str());
    const std::uint64_t n = body.Count(8);
    std::vector<std::string> values;
    for (std::uint64_t v = 0; v < n; ++v) values.push_back(body.Str());
    m.values_.push_back(std::move(values));
  }
  for (const auto& g : m.annotator_groups_) {
    if (g.size() != m.attributes_.size()) {
      throw Error(ErrorCode::kCorruptCheckpoint, "annotator group rows disagree with schema");
    }
    for (std::size_t k = 0; k < g.size(); ++k) {
      if (g[k] > m.values_[k].size()) throw Error(ErrorCode::kCorruptCheckpoint, "group row out of range");
    }
  }
  m.BuildIndex();
  m.BuildLayout();
  m.encoder_ = ContentEncoder(m.config_.encoder);

  auto blocks = m.Blocks();
  const std::uint64_t n_blocks = body.Count(24);
  if (n_blocks != blocks.size()) {
    throw Error(ErrorCode::kShapeMismatch, "checkpoint block count differs from config");
  }
  for (Tensor* t : blocks) {
    const std::string name = body.Str();
    const std::uint64_t rows = body.U64();
    const std::uint64_t cols = body.U64();
    if (name != t->name || rows != t->rows || cols != t->cols) {
      throw Error(ErrorCode::kShapeMismatch, "checkpoint block shape differs from config", name);
    }
    body.Need(rows * cols * 8);
    for (auto& d : t->data) d = body.F64();
  }
  return m;
}

}  // namespace jury
