// eslu/archive.cpp

// Copyright 2026 The eslu Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include "eslu/archive.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <set>

#include "eslu/error.hpp"

namespace eslu {

namespace fs = std::filesystem;

namespace {

constexpr char kArkMagic[6] = {'F', 'A', 'R', 'K', '1', '\0'};
constexpr char kCkptMagic[6] = {'F', 'C', 'K', 'P', '1', '\0'};

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_f32(std::string& out, float v) { put_u32(out, std::bit_cast<std::uint32_t>(v)); }

/// Bounds-checked little-endian cursor over a byte buffer.
class Reader {
 public:
  Reader(const std::string& bytes, std::size_t pos, std::string what)
      : bytes_(bytes), pos_(pos), what_(std::move(what)) {}

  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) {
      v |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
    }
    pos_ += 4;
    return v;
  }
  float f32() { return std::bit_cast<float>(u32()); }
  std::string str(std::size_t n) {
    need(n);
    std::string s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  bool done() const { return pos_ >= bytes_.size(); }
  void need(std::size_t n) const {
    if (pos_ + n > bytes_.size()) throw ValidationError(what_ + ": truncated record");
  }

 private:
  const std::string& bytes_;
  std::size_t pos_;
  std::string what_;
};

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void dump(const fs::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace

std::vector<ArchiveIndexEntry> write_feature_archive(std::span<const NamedFeatures> features,
                                                     const fs::path& ark_path,
                                                     const fs::path& scp_path) {
  std::set<std::string> seen;
  std::string bytes(kArkMagic, sizeof kArkMagic);
  std::vector<ArchiveIndexEntry> index;
  for (const auto& [id, m] : features) {
    if (id.empty()) throw ValidationError("archive: empty utterance id");
    if (!seen.insert(id).second) throw ValidationError("archive: duplicate utterance id " + id);
    if (m.rows() == 0 || m.dim() == 0) throw ValidationError("archive: empty matrix for " + id);
    if (!m.data.allFinite()) throw ValidationError("archive: non-finite value in " + id);
    index.push_back({id, ark_path.string(), bytes.size()});
    put_u32(bytes, static_cast<std::uint32_t>(id.size()));
    bytes += id;
    put_u32(bytes, static_cast<std::uint32_t>(m.rows()));
    put_u32(bytes, static_cast<std::uint32_t>(m.dim()));
    put_f32(bytes, static_cast<float>(m.frame_shift_ms));
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      for (Eigen::Index c = 0; c < m.dim(); ++c) put_f32(bytes, static_cast<float>(m.data(r, c)));
    }
  }
  dump(ark_path, bytes);
  write_scp(scp_path, index);
  return index;
}

FeatureMatrix read_feature(const ArchiveIndexEntry& entry) {
  std::ifstream in(entry.archive_path, std::ios::binary);
  if (!in) throw IoError("cannot open " + entry.archive_path);
  char magic[sizeof kArkMagic];
  if (!in.read(magic, sizeof magic) || std::memcmp(magic, kArkMagic, sizeof magic) != 0) {
    throw ValidationError(entry.archive_path + ": bad archive magic");
  }
  in.seekg(0, std::ios::end);
  const auto file_size = static_cast<std::uint64_t>(in.tellg());
  if (entry.byte_offset < sizeof kArkMagic || entry.byte_offset >= file_size) {
    throw ValidationError(entry.archive_path + ": offset " + std::to_string(entry.byte_offset) +
                          " outside archive");
  }
  in.seekg(static_cast<std::streamoff>(entry.byte_offset));

  // Header first, then exactly the payload it announces.
  auto read_block = [&](std::size_t n) {
    std::string block(n, '\0');
    if (!in.read(block.data(), static_cast<std::streamsize>(n))) {
      throw ValidationError(entry.archive_path + ": truncated record for " + entry.utt_id);
    }
    return block;
  };
  std::string head = read_block(4);
  const std::uint32_t id_len = Reader(head, 0, entry.archive_path).u32();
  if (id_len != entry.utt_id.size() || read_block(id_len) != entry.utt_id) {
    throw ValidationError(entry.archive_path + ": record at offset " +
                          std::to_string(entry.byte_offset) + " is not " + entry.utt_id);
  }
  head = read_block(12);
  Reader hd(head, 0, entry.archive_path);
  const std::uint32_t rows = hd.u32();
  const std::uint32_t cols = hd.u32();
  FeatureMatrix m;
  m.frame_shift_ms = hd.f32();
  const std::uint64_t payload_bytes = static_cast<std::uint64_t>(rows) * cols * 4;
  if (rows == 0 || cols == 0 || payload_bytes > file_size) {
    throw ValidationError(entry.archive_path + ": corrupt record header for " + entry.utt_id);
  }
  const std::string payload = read_block(static_cast<std::size_t>(payload_bytes));
  Reader rd(payload, 0, entry.archive_path);
  m.data.resize(rows, cols);
  for (std::uint32_t r = 0; r < rows; ++r) {
    for (std::uint32_t c = 0; c < cols; ++c) m.data(r, c) = rd.f32();
  }
  return m;
}

std::vector<ArchiveIndexEntry> read_scp(const fs::path& scp_path) {
  std::ifstream in(scp_path);
  if (!in) throw IoError("cannot open " + scp_path.string());
  std::vector<ArchiveIndexEntry> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto space = line.find(' ');
    const auto colon = line.rfind(':');
    if (space == std::string::npos || colon == std::string::npos || colon < space) {
      throw ValidationError(scp_path.string() + ":" + std::to_string(line_no) +
                            ": expected \"<utt_id> <ark_path>:<offset>\"");
    }
    ArchiveIndexEntry e;
    e.utt_id = line.substr(0, space);
    e.archive_path = line.substr(space + 1, colon - space - 1);
    try {
      std::size_t used = 0;
      e.byte_offset = std::stoull(line.substr(colon + 1), &used);
      if (used != line.size() - colon - 1) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw ValidationError(scp_path.string() + ":" + std::to_string(line_no) + ": bad offset");
    }
    out.push_back(std::move(e));
  }
  return out;
}

void write_scp(const fs::path& scp_path, std::span<const ArchiveIndexEntry> entries) {
  std::string text;
  for (const auto& e : entries) {
    text += e.utt_id + " " + e.archive_path + ":" + std::to_string(e.byte_offset) + "\n";
  }
  dump(scp_path, text);
}

std::size_t NamedTensor::numel() const {
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

std::string encode_tensor_file(std::span<const NamedTensor> tensors) {
  std::string bytes(kCkptMagic, sizeof kCkptMagic);
  std::set<std::string> seen;
  for (const auto& t : tensors) {
    if (!seen.insert(t.name).second) throw ValidationError("duplicate tensor " + t.name);
    if (t.data.size() != t.numel()) {
      throw ValidationError("tensor " + t.name + ": data size does not match shape");
    }
    put_u32(bytes, static_cast<std::uint32_t>(t.name.size()));
    bytes += t.name;
    put_u32(bytes, static_cast<std::uint32_t>(t.shape.size()));
    for (auto d : t.shape) put_u32(bytes, d);
    for (float v : t.data) put_f32(bytes, v);
  }
  return bytes;
}

void write_tensor_file(const fs::path& path, std::span<const NamedTensor> tensors) {
  dump(path, encode_tensor_file(tensors));
}

std::vector<NamedTensor> read_tensor_file(const fs::path& path) {
  const std::string bytes = slurp(path);
  if (bytes.size() < sizeof kCkptMagic ||
      std::memcmp(bytes.data(), kCkptMagic, sizeof kCkptMagic) != 0) {
    throw ValidationError(path.string() + ": bad checkpoint magic");
  }
  Reader rd(bytes, sizeof kCkptMagic, path.string());
  std::vector<NamedTensor> out;
  while (!rd.done()) {
    NamedTensor t;
    t.name = rd.str(rd.u32());
    const std::uint32_t rank = rd.u32();
    if (rank > 8) throw ValidationError(path.string() + ": implausible rank for " + t.name);
    t.shape.resize(rank);
    for (auto& d : t.shape) d = rd.u32();
    const std::size_t n = t.numel();
    rd.need(n * 4);
    t.data.resize(n);
    for (auto& v : t.data) v = rd.f32();
    out.push_back(std::move(t));
  }
  return out;
}

}  // namespace eslu
