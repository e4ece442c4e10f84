// eslu/archive.hpp

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

// Binary feature archives (.fark) with text index (.scp), and the FCKP1
// named-tensor file used for checkpoints.
//
// .fark:  "FARK1\0" then per record
//         [u32 id_len][id][u32 rows][u32 cols][f32 frame_shift_ms][f32 row-major data]
// .scp:   "<utt_id> <ark_path>:<byte_offset>" per line, offset of the record
// FCKP1:  "FCKP1\0" then per record
//         [u32 name_len][name][u32 rank][u32 dims...][f32 data...]
// All integers and floats little-endian.

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "eslu/features.hpp"

namespace eslu {

struct ArchiveIndexEntry {
  std::string utt_id;
  std::string archive_path;
  std::uint64_t byte_offset = 0;

  friend bool operator==(const ArchiveIndexEntry&, const ArchiveIndexEntry&) = default;
};

using NamedFeatures = std::pair<std::string, FeatureMatrix>;

/// Writes the archive and its index in the given order. Matrix entries are
/// stored as f32; values already on the f32 grid round-trip exactly.
std::vector<ArchiveIndexEntry> write_feature_archive(std::span<const NamedFeatures> features,
                                                     const std::filesystem::path& ark_path,
                                                     const std::filesystem::path& scp_path);

FeatureMatrix read_feature(const ArchiveIndexEntry& entry);

std::vector<ArchiveIndexEntry> read_scp(const std::filesystem::path& scp_path);
void write_scp(const std::filesystem::path& scp_path, std::span<const ArchiveIndexEntry> entries);

/// One FCKP1 record. A rank-0 tensor holds a single value.
struct NamedTensor {
  std::string name;
  std::vector<std::uint32_t> shape;
  std::vector<float> data;

  std::size_t numel() const;
  friend bool operator==(const NamedTensor&, const NamedTensor&) = default;
};

void write_tensor_file(const std::filesystem::path& path, std::span<const NamedTensor> tensors);
std::vector<NamedTensor> read_tensor_file(const std::filesystem::path& path);

/// Serialized bytes of a tensor file, for in-memory comparisons.
std::string encode_tensor_file(std::span<const NamedTensor> tensors);

}  // namespace eslu
