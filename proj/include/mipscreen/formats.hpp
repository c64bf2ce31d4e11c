// Copyright 2026 The mipscreen Authors.
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

#pragma once

// Binary persistence. All integers and floats are little-endian regardless
// of host.
//
//   EMB1: "EMB1" 0x01 u32 count u32 dim, count*dim f32 (row-major)
//   SCRN: "SCRN" 0x01 u32 K u32 N u32 D f64 lambda, K*D f32 centroids,
//         K subsets of ceil(N/8) bytes (bit j at byte j/8, bit j%8)
//   DENC: "DENC" 0x01 u32 F u32 D, F*D f32 context map, F*D f32 response map
//   PRS1: "PRS1" 0x01 u32 count u32 F u64 teacher_seed, then per pair
//         F f32 context, F f32 response, u8 label
//
// Labels are stored as text, one candidate id per line.

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "mipscreen/distillation.hpp"
#include "mipscreen/embedding.hpp"
#include "mipscreen/screening.hpp"

namespace mipscreen {

using Bytes = std::vector<std::uint8_t>;

Bytes encode_embeddings(const EmbeddingMatrix& matrix);
EmbeddingMatrix decode_embeddings(std::span<const std::uint8_t> bytes);

Bytes encode_model(const ScreeningModel& model);
ScreeningModel decode_model(std::span<const std::uint8_t> bytes);

Bytes encode_encoder(const DualEncoder& encoder);
DualEncoder decode_encoder(std::span<const std::uint8_t> bytes);

struct PairFile {
  std::size_t features = 0;
  std::uint64_t teacher_seed = 0;
  std::vector<LabeledPair> pairs;
};

Bytes encode_pairs(const PairFile& file);
PairFile decode_pairs(std::span<const std::uint8_t> bytes);

Bytes read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

void write_embeddings(const EmbeddingMatrix& matrix, const std::filesystem::path& path);
EmbeddingMatrix read_embeddings(const std::filesystem::path& path);

void write_model(const ScreeningModel& model, const std::filesystem::path& path);
ScreeningModel read_model(const std::filesystem::path& path);

void write_encoder(const DualEncoder& encoder, const std::filesystem::path& path);
DualEncoder read_encoder(const std::filesystem::path& path);

void write_pairs(const PairFile& file, const std::filesystem::path& path);
PairFile read_pairs(const std::filesystem::path& path);

void write_labels(std::span<const std::uint32_t> labels, const std::filesystem::path& path);
std::vector<std::uint32_t> read_labels(const std::filesystem::path& path);

}  // namespace mipscreen
