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

#include "mipscreen/formats.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>

#include "mipscreen/error.hpp"

namespace mipscreen {

namespace {

constexpr std::uint8_t kVersion = 0x01;

class Writer {
 public:
  explicit Writer(std::size_t reserve) { out_.reserve(reserve); }

  void magic(std::string_view tag) { out_.insert(out_.end(), tag.begin(), tag.end()); }
  void u8(std::uint8_t v) { out_.push_back(v); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void f32s(std::span<const float> vs) {
    for (float v : vs) f32(v);
  }

  Bytes take() { return std::move(out_); }

 private:
  Bytes out_;
};

class Reader {
 public:
  Reader(std::span<const std::uint8_t> bytes, std::string_view format)
      : bytes_(bytes), format_(format) {}

  void header(std::string_view tag) {
    need(tag.size() + 1);
    if (std::memcmp(bytes_.data(), tag.data(), tag.size()) != 0) {
      throw FormatError(std::string(format_) + ": bad magic (expected \"" + std::string(tag) +
                        "\")");
    }
    pos_ = tag.size();
    const std::uint8_t version = u8();
    if (version != kVersion) {
      throw FormatError(std::string(format_) + ": unsupported version " +
                        std::to_string(version) + " (expected 1)");
    }
  }

  // Checks the whole payload size up front so a truncated file reports the
  // expected and actual byte counts.
  void expect_total(std::uint64_t total) {
    if (bytes_.size() != total) {
      throw FormatError(std::string(format_) + ": size mismatch, expected " +
                        std::to_string(total) + " bytes, found " +
                        std::to_string(bytes_.size()));
    }
  }

  std::uint8_t u8() {
    need(1);
    return bytes_[pos_++];
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes_[pos_ + i]) << (8 * i);
    pos_ += 4;
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(bytes_[pos_ + i]) << (8 * i);
    pos_ += 8;
    return v;
  }
  float f32() { return std::bit_cast<float>(u32()); }
  double f64() { return std::bit_cast<double>(u64()); }
  void f32s(std::span<float> out) {
    for (float& v : out) v = f32();
  }
  std::span<const std::uint8_t> raw(std::size_t n) {
    need(n);
    auto s = bytes_.subspan(pos_, n);
    pos_ += n;
    return s;
  }

 private:
  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) {
      throw FormatError(std::string(format_) + ": truncated, expected at least " +
                        std::to_string(pos_ + n) + " bytes, found " +
                        std::to_string(bytes_.size()));
    }
  }

  std::span<const std::uint8_t> bytes_;
  std::string_view format_;
  std::size_t pos_ = 0;
};

std::uint32_t checked_u32(std::size_t v, const char* what) {
  if (v > 0xFFFFFFFFu) throw InvalidArgument(std::string(what) + " does not fit in u32");
  return static_cast<std::uint32_t>(v);
}

}  // namespace

// --- EMB1 -------------------------------------------------------------------

Bytes encode_embeddings(const EmbeddingMatrix& matrix) {
  Writer w(13 + matrix.values().size() * 4);
  w.magic("EMB1");
  w.u8(kVersion);
  w.u32(checked_u32(matrix.count(), "count"));
  w.u32(checked_u32(matrix.dim(), "dim"));
  w.f32s(matrix.values());
  return w.take();
}

EmbeddingMatrix decode_embeddings(std::span<const std::uint8_t> bytes) {
  Reader r(bytes, "EMB1");
  r.header("EMB1");
  const std::uint64_t count = r.u32();
  const std::uint64_t dim = r.u32();
  r.expect_total(13 + count * dim * 4);
  EmbeddingMatrix m(count, dim);
  r.f32s(std::span<float>(m.data(), count * dim));
  return m;
}

// --- SCRN -------------------------------------------------------------------

Bytes encode_model(const ScreeningModel& model) {
  model.validate();
  const std::size_t k = model.num_clusters();
  const std::size_t n = model.num_candidates();
  const std::size_t d = model.dim();
  const std::size_t subset_bytes = (n + 7) / 8;
  Writer w(25 + k * d * 4 + k * subset_bytes);
  w.magic("SCRN");
  w.u8(kVersion);
  w.u32(checked_u32(k, "K"));
  w.u32(checked_u32(n, "N"));
  w.u32(checked_u32(d, "D"));
  w.f64(model.lambda);
  w.f32s(model.centroids.values());
  for (const auto& s : model.subsets) {
    for (std::size_t b = 0; b < subset_bytes; ++b) {
      std::uint8_t byte = 0;
      for (std::size_t bit = 0; bit < 8; ++bit) {
        const std::size_t j = b * 8 + bit;
        if (j < n && s.test(j)) byte |= static_cast<std::uint8_t>(1U << bit);
      }
      w.u8(byte);
    }
  }
  return w.take();
}

ScreeningModel decode_model(std::span<const std::uint8_t> bytes) {
  Reader r(bytes, "SCRN");
  r.header("SCRN");
  const std::uint64_t k = r.u32();
  const std::uint64_t n = r.u32();
  const std::uint64_t d = r.u32();
  const std::uint64_t subset_bytes = (n + 7) / 8;
  r.expect_total(25 + k * d * 4 + k * subset_bytes);
  ScreeningModel model;
  model.lambda = r.f64();
  model.centroids = EmbeddingMatrix(k, d);
  r.f32s(std::span<float>(model.centroids.data(), k * d));
  model.subsets.reserve(k);
  for (std::uint64_t c = 0; c < k; ++c) {
    BitSet s(n);
    const auto raw = r.raw(subset_bytes);
    for (std::uint64_t j = 0; j < n; ++j) {
      if ((raw[j / 8] >> (j % 8)) & 1U) s.set(j);
    }
    for (std::uint64_t j = n; j < subset_bytes * 8; ++j) {
      if ((raw[j / 8] >> (j % 8)) & 1U) {
        throw FormatError("SCRN: padding bits set past N in subset " + std::to_string(c));
      }
    }
    model.subsets.push_back(std::move(s));
  }
  try {
    model.validate();
  } catch (const InvalidArgument& e) {
    throw FormatError(std::string("SCRN: ") + e.what());
  }
  return model;
}

// --- DENC -------------------------------------------------------------------

Bytes encode_encoder(const DualEncoder& encoder) {
  encoder.validate();
  Writer w(13 + encoder.context_map.size() * 8);
  w.magic("DENC");
  w.u8(kVersion);
  w.u32(checked_u32(encoder.features, "F"));
  w.u32(checked_u32(encoder.embedding, "D"));
  w.f32s(encoder.context_map);
  w.f32s(encoder.response_map);
  return w.take();
}

DualEncoder decode_encoder(std::span<const std::uint8_t> bytes) {
  Reader r(bytes, "DENC");
  r.header("DENC");
  const std::uint64_t f = r.u32();
  const std::uint64_t d = r.u32();
  r.expect_total(13 + 2 * f * d * 4);
  DualEncoder enc(f, d);
  r.f32s(enc.context_map);
  r.f32s(enc.response_map);
  return enc;
}

// --- PRS1 -------------------------------------------------------------------

Bytes encode_pairs(const PairFile& file) {
  const std::size_t f = file.features;
  Writer w(21 + file.pairs.size() * (8 * f + 1));
  w.magic("PRS1");
  w.u8(kVersion);
  w.u32(checked_u32(file.pairs.size(), "pair count"));
  w.u32(checked_u32(f, "F"));
  w.u64(file.teacher_seed);
  for (const auto& p : file.pairs) {
    if (p.context.size() != f || p.response.size() != f) {
      throw InvalidArgument("pair feature length differs from F");
    }
    if (p.label > 1) throw InvalidArgument("pair label must be 0 or 1");
    w.f32s(p.context);
    w.f32s(p.response);
    w.u8(p.label);
  }
  return w.take();
}

PairFile decode_pairs(std::span<const std::uint8_t> bytes) {
  Reader r(bytes, "PRS1");
  r.header("PRS1");
  const std::uint64_t count = r.u32();
  const std::uint64_t f = r.u32();
  r.expect_total(21 + count * (8 * f + 1));
  PairFile file;
  file.features = f;
  file.teacher_seed = r.u64();
  file.pairs.resize(count);
  for (auto& p : file.pairs) {
    p.context.resize(f);
    p.response.resize(f);
    r.f32s(p.context);
    r.f32s(p.response);
    p.label = r.u8();
    if (p.label > 1) throw FormatError("PRS1: label byte must be 0 or 1");
  }
  return file;
}

// --- files ------------------------------------------------------------------

Bytes read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  Bytes bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return bytes;
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("short write to '" + path.string() + "'");
}

namespace {

template <class Decode>
auto decode_file(const std::filesystem::path& path, Decode decode) {
  const Bytes bytes = read_file(path);
  try {
    return decode(bytes);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

}  // namespace

void write_embeddings(const EmbeddingMatrix& matrix, const std::filesystem::path& path) {
  write_file(path, encode_embeddings(matrix));
}
EmbeddingMatrix read_embeddings(const std::filesystem::path& path) {
  return decode_file(path, decode_embeddings);
}

void write_model(const ScreeningModel& model, const std::filesystem::path& path) {
  write_file(path, encode_model(model));
}
ScreeningModel read_model(const std::filesystem::path& path) {
  return decode_file(path, decode_model);
}

void write_encoder(const DualEncoder& encoder, const std::filesystem::path& path) {
  write_file(path, encode_encoder(encoder));
}
DualEncoder read_encoder(const std::filesystem::path& path) {
  return decode_file(path, decode_encoder);
}

void write_pairs(const PairFile& file, const std::filesystem::path& path) {
  write_file(path, encode_pairs(file));
}
PairFile read_pairs(const std::filesystem::path& path) { return decode_file(path, decode_pairs); }

void write_labels(std::span<const std::uint32_t> labels, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  for (auto l : labels) out << l << '\n';
  if (!out) throw IoError("short write to '" + path.string() + "'");
}

std::vector<std::uint32_t> read_labels(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  std::vector<std::uint32_t> labels;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::size_t used = 0;
    unsigned long v = 0;
    try {
      v = std::stoul(line, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != line.size() || v > 0xFFFFFFFFul) {
      throw FormatError(path.string() + ":" + std::to_string(line_no) + ": bad label '" + line +
                        "'");
    }
    labels.push_back(static_cast<std::uint32_t>(v));
  }
  return labels;
}

}  // namespace mipscreen
