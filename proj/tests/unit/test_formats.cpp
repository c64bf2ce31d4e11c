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

#include <doctest.h>

#include <array>
#include <bit>
#include <filesystem>
#include <string>

#include "mipscreen/error.hpp"
#include "mipscreen/formats.hpp"
#include "../support.hpp"

using namespace mipscreen;

namespace {

std::string what_of(auto&& fn) {
  try {
    fn();
  } catch (const FormatError& e) {
    return e.what();
  }
  return {};
}

bool contains(const std::string& s, const std::string& part) {
  return s.find(part) != std::string::npos;
}

ScreeningModel random_model(std::size_t k, std::size_t n, std::size_t d, std::uint64_t seed) {
  ScreeningModel m;
  m.centroids = testing::random_matrix(k, d, seed);
  m.subsets = testing::random_subsets(k, n, seed + 1);
  m.lambda = 1e-6 * (1 + seed);
  return m;
}

}  // namespace

TEST_CASE("EMB1 round trip") {
  const auto m = EmbeddingMatrix::from_rows({{1, -2}, {3.5f, 0}, {-0.0f, 1e-30f}});
  const auto bytes = encode_embeddings(m);
  CHECK(bytes.size() == 13 + 3 * 2 * 4);
  const auto back = decode_embeddings(bytes);
  CHECK(back == m);
  CHECK(encode_embeddings(back) == bytes);
  CHECK(encode_embeddings(EmbeddingMatrix(0, 4)).size() == 13);
}

TEST_CASE("EMB1 diagnostics") {
  auto bytes = encode_embeddings(testing::random_matrix(3, 2, 1));
  auto cut = bytes;
  cut.resize(cut.size() - 3);
  const auto msg = what_of([&] { decode_embeddings(cut); });
  CHECK(contains(msg, "expected 37"));
  CHECK(contains(msg, "found 34"));

  auto magic = bytes;
  magic[0] = 'X';
  CHECK(contains(what_of([&] { decode_embeddings(magic); }), "bad magic"));
  auto version = bytes;
  version[4] = 2;
  CHECK(contains(what_of([&] { decode_embeddings(version); }), "version"));
  CHECK(contains(what_of([&] { decode_embeddings(std::span(bytes.data(), 5)); }), "truncated"));
}

TEST_CASE("SCRN round trip and diagnostics") {
  const auto m = random_model(3, 70, 5, 2);
  const auto bytes = encode_model(m);
  CHECK(decode_model(bytes) == m);
  auto cut = bytes;
  cut.pop_back();
  CHECK(contains(what_of([&] { decode_model(cut); }), "size mismatch"));
  auto pad = bytes;
  pad.back() |= 0x80;  // bit 71 lies past N = 70
  CHECK(contains(what_of([&] { decode_model(pad); }), "padding"));
  auto bad = bytes;
  const auto two = std::bit_cast<std::array<std::uint8_t, 8>>(2.0);
  std::copy(two.begin(), two.end(), bad.begin() + 17);
  CHECK(contains(what_of([&] { decode_model(bad); }), "lambda"));
}

TEST_CASE("DENC and PRS1 round trips") {
  const auto enc = DualEncoder::random(5, 3, 4, 0.3);
  CHECK(decode_encoder(encode_encoder(enc)) == enc);

  PairFile file{3, 77, {}};
  for (std::uint8_t i = 0; i < 4; ++i) {
    file.pairs.push_back({{1.0f * i, 2, 3}, {4, 5, -1.0f * i}, static_cast<std::uint8_t>(i % 2)});
  }
  const auto back = decode_pairs(encode_pairs(file));
  CHECK(back.features == 3);
  CHECK(back.teacher_seed == 77);
  REQUIRE(back.pairs.size() == 4);
  CHECK(back.pairs[3].response == file.pairs[3].response);
  CHECK(back.pairs[3].label == 1);
}

TEST_CASE("file helpers") {
  const auto dir = std::filesystem::temp_directory_path() / "mipscreen_formats_test";
  std::filesystem::create_directories(dir);
  const auto m = testing::random_matrix(4, 3, 9);
  write_embeddings(m, dir / "m.emb");
  CHECK(read_embeddings(dir / "m.emb") == m);
  const std::vector<std::uint32_t> labels{3, 0, 2};
  write_labels(labels, dir / "l.txt");
  CHECK(read_labels(dir / "l.txt") == labels);
  CHECK_THROWS_AS(read_embeddings(dir / "missing.emb"), IoError);
  write_file(dir / "junk.emb", Bytes{'E', 'M', 'B', '1', 1, 9});
  CHECK(contains(what_of([&] { read_embeddings(dir / "junk.emb"); }), "junk.emb"));
  std::filesystem::remove_all(dir);
}
