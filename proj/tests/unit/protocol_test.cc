// SPDX-License-Identifier: Apache-2.0

#include "wsc/protocol.h"

#include <random>

#include <gtest/gtest.h>

#include "test_util.h"
#include "wsc/binary_io.h"

namespace wsc::protocol {
namespace {

struct Golden {
  const char* file;
  Frame frame;
};

std::vector<Golden> Goldens() {
  return {
      {"hello.bin", Hello{8}},
      {"chunk_event.bin", ChunkEvent{7, 12, {1.0f, -2.5f, 0.25f, 3.0f}}},
      {"decision_continue.bin", Decision{7, 0, 0.125f, 0}},
      {"decision_chop.bin", Decision{7, 1, 0.875f, 4096}},
      {"reset.bin", Reset{7}},
      {"error.bin", ErrorFrame{"dim_mismatch", "hidden_dim 8 != model dim 16"}},
  };
}

std::vector<std::uint8_t> ReadGolden(const char* name) {
  return ReadFileBytes(testing::DataDir() / "golden" / name);
}

TEST(Protocol, GoldensDecodeAndReencode) {
  for (const auto& g : Goldens()) {
    const auto bytes = ReadGolden(g.file);
    EXPECT_EQ(Decode(bytes), g.frame) << g.file;
    EXPECT_EQ(Encode(g.frame), bytes) << g.file;
  }
}

TEST(Protocol, HelloBytes) {
  const std::vector<std::uint8_t> expected = {4, 0, 0, 0, 0x01, 8, 0, 0, 0};
  EXPECT_EQ(Encode(Hello{8}), expected);
}

TEST(Protocol, RandomRoundTrip) {
  std::mt19937_64 rng(21);
  std::normal_distribution<float> g;
  for (int trial = 0; trial < 200; ++trial) {
    ChunkEvent ev{rng(), std::uint32_t(rng()), {}};
    ev.hidden.resize(rng() % 64);
    for (auto& v : ev.hidden) v = g(rng);
    const Frame frames[] = {
        Hello{std::uint32_t(rng())}, ev,
        Decision{rng(), std::uint8_t(rng() % 2), g(rng), std::uint32_t(rng())},
        Reset{rng()}, ErrorFrame{"code", std::string(rng() % 40, 'x')}};
    for (const auto& f : frames) ASSERT_EQ(Decode(Encode(f)), f);
  }
}

TEST(Protocol, ReaderHandlesSplitsAndConcatenation) {
  std::vector<std::uint8_t> stream;
  for (const auto& g : Goldens()) EncodeTo(g.frame, stream);
  FrameReader reader;
  std::vector<Frame> out;
  for (std::uint8_t b : stream) {
    reader.Append(std::span<const std::uint8_t>(&b, 1));
    while (auto f = reader.Next()) out.push_back(*f);
  }
  ASSERT_EQ(out.size(), Goldens().size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    EXPECT_EQ(out[i], Goldens()[i].frame);
  }
  EXPECT_EQ(reader.buffered(), 0u);
}

TEST(Protocol, RejectsMalformedFrames) {
  // Unknown type.
  EXPECT_THROW(Decode(std::vector<std::uint8_t>{0, 0, 0, 0, 0x09}),
               ProtocolError);
  // HELLO with a short payload.
  EXPECT_THROW(Decode(std::vector<std::uint8_t>{2, 0, 0, 0, 0x01, 8, 0}),
               ProtocolError);
  // Truncated frame.
  auto ev = Encode(ChunkEvent{1, 2, {1, 2, 3}});
  ev.pop_back();
  EXPECT_THROW(Decode(ev), ProtocolError);
  // Declared dim disagrees with the payload length.
  ev = Encode(ChunkEvent{1, 2, {1, 2, 3}});
  ev[5 + 12] = 4;
  EXPECT_THROW(Decode(ev), ProtocolError);
  // Oversized length prefix is rejected before buffering the payload.
  FrameReader reader;
  const std::vector<std::uint8_t> huge = {0xff, 0xff, 0xff, 0xff, 0x02};
  reader.Append(huge);
  EXPECT_THROW(reader.Next(), ProtocolError);
  // Action byte outside {0,1}.
  auto d = Encode(Decision{1, 1, 0.5f, 1});
  d[5 + 8] = 7;
  EXPECT_THROW(Decode(d), ProtocolError);
}

}  // namespace
}  // namespace wsc::protocol
