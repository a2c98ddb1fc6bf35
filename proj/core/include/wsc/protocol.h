// SPDX-License-Identifier: Apache-2.0
//
// Binary frames exchanged between an inference engine and the chop service.
//
//   frame   := length u32 | type u8 | payload[length]
//   HELLO       0x01  hidden_dim u32
//   CHUNK_EVENT 0x02  stream_id u64 | chunk_len u32 | dim u32 | dim x f32
//   DECISION    0x03  stream_id u64 | action u8 | probability f32 |
//                     regen_budget u32
//   RESET       0x04  stream_id u64
//   ERROR       0x05  code_len u16 | code | message_len u16 | message
//
// `length` counts payload bytes only. Everything is little-endian.

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "wsc/errors.h"

namespace wsc::protocol {

enum class FrameType : std::uint8_t {
  kHello = 0x01,
  kChunkEvent = 0x02,
  kDecision = 0x03,
  kReset = 0x04,
  kError = 0x05,
};

inline constexpr std::size_t kPrefixBytes = 5;
inline constexpr std::uint32_t kMaxPayloadBytes = 64u << 20;

struct Hello {
  std::uint32_t hidden_dim = 0;
  friend bool operator==(const Hello&, const Hello&) = default;
};

struct ChunkEvent {
  std::uint64_t stream_id = 0;
  std::uint32_t chunk_len = 0;
  std::vector<float> hidden;
  friend bool operator==(const ChunkEvent&, const ChunkEvent&) = default;
};

struct Decision {
  std::uint64_t stream_id = 0;
  std::uint8_t action = 0;  // 0 continue, 1 chop
  float probability = 0.0f;
  std::uint32_t regen_budget = 0;  // 0 on continue
  friend bool operator==(const Decision&, const Decision&) = default;
};

struct Reset {
  std::uint64_t stream_id = 0;
  friend bool operator==(const Reset&, const Reset&) = default;
};

struct ErrorFrame {
  std::string code;
  std::string message;
  friend bool operator==(const ErrorFrame&, const ErrorFrame&) = default;
};

using Frame = std::variant<Hello, ChunkEvent, Decision, Reset, ErrorFrame>;

FrameType TypeOf(const Frame& frame);

// Error codes carried in ERROR frames.
namespace codes {
inline constexpr const char* kDimMismatch = "dim_mismatch";
inline constexpr const char* kHelloRequired = "hello_required";
inline constexpr const char* kMalformed = "malformed_frame";
inline constexpr const char* kUnexpected = "unexpected_frame";
inline constexpr const char* kStreamChopped = "stream_chopped";
}  // namespace codes

// Malformed bytes on the wire.
class ProtocolError : public Error {
 public:
  using Error::Error;
};

std::vector<std::uint8_t> Encode(const Frame& frame);
void EncodeTo(const Frame& frame, std::vector<std::uint8_t>& out);

// Decodes exactly one complete frame; throws ProtocolError otherwise.
Frame Decode(std::span<const std::uint8_t> bytes);

// Incremental decoder for a byte stream.
class FrameReader {
 public:
  void Append(std::span<const std::uint8_t> bytes);
  // Next complete frame, or nullopt when more bytes are needed. Throws
  // ProtocolError on an unknown type, an oversized length, or a payload that
  // does not match its type.
  std::optional<Frame> Next();
  std::size_t buffered() const { return buffer_.size() - offset_; }

 private:
  std::vector<std::uint8_t> buffer_;
  std::size_t offset_ = 0;
};

}  // namespace wsc::protocol
