// SPDX-License-Identifier: Apache-2.0

#include "wsc/protocol.h"

#include <limits>

#include "wsc/binary_io.h"

namespace wsc::protocol {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void PutShortString(ByteWriter& w, const std::string& s) {
  if (s.size() > std::numeric_limits<std::uint16_t>::max()) {
    throw ValidationError("error frame string longer than 65535 bytes");
  }
  w.Put<std::uint16_t>(static_cast<std::uint16_t>(s.size()));
  w.PutString(s);
}

std::string GetShortString(ByteReader& r) {
  const auto n = r.Get<std::uint16_t>();
  return r.GetString(n);
}

Frame DecodePayload(FrameType type, std::span<const std::uint8_t> payload) {
  ByteReader r(payload);
  Frame frame;
  switch (type) {
    case FrameType::kHello:
      frame = Hello{r.Get<std::uint32_t>()};
      break;
    case FrameType::kChunkEvent: {
      ChunkEvent ev;
      ev.stream_id = r.Get<std::uint64_t>();
      ev.chunk_len = r.Get<std::uint32_t>();
      const auto dim = r.Get<std::uint32_t>();
      if (!r.ok() || r.remaining() != static_cast<std::size_t>(dim) * 4) {
        throw ProtocolError("CHUNK_EVENT payload does not match its dim");
      }
      ev.hidden.resize(dim);
      r.GetFloats(ev.hidden);
      frame = std::move(ev);
      break;
    }
    case FrameType::kDecision: {
      Decision d;
      d.stream_id = r.Get<std::uint64_t>();
      d.action = r.Get<std::uint8_t>();
      d.probability = r.Get<float>();
      d.regen_budget = r.Get<std::uint32_t>();
      if (r.ok() && d.action > 1) throw ProtocolError("bad DECISION action");
      frame = d;
      break;
    }
    case FrameType::kReset:
      frame = Reset{r.Get<std::uint64_t>()};
      break;
    case FrameType::kError: {
      ErrorFrame e;
      e.code = GetShortString(r);
      e.message = GetShortString(r);
      frame = std::move(e);
      break;
    }
    default:
      throw ProtocolError("unknown frame type " +
                          std::to_string(static_cast<int>(type)));
  }
  if (!r.ok() || r.remaining() != 0) {
    throw ProtocolError("payload length does not match frame type " +
                        std::to_string(static_cast<int>(type)));
  }
  return frame;
}

}  // namespace

FrameType TypeOf(const Frame& frame) {
  return std::visit(
      Overloaded{[](const Hello&) { return FrameType::kHello; },
                 [](const ChunkEvent&) { return FrameType::kChunkEvent; },
                 [](const Decision&) { return FrameType::kDecision; },
                 [](const Reset&) { return FrameType::kReset; },
                 [](const ErrorFrame&) { return FrameType::kError; }},
      frame);
}

void EncodeTo(const Frame& frame, std::vector<std::uint8_t>& out) {
  ByteWriter w;
  w.Put<std::uint32_t>(0);  // patched below
  w.Put<std::uint8_t>(static_cast<std::uint8_t>(TypeOf(frame)));
  std::visit(Overloaded{
                 [&](const Hello& h) { w.Put<std::uint32_t>(h.hidden_dim); },
                 [&](const ChunkEvent& ev) {
                   w.Put<std::uint64_t>(ev.stream_id);
                   w.Put<std::uint32_t>(ev.chunk_len);
                   w.Put<std::uint32_t>(
                       static_cast<std::uint32_t>(ev.hidden.size()));
                   w.PutFloats(ev.hidden);
                 },
                 [&](const Decision& d) {
                   w.Put<std::uint64_t>(d.stream_id);
                   w.Put<std::uint8_t>(d.action);
                   w.Put<float>(d.probability);
                   w.Put<std::uint32_t>(d.regen_budget);
                 },
                 [&](const Reset& r) { w.Put<std::uint64_t>(r.stream_id); },
                 [&](const ErrorFrame& e) {
                   PutShortString(w, e.code);
                   PutShortString(w, e.message);
                 }},
             frame);
  auto& bytes = w.bytes();
  const std::size_t payload = bytes.size() - kPrefixBytes;
  if (payload > kMaxPayloadBytes) throw ValidationError("frame too large");
  const auto len = ByteSwapIfBig(static_cast<std::uint32_t>(payload));
  std::memcpy(bytes.data(), &len, sizeof(len));
  out.insert(out.end(), bytes.begin(), bytes.end());
}

std::vector<std::uint8_t> Encode(const Frame& frame) {
  std::vector<std::uint8_t> out;
  EncodeTo(frame, out);
  return out;
}

Frame Decode(std::span<const std::uint8_t> bytes) {
  FrameReader reader;
  reader.Append(bytes);
  auto frame = reader.Next();
  if (!frame) throw ProtocolError("incomplete frame");
  if (reader.buffered() != 0) throw ProtocolError("trailing bytes after frame");
  return std::move(*frame);
}

void FrameReader::Append(std::span<const std::uint8_t> bytes) {
  if (offset_ > 0 && offset_ == buffer_.size()) {
    buffer_.clear();
    offset_ = 0;
  }
  buffer_.insert(buffer_.end(), bytes.begin(), bytes.end());
}

std::optional<Frame> FrameReader::Next() {
  const std::span<const std::uint8_t> pending(buffer_.data() + offset_,
                                              buffer_.size() - offset_);
  if (pending.size() < kPrefixBytes) return std::nullopt;
  ByteReader head(pending);
  const auto len = head.Get<std::uint32_t>();
  const auto type = static_cast<FrameType>(head.Get<std::uint8_t>());
  if (len > kMaxPayloadBytes) {
    throw ProtocolError("frame length " + std::to_string(len) +
                        " exceeds limit");
  }
  if (static_cast<std::uint8_t>(type) < 0x01 ||
      static_cast<std::uint8_t>(type) > 0x05) {
    throw ProtocolError("unknown frame type " +
                        std::to_string(static_cast<int>(type)));
  }
  if (pending.size() - kPrefixBytes < len) return std::nullopt;
  Frame frame = DecodePayload(type, pending.subspan(kPrefixBytes, len));
  offset_ += kPrefixBytes + len;
  if (offset_ == buffer_.size()) {
    buffer_.clear();
    offset_ = 0;
  } else if (offset_ > (1u << 20)) {
    buffer_.erase(buffer_.begin(),
                  buffer_.begin() + static_cast<std::ptrdiff_t>(offset_));
    offset_ = 0;
  }
  return frame;
}

}  // namespace wsc::protocol
