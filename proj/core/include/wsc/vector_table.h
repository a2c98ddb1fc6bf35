// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace wsc {

// Dense row-major table of fixed-dimension float vectors. Holds hidden states
// captured at chunk delimiters, or sentence embeddings of chunk text.
//
// On-disk layout (all little-endian):
//   "WSCV" | version u32 | count u64 | dim u32 | dtype u8 (0x01 = f32) | rows
class VectorTable {
 public:
  static constexpr char kMagic[4] = {'W', 'S', 'C', 'V'};
  static constexpr std::uint32_t kVersion = 1;
  static constexpr std::uint8_t kDtypeF32 = 0x01;
  static constexpr std::size_t kHeaderBytes = 4 + 4 + 8 + 4 + 1;

  VectorTable() = default;
  // Empty table of the given width.
  explicit VectorTable(std::size_t dim) : dim_(dim) {}
  // Throws ValidationError unless values.size() == count * dim, every value
  // is finite, and dim > 0 whenever values is non-empty.
  VectorTable(std::size_t dim, std::vector<float> values);

  std::size_t dim() const { return dim_; }
  std::size_t count() const { return dim_ == 0 ? 0 : values_.size() / dim_; }
  bool empty() const { return values_.empty(); }

  std::span<const float> row(std::size_t i) const;
  std::span<const float> values() const { return values_; }

  // Appends one row; throws ValidationError on width mismatch or non-finite
  // values.
  void Append(std::span<const float> row);

  friend bool operator==(const VectorTable&, const VectorTable&) = default;

 private:
  std::size_t dim_ = 0;
  std::vector<float> values_;
};

std::vector<std::uint8_t> EncodeVectorTable(const VectorTable& table);
// Throws IoError("not a vector table" / "corrupt table" / unsupported
// version or dtype).
VectorTable DecodeVectorTable(std::span<const std::uint8_t> bytes);

void SaveVectorTable(const std::string& path, const VectorTable& table);
VectorTable LoadVectorTable(const std::string& path);

}  // namespace wsc
