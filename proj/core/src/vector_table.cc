// SPDX-License-Identifier: Apache-2.0

#include "wsc/vector_table.h"

#include <cmath>
#include <string>

#include "wsc/binary_io.h"
#include "wsc/errors.h"

namespace wsc {
namespace {

bool AllFinite(std::span<const float> values) {
  for (float v : values) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

}  // namespace

VectorTable::VectorTable(std::size_t dim, std::vector<float> values)
    : dim_(dim), values_(std::move(values)) {
  if (dim_ == 0 && !values_.empty()) {
    throw ValidationError("vector table: dim must be positive");
  }
  if (dim_ != 0 && values_.size() % dim_ != 0) {
    throw ValidationError("vector table: " + std::to_string(values_.size()) +
                          " values is not a multiple of dim " +
                          std::to_string(dim_));
  }
  if (!AllFinite(values_)) {
    throw ValidationError("vector table: non-finite value");
  }
}

std::span<const float> VectorTable::row(std::size_t i) const {
  if (i >= count()) {
    throw ValidationError("vector table: row " + std::to_string(i) +
                          " out of range (count " + std::to_string(count()) +
                          ")");
  }
  return std::span<const float>(values_).subspan(i * dim_, dim_);
}

void VectorTable::Append(std::span<const float> row) {
  if (dim_ == 0) dim_ = row.size();
  if (row.size() != dim_ || dim_ == 0) {
    throw ValidationError("vector table: row width " +
                          std::to_string(row.size()) + " != dim " +
                          std::to_string(dim_));
  }
  if (!AllFinite(row)) throw ValidationError("vector table: non-finite value");
  values_.insert(values_.end(), row.begin(), row.end());
}

std::vector<std::uint8_t> EncodeVectorTable(const VectorTable& table) {
  if (table.dim() > UINT32_MAX) {
    throw ValidationError("vector table: dim exceeds 32 bits");
  }
  ByteWriter w;
  w.bytes().reserve(VectorTable::kHeaderBytes + table.values().size_bytes());
  w.PutString(std::string_view(VectorTable::kMagic, 4));
  w.Put<std::uint32_t>(VectorTable::kVersion);
  w.Put<std::uint64_t>(table.count());
  w.Put<std::uint32_t>(static_cast<std::uint32_t>(table.dim()));
  w.Put<std::uint8_t>(VectorTable::kDtypeF32);
  w.PutFloats(table.values());
  return w.Take();
}

VectorTable DecodeVectorTable(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  const std::string magic = r.GetString(4);
  if (!r.ok() || magic != std::string_view(VectorTable::kMagic, 4)) {
    throw IoError("not a vector table");
  }
  const auto version = r.Get<std::uint32_t>();
  const auto count = r.Get<std::uint64_t>();
  const auto dim = r.Get<std::uint32_t>();
  const auto dtype = r.Get<std::uint8_t>();
  if (!r.ok()) throw IoError("corrupt table: truncated header");
  if (version != VectorTable::kVersion) {
    throw IoError("unsupported vector table version " +
                  std::to_string(version));
  }
  if (dtype != VectorTable::kDtypeF32) {
    throw IoError("unsupported vector table dtype " + std::to_string(dtype));
  }
  if (dim == 0 && count > 0) throw IoError("corrupt table: zero dim");
  const std::size_t payload = r.remaining();
  // Guard the multiplication before trusting the header.
  if (dim != 0 && count > payload / sizeof(float) / dim) {
    throw IoError("corrupt table: header declares " + std::to_string(count) +
                  " rows, payload is " + std::to_string(payload) + " bytes");
  }
  const std::size_t n = static_cast<std::size_t>(count) * dim;
  if (payload != n * sizeof(float)) {
    throw IoError("corrupt table: trailing bytes after payload");
  }
  std::vector<float> values(n);
  r.GetFloats(values);
  try {
    return VectorTable(dim, std::move(values));
  } catch (const ValidationError& e) {
    throw IoError(std::string("corrupt table: ") + e.what());
  }
}

void SaveVectorTable(const std::string& path, const VectorTable& table) {
  WriteFileBytes(path, EncodeVectorTable(table));
}

VectorTable LoadVectorTable(const std::string& path) {
  return DecodeVectorTable(ReadFileBytes(path));
}

}  // namespace wsc
