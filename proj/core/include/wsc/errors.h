// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace wsc {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad arguments, violated invariants, dimension mismatches.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Unreadable/unwritable files and malformed or truncated file contents.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace wsc
