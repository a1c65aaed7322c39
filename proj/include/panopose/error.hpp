// Copyright 2026 The panopose Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace panopose {

enum class Errc {
  io,          // file could not be opened, read or written
  parse,       // malformed structured text or binary header
  format,      // well-formed input that violates the container/file contract
  validation,  // data that violates a domain invariant
  shape,       // tensor rank/extent mismatch
  singular,    // non-invertible transform or degenerate geometry
  range        // argument outside its documented range
};

const char* errc_name(Errc code);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace panopose
