// Copyright 2026 The panopose Authors
// SPDX-License-Identifier: Apache-2.0

#include "io_util.hpp"

#include <cstdio>
#include <fstream>
#include <iterator>
#include <sstream>

#include "panopose/error.hpp"

namespace panopose {

const char* errc_name(Errc code) {
  switch (code) {
    case Errc::io: return "io";
    case Errc::parse: return "parse";
    case Errc::format: return "format";
    case Errc::validation: return "validation";
    case Errc::shape: return "shape";
    case Errc::singular: return "singular";
    case Errc::range: return "range";
  }
  return "unknown";
}

namespace detail {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw Error(Errc::io, "read failed: " + path.string());
  return std::move(buf).str();
}

void write_file(const std::filesystem::path& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::io, "cannot open " + path.string() + " for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  out.flush();
  if (!out) throw Error(Errc::io, "write failed: " + path.string());
}

std::string format_double(double value) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

}  // namespace detail
}  // namespace panopose
