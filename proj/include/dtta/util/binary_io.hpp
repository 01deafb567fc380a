// Copyright 2026 The dtta Authors. All Rights Reserved.
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

#ifndef DTTA_UTIL_BINARY_IO_HPP_
#define DTTA_UTIL_BINARY_IO_HPP_

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "dtta/error.hpp"

namespace dtta {

static_assert(std::endian::native == std::endian::little,
              "binary formats are little-endian; big-endian hosts are not supported");

using Bytes = std::vector<std::uint8_t>;

inline Bytes read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::kIo, "cannot open '" + path.string() + "' for reading");
  return Bytes(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

inline void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::kIo, "cannot open '" + path.string() + "' for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) fail(ErrorKind::kIo, "write to '" + path.string() + "' failed");
}

inline void write_text(const std::filesystem::path& path, std::string_view text) {
  write_file(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

inline std::string read_text(const std::filesystem::path& path) {
  Bytes b = read_file(path);
  return std::string(b.begin(), b.end());
}

class ByteWriter {
 public:
  void raw(const void* p, std::size_t n) {
    const auto* b = static_cast<const std::uint8_t*>(p);
    bytes_.insert(bytes_.end(), b, b + n);
  }
  void magic(std::string_view m) { raw(m.data(), m.size()); }
  void u32(std::uint32_t v) { raw(&v, sizeof v); }
  void f32(float v) { raw(&v, sizeof v); }
  void str(std::string_view s) {
    u32(static_cast<std::uint32_t>(s.size()));
    raw(s.data(), s.size());
  }
  template <typename T>
  void array(std::span<const T> values) {
    raw(values.data(), values.size_bytes());
  }

  const Bytes& bytes() const { return bytes_; }
  Bytes& bytes() { return bytes_; }

 private:
  Bytes bytes_;
};

// Bounds-checked cursor; every short read raises a truncation error that
// names the field being read.
class ByteReader {
 public:
  ByteReader(std::span<const std::uint8_t> bytes, std::string source)
      : bytes_(bytes), source_(std::move(source)) {}

  void raw(void* out, std::size_t n, std::string_view field) {
    if (remaining() < n) {
      fail(ErrorKind::kFormat, source_ + ": truncated while reading " + std::string(field) +
                                   " (need " + std::to_string(n) + " bytes at offset " +
                                   std::to_string(pos_) + ", have " + std::to_string(remaining()) +
                                   ")");
    }
    std::memcpy(out, bytes_.data() + pos_, n);
    pos_ += n;
  }
  void expect_magic(std::string_view magic) {
    std::string got(magic.size(), '\0');
    raw(got.data(), got.size(), "magic");
    if (got != magic) {
      fail(ErrorKind::kFormat, source_ + ": bad magic (expected '" + std::string(magic) + "')");
    }
  }
  std::uint32_t u32(std::string_view field) {
    std::uint32_t v;
    raw(&v, sizeof v, field);
    return v;
  }
  std::string str(std::string_view field) {
    const std::uint32_t n = u32(field);
    std::string s(n, '\0');
    raw(s.data(), n, field);
    return s;
  }
  template <typename T>
  void array(std::span<T> out, std::string_view field) {
    raw(out.data(), out.size_bytes(), field);
  }

  std::size_t position() const { return pos_; }
  std::size_t remaining() const { return bytes_.size() - pos_; }
  const std::string& source() const { return source_; }

 private:
  std::span<const std::uint8_t> bytes_;
  std::string source_;
  std::size_t pos_ = 0;
};

}  // namespace dtta

#endif  // DTTA_UTIL_BINARY_IO_HPP_
