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

#ifndef DTTA_UTIL_SHA256_HPP_
#define DTTA_UTIL_SHA256_HPP_

#include <openssl/evp.h>

#include <array>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>

#include "dtta/error.hpp"

namespace dtta {

using Digest = std::array<std::uint8_t, 32>;

// Incremental SHA-256 backed by OpenSSL's EVP interface.
class Sha256 {
 public:
  Sha256() : ctx_(EVP_MD_CTX_new(), &EVP_MD_CTX_free) {
    require(ctx_ != nullptr && EVP_DigestInit_ex(ctx_.get(), EVP_sha256(), nullptr) == 1,
            ErrorKind::kInternal, "sha256: digest initialization failed");
  }

  Sha256& update(std::span<const std::uint8_t> bytes) {
    require(EVP_DigestUpdate(ctx_.get(), bytes.data(), bytes.size()) == 1,
            ErrorKind::kInternal, "sha256: update failed");
    return *this;
  }
  Sha256& update(std::string_view s) {
    return update(std::span(reinterpret_cast<const std::uint8_t*>(s.data()), s.size()));
  }

  Digest finish() {
    Digest out{};
    unsigned int len = 0;
    require(EVP_DigestFinal_ex(ctx_.get(), out.data(), &len) == 1 && len == out.size(),
            ErrorKind::kInternal, "sha256: finalization failed");
    return out;
  }

 private:
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx_;
};

inline Digest sha256(std::span<const std::uint8_t> bytes) { return Sha256().update(bytes).finish(); }
inline Digest sha256(std::string_view s) { return Sha256().update(s).finish(); }

inline std::string to_hex(std::span<const std::uint8_t> bytes) {
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(bytes.size() * 2);
  for (std::uint8_t b : bytes) {
    out.push_back(kHex[b >> 4]);
    out.push_back(kHex[b & 0xF]);
  }
  return out;
}

inline std::string sha256_hex(std::string_view s) { return to_hex(sha256(s)); }

}  // namespace dtta

#endif  // DTTA_UTIL_SHA256_HPP_
