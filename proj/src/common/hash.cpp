#include "seeds/hash.hpp"

#include <openssl/sha.h>

#include <array>

#include "seeds/error.hpp"

namespace seeds {

std::string sha256_hex(std::span<const std::uint8_t> bytes) {
  std::array<unsigned char, SHA256_DIGEST_LENGTH> digest{};
  SHA256(bytes.data(), bytes.size(), digest.data());
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(digest.size() * 2);
  for (unsigned char c : digest) {
    out.push_back(kHex[c >> 4]);
    out.push_back(kHex[c & 0xF]);
  }
  return out;
}

std::string sha256_hex(std::string_view text) {
  return sha256_hex(std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

std::uint64_t digest_seed(std::string_view hex_digest) {
  require(hex_digest.size() >= 16, ErrorCode::PreconditionViolated, "digest too short");
  return std::stoull(std::string(hex_digest.substr(0, 16)), nullptr, 16);
}

}  // namespace seeds
