#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>

namespace seeds {

std::string sha256_hex(std::span<const std::uint8_t> bytes);
std::string sha256_hex(std::string_view text);

// First 8 bytes of a hex digest as an integer; used to seed mock generators.
std::uint64_t digest_seed(std::string_view hex_digest);

}  // namespace seeds
