#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>

namespace tabsynth {

using Digest = std::array<unsigned char, 32>;

Digest sha256(const void* data, std::size_t len);
Digest sha256(std::string_view text);

std::string to_hex(const Digest& d);
Digest from_hex(std::string_view hex);

inline std::string sha256_hex(std::string_view text) { return to_hex(sha256(text)); }

}  // namespace tabsynth
