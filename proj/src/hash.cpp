#include "tabsynth/hash.hpp"

#include <openssl/evp.h>

#include <stdexcept>

namespace tabsynth {

Digest sha256(const void* data, std::size_t len) {
  Digest out{};
  unsigned int out_len = 0;
  if (EVP_Digest(data, len, out.data(), &out_len, EVP_sha256(), nullptr) != 1 || out_len != out.size()) {
    throw std::runtime_error("sha256 digest failed");
  }
  return out;
}

Digest sha256(std::string_view text) { return sha256(text.data(), text.size()); }

std::string to_hex(const Digest& d) {
  static const char* digits = "0123456789abcdef";
  std::string s;
  s.reserve(64);
  for (unsigned char b : d) {
    s.push_back(digits[b >> 4]);
    s.push_back(digits[b & 0xf]);
  }
  return s;
}

static int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

Digest from_hex(std::string_view hex) {
  if (hex.size() != 64) throw std::runtime_error("expected 64 hex characters");
  Digest d{};
  for (std::size_t i = 0; i < 32; ++i) {
    int hi = hex_value(hex[2 * i]);
    int lo = hex_value(hex[2 * i + 1]);
    if (hi < 0 || lo < 0) throw std::runtime_error("invalid hex digit");
    d[i] = static_cast<unsigned char>((hi << 4) | lo);
  }
  return d;
}

}  // namespace tabsynth
