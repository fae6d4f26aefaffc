#include "tabsynth/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>

namespace tabsynth {

namespace {

constexpr char kMagic[8] = {'T', 'S', 'Y', 'N', 'T', 'N', 'S', '1'};

void put_u64(std::ostream& out, std::uint64_t v) {
  char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.write(b, 8);
}

void put_u32(std::ostream& out, std::uint32_t v) {
  char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.write(b, 4);
}

std::uint64_t get_u64(std::istream& in) {
  unsigned char b[8];
  in.read(reinterpret_cast<char*>(b), 8);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return v;
}

std::uint32_t get_u32(std::istream& in) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
  return v;
}

}  // namespace

void write_tensors(const std::string& path, const std::vector<Matrix>& tensors) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write tensor file: " + path);
  out.write(kMagic, sizeof(kMagic));
  put_u32(out, static_cast<std::uint32_t>(tensors.size()));
  for (const Matrix& t : tensors) {
    put_u64(out, static_cast<std::uint64_t>(t.rows()));
    put_u64(out, static_cast<std::uint64_t>(t.cols()));
    for (Index r = 0; r < t.rows(); ++r) {
      for (Index c = 0; c < t.cols(); ++c) {
        put_u64(out, std::bit_cast<std::uint64_t>(t(r, c)));
      }
    }
  }
  if (!out) throw DataError("short write to tensor file: " + path);
}

std::vector<Matrix> read_tensors(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open tensor file: " + path);
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw DataError("not a tensor file (bad magic): " + path);
  }
  std::uint32_t count = get_u32(in);
  if (!in) throw DataError("truncated tensor file: " + path);
  std::vector<Matrix> tensors;
  tensors.reserve(count);
  for (std::uint32_t ti = 0; ti < count; ++ti) {
    std::uint64_t rows = get_u64(in);
    std::uint64_t cols = get_u64(in);
    if (!in) throw DataError("truncated tensor file: " + path);
    if (rows > (1u << 24) || cols > (1u << 24)) {
      throw DataError("tensor file shape out of range: " + path);
    }
    Matrix t(static_cast<Index>(rows), static_cast<Index>(cols));
    for (Index r = 0; r < t.rows(); ++r) {
      for (Index c = 0; c < t.cols(); ++c) {
        t(r, c) = std::bit_cast<double>(get_u64(in));
      }
    }
    if (!in) throw DataError("truncated tensor file: " + path);
    tensors.push_back(std::move(t));
  }
  return tensors;
}

}  // namespace tabsynth
