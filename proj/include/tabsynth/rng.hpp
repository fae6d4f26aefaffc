#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

namespace tabsynth {

/// xoshiro256++ behind a fixed draw discipline, so streams are reproducible
/// across platforms and standard libraries. All randomness in the project
/// flows through this type.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next_u64();

  /// Uniform in [0, 1), 53-bit resolution.
  double uniform();

  /// Uniform in (0, 1), safe as a log argument.
  double uniform_open();

  /// Standard normal via Box-Muller.
  double gaussian();

  /// Standard Gumbel: -log(-log(u)).
  double gumbel();

  /// Unbiased draw in [0, n).
  std::uint64_t below(std::uint64_t n);

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::uint64_t state_[4];
};

/// Sub-seed derivation: first 8 bytes (little-endian) of
/// sha256(le64(master) || ":" || tag). Every pipeline stage gets its own tag.
std::uint64_t derive_seed(std::uint64_t master, std::string_view tag);

}  // namespace tabsynth
