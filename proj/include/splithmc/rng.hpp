#ifndef SPLITHMC_RNG_HPP
#define SPLITHMC_RNG_HPP

#include <cstdint>
#include <limits>
#include <string_view>

namespace splithmc {

/// Counter-based generator: the k-th output is a fixed bijective mix of
/// key + k * golden, so a stream is fully described by (key, counter) and
/// substreams are derived by hashing a name into a new key. Satisfies
/// UniformRandomBitGenerator.
class RandomStream {
 public:
  using result_type = std::uint64_t;

  explicit RandomStream(std::uint64_t seed) noexcept : key_(mix(seed)) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept { return mix(key_ + kGolden * ++counter_); }

  /// Independent stream keyed on (this stream's key, name). Does not advance
  /// this stream.
  RandomStream substream(std::string_view name) const noexcept;
  RandomStream substream(std::uint64_t index) const noexcept;

  std::uint64_t counter() const noexcept { return counter_; }

  /// SplitMix64 finaliser.
  static constexpr std::uint64_t mix(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  struct Key {};
  RandomStream(Key, std::uint64_t key) noexcept : key_(key) {}

  static constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace splithmc

#endif  // SPLITHMC_RNG_HPP
