#include "splithmc/rng.hpp"

namespace splithmc {

RandomStream RandomStream::substream(std::string_view name) const noexcept {
  // FNV-1a of the name, then mixed with the parent key.
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char ch : name) {
    h ^= static_cast<unsigned char>(ch);
    h *= 0x100000001b3ULL;
  }
  return RandomStream(Key{}, mix(key_ ^ mix(h)));
}

RandomStream RandomStream::substream(std::uint64_t index) const noexcept {
  return RandomStream(Key{}, mix(key_ ^ mix(index + kGolden)));
}

}  // namespace splithmc
