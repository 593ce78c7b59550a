#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace zsl {

// splitmix64, used to derive independent per-stage and per-document seeds
// from one master seed. Never used as the working generator itself.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// FNV-1a over a label so that stage seeds are stable across runs and
// independent of call order.
inline std::uint64_t hash_label(std::string_view label) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : label) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::uint64_t derive_seed(std::uint64_t master, std::string_view label,
                                 std::uint64_t index = 0) {
  return splitmix64(master ^ splitmix64(hash_label(label)) ^
                    splitmix64(index + 0x51edce1cULL));
}

using Rng = std::mt19937_64;

inline Rng make_rng(std::uint64_t master, std::string_view label,
                    std::uint64_t index = 0) {
  return Rng(derive_seed(master, label, index));
}

}  // namespace zsl
