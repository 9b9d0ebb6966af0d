#pragma once

#include <cstdint>
#include <random>

namespace gar {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Counter-mode sub-stream derivation: the seed for stream `index` depends
// only on (root, index), so adding streams never perturbs existing ones.
inline std::uint64_t derive_seed(std::uint64_t root, std::uint64_t index) {
  std::uint64_t s = root + 0x9e3779b97f4a7c15ULL * (index + 1);
  splitmix64(s);
  return splitmix64(s);
}

inline std::mt19937_64 make_engine(std::uint64_t root, std::uint64_t index) {
  return std::mt19937_64(derive_seed(root, index));
}

}  // namespace gar
