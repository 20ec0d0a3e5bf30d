#pragma once

#include <cstdint>
#include <string>
#include <string_view>

// Portable hash primitives. Mock teacher decisions and sampling must be
// bitwise reproducible across platforms, so nothing here may depend on
// std::hash or other implementation-defined behavior.

namespace distill {

constexpr std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

// Top 53 bits of a 64-bit hash mapped onto [0, 1).
constexpr double unit_interval(std::uint64_t x) {
  return static_cast<double>(x >> 11) * 0x1.0p-53;
}

// Decision stream shared by the mock teacher and the tests that audit it:
// u(seed, salt, id) = unit_interval(splitmix64(seed ^ fnv1a64(salt + id))).
inline double salted_unit(std::uint64_t seed, std::string_view salt,
                          std::string_view id) {
  std::string key;
  key.reserve(salt.size() + id.size());
  key.append(salt);
  key.append(id);
  return unit_interval(splitmix64(seed ^ fnv1a64(key)));
}

}  // namespace distill
