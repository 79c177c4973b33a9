#pragma once

#include <cstdint>
#include <cstdio>
#include <string>

namespace degensys {

// Deterministic shortest-faithful formatting for CSV and fingerprints.
// %.17g round-trips IEEE doubles, so identical runs produce identical bytes.
inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline std::uint64_t fnv1a64(const std::string& bytes, std::uint64_t seed = 0xcbf29ce484222325ull) {
  std::uint64_t h = seed;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

}  // namespace degensys
