#pragma once

#include <array>
#include <bit>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

#if defined(__BMI2__)
#include <immintrin.h>
#endif

namespace mills {

// Bit i set <=> point i occupied. Boards have at most 32 points.
using PointSet = std::uint32_t;

inline constexpr int kMaxPoints = 32;

class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

inline int popcount(PointSet s) { return std::popcount(s); }

inline int lowest_bit(PointSet s) { return std::countr_zero(s); }

inline constexpr PointSet bit(int i) { return PointSet{1} << i; }

// Calls f(i) for every set bit i, lowest first.
template <class F>
inline void for_each_bit(PointSet s, F&& f) {
  while (s) {
    f(std::countr_zero(s));
    s &= s - 1;
  }
}

// Packs the bits of `value` selected by `mask` into the low bits.
inline PointSet extract_bits(PointSet value, PointSet mask) {
#if defined(__BMI2__)
  return _pext_u32(value, mask);
#else
  PointSet out = 0;
  int k = 0;
  while (mask) {
    int i = std::countr_zero(mask);
    if (value & bit(i)) out |= bit(k);
    ++k;
    mask &= mask - 1;
  }
  return out;
#endif
}

// Inverse of extract_bits: spreads the low bits of `value` over `mask`.
inline PointSet deposit_bits(PointSet value, PointSet mask) {
#if defined(__BMI2__)
  return _pdep_u32(value, mask);
#else
  PointSet out = 0;
  int k = 0;
  while (mask) {
    int i = std::countr_zero(mask);
    if (value & bit(k)) out |= bit(i);
    ++k;
    mask &= mask - 1;
  }
  return out;
#endif
}

struct BinomialTable {
  std::array<std::array<std::uint64_t, kMaxPoints + 1>, kMaxPoints + 1> c{};
  constexpr BinomialTable() {
    for (int n = 0; n <= kMaxPoints; ++n) {
      c[n][0] = 1;
      for (int k = 1; k <= n; ++k) c[n][k] = c[n - 1][k - 1] + (k <= n - 1 ? c[n - 1][k] : 0);
    }
  }
};

inline constexpr BinomialTable kBinomials{};

inline constexpr std::uint64_t binomial(int n, int k) {
  if (k < 0 || n < 0 || k > n) return 0;
  return kBinomials.c[n][k];
}

// Colex rank of a k-subset of {0..n-1}.
inline std::uint64_t colex_rank(PointSet s) {
  std::uint64_t r = 0;
  int k = 1;
  for_each_bit(s, [&](int i) { r += binomial(i, k++); });
  return r;
}

// Inverse of colex_rank for subsets of size k.
inline PointSet colex_unrank(std::uint64_t r, int k, int n) {
  PointSet s = 0;
  for (int i = n - 1; k > 0; --i) {
    std::uint64_t c = binomial(i, k);
    if (c <= r) {
      s |= bit(i);
      r -= c;
      --k;
    }
  }
  return s;
}

inline std::uint64_t fnv1a64(const void* data, std::size_t n,
                             std::uint64_t h = 0xcbf29ce484222325ULL) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::uint64_t fnv1a64(std::string_view s, std::uint64_t h = 0xcbf29ce484222325ULL) {
  return fnv1a64(s.data(), s.size(), h);
}

}  // namespace mills
