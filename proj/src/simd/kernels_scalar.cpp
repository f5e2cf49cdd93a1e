#include <algorithm>
#include <array>
#include <vector>

#include "vgpu/simd/dispatch.hpp"

namespace vgpu::simd::scalar {

namespace {

constexpr std::size_t kQuadraticLimit = 128;

bool seen_before(std::span<const std::uint64_t> v, std::size_t i) noexcept {
  for (std::size_t j = 0; j < i; ++j) {
    if (v[j] == v[i]) return true;
  }
  return false;
}

template <class Fn>
void for_each_distinct(std::span<const std::uint64_t> v, Fn&& fn) {
  if (v.size() <= kQuadraticLimit) {
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!seen_before(v, i)) fn(v[i]);
    }
    return;
  }
  std::vector<std::uint64_t> sorted(v.begin(), v.end());
  std::sort(sorted.begin(), sorted.end());
  auto end = std::unique(sorted.begin(), sorted.end());
  std::for_each(sorted.begin(), end, fn);
}

}  // namespace

void shift_right(std::span<const std::uint64_t> values, unsigned shift,
                 std::span<std::uint64_t> out) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    out[i] = shift >= 64 ? 0 : values[i] >> shift;
  }
}

std::uint32_t count_distinct(std::span<const std::uint64_t> values) {
  std::uint32_t n = 0;
  for_each_distinct(values, [&](std::uint64_t) { ++n; });
  return n;
}

std::uint32_t max_bank_load(std::span<const std::uint64_t> words,
                            std::uint32_t bank_count) {
  std::array<std::uint32_t, 64> small{};
  std::vector<std::uint32_t> large;
  std::uint32_t* hist = small.data();
  if (bank_count > small.size()) {
    large.assign(bank_count, 0);
    hist = large.data();
  }
  std::uint32_t best = 0;
  for_each_distinct(words, [&](std::uint64_t w) {
    best = std::max(best, ++hist[w % bank_count]);
  });
  return best;
}

}  // namespace vgpu::simd::scalar
