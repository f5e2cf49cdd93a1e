// Compiled with -mavx2; only reached when the CPU reports AVX2.

#include <immintrin.h>

#include <algorithm>
#include <array>
#include <vector>

#include "vgpu/simd/dispatch.hpp"

namespace vgpu::simd::avx2 {

namespace {

constexpr std::size_t kQuadraticLimit = 128;

bool seen_before(const std::uint64_t* v, std::size_t i) noexcept {
  const __m256i needle = _mm256_set1_epi64x(static_cast<long long>(v[i]));
  std::size_t j = 0;
  for (; j + 4 <= i; j += 4) {
    const __m256i chunk = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(v + j));
    const __m256i eq = _mm256_cmpeq_epi64(chunk, needle);
    if (_mm256_movemask_pd(_mm256_castsi256_pd(eq)) != 0) return true;
  }
  for (; j < i; ++j) {
    if (v[j] == v[i]) return true;
  }
  return false;
}

}  // namespace

void shift_right(std::span<const std::uint64_t> values, unsigned shift,
                 std::span<std::uint64_t> out) {
  const __m128i count = _mm_cvtsi32_si128(static_cast<int>(shift));
  std::size_t i = 0;
  for (; i + 4 <= values.size(); i += 4) {
    const __m256i v = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(values.data() + i));
    _mm256_storeu_si256(reinterpret_cast<__m256i*>(out.data() + i), _mm256_srl_epi64(v, count));
  }
  for (; i < values.size(); ++i) out[i] = shift >= 64 ? 0 : values[i] >> shift;
}

std::uint32_t count_distinct(std::span<const std::uint64_t> values) {
  if (values.size() > kQuadraticLimit) return scalar::count_distinct(values);
  std::uint32_t n = 0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!seen_before(values.data(), i)) ++n;
  }
  return n;
}

std::uint32_t max_bank_load(std::span<const std::uint64_t> words,
                            std::uint32_t bank_count) {
  if (words.size() > kQuadraticLimit || bank_count > 64) {
    return scalar::max_bank_load(words, bank_count);
  }
  std::array<std::uint32_t, 64> hist{};
  const bool pow2 = (bank_count & (bank_count - 1)) == 0;
  const std::uint64_t mask = bank_count - 1;
  std::uint32_t best = 0;
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (seen_before(words.data(), i)) continue;
    const std::uint64_t bank = pow2 ? (words[i] & mask) : (words[i] % bank_count);
    best = std::max(best, ++hist[bank]);
  }
  return best;
}

}  // namespace vgpu::simd::avx2
