#pragma once

// Runtime-selected kernels behind the warp access analysis. Every routine has
// a scalar reference and, on x86-64, an AVX2 variant; both must agree
// bit-for-bit on every input.

#include <cstdint>
#include <span>
#include <string_view>

namespace vgpu::simd {

enum class Isa { Scalar, Avx2 };

std::string_view to_string(Isa isa) noexcept;

bool cpu_supports(Isa isa) noexcept;

// Highest supported ISA, unless VGPU_ISA=scalar is set in the environment.
Isa detected_isa() noexcept;

Isa active_isa() noexcept;

// Throws std::invalid_argument if the CPU lacks `isa`.
void force_isa(Isa isa);
void reset_isa() noexcept;

/// Writes `values[i] >> shift` into `out[i]`; `out.size() >= values.size()`.
void shift_right(std::span<const std::uint64_t> values, unsigned shift,
                 std::span<std::uint64_t> out);

/// Number of distinct values.
std::uint32_t count_distinct(std::span<const std::uint64_t> values);

/// Deduplicates `words`, maps each distinct word to `word % bank_count`, and
/// returns the largest per-bank population. `bank_count` must be positive.
std::uint32_t max_bank_load(std::span<const std::uint64_t> words,
                            std::uint32_t bank_count);

namespace scalar {
void shift_right(std::span<const std::uint64_t> values, unsigned shift,
                 std::span<std::uint64_t> out);
std::uint32_t count_distinct(std::span<const std::uint64_t> values);
std::uint32_t max_bank_load(std::span<const std::uint64_t> words,
                            std::uint32_t bank_count);
}  // namespace scalar

#if defined(__x86_64__) || defined(_M_X64)
#define VGPU_HAVE_AVX2_VARIANT 1
namespace avx2 {
void shift_right(std::span<const std::uint64_t> values, unsigned shift,
                 std::span<std::uint64_t> out);
std::uint32_t count_distinct(std::span<const std::uint64_t> values);
std::uint32_t max_bank_load(std::span<const std::uint64_t> words,
                            std::uint32_t bank_count);
}  // namespace avx2
#endif

}  // namespace vgpu::simd
