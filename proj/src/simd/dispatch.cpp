#include "vgpu/simd/dispatch.hpp"

#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

namespace vgpu::simd {

namespace {

struct Table {
  void (*shift_right)(std::span<const std::uint64_t>, unsigned, std::span<std::uint64_t>);
  std::uint32_t (*count_distinct)(std::span<const std::uint64_t>);
  std::uint32_t (*max_bank_load)(std::span<const std::uint64_t>, std::uint32_t);
};

constexpr Table kScalar{&scalar::shift_right, &scalar::count_distinct,
                        &scalar::max_bank_load};
#ifdef VGPU_HAVE_AVX2_VARIANT
constexpr Table kAvx2{&avx2::shift_right, &avx2::count_distinct,
                      &avx2::max_bank_load};
#endif

const Table& table_for(Isa isa) noexcept {
#ifdef VGPU_HAVE_AVX2_VARIANT
  if (isa == Isa::Avx2) return kAvx2;
#endif
  (void)isa;
  return kScalar;
}

std::atomic<Isa>& current() noexcept {
  static std::atomic<Isa> isa{detected_isa()};
  return isa;
}

}  // namespace

std::string_view to_string(Isa isa) noexcept {
  switch (isa) {
    case Isa::Scalar: return "scalar";
    case Isa::Avx2: return "avx2";
  }
  return "unknown";
}

bool cpu_supports(Isa isa) noexcept {
  switch (isa) {
    case Isa::Scalar: return true;
    case Isa::Avx2:
#ifdef VGPU_HAVE_AVX2_VARIANT
      return __builtin_cpu_supports("avx2");
#else
      return false;
#endif
  }
  return false;
}

Isa detected_isa() noexcept {
  if (const char* env = std::getenv("VGPU_ISA")) {
    if (std::string(env) == "scalar") return Isa::Scalar;
  }
  return cpu_supports(Isa::Avx2) ? Isa::Avx2 : Isa::Scalar;
}

Isa active_isa() noexcept { return current().load(std::memory_order_relaxed); }

void force_isa(Isa isa) {
  if (!cpu_supports(isa)) {
    throw std::invalid_argument("CPU does not support " + std::string(to_string(isa)));
  }
  current().store(isa, std::memory_order_relaxed);
}

void reset_isa() noexcept { current().store(detected_isa(), std::memory_order_relaxed); }

void shift_right(std::span<const std::uint64_t> values, unsigned shift,
                 std::span<std::uint64_t> out) {
  table_for(active_isa()).shift_right(values, shift, out);
}

std::uint32_t count_distinct(std::span<const std::uint64_t> values) {
  return table_for(active_isa()).count_distinct(values);
}

std::uint32_t max_bank_load(std::span<const std::uint64_t> words,
                            std::uint32_t bank_count) {
  return table_for(active_isa()).max_bank_load(words, bank_count);
}

}  // namespace vgpu::simd
