#include "vgpu/simt/warp_access.hpp"

#include <bit>
#include <stdexcept>
#include <vector>

#include "vgpu/simd/dispatch.hpp"

namespace vgpu::simt {

namespace {

// Ids of the `unit`-sized blocks covered by each access, in lane order.
std::vector<std::uint64_t> covered_units(std::span<const LaneAccess> accesses,
                                         std::uint32_t unit) {
  std::vector<std::uint64_t> first(accesses.size());
  bool straddles = false;
  if (std::has_single_bit(unit)) {
    std::vector<std::uint64_t> addr(accesses.size());
    for (std::size_t i = 0; i < accesses.size(); ++i) addr[i] = accesses[i].address;
    const unsigned shift = static_cast<unsigned>(std::countr_zero(unit));
    simd::shift_right(addr, shift, first);
  } else {
    for (std::size_t i = 0; i < accesses.size(); ++i) first[i] = accesses[i].address / unit;
  }
  for (const auto& a : accesses) {
    if (a.width > 0 && (a.address % unit) + a.width > unit) {
      straddles = true;
      break;
    }
  }
  if (!straddles) return first;

  std::vector<std::uint64_t> ids;
  ids.reserve(accesses.size() * 2);
  for (std::size_t i = 0; i < accesses.size(); ++i) {
    const auto& a = accesses[i];
    const std::uint64_t last = a.width == 0 ? first[i] : (a.address + a.width - 1) / unit;
    for (std::uint64_t s = first[i]; s <= last; ++s) ids.push_back(s);
  }
  return ids;
}

}  // namespace

std::uint32_t coalesce_count(std::span<const LaneAccess> accesses,
                             std::uint32_t segment_bytes) {
  if (segment_bytes == 0) throw std::invalid_argument("segment_bytes must be positive");
  if (accesses.empty()) return 0;
  return simd::count_distinct(covered_units(accesses, segment_bytes));
}

std::uint32_t bank_conflict_degree(std::span<const LaneAccess> accesses,
                                   const BankGeometry& banks) {
  if (banks.bank_count == 0 || banks.bank_width_bytes == 0) {
    throw std::invalid_argument("bank geometry must be positive");
  }
  if (accesses.empty()) return 0;
  return simd::max_bank_load(covered_units(accesses, banks.bank_width_bytes),
                             banks.bank_count);
}

}  // namespace vgpu::simt
