#pragma once

#include <cstdint>
#include <span>

namespace vgpu::simt {

/// One active lane's part of a warp memory instruction.
struct LaneAccess {
  std::uint64_t address = 0;
  std::uint32_t width = 4;
};

struct BankGeometry {
  std::uint32_t bank_count = 32;
  std::uint32_t bank_width_bytes = 4;
};

/// Number of distinct aligned `segment_bytes` segments touched by the warp.
/// An access that straddles a segment boundary touches every segment it
/// covers. `segment_bytes` must be positive.
std::uint32_t coalesce_count(std::span<const LaneAccess> accesses,
                             std::uint32_t segment_bytes = 128);

/// Maximum over banks of the number of distinct bank-width words the warp
/// touches in that bank. Identical words are one broadcast, so a uniform
/// access has degree 1. Returns 0 for an empty access set.
std::uint32_t bank_conflict_degree(std::span<const LaneAccess> accesses,
                                   const BankGeometry& banks = {});

}  // namespace vgpu::simt
