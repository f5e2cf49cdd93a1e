#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "vgpu/simt/error.hpp"
#include "vgpu/simt/memory.hpp"
#include "vgpu/simt/metrics.hpp"
#include "vgpu/simt/thread_ctx.hpp"
#include "vgpu/simt/types.hpp"

namespace vgpu::simt {

namespace detail {
struct SimulatorState;
}

/// One structured_if evaluation, recorded when SimOptions::record_access_log
/// is set.
struct BranchRecord {
  std::string kernel;
  std::uint64_t block_linear = 0;
  std::uint32_t warp_id = 0;
  std::uint64_t step = 0;
  std::uint64_t active_mask = 0;
  std::uint64_t taken_mask = 0;

  bool divergent() const noexcept { return taken_mask != 0 && taken_mask != active_mask; }
};

/// Throws SimError{LaunchConfigInvalid} when `cfg` violates the limits.
void validate(const LaunchConfig& cfg, const SimOptions& opts);

/// A virtual GPU. Blocks run one after another; inside a block the warps
/// advance round-robin, one warp instruction per turn, and the lanes of a
/// warp execute in lockstep. Independent instances share no state.
class Simulator {
 public:
  explicit Simulator(SimOptions opts = {});
  ~Simulator();
  Simulator(Simulator&&) noexcept;
  Simulator& operator=(Simulator&&) noexcept;

  const SimOptions& options() const noexcept;

  MetricsReport launch(const Kernel& kernel, const LaunchConfig& cfg, DeviceMemory& mem);

  // From the most recent launch.
  const std::vector<std::string>& warnings() const noexcept;
  const std::vector<BranchRecord>& branch_log() const noexcept;

 private:
  std::unique_ptr<detail::SimulatorState> impl_;
};

MetricsReport launch_kernel(const Kernel& kernel, const LaunchConfig& cfg, DeviceMemory& mem,
                            const SimOptions& opts = {});

}  // namespace vgpu::simt
