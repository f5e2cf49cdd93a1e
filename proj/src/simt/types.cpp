#include "vgpu/simt/types.hpp"

#include <sstream>

namespace vgpu::simt {

std::string to_string(const Dim3& d) {
  std::ostringstream os;
  os << '(' << d.x << ',' << d.y << ',' << d.z << ')';
  return os.str();
}

std::string to_string(const ThreadCoord& c) {
  std::ostringstream os;
  os << "block" << to_string(c.block_idx) << " thread" << to_string(c.thread_idx)
     << " gid=" << c.global_linear_id << " warp=" << c.warp_id << " lane=" << c.lane;
  return os.str();
}

LaunchConfig linear_launch(std::uint64_t n, std::uint32_t threads_per_block,
                           std::size_t shared_mem_bytes) {
  LaunchConfig cfg;
  cfg.block = Dim3{threads_per_block, 1, 1};
  const std::uint64_t blocks =
      threads_per_block == 0 ? 0 : (n + threads_per_block - 1) / threads_per_block;
  cfg.grid = Dim3{static_cast<std::uint32_t>(blocks), 1, 1};
  cfg.shared_mem_bytes = shared_mem_bytes;
  return cfg;
}

ThreadCoord make_coord(const LaunchConfig& cfg, const Dim3& block_idx,
                       std::uint32_t thread_linear) {
  ThreadCoord c;
  c.block_idx = block_idx;
  c.thread_idx = delinearize(thread_linear, cfg.block);
  c.global_linear_id =
      linearize(block_idx, cfg.grid) * cfg.threads_per_block() + thread_linear;
  c.warp_id = thread_linear / cfg.warp_size;
  c.lane = thread_linear % cfg.warp_size;
  return c;
}

}  // namespace vgpu::simt
