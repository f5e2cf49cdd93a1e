#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

namespace vgpu::simt {

struct Dim3 {
  std::uint32_t x = 1;
  std::uint32_t y = 1;
  std::uint32_t z = 1;

  constexpr std::uint64_t volume() const noexcept {
    return std::uint64_t{x} * y * z;
  }
  constexpr bool operator==(const Dim3&) const = default;
};

std::string to_string(const Dim3& d);

/// Execution geometry of one grid.
struct LaunchConfig {
  Dim3 grid;
  Dim3 block;
  std::size_t shared_mem_bytes = 0;
  std::uint32_t warp_size = 32;

  std::uint32_t threads_per_block() const noexcept {
    return static_cast<std::uint32_t>(block.volume());
  }
  std::uint32_t warps_per_block() const noexcept {
    return (threads_per_block() + warp_size - 1) / warp_size;
  }
};

/// 1-D launch helper using the usual ceil-divide grid.
LaunchConfig linear_launch(std::uint64_t n, std::uint32_t threads_per_block,
                           std::size_t shared_mem_bytes = 0);

enum class RaceMode { Strict, Permissive };

struct SimOptions {
  std::uint32_t max_threads_per_block = 1024;
  std::uint32_t bank_count = 32;
  std::uint32_t bank_width_bytes = 4;
  std::uint32_t segment_bytes = 128;
  // Deepest device-launched grid allowed; the host grid is depth 0.
  std::uint32_t max_nesting_depth = 2;
  RaceMode race_mode = RaceMode::Strict;
  bool record_access_log = false;
  std::size_t fiber_stack_bytes = 64 * 1024;
};

struct ThreadCoord {
  Dim3 block_idx;
  Dim3 thread_idx;
  std::uint64_t global_linear_id = 0;
  std::uint32_t warp_id = 0;
  std::uint32_t lane = 0;

  bool operator==(const ThreadCoord&) const = default;
};

std::string to_string(const ThreadCoord& c);

// Row-major, x fastest.
constexpr std::uint64_t linearize(const Dim3& idx, const Dim3& dim) noexcept {
  return idx.x + std::uint64_t{dim.x} * (idx.y + std::uint64_t{dim.y} * idx.z);
}

constexpr Dim3 delinearize(std::uint64_t linear, const Dim3& dim) noexcept {
  Dim3 r;
  r.x = static_cast<std::uint32_t>(linear % dim.x);
  linear /= dim.x;
  r.y = static_cast<std::uint32_t>(linear % dim.y);
  r.z = static_cast<std::uint32_t>(linear / dim.y);
  return r;
}

ThreadCoord make_coord(const LaunchConfig& cfg, const Dim3& block_idx,
                       std::uint32_t thread_linear);

}  // namespace vgpu::simt
