#pragma once

#include <cstdint>
#include <list>
#include <span>
#include <unordered_map>
#include <vector>

namespace vgpu::memperf {

/// Fully associative LRU set of line addresses.
class LruCache {
 public:
  explicit LruCache(std::size_t capacity_lines) : capacity_(capacity_lines) {}

  // Returns true on a hit. A miss inserts the line, evicting the least
  // recently used one when full. A zero-capacity cache always misses.
  bool access(std::uint64_t line);

  bool contains(std::uint64_t line) const { return where_.contains(line); }
  std::size_t size() const noexcept { return order_.size(); }
  std::size_t capacity() const noexcept { return capacity_; }
  // Most recently used first.
  std::vector<std::uint64_t> resident() const { return {order_.begin(), order_.end()}; }

 private:
  std::size_t capacity_;
  std::list<std::uint64_t> order_;
  std::unordered_map<std::uint64_t, std::list<std::uint64_t>::iterator> where_;
};

struct CacheModel {
  std::size_t capacity_lines = 1;
  std::size_t line_bytes = 64;
};

struct HitMiss {
  std::uint64_t hits = 0;
  std::uint64_t misses = 0;
  bool operator==(const HitMiss&) const = default;
};

std::vector<std::uint64_t> to_lines(std::span<const std::uint64_t> byte_addresses,
                                    std::size_t line_bytes);

HitMiss simulate_cache(std::span<const std::uint64_t> trace, const CacheModel& cache);

enum class L3Policy { Static, Dynamic };

struct L3Config {
  std::size_t total_lines = 0;
  std::size_t cores = 1;
  L3Policy policy = L3Policy::Dynamic;
};

/// Accesses are interleaved round-robin: the k-th access of core 0, then of
/// core 1, and so on, skipping cores whose trace is exhausted. Static gives
/// every core a private LRU of floor(total_lines / cores) lines; Dynamic
/// shares one LRU of total_lines, so cores touching the same line share it.
/// `traces.size()` may be less than `cores`; the remaining cores are idle.
std::vector<HitMiss> simulate_l3(const std::vector<std::vector<std::uint64_t>>& traces,
                                 const L3Config& cfg);

}  // namespace vgpu::memperf
