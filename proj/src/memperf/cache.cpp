#include "vgpu/memperf/cache.hpp"

#include <algorithm>
#include <stdexcept>

namespace vgpu::memperf {

bool LruCache::access(std::uint64_t line) {
  if (auto it = where_.find(line); it != where_.end()) {
    order_.splice(order_.begin(), order_, it->second);
    return true;
  }
  if (capacity_ == 0) return false;
  if (order_.size() == capacity_) {
    where_.erase(order_.back());
    order_.pop_back();
  }
  order_.push_front(line);
  where_[line] = order_.begin();
  return false;
}

std::vector<std::uint64_t> to_lines(std::span<const std::uint64_t> byte_addresses,
                                    std::size_t line_bytes) {
  if (line_bytes == 0) throw std::invalid_argument("line_bytes must be positive");
  std::vector<std::uint64_t> out(byte_addresses.size());
  std::transform(byte_addresses.begin(), byte_addresses.end(), out.begin(),
                 [&](std::uint64_t a) { return a / line_bytes; });
  return out;
}

HitMiss simulate_cache(std::span<const std::uint64_t> trace, const CacheModel& cache) {
  LruCache lru(cache.capacity_lines);
  HitMiss r;
  for (auto line : trace) {
    if (lru.access(line)) {
      ++r.hits;
    } else {
      ++r.misses;
    }
  }
  return r;
}

std::vector<HitMiss> simulate_l3(const std::vector<std::vector<std::uint64_t>>& traces,
                                 const L3Config& cfg) {
  if (cfg.cores == 0) throw std::invalid_argument("L3: cores must be at least 1");
  if (traces.size() > cfg.cores) throw std::invalid_argument("L3: more traces than cores");

  std::vector<HitMiss> result(cfg.cores);
  std::vector<LruCache> caches;
  if (cfg.policy == L3Policy::Static) {
    caches.assign(cfg.cores, LruCache(cfg.total_lines / cfg.cores));
  } else {
    caches.emplace_back(cfg.total_lines);
  }

  std::size_t longest = 0;
  for (const auto& t : traces) longest = std::max(longest, t.size());
  for (std::size_t k = 0; k < longest; ++k) {
    for (std::size_t c = 0; c < traces.size(); ++c) {
      if (k >= traces[c].size()) continue;
      LruCache& lru = cfg.policy == L3Policy::Static ? caches[c] : caches.front();
      if (lru.access(traces[c][k])) {
        ++result[c].hits;
      } else {
        ++result[c].misses;
      }
    }
  }
  return result;
}

}  // namespace vgpu::memperf
