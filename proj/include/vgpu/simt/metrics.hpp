#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "json.hpp"

namespace vgpu::simt {

struct Counters {
  std::uint64_t global_transactions = 0;
  std::uint64_t divergence_events = 0;
  std::uint64_t bank_conflict_extra_cycles = 0;
  std::uint64_t barriers_executed = 0;
  std::uint64_t thread_steps = 0;
  std::uint64_t child_launches = 0;
  std::uint64_t race_warnings = 0;

  Counters& operator+=(const Counters& o) noexcept;
  bool operator==(const Counters&) const = default;
};

/// Observable output of one or more launches. Totals always equal the sum of
/// the per-kernel entries.
struct MetricsReport : Counters {
  std::map<std::string, Counters> per_kernel;

  void add(const std::string& kernel, const Counters& c);
  MetricsReport& operator+=(const MetricsReport& o);
  bool operator==(const MetricsReport&) const = default;
};

nlohmann::json to_json(const Counters& c);
nlohmann::json to_json(const MetricsReport& r);

// Throws std::invalid_argument naming the offending field.
MetricsReport metrics_from_json(const nlohmann::json& j);

}  // namespace vgpu::simt
