#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace vgpu::memperf {

enum class Level { Registers, L1, L2, L3, RAM, VRAM, SSD, HDD, External };

std::string_view to_string(Level level) noexcept;
std::optional<Level> level_from_string(std::string_view s) noexcept;

struct MemoryLevelSpec {
  Level name = Level::RAM;
  double latency = 0;    // time units per access
  double bandwidth = 1;  // bytes per time unit
  std::uint64_t capacity = 0;

  double transfer_cost(std::uint64_t bytes) const noexcept {
    return latency + static_cast<double>(bytes) / bandwidth;
  }
};

/// Levels listed fastest first.
struct HierarchySpec {
  std::vector<MemoryLevelSpec> levels;

  const MemoryLevelSpec* find(Level l) const noexcept;
};

class SpecInvalid : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Nanosecond latencies and bytes-per-nanosecond bandwidths that only encode
/// the qualitative ordering from registers down to external storage.
HierarchySpec default_hierarchy();

// Throws SpecInvalid unless latency and capacity are non-decreasing down the
// list, names are unique, bandwidths are positive and capacities non-zero.
void validate(const HierarchySpec& h);

struct TrainingFlowSpec {
  std::uint64_t dataset_bytes = 0;
  std::uint64_t batch_bytes = 1;
  std::uint32_t epochs = 1;
  HierarchySpec hierarchy = default_hierarchy();
  std::uint64_t vram_capacity = 0;
  std::uint64_t ram_capacity = 0;
  Level storage = Level::SSD;  // where the dataset lives
};

void validate(const TrainingFlowSpec& spec);

struct EpochBreakdown {
  std::uint64_t batches = 0;
  std::uint64_t disk_to_ram_bytes = 0;
  std::uint64_t ram_to_vram_bytes = 0;
  std::uint64_t ram_hits = 0;   // batches served from RAM without touching storage
  std::uint64_t vram_hits = 0;  // batches already resident on the device
  double disk_to_ram_time = 0;
  double ram_to_vram_time = 0;
  double total_time = 0;
};

struct FlowReport {
  std::vector<EpochBreakdown> epochs;
  double total_time = 0;
};

/// Each epoch walks the batches in order. A batch not resident in VRAM moves
/// RAM -> VRAM, first loading storage -> RAM unless RAM holds it. Both
/// memories keep an LRU of whole batches within their byte capacity. A
/// stage costs latency + bytes / bandwidth of its source level (storage for
/// the first hop, VRAM for the staged second hop).
FlowReport estimate_training_flow(const TrainingFlowSpec& spec);

nlohmann::json to_json(const HierarchySpec& h);
nlohmann::json to_json(const TrainingFlowSpec& s);
nlohmann::json to_json(const FlowReport& r);
std::string render_text(const FlowReport& r);

// Throw util::SchemaError on malformed input and SpecInvalid on specs that
// parse but violate the invariants.
HierarchySpec hierarchy_from_json(const nlohmann::json& j, const std::string& where = "hierarchy");
TrainingFlowSpec flow_spec_from_json(const nlohmann::json& j, const std::string& source = "flow");
TrainingFlowSpec load_flow_spec(const std::filesystem::path& path);

}  // namespace vgpu::memperf
