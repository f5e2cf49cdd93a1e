#include "vgpu/memperf/flow.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <list>
#include <set>
#include <sstream>
#include <unordered_map>

#include "vgpu/util/json_file.hpp"

namespace vgpu::memperf {

namespace {

constexpr std::pair<Level, std::string_view> kNames[] = {
    {Level::Registers, "Registers"}, {Level::L1, "L1"},   {Level::L2, "L2"},
    {Level::L3, "L3"},               {Level::RAM, "RAM"}, {Level::VRAM, "VRAM"},
    {Level::SSD, "SSD"},             {Level::HDD, "HDD"}, {Level::External, "External"},
};

// LRU over whole batches, bounded by bytes rather than entries.
class ByteLru {
 public:
  explicit ByteLru(std::uint64_t capacity) : capacity_(capacity) {}

  bool touch(std::uint64_t id) {
    auto it = where_.find(id);
    if (it == where_.end()) return false;
    order_.splice(order_.begin(), order_, it->second);
    return true;
  }

  void insert(std::uint64_t id, std::uint64_t bytes) {
    if (bytes > capacity_) return;
    while (used_ + bytes > capacity_) {
      used_ -= order_.back().second;
      where_.erase(order_.back().first);
      order_.pop_back();
    }
    order_.emplace_front(id, bytes);
    where_[id] = order_.begin();
    used_ += bytes;
  }

 private:
  std::uint64_t capacity_;
  std::uint64_t used_ = 0;
  std::list<std::pair<std::uint64_t, std::uint64_t>> order_;
  std::unordered_map<std::uint64_t, std::list<std::pair<std::uint64_t, std::uint64_t>>::iterator>
      where_;
};

const MemoryLevelSpec& level_or_throw(const HierarchySpec& h, Level l) {
  const MemoryLevelSpec* spec = h.find(l);
  if (!spec) throw SpecInvalid("hierarchy has no " + std::string(to_string(l)) + " level");
  return *spec;
}

std::string num(double v) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(v == std::floor(v) ? 0 : 3) << v;
  return os.str();
}

}  // namespace

std::string_view to_string(Level level) noexcept {
  for (const auto& [l, name] : kNames) {
    if (l == level) return name;
  }
  return "?";
}

std::optional<Level> level_from_string(std::string_view s) noexcept {
  for (const auto& [l, name] : kNames) {
    if (name == s) return l;
  }
  return std::nullopt;
}

const MemoryLevelSpec* HierarchySpec::find(Level l) const noexcept {
  for (const auto& lv : levels) {
    if (lv.name == l) return &lv;
  }
  return nullptr;
}

HierarchySpec default_hierarchy() {
  constexpr std::uint64_t KiB = 1024, MiB = KiB * 1024, GiB = MiB * 1024, TiB = GiB * 1024;
  return {{
      {Level::Registers, 0.3, 1000, 4 * KiB},
      {Level::L1, 1, 500, 64 * KiB},
      {Level::L2, 4, 200, 1 * MiB},
      {Level::L3, 15, 100, 32 * MiB},
      {Level::RAM, 80, 50, 64 * GiB},
      {Level::VRAM, 100, 25, 64 * GiB},
      {Level::SSD, 50'000, 3, 2 * TiB},
      {Level::HDD, 5'000'000, 0.2, 8 * TiB},
      {Level::External, 20'000'000, 0.1, 100 * TiB},
  }};
}

void validate(const HierarchySpec& h) {
  if (h.levels.empty()) throw SpecInvalid("hierarchy: no levels");
  std::set<Level> seen;
  for (std::size_t i = 0; i < h.levels.size(); ++i) {
    const auto& lv = h.levels[i];
    const std::string name(to_string(lv.name));
    if (!seen.insert(lv.name).second) throw SpecInvalid("hierarchy: " + name + " listed twice");
    if (!(lv.latency >= 0) || !std::isfinite(lv.latency)) {
      throw SpecInvalid("hierarchy." + name + ".latency: must be finite and non-negative");
    }
    if (!(lv.bandwidth > 0) || !std::isfinite(lv.bandwidth)) {
      throw SpecInvalid("hierarchy." + name + ".bandwidth: must be finite and positive");
    }
    if (lv.capacity == 0) throw SpecInvalid("hierarchy." + name + ".capacity: must be positive");
    if (i == 0) continue;
    const auto& prev = h.levels[i - 1];
    const std::string prev_name(to_string(prev.name));
    if (lv.latency < prev.latency) {
      throw SpecInvalid("hierarchy: " + name + " is faster than " + prev_name + " above it");
    }
    if (lv.capacity < prev.capacity) {
      throw SpecInvalid("hierarchy: " + name + " is smaller than " + prev_name + " above it");
    }
  }
}

void validate(const TrainingFlowSpec& spec) {
  validate(spec.hierarchy);
  if (spec.batch_bytes == 0) throw SpecInvalid("batch_bytes: must be positive");
  if (spec.epochs == 0) throw SpecInvalid("epochs: must be at least 1");
  if (spec.batch_bytes > spec.vram_capacity) {
    throw SpecInvalid("batch_bytes (" + std::to_string(spec.batch_bytes) +
                      ") exceeds vram_capacity (" + std::to_string(spec.vram_capacity) + ")");
  }
  if (spec.batch_bytes > spec.ram_capacity) {
    throw SpecInvalid("batch_bytes (" + std::to_string(spec.batch_bytes) +
                      ") exceeds ram_capacity (" + std::to_string(spec.ram_capacity) + ")");
  }
  level_or_throw(spec.hierarchy, spec.storage);
  level_or_throw(spec.hierarchy, Level::VRAM);
}

FlowReport estimate_training_flow(const TrainingFlowSpec& spec) {
  validate(spec);
  const MemoryLevelSpec& storage = level_or_throw(spec.hierarchy, spec.storage);
  const MemoryLevelSpec& vram = level_or_throw(spec.hierarchy, Level::VRAM);

  const std::uint64_t batches = (spec.dataset_bytes + spec.batch_bytes - 1) / spec.batch_bytes;
  auto batch_size = [&](std::uint64_t b) {
    return std::min(spec.batch_bytes, spec.dataset_bytes - b * spec.batch_bytes);
  };

  ByteLru ram(spec.ram_capacity), dev(spec.vram_capacity);
  FlowReport report;
  for (std::uint32_t e = 0; e < spec.epochs; ++e) {
    EpochBreakdown ep;
    ep.batches = batches;
    for (std::uint64_t b = 0; b < batches; ++b) {
      const std::uint64_t bytes = batch_size(b);
      if (dev.touch(b)) {
        ++ep.vram_hits;
        continue;
      }
      if (ram.touch(b)) {
        ++ep.ram_hits;
      } else {
        ep.disk_to_ram_bytes += bytes;
        ep.disk_to_ram_time += storage.transfer_cost(bytes);
        ram.insert(b, bytes);
      }
      ep.ram_to_vram_bytes += bytes;
      ep.ram_to_vram_time += vram.transfer_cost(bytes);
      dev.insert(b, bytes);
    }
    ep.total_time = ep.disk_to_ram_time + ep.ram_to_vram_time;
    report.total_time += ep.total_time;
    report.epochs.push_back(ep);
  }
  return report;
}

nlohmann::json to_json(const HierarchySpec& h) {
  nlohmann::json levels = nlohmann::json::array();
  for (const auto& lv : h.levels) {
    levels.push_back({{"name", std::string(to_string(lv.name))},
                      {"latency", lv.latency},
                      {"bandwidth", lv.bandwidth},
                      {"capacity", lv.capacity}});
  }
  return levels;
}

nlohmann::json to_json(const TrainingFlowSpec& s) {
  return {{"dataset_bytes", s.dataset_bytes},
          {"batch_bytes", s.batch_bytes},
          {"epochs", s.epochs},
          {"vram_capacity", s.vram_capacity},
          {"ram_capacity", s.ram_capacity},
          {"storage", std::string(to_string(s.storage))},
          {"hierarchy", to_json(s.hierarchy)}};
}

nlohmann::json to_json(const FlowReport& r) {
  nlohmann::json epochs = nlohmann::json::array();
  for (std::size_t i = 0; i < r.epochs.size(); ++i) {
    const auto& e = r.epochs[i];
    epochs.push_back({{"epoch", i + 1},
                      {"batches", e.batches},
                      {"disk_to_ram_bytes", e.disk_to_ram_bytes},
                      {"ram_to_vram_bytes", e.ram_to_vram_bytes},
                      {"ram_hits", e.ram_hits},
                      {"vram_hits", e.vram_hits},
                      {"disk_to_ram_time", e.disk_to_ram_time},
                      {"ram_to_vram_time", e.ram_to_vram_time},
                      {"total_time", e.total_time}});
  }
  return {{"epochs", std::move(epochs)}, {"total_time", r.total_time}};
}

std::string render_text(const FlowReport& r) {
  std::vector<std::vector<std::string>> rows{{"epoch", "batches", "disk->RAM bytes",
                                              "RAM->VRAM bytes", "RAM hits", "VRAM hits",
                                              "disk time", "transfer time", "total time"}};
  for (std::size_t i = 0; i < r.epochs.size(); ++i) {
    const auto& e = r.epochs[i];
    rows.push_back({std::to_string(i + 1), std::to_string(e.batches),
                    std::to_string(e.disk_to_ram_bytes), std::to_string(e.ram_to_vram_bytes),
                    std::to_string(e.ram_hits), std::to_string(e.vram_hits), num(e.disk_to_ram_time),
                    num(e.ram_to_vram_time), num(e.total_time)});
  }
  std::vector<std::size_t> w(rows.front().size(), 0);
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) w[c] = std::max(w[c], row[c].size());
  }
  std::ostringstream os;
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      os << (c ? "  " : "") << std::string(w[c] - row[c].size(), ' ') << row[c];
    }
    os << '\n';
  }
  os << "\ntotal time " << num(r.total_time) << '\n';
  return os.str();
}

HierarchySpec hierarchy_from_json(const nlohmann::json& j, const std::string& where) {
  if (!j.is_array()) throw util::SchemaError(where + ": expected array of levels");
  HierarchySpec h;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string at = where + "[" + std::to_string(i) + "]";
    MemoryLevelSpec lv;
    const std::string name = util::require_string(j[i], "name", at);
    const auto level = level_from_string(name);
    if (!level) throw util::SchemaError(at + ".name: unknown level '" + name + "'");
    lv.name = *level;
    lv.latency = util::require_non_negative(j[i], "latency", at);
    lv.bandwidth = util::require_non_negative(j[i], "bandwidth", at);
    lv.capacity = util::require_count(j[i], "capacity", at);
    h.levels.push_back(lv);
  }
  validate(h);
  return h;
}

TrainingFlowSpec flow_spec_from_json(const nlohmann::json& j, const std::string& source) {
  if (!j.is_object()) throw util::SchemaError(source + ": expected object");
  TrainingFlowSpec s;
  s.dataset_bytes = util::require_count(j, "dataset_bytes", source);
  s.batch_bytes = util::require_count(j, "batch_bytes", source);
  const auto epochs = util::require_count(j, "epochs", source);
  if (epochs > 1'000'000) throw util::SchemaError(source + ".epochs: too large");
  s.epochs = static_cast<std::uint32_t>(epochs);
  s.vram_capacity = util::require_count(j, "vram_capacity", source);
  s.ram_capacity = util::require_count(j, "ram_capacity", source);
  if (j.contains("storage")) {
    const std::string name = util::require_string(j, "storage", source);
    const auto level = level_from_string(name);
    if (!level) throw util::SchemaError(source + ".storage: unknown level '" + name + "'");
    s.storage = *level;
  }
  if (j.contains("hierarchy")) s.hierarchy = hierarchy_from_json(j["hierarchy"], source + ".hierarchy");
  validate(s);
  return s;
}

TrainingFlowSpec load_flow_spec(const std::filesystem::path& path) {
  return flow_spec_from_json(util::read_json_file(path), path.string());
}

}  // namespace vgpu::memperf
