#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "vgpu/simt/metrics.hpp"

namespace vgpu::streams {

enum class OpKind { CopyH2D, CopyD2H, Kernel };
enum class EngineKind { H2D, D2H, Compute };

std::string_view to_string(OpKind kind) noexcept;
std::string_view to_string(EngineKind kind) noexcept;
EngineKind engine_for(OpKind kind) noexcept;

struct StreamOp {
  std::string id;
  std::uint32_t stream_id = 0;
  OpKind kind = OpKind::Kernel;
  double duration = 0;
  std::vector<std::string> waits_on;  // event ids
};

/// Fires when the `position`-th op issued on `stream_id` completes; position
/// 0 fires at time 0.
struct EventRecord {
  std::string event_id;
  std::uint32_t stream_id = 0;
  std::size_t position = 0;
};

struct EngineModel {
  std::uint32_t copy_engines_h2d = 1;
  std::uint32_t copy_engines_d2h = 1;
  std::uint32_t compute_engines = 1;

  std::uint32_t count(EngineKind kind) const noexcept;
};

struct CostWeights {
  double per_transaction = 1.0;
  double per_step = 0.25;
  double per_conflict_cycle = 1.0;
};

double kernel_duration(const simt::Counters& c, const CostWeights& w = {});

struct Placement {
  double start = 0;
  double end = 0;
  EngineKind engine = EngineKind::Compute;
  std::uint32_t engine_index = 0;
};

struct Schedule {
  std::vector<StreamOp> ops;          // in issue order
  std::vector<Placement> placements;  // parallel to ops
  std::map<std::string, double> event_times;
  std::vector<std::vector<std::size_t>> preds;  // dependency predecessors per op
  EngineModel engines;
  double makespan = 0;
};

enum class TimelineErrorKind { CyclicDependency, UnknownEvent, InvalidProgram };

class TimelineError : public std::runtime_error {
 public:
  TimelineError(TimelineErrorKind kind, const std::string& what);
  TimelineErrorKind kind() const noexcept { return kind_; }

 private:
  TimelineErrorKind kind_;
};

/// Event-driven list scheduling: whenever an engine is free, the ready ops of
/// its kind are dispatched in ascending (stream_id, issue index) order.
Schedule simulate_timeline(const std::vector<StreamOp>& ops, const std::vector<EventRecord>& events,
                           const EngineModel& engines = {});

// Index lists of each op's dependency predecessors (stream order and event
// edges). Throws like simulate_timeline on bad input.
std::vector<std::vector<std::size_t>> dependency_graph(const std::vector<StreamOp>& ops,
                                                       const std::vector<EventRecord>& events);

struct EngineUsage {
  std::string name;  // e.g. "compute0"
  double busy = 0;
  double utilization = 0;
};

struct MakespanReport {
  double makespan = 0;
  double serialized_total = 0;
  double overlap_savings = 0;
  std::vector<EngineUsage> engines;
  std::vector<std::string> critical_path;  // op ids, earliest first
};

MakespanReport makespan_report(const Schedule& s);

// Empty string when the schedule is consistent, otherwise the first
// violation found.
std::string validate_schedule(const Schedule& s, const std::vector<EventRecord>& events);

nlohmann::json to_json(const Schedule& s);
nlohmann::json to_json(const MakespanReport& r);
std::string render_gantt(const Schedule& s, std::size_t max_width = 72);

}  // namespace vgpu::streams
