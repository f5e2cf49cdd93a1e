#pragma once

#include <filesystem>

#include "json.hpp"
#include "vgpu/streams/timeline.hpp"

namespace vgpu::streams {

// A scenario is an ordered "program" of commands:
//   {"op": "copy_h2d"|"copy_d2h"|"kernel", "stream": n, "id": s,
//    "duration": t | "metrics": {counters}}
//   {"record": event_id, "stream": n}
//   {"wait": event_id, "stream": n}     applies to that stream's next op
// plus optional "engines": {"h2d","d2h","compute"} and "weights":
// {"per_transaction","per_step","per_conflict_cycle"}.
struct Scenario {
  std::vector<StreamOp> ops;
  std::vector<EventRecord> events;
  EngineModel engines;
  CostWeights weights;
};

// Throws util::SchemaError naming the offending field.
Scenario scenario_from_json(const nlohmann::json& j, const std::string& source = "scenario");
Scenario load_scenario(const std::filesystem::path& path);
nlohmann::json to_json(const Scenario& s);

}  // namespace vgpu::streams
