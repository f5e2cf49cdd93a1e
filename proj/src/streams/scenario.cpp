#include "vgpu/streams/scenario.hpp"

#include <map>
#include <set>

#include "vgpu/util/json_file.hpp"

namespace vgpu::streams {

using util::SchemaError;

namespace {

OpKind parse_kind(const std::string& s, const std::string& where) {
  if (s == "copy_h2d") return OpKind::CopyH2D;
  if (s == "copy_d2h") return OpKind::CopyD2H;
  if (s == "kernel") return OpKind::Kernel;
  throw SchemaError(where + ".op: expected copy_h2d, copy_d2h or kernel, got '" + s + "'");
}

std::uint32_t positive_engine_count(const nlohmann::json& eng, const char* key,
                                    const std::string& where) {
  if (!eng.contains(key)) return 1;
  const auto n = util::require_count(eng, key, where);
  if (n == 0 || n > 64) throw SchemaError(where + "." + key + ": expected 1..64");
  return static_cast<std::uint32_t>(n);
}

}  // namespace

Scenario scenario_from_json(const nlohmann::json& j, const std::string& source) {
  if (!j.is_object()) throw SchemaError(source + ": expected object");
  Scenario sc;

  if (j.contains("engines")) {
    const auto& eng = j["engines"];
    const std::string where = source + ".engines";
    if (!eng.is_object()) throw SchemaError(where + ": expected object");
    sc.engines.copy_engines_h2d = positive_engine_count(eng, "h2d", where);
    sc.engines.copy_engines_d2h = positive_engine_count(eng, "d2h", where);
    sc.engines.compute_engines = positive_engine_count(eng, "compute", where);
  }
  if (j.contains("weights")) {
    const auto& w = j["weights"];
    const std::string where = source + ".weights";
    if (!w.is_object()) throw SchemaError(where + ": expected object");
    if (w.contains("per_transaction")) {
      sc.weights.per_transaction = util::require_non_negative(w, "per_transaction", where);
    }
    if (w.contains("per_step")) sc.weights.per_step = util::require_non_negative(w, "per_step", where);
    if (w.contains("per_conflict_cycle")) {
      sc.weights.per_conflict_cycle = util::require_non_negative(w, "per_conflict_cycle", where);
    }
  }

  const auto& program = util::require(j, "program", source);
  if (!program.is_array()) throw SchemaError(source + ".program: expected array");

  std::map<std::uint32_t, std::size_t> issued;
  std::map<std::uint32_t, std::vector<std::string>> pending_waits;
  std::set<std::string> recorded;
  for (std::size_t k = 0; k < program.size(); ++k) {
    const auto& cmd = program[k];
    const std::string where = source + ".program[" + std::to_string(k) + "]";
    const auto stream = util::require_count(cmd, "stream", where);
    if (stream > UINT32_MAX) throw SchemaError(where + ".stream: out of range");
    const auto sid = static_cast<std::uint32_t>(stream);

    if (cmd.contains("op")) {
      StreamOp op;
      op.stream_id = sid;
      op.kind = parse_kind(util::require_string(cmd, "op", where), where);
      op.id = cmd.contains("id") ? util::require_string(cmd, "id", where)
                                 : std::string(to_string(op.kind)) + "_" + std::to_string(k);
      if (cmd.contains("duration") == cmd.contains("metrics")) {
        throw SchemaError(where + ": give exactly one of duration or metrics");
      }
      if (cmd.contains("duration")) {
        op.duration = util::require_non_negative(cmd, "duration", where);
      } else {
        if (op.kind != OpKind::Kernel) throw SchemaError(where + ".metrics: only kernels take metrics");
        try {
          nlohmann::json m = cmd["metrics"];
          if (m.is_object() && !m.contains("per_kernel")) m["per_kernel"] = nlohmann::json::object();
          op.duration = kernel_duration(simt::metrics_from_json(m), sc.weights);
        } catch (const std::invalid_argument& e) {
          throw SchemaError(where + "." + e.what());
        }
      }
      op.waits_on = std::move(pending_waits[sid]);
      pending_waits[sid].clear();
      ++issued[sid];
      sc.ops.push_back(std::move(op));
    } else if (cmd.contains("record")) {
      sc.events.push_back({util::require_string(cmd, "record", where), sid, issued[sid]});
      if (!recorded.insert(sc.events.back().event_id).second) {
        throw SchemaError(where + ".record: event '" + sc.events.back().event_id +
                          "' already recorded");
      }
    } else if (cmd.contains("wait")) {
      auto ev = util::require_string(cmd, "wait", where);
      if (!recorded.contains(ev)) {
        throw TimelineError(TimelineErrorKind::UnknownEvent,
                            where + ".wait: event '" + ev + "' has not been recorded");
      }
      pending_waits[sid].push_back(std::move(ev));
    } else {
      throw SchemaError(where + ": expected one of op, record, wait");
    }
  }
  for (const auto& [sid, waits] : pending_waits) {
    if (!waits.empty()) {
      throw SchemaError(source + ".program: wait on stream " + std::to_string(sid) +
                        " is not followed by any op");
    }
  }
  return sc;
}

Scenario load_scenario(const std::filesystem::path& path) {
  return scenario_from_json(util::read_json_file(path), path.string());
}

nlohmann::json to_json(const Scenario& s) {
  // Re-emit in program order: waits, then the op, with records placed after
  // the op they follow.
  nlohmann::json program = nlohmann::json::array();
  std::map<std::uint32_t, std::size_t> issued;
  auto flush_records = [&](std::uint32_t sid) {
    for (const auto& e : s.events) {
      if (e.stream_id == sid && e.position == issued[sid]) {
        program.push_back({{"record", e.event_id}, {"stream", sid}});
      }
    }
  };
  std::map<std::uint32_t, bool> started;
  for (const auto& op : s.ops) {
    if (!started[op.stream_id]) {
      flush_records(op.stream_id);
      started[op.stream_id] = true;
    }
    for (const auto& w : op.waits_on) program.push_back({{"wait", w}, {"stream", op.stream_id}});
    program.push_back({{"op", std::string(to_string(op.kind))},
                       {"id", op.id},
                       {"stream", op.stream_id},
                       {"duration", op.duration}});
    ++issued[op.stream_id];
    flush_records(op.stream_id);
  }
  for (const auto& e : s.events) {
    if (!started[e.stream_id] && e.position == 0) {
      program.push_back({{"record", e.event_id}, {"stream", e.stream_id}});
    }
  }
  return {{"engines",
           {{"h2d", s.engines.copy_engines_h2d},
            {"d2h", s.engines.copy_engines_d2h},
            {"compute", s.engines.compute_engines}}},
          {"weights",
           {{"per_transaction", s.weights.per_transaction},
            {"per_step", s.weights.per_step},
            {"per_conflict_cycle", s.weights.per_conflict_cycle}}},
          {"program", std::move(program)}};
}

}  // namespace vgpu::streams
