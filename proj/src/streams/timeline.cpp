#include "vgpu/streams/timeline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <sstream>

namespace vgpu::streams {

std::string_view to_string(OpKind kind) noexcept {
  switch (kind) {
    case OpKind::CopyH2D: return "copy_h2d";
    case OpKind::CopyD2H: return "copy_d2h";
    case OpKind::Kernel: return "kernel";
  }
  return "?";
}

std::string_view to_string(EngineKind kind) noexcept {
  switch (kind) {
    case EngineKind::H2D: return "h2d";
    case EngineKind::D2H: return "d2h";
    case EngineKind::Compute: return "compute";
  }
  return "?";
}

EngineKind engine_for(OpKind kind) noexcept {
  switch (kind) {
    case OpKind::CopyH2D: return EngineKind::H2D;
    case OpKind::CopyD2H: return EngineKind::D2H;
    case OpKind::Kernel: break;
  }
  return EngineKind::Compute;
}

std::uint32_t EngineModel::count(EngineKind kind) const noexcept {
  switch (kind) {
    case EngineKind::H2D: return copy_engines_h2d;
    case EngineKind::D2H: return copy_engines_d2h;
    case EngineKind::Compute: return compute_engines;
  }
  return 0;
}

double kernel_duration(const simt::Counters& c, const CostWeights& w) {
  return w.per_transaction * static_cast<double>(c.global_transactions) +
         w.per_step * static_cast<double>(c.thread_steps) +
         w.per_conflict_cycle * static_cast<double>(c.bank_conflict_extra_cycles);
}

TimelineError::TimelineError(TimelineErrorKind kind, const std::string& what)
    : std::runtime_error(what), kind_(kind) {}

namespace {

constexpr EngineKind kEngineKinds[] = {EngineKind::H2D, EngineKind::D2H, EngineKind::Compute};

std::string num(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

std::string engine_name(EngineKind kind, std::uint32_t index) {
  return std::string(to_string(kind)) + std::to_string(index);
}

struct StreamIndex {
  std::map<std::uint32_t, std::vector<std::size_t>> ops;  // stream -> op indices
  std::map<std::string, const EventRecord*> events;
};

StreamIndex index_program(const std::vector<StreamOp>& ops, const std::vector<EventRecord>& events) {
  StreamIndex idx;
  std::map<std::string, std::size_t> ids;
  for (std::size_t i = 0; i < ops.size(); ++i) {
    const StreamOp& op = ops[i];
    if (!(op.duration >= 0) || !std::isfinite(op.duration)) {
      throw TimelineError(TimelineErrorKind::InvalidProgram,
                          "op '" + op.id + "': duration must be a finite non-negative number");
    }
    if (!ids.emplace(op.id, i).second) {
      throw TimelineError(TimelineErrorKind::InvalidProgram, "duplicate op id '" + op.id + "'");
    }
    idx.ops[op.stream_id].push_back(i);
  }
  for (const auto& e : events) {
    if (!idx.events.emplace(e.event_id, &e).second) {
      throw TimelineError(TimelineErrorKind::InvalidProgram,
                          "event '" + e.event_id + "' recorded twice");
    }
    const auto it = idx.ops.find(e.stream_id);
    const std::size_t len = it == idx.ops.end() ? 0 : it->second.size();
    if (e.position > len) {
      throw TimelineError(TimelineErrorKind::InvalidProgram,
                          "event '" + e.event_id + "' follows op " + std::to_string(e.position) +
                              " of stream " + std::to_string(e.stream_id) + ", which has only " +
                              std::to_string(len));
    }
  }
  return idx;
}

}  // namespace

std::vector<std::vector<std::size_t>> dependency_graph(const std::vector<StreamOp>& ops,
                                                       const std::vector<EventRecord>& events) {
  const StreamIndex idx = index_program(ops, events);
  std::vector<std::vector<std::size_t>> preds(ops.size());
  for (const auto& [stream, list] : idx.ops) {
    for (std::size_t k = 1; k < list.size(); ++k) preds[list[k]].push_back(list[k - 1]);
  }
  for (std::size_t i = 0; i < ops.size(); ++i) {
    for (const auto& ev : ops[i].waits_on) {
      auto it = idx.events.find(ev);
      if (it == idx.events.end()) {
        throw TimelineError(TimelineErrorKind::UnknownEvent,
                            "op '" + ops[i].id + "' waits on unknown event '" + ev + "'");
      }
      const EventRecord& e = *it->second;
      if (e.position > 0) preds[i].push_back(idx.ops.at(e.stream_id)[e.position - 1]);
    }
    std::sort(preds[i].begin(), preds[i].end());
    preds[i].erase(std::unique(preds[i].begin(), preds[i].end()), preds[i].end());
  }

  // Kahn's algorithm; anything left over sits on a cycle.
  std::vector<std::size_t> indegree(ops.size());
  std::vector<std::vector<std::size_t>> succs(ops.size());
  for (std::size_t i = 0; i < ops.size(); ++i) {
    indegree[i] = preds[i].size();
    for (auto p : preds[i]) succs[p].push_back(i);
  }
  std::vector<std::size_t> frontier;
  for (std::size_t i = 0; i < ops.size(); ++i) {
    if (indegree[i] == 0) frontier.push_back(i);
  }
  std::size_t seen = 0;
  while (!frontier.empty()) {
    const std::size_t i = frontier.back();
    frontier.pop_back();
    ++seen;
    for (auto s : succs[i]) {
      if (--indegree[s] == 0) frontier.push_back(s);
    }
  }
  if (seen != ops.size()) {
    std::string cyc;
    for (std::size_t i = 0; i < ops.size(); ++i) {
      if (indegree[i] > 0) cyc += (cyc.empty() ? "" : ", ") + ops[i].id;
    }
    throw TimelineError(TimelineErrorKind::CyclicDependency, "dependency cycle through: " + cyc);
  }
  return preds;
}

Schedule simulate_timeline(const std::vector<StreamOp>& ops, const std::vector<EventRecord>& events,
                           const EngineModel& engines) {
  for (auto kind : kEngineKinds) {
    if (engines.count(kind) == 0) {
      throw TimelineError(TimelineErrorKind::InvalidProgram,
                          "engine count for " + std::string(to_string(kind)) + " must be positive");
    }
  }
  const auto preds = dependency_graph(ops, events);
  const std::size_t n = ops.size();

  Schedule s;
  s.ops = ops;
  s.engines = engines;
  s.placements.resize(n);
  s.preds = preds;

  std::vector<std::size_t> priority(n);
  std::iota(priority.begin(), priority.end(), 0);
  std::stable_sort(priority.begin(), priority.end(), [&](std::size_t a, std::size_t b) {
    return ops[a].stream_id < ops[b].stream_id;
  });

  std::map<EngineKind, std::vector<double>> free_at;
  for (auto kind : kEngineKinds) free_at[kind].assign(engines.count(kind), 0.0);

  std::vector<bool> started(n, false);
  std::size_t remaining = n;
  double now = 0;
  while (remaining > 0) {
    for (bool progress = true; progress;) {
      progress = false;
      for (std::size_t i : priority) {
        if (started[i]) continue;
        const bool ready = std::all_of(preds[i].begin(), preds[i].end(), [&](std::size_t p) {
          return started[p] && s.placements[p].end <= now;
        });
        if (!ready) continue;
        const EngineKind kind = engine_for(ops[i].kind);
        auto& pool = free_at[kind];
        auto slot = std::find_if(pool.begin(), pool.end(), [&](double f) { return f <= now; });
        if (slot == pool.end()) continue;
        Placement& pl = s.placements[i];
        pl.engine = kind;
        pl.engine_index = static_cast<std::uint32_t>(slot - pool.begin());
        pl.start = now;
        pl.end = now + ops[i].duration;
        *slot = pl.end;
        started[i] = true;
        --remaining;
        progress = true;
      }
    }
    if (remaining == 0) break;
    double next = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
      if (started[i] && s.placements[i].end > now) next = std::min(next, s.placements[i].end);
    }
    if (!std::isfinite(next)) {
      throw TimelineError(TimelineErrorKind::CyclicDependency, "no op can make progress");
    }
    now = next;
  }

  for (const auto& pl : s.placements) s.makespan = std::max(s.makespan, pl.end);

  const StreamIndex idx = index_program(ops, events);
  for (const auto& e : events) {
    s.event_times[e.event_id] =
        e.position == 0 ? 0.0 : s.placements[idx.ops.at(e.stream_id)[e.position - 1]].end;
  }
  return s;
}

MakespanReport makespan_report(const Schedule& s) {
  MakespanReport r;
  r.makespan = s.makespan;
  for (const auto& op : s.ops) r.serialized_total += op.duration;
  r.overlap_savings = r.serialized_total - r.makespan;

  for (auto kind : kEngineKinds) {
    for (std::uint32_t e = 0; e < s.engines.count(kind); ++e) {
      EngineUsage u;
      u.name = engine_name(kind, e);
      for (std::size_t i = 0; i < s.ops.size(); ++i) {
        const auto& pl = s.placements[i];
        if (pl.engine == kind && pl.engine_index == e) u.busy += pl.end - pl.start;
      }
      u.utilization = s.makespan > 0 ? u.busy / s.makespan : 0.0;
      r.engines.push_back(u);
    }
  }

  if (s.ops.empty()) return r;
  // Walk back from the last op to finish through whichever constraint held
  // each op's start: a dependency that ended exactly then, else the op that
  // occupied the same engine.
  const auto& preds = s.preds;
  std::size_t cur = 0;
  for (std::size_t i = 1; i < s.ops.size(); ++i) {
    if (s.placements[i].end > s.placements[cur].end) cur = i;
  }
  std::vector<std::string> path{s.ops[cur].id};
  while (s.placements[cur].start > 0) {
    const double start = s.placements[cur].start;
    std::optional<std::size_t> next;
    for (auto p : preds[cur]) {
      if (s.placements[p].end == start) {
        next = p;
        break;
      }
    }
    if (!next) {
      for (std::size_t j = 0; j < s.ops.size(); ++j) {
        const auto& pj = s.placements[j];
        if (j != cur && pj.engine == s.placements[cur].engine &&
            pj.engine_index == s.placements[cur].engine_index && pj.end == start &&
            pj.start < start) {
          next = j;
          break;
        }
      }
    }
    if (!next) break;
    cur = *next;
    path.push_back(s.ops[cur].id);
  }
  std::reverse(path.begin(), path.end());
  r.critical_path = std::move(path);
  return r;
}

std::string validate_schedule(const Schedule& s, const std::vector<EventRecord>& events) {
  const std::size_t n = s.ops.size();
  if (s.placements.size() != n) return "placement count differs from op count";
  std::map<std::uint32_t, std::vector<std::size_t>> streams;
  std::map<std::pair<EngineKind, std::uint32_t>, std::vector<std::size_t>> engines;
  double makespan = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& op = s.ops[i];
    const auto& pl = s.placements[i];
    if (pl.start < 0 || pl.end - pl.start != op.duration) return "op '" + op.id + "' has wrong extent";
    if (pl.engine != engine_for(op.kind)) return "op '" + op.id + "' on wrong engine kind";
    if (pl.engine_index >= s.engines.count(pl.engine)) return "op '" + op.id + "' on missing engine";
    streams[op.stream_id].push_back(i);
    engines[{pl.engine, pl.engine_index}].push_back(i);
    makespan = std::max(makespan, pl.end);
  }
  if (makespan != s.makespan) return "makespan is not the latest end time";
  for (const auto& [stream, list] : streams) {
    for (std::size_t k = 1; k < list.size(); ++k) {
      if (s.placements[list[k]].start < s.placements[list[k - 1]].end) {
        return "stream " + std::to_string(stream) + ": '" + s.ops[list[k]].id +
               "' starts before its predecessor ends";
      }
    }
  }
  for (auto& [engine, list] : engines) {
    std::sort(list.begin(), list.end(), [&](std::size_t a, std::size_t b) {
      return std::pair(s.placements[a].start, s.placements[a].end) <
             std::pair(s.placements[b].start, s.placements[b].end);
    });
    for (std::size_t k = 1; k < list.size(); ++k) {
      if (s.placements[list[k]].start < s.placements[list[k - 1]].end) {
        return engine_name(engine.first, engine.second) + ": '" + s.ops[list[k]].id +
               "' overlaps '" + s.ops[list[k - 1]].id + "'";
      }
    }
  }
  std::map<std::string, double> fire;
  for (const auto& e : events) {
    const auto& list = streams[e.stream_id];
    if (e.position > list.size()) return "event '" + e.event_id + "' has no source op";
    fire[e.event_id] = e.position == 0 ? 0.0 : s.placements[list[e.position - 1]].end;
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (const auto& ev : s.ops[i].waits_on) {
      auto it = fire.find(ev);
      if (it == fire.end()) return "op '" + s.ops[i].id + "' waits on unknown event";
      if (s.placements[i].start < it->second) {
        return "op '" + s.ops[i].id + "' starts before event '" + ev + "' fires";
      }
    }
  }
  return {};
}

nlohmann::json to_json(const Schedule& s) {
  nlohmann::json ops = nlohmann::json::array();
  for (std::size_t i = 0; i < s.ops.size(); ++i) {
    const auto& op = s.ops[i];
    const auto& pl = s.placements[i];
    ops.push_back({{"id", op.id},
                   {"stream", op.stream_id},
                   {"kind", std::string(to_string(op.kind))},
                   {"engine", engine_name(pl.engine, pl.engine_index)},
                   {"start", pl.start},
                   {"end", pl.end},
                   {"waits_on", op.waits_on}});
  }
  nlohmann::json events = nlohmann::json::object();
  for (const auto& [id, t] : s.event_times) events[id] = t;
  return {{"makespan", s.makespan}, {"ops", std::move(ops)}, {"events", std::move(events)}};
}

nlohmann::json to_json(const MakespanReport& r) {
  nlohmann::json engines = nlohmann::json::array();
  for (const auto& e : r.engines) {
    engines.push_back({{"engine", e.name}, {"busy", e.busy}, {"utilization", e.utilization}});
  }
  return {{"makespan", r.makespan},
          {"serialized_total", r.serialized_total},
          {"overlap_savings", r.overlap_savings},
          {"engines", std::move(engines)},
          {"critical_path", r.critical_path}};
}

std::string render_gantt(const Schedule& s, std::size_t max_width) {
  static constexpr std::string_view kGlyphs =
      "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789";
  const double scale =
      s.makespan <= static_cast<double>(max_width) || s.makespan == 0 ? 1.0
                                                                       : max_width / s.makespan;
  const auto col = [&](double t) { return static_cast<std::size_t>(std::llround(t * scale)); };
  const std::size_t width = col(s.makespan);

  std::vector<std::pair<std::string, std::string>> rows;
  std::size_t label_w = 0;
  for (auto kind : kEngineKinds) {
    for (std::uint32_t e = 0; e < s.engines.count(kind); ++e) {
      std::string bar(width, '.');
      for (std::size_t i = 0; i < s.ops.size(); ++i) {
        const auto& pl = s.placements[i];
        if (pl.engine != kind || pl.engine_index != e) continue;
        for (std::size_t c = col(pl.start); c < col(pl.end) && c < width; ++c) {
          bar[c] = kGlyphs[i % kGlyphs.size()];
        }
      }
      rows.emplace_back(engine_name(kind, e), bar);
      label_w = std::max(label_w, rows.back().first.size());
    }
  }

  std::string out = "makespan " + num(s.makespan);
  if (scale != 1.0) out += " (1 column = " + num(1.0 / scale) + " time units)";
  out += '\n';
  for (const auto& [label, bar] : rows) {
    out += label + std::string(label_w - label.size(), ' ') + " |" + bar + "|\n";
  }
  for (std::size_t i = 0; i < s.ops.size(); ++i) {
    const auto& op = s.ops[i];
    out += std::string(1, kGlyphs[i % kGlyphs.size()]) + "  " + op.id + "  stream " +
           std::to_string(op.stream_id) + "  [" + num(s.placements[i].start) + ", " +
           num(s.placements[i].end) + ")\n";
  }
  return out;
}

}  // namespace vgpu::streams
