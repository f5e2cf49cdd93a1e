#pragma once

#include <algorithm>
#include <functional>
#include <limits>
#include <map>
#include <random>
#include <vector>

#include "vgpu/streams/timeline.hpp"

namespace vgpu_test {

using namespace vgpu::streams;

// Minimum makespan over every dispatch order consistent with the
// dependencies, placing each op at its earliest start on the engine of its
// kind that frees up first.
inline double brute_force_optimum(const std::vector<StreamOp>& ops,
                                  const std::vector<EventRecord>& ev,
                                  const EngineModel& eng) {
  const auto preds = dependency_graph(ops, ev);
  const std::size_t n = ops.size();
  double best = std::numeric_limits<double>::infinity();
  std::vector<bool> placed(n, false);
  std::vector<double> end(n, 0);
  std::map<EngineKind, std::vector<double>> free_at;
  for (auto k : {EngineKind::H2D, EngineKind::D2H, EngineKind::Compute}) {
    free_at[k].assign(eng.count(k), 0.0);
  }
  std::function<void(std::size_t, double)> rec = [&](std::size_t depth, double span) {
    if (span >= best) return;
    if (depth == n) {
      best = span;
      return;
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (placed[i]) continue;
      if (!std::all_of(preds[i].begin(), preds[i].end(), [&](auto p) { return placed[p]; })) continue;
      double ready = 0;
      for (auto p : preds[i]) ready = std::max(ready, end[p]);
      auto& pool = free_at[engine_for(ops[i].kind)];
      const auto slot = std::min_element(pool.begin(), pool.end());
      const double saved = *slot;
      const double start = std::max(ready, saved);
      end[i] = start + ops[i].duration;
      *slot = end[i];
      placed[i] = true;
      rec(depth + 1, std::max(span, end[i]));
      placed[i] = false;
      *slot = saved;
    }
  };
  rec(0, 0);
  return n == 0 ? 0 : best;
}

struct Program {
  std::vector<StreamOp> ops;
  std::vector<EventRecord> events;
};

// Random acyclic program: events are recorded on already-issued prefixes and
// only waited on afterwards in issue order.
inline Program random_program(std::mt19937_64& rng, std::size_t max_ops) {
  Program p;
  const std::size_t n = std::uniform_int_distribution<std::size_t>(0, max_ops)(rng);
  std::map<std::uint32_t, std::size_t> issued;
  for (std::size_t i = 0; i < n; ++i) {
    StreamOp o;
    o.id = "op" + std::to_string(i);
    o.stream_id = static_cast<std::uint32_t>(rng() % 3);
    o.kind = static_cast<OpKind>(rng() % 3);
    o.duration = static_cast<double>(rng() % 12);
    if (!p.events.empty() && rng() % 3 == 0) {
      o.waits_on.push_back(p.events[rng() % p.events.size()].event_id);
    }
    p.ops.push_back(o);
    ++issued[o.stream_id];
    if (rng() % 2 == 0) {
      p.events.push_back({"e" + std::to_string(p.events.size()), o.stream_id, issued[o.stream_id]});
    }
  }
  return p;
}

inline double serialized(const std::vector<StreamOp>& ops) {
  double total = 0;
  for (const auto& o : ops) total += o.duration;
  return total;
}

}  // namespace vgpu_test
