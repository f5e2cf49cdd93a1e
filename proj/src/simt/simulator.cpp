#include "vgpu/simt/simulator.hpp"

#include <bit>
#include <cstring>
#include <exception>
#include <limits>
#include <optional>
#include <unordered_map>

#include <boost/context/fiber.hpp>
#include <boost/context/pooled_fixedsize_stack.hpp>

#include "vgpu/simt/warp_access.hpp"

namespace vgpu::simt {

namespace bctx = boost::context;

namespace detail {

enum class EventKind : std::uint8_t { None, Memory, Branch, BranchEnd, Barrier, Launch, Exit };

// Call site of a ThreadCtx operation; lanes at the same Pc form one warp
// instruction.
struct Pc {
  const char* file = "";
  std::uint32_t line = 0;
  std::uint32_t column = 0;

  static Pc from(const std::source_location& l) noexcept {
    return Pc{l.file_name(), l.line(), l.column()};
  }
  bool operator==(const Pc& o) const noexcept {
    return line == o.line && column == o.column &&
           (file == o.file || std::strcmp(file, o.file) == 0);
  }
};

struct LaneState {
  ThreadCoord coord;
  std::optional<ThreadCtx> ctx;
  bctx::fiber fiber;      // the suspended lane, held by the scheduler
  bctx::fiber scheduler;  // the scheduler, held by the running lane

  EventKind kind = EventKind::None;
  Pc pc;
  MemRequest mem;
  bool predicate = false;
  const Kernel* child = nullptr;
  LaunchConfig child_cfg;
  std::uint64_t result = 0;

  bool runnable = true;
  bool done = false;
  std::exception_ptr error;

  ~LaneState() { fiber = {}; }

  void park(EventKind k, const std::source_location& loc) {
    kind = k;
    pc = Pc::from(loc);
    scheduler = std::move(scheduler).resume();
  }
};

}  // namespace detail

// ---------------------------------------------------------------------------
// ThreadCtx hooks: record the event and hand control back to the scheduler.

std::uint64_t ThreadCtx::memory_op(const detail::MemRequest& r, const Loc& loc) {
  lane_->mem = r;
  lane_->park(detail::EventKind::Memory, loc);
  return lane_->result;
}

bool ThreadCtx::enter_branch(bool pred, const Loc& loc) {
  lane_->predicate = pred;
  lane_->park(detail::EventKind::Branch, loc);
  return pred;
}

void ThreadCtx::leave_branch(const Loc& loc) { lane_->park(detail::EventKind::BranchEnd, loc); }

void ThreadCtx::sync(Loc loc) { lane_->park(detail::EventKind::Barrier, loc); }

void ThreadCtx::launch(const Kernel& kernel, const LaunchConfig& cfg, Loc loc) {
  lane_->child = &kernel;
  lane_->child_cfg = cfg;
  lane_->park(detail::EventKind::Launch, loc);
}

// ---------------------------------------------------------------------------

void validate(const LaunchConfig& cfg, const SimOptions& opts) {
  auto fail = [](std::string detail) {
    SimErrorContext ctx;
    ctx.detail = std::move(detail);
    throw SimError(SimErrorKind::LaunchConfigInvalid, std::move(ctx));
  };
  if (cfg.grid.x == 0 || cfg.grid.y == 0 || cfg.grid.z == 0) {
    fail("grid_dim " + to_string(cfg.grid) + " has a zero extent");
  }
  if (cfg.block.x == 0 || cfg.block.y == 0 || cfg.block.z == 0) {
    fail("block_dim " + to_string(cfg.block) + " has a zero extent");
  }
  if (cfg.block.volume() > opts.max_threads_per_block) {
    fail("block of " + std::to_string(cfg.block.volume()) + " threads exceeds limit " +
         std::to_string(opts.max_threads_per_block));
  }
  if (cfg.warp_size == 0 || cfg.warp_size > 64) {
    fail("warp_size " + std::to_string(cfg.warp_size) + " outside [1, 64]");
  }
  if (cfg.grid.volume() * cfg.block.volume() > (std::uint64_t{1} << 40)) {
    fail("grid too large");
  }
}

struct detail::SimulatorState {
  explicit SimulatorState(SimOptions o)
      : opts(o), stacks(o.fiber_stack_bytes, 256) {}

  SimOptions opts;
  bctx::pooled_fixedsize_stack stacks;
  std::vector<std::string> warnings;
  std::vector<BranchRecord> branch_log;
};

namespace {

using detail::EventKind;
using detail::LaneState;

constexpr std::uint64_t kNone = std::numeric_limits<std::uint64_t>::max();
constexpr std::size_t kMaxStoredWarnings = 64;

template <class Fn>
void for_each_lane(std::uint64_t mask, Fn&& fn) {
  while (mask != 0) {
    fn(static_cast<std::uint32_t>(std::countr_zero(mask)));
    mask &= mask - 1;
  }
}

struct Frame {
  std::uint64_t members = 0;
  std::uint64_t then_mask = 0;
  std::uint64_t else_mask = 0;
  int phase = 0;
};

struct WarpRun {
  std::uint32_t id = 0;
  std::vector<LaneState*> lanes;
  std::uint64_t present = 0;
  std::uint64_t live = 0;
  std::vector<Frame> frames;
  std::uint64_t step = 0;

  std::uint64_t active() const noexcept {
    if (frames.empty()) return live;
    const Frame& f = frames.back();
    return (f.phase == 0 ? f.then_mask : f.else_mask) & live;
  }
};

enum class StepResult { Progress, Blocked, Done };

// Block-local concurrency record for one address.
struct IntervalCell {
  std::uint64_t stamp = 0;
  std::uint64_t writer = kNone;
  std::uint64_t reader = kNone;
  bool multi_reader = false;
};

// Which blocks touched a global element; up to two distinct are remembered,
// enough to answer "did a block other than b touch it".
struct BlockSet {
  std::int64_t a = -1;
  std::uint64_t gid_a = 0;
  std::int64_t b = -1;
  std::uint64_t gid_b = 0;

  std::optional<std::uint64_t> other_than(std::int64_t me) const noexcept {
    if (a >= 0 && a != me) return gid_a;
    if (b >= 0 && b != me) return gid_b;
    return std::nullopt;
  }
  void note(std::int64_t me, std::uint64_t gid) noexcept {
    if (a < 0) {
      a = me;
      gid_a = gid;
    } else if (a != me && b < 0) {
      b = me;
      gid_b = gid;
    }
  }
};

struct GlobalCell {
  BlockSet writers;
  BlockSet readers;
  IntervalCell interval;
};

class GridRun {
 public:
  GridRun(detail::SimulatorState& sim, const Kernel& kernel, const LaunchConfig& cfg, DeviceMemory& mem,
          std::uint32_t depth)
      : sim_(sim), opts_(sim.opts), kernel_(kernel), cfg_(cfg), mem_(mem), depth_(depth) {}

  MetricsReport run() {
    const std::uint64_t blocks = cfg_.grid.volume();
    for (std::uint64_t b = 0; b < blocks; ++b) run_block(b);
    MetricsReport report;
    report.add(kernel_.name, counters_);
    report += children_;
    return report;
  }

 private:
  // ---- block lifecycle ----------------------------------------------------

  void run_block(std::uint64_t block_linear) {
    block_linear_ = block_linear;
    block_idx_ = delinearize(block_linear, cfg_.grid);
    ++interval_id_;
    shared_.assign(cfg_.shared_mem_bytes, std::byte{0});
    shared_shadow_.assign(cfg_.shared_mem_bytes, IntervalCell{});

    const std::uint32_t tpb = cfg_.threads_per_block();
    lanes_ = std::make_unique<LaneState[]>(tpb);
    warps_.assign(cfg_.warps_per_block(), WarpRun{});
    for (std::uint32_t w = 0; w < warps_.size(); ++w) {
      warps_[w].id = w;
      warps_[w].lanes.assign(cfg_.warp_size, nullptr);
    }
    for (std::uint32_t t = 0; t < tpb; ++t) {
      LaneState& s = lanes_[t];
      s.coord = make_coord(cfg_, block_idx_, t);
      s.ctx.emplace(&s, &s.coord, &cfg_, t, depth_);
      s.fiber = bctx::fiber(std::allocator_arg, sim_.stacks, [this, &s](bctx::fiber&& sched) {
        s.scheduler = std::move(sched);
        try {
          kernel_.body(*s.ctx);
        } catch (const bctx::detail::forced_unwind&) {
          throw;
        } catch (...) {
          s.error = std::current_exception();
        }
        s.done = true;
        s.kind = EventKind::Exit;
        return std::move(s.scheduler);
      });
      WarpRun& w = warps_[s.coord.warp_id];
      w.lanes[s.coord.lane] = &s;
      w.present |= std::uint64_t{1} << s.coord.lane;
    }
    for (auto& w : warps_) w.live = w.present;

    std::exception_ptr failure;
    try {
      for (;;) {
        bool progress = false;
        bool all_done = true;
        for (auto& w : warps_) {
          const StepResult r = step(w);
          if (r == StepResult::Progress) progress = true;
          if (r != StepResult::Done) all_done = false;
        }
        if (all_done) break;
        if (!progress) release_barrier();
      }
    } catch (...) {
      failure = std::current_exception();
    }
    for (std::uint32_t t = 0; t < tpb; ++t) counters_.thread_steps += lanes_[t].ctx->steps();
    lanes_.reset();
    if (failure) std::rethrow_exception(failure);
  }

  void resume(LaneState& s) {
    s.runnable = false;
    s.kind = EventKind::None;
    s.fiber = std::move(s.fiber).resume();
    if (s.error) std::rethrow_exception(s.error);
  }

  StepResult step(WarpRun& w) {
    if (w.live == 0) return StepResult::Done;

    for_each_lane(w.active(), [&](std::uint32_t l) {
      LaneState& s = *w.lanes[l];
      if (s.runnable) {
        resume(s);
        if (s.done) w.live &= ~(std::uint64_t{1} << l);
      }
    });
    if (w.live == 0) return StepResult::Done;
    const std::uint64_t mask = w.active();

    // Lowest lane with an executable event leads; lanes at the same call site
    // join it.
    LaneState* leader = nullptr;
    for_each_lane(mask, [&](std::uint32_t l) {
      LaneState& s = *w.lanes[l];
      if (leader == nullptr && (s.kind == EventKind::Memory || s.kind == EventKind::Branch ||
                                s.kind == EventKind::Launch)) {
        leader = &s;
      }
    });
    if (leader != nullptr) {
      std::uint64_t group = 0;
      for_each_lane(mask, [&](std::uint32_t l) {
        const LaneState& s = *w.lanes[l];
        if (s.kind == leader->kind && s.pc == leader->pc && same_instruction(s, *leader)) {
          group |= std::uint64_t{1} << l;
        }
      });
      switch (leader->kind) {
        case EventKind::Memory: process_memory(w, group); break;
        case EventKind::Branch: process_branch(w, group); break;
        case EventKind::Launch: process_launch(w, group); break;
        default: break;
      }
      ++w.step;
      return StepResult::Progress;
    }

    std::uint64_t at_barrier = 0;
    for_each_lane(mask, [&](std::uint32_t l) {
      if (w.lanes[l]->kind == EventKind::Barrier) at_barrier |= std::uint64_t{1} << l;
    });
    if (at_barrier != 0) {
      if (at_barrier != mask || mask != w.live) {
        LaneState& s = *w.lanes[std::countr_zero(at_barrier)];
        fail(SimErrorKind::BarrierDivergence, s, std::nullopt,
             "barrier reached under a partial mask in warp " + std::to_string(w.id) +
                 " (active lanes 0x" + hex(mask) + ", waiting 0x" + hex(at_barrier) +
                 ", live 0x" + hex(w.live) + ")",
             w.step);
      }
      return StepResult::Blocked;
    }

    // Every active lane reached the end of its branch side.
    if (w.frames.empty()) throw std::logic_error("warp parked outside any branch");
    Frame& f = w.frames.back();
    if (f.phase == 0 && f.else_mask != 0) {
      f.phase = 1;
      for_each_lane(f.else_mask & w.live, [&](std::uint32_t l) { w.lanes[l]->runnable = true; });
    } else {
      for_each_lane(f.members & w.live, [&](std::uint32_t l) { w.lanes[l]->runnable = true; });
      w.frames.pop_back();
    }
    return StepResult::Progress;
  }

  static bool same_instruction(const LaneState& a, const LaneState& b) noexcept {
    if (a.kind != EventKind::Memory) return true;
    return a.mem.space == b.mem.space && a.mem.is_write == b.mem.is_write &&
           a.mem.type == b.mem.type &&
           (a.mem.space == Space::Shared || a.mem.buffer == b.mem.buffer);
  }

  void release_barrier() {
    const LaneState* waiting = nullptr;
    const LaneState* exited = nullptr;
    for (std::uint32_t t = 0; t < cfg_.threads_per_block(); ++t) {
      const LaneState& s = lanes_[t];
      if (s.done) {
        if (exited == nullptr) exited = &s;
      } else if (waiting == nullptr) {
        waiting = &s;
      }
    }
    if (waiting == nullptr) return;
    if (exited != nullptr) {
      fail(SimErrorKind::BarrierDivergence, *waiting, exited->coord,
           "barrier can never complete: thread gid=" +
               std::to_string(exited->coord.global_linear_id) + " already exited",
           std::nullopt);
    }
    for (std::uint32_t t = 0; t < cfg_.threads_per_block(); ++t) {
      const LaneState& s = lanes_[t];
      if (!(s.pc == waiting->pc)) {
        fail(SimErrorKind::BarrierDivergence, s, waiting->coord,
             "threads wait at different barriers (line " + std::to_string(s.pc.line) +
                 " vs line " + std::to_string(waiting->pc.line) + ")",
             std::nullopt);
      }
    }
    for (std::uint32_t t = 0; t < cfg_.threads_per_block(); ++t) lanes_[t].runnable = true;
    ++counters_.barriers_executed;
    ++interval_id_;
  }

  // ---- warp instructions --------------------------------------------------

  void process_memory(WarpRun& w, std::uint64_t group) {
    accesses_.clear();
    Space space = Space::Global;
    for_each_lane(group, [&](std::uint32_t l) {
      LaneState& s = *w.lanes[l];
      const detail::MemRequest& r = s.mem;
      space = r.space;
      std::byte* ptr = nullptr;
      std::uint64_t address = 0;
      bool apply = true;
      if (r.space == Space::Global) {
        if (!mem_.contains(r.buffer)) {
          fail(SimErrorKind::OutOfBounds, s, std::nullopt, "unknown buffer handle", w.step,
               r.buffer.value);
        }
        const BufferInfo& info = mem_.info(r.buffer);
        if (info.type != r.type) {
          fail(SimErrorKind::OutOfBounds, s, std::nullopt, "element type mismatch", w.step,
               r.buffer.value);
        }
        if (r.index >= info.length) {
          fail(SimErrorKind::OutOfBounds, s, std::nullopt,
               "index " + std::to_string(r.index) + " outside [0, " +
                   std::to_string(info.length) + ")",
               w.step, r.buffer.value);
        }
        address = info.base_address + r.index * r.width;
        ptr = mem_.bytes(r.buffer).data() + r.index * r.width;
        apply = check_global(s, r, w.step);
      } else {
        const bool in_view = r.index < r.view_count && r.index < (std::uint64_t{1} << 40);
        const std::uint64_t end = r.view_offset + (r.index + 1) * r.width;
        if (!in_view || end > shared_.size()) {
          fail(SimErrorKind::OutOfBounds, s, std::nullopt,
               "shared index " + std::to_string(r.index) + " outside view of " +
                   std::to_string(r.view_count) + " elements at offset " +
                   std::to_string(r.view_offset) + " (region " +
                   std::to_string(shared_.size()) + " bytes)",
               w.step);
        }
        address = r.view_offset + r.index * r.width;
        ptr = shared_.data() + address;
        apply = check_shared(s, address, r, w.step);
      }
      if (r.is_write) {
        if (apply) std::memcpy(ptr, &r.bits, r.width);
      } else {
        s.result = 0;
        std::memcpy(&s.result, ptr, r.width);
      }
      if (opts_.record_access_log) {
        AccessRecord rec;
        rec.block_linear = block_linear_;
        rec.warp_id = w.id;
        rec.step = w.step;
        rec.lane = s.coord.lane;
        rec.global_linear_id = s.coord.global_linear_id;
        rec.space = r.space;
        rec.buffer = r.buffer.value;
        rec.address = address;
        rec.width = r.width;
        rec.is_write = r.is_write;
        mem_.append_access(rec);
      }
      accesses_.push_back(LaneAccess{address, r.width});
      s.runnable = true;
    });
    if (space == Space::Global) {
      counters_.global_transactions += coalesce_count(accesses_, opts_.segment_bytes);
    } else {
      const std::uint32_t degree = bank_conflict_degree(
          accesses_, BankGeometry{opts_.bank_count, opts_.bank_width_bytes});
      counters_.bank_conflict_extra_cycles += degree - 1;
    }
  }

  void process_branch(WarpRun& w, std::uint64_t group) {
    std::uint64_t taken = 0;
    for_each_lane(group, [&](std::uint32_t l) {
      if (w.lanes[l]->predicate) taken |= std::uint64_t{1} << l;
    });
    Frame f;
    f.members = group;
    f.then_mask = taken;
    f.else_mask = group & ~taken;
    f.phase = taken != 0 ? 0 : 1;
    if (taken != 0 && taken != group) ++counters_.divergence_events;
    if (opts_.record_access_log) {
      sim_.branch_log.push_back(
          BranchRecord{kernel_.name, block_linear_, w.id, w.step, group, taken});
    }
    for_each_lane(f.phase == 0 ? f.then_mask : f.else_mask,
                  [&](std::uint32_t l) { w.lanes[l]->runnable = true; });
    w.frames.push_back(f);
  }

  void process_launch(WarpRun& w, std::uint64_t group) {
    for_each_lane(group, [&](std::uint32_t l) {
      LaneState& s = *w.lanes[l];
      if (depth_ + 1 > opts_.max_nesting_depth) {
        fail(SimErrorKind::NestingLimit, s, std::nullopt,
             "device launch of '" + s.child->name + "' would reach depth " +
                 std::to_string(depth_ + 1) + " (limit " +
                 std::to_string(opts_.max_nesting_depth) + ")",
             w.step);
      }
      try {
        validate(s.child_cfg, opts_);
      } catch (const SimError& e) {
        fail(SimErrorKind::LaunchConfigInvalid, s, std::nullopt,
             "child '" + s.child->name + "': " + e.context().detail, w.step);
      }
      GridRun child(sim_, *s.child, s.child_cfg, mem_, depth_ + 1);
      children_ += child.run();
      ++counters_.child_launches;
      s.runnable = true;
    });
  }

  // ---- race detection -----------------------------------------------------


  ThreadCoord coord_of(std::uint64_t gid) const {
    const std::uint32_t tpb = cfg_.threads_per_block();
    return make_coord(cfg_, delinearize(gid / tpb, cfg_.grid),
                      static_cast<std::uint32_t>(gid % tpb));
  }

  // Returns whether a write should land (permissive mode may drop it).
  bool check_interval(IntervalCell& cell, const LaneState& s, bool is_write,
                      std::optional<std::uint64_t> cross_other, const std::string& what,
                      std::uint64_t step, std::optional<std::uint32_t> buffer) {
    const std::uint64_t gid = s.coord.global_linear_id;
    const std::uint64_t stamp = interval_id_;
    if (cell.stamp != stamp) cell = IntervalCell{stamp};

    std::optional<std::uint64_t> other = cross_other;
    bool ww = false;
    if (!other) {
      if (cell.writer != kNone && cell.writer != gid) {
        other = cell.writer;
        ww = is_write;
      } else if (is_write && cell.reader != kNone && (cell.reader != gid || cell.multi_reader)) {
        other = cell.reader != gid ? cell.reader : kNone;
      }
    }
    bool apply = true;
    if (other) {
      const std::string detail = std::string(is_write ? "write" : "read") + " of " + what +
                                 " conflicts with thread gid=" +
                                 (*other == kNone ? std::string("?") : std::to_string(*other)) +
                                 " in the same barrier interval";
      if (opts_.race_mode == RaceMode::Strict) {
        std::optional<ThreadCoord> oc;
        if (*other != kNone) oc = coord_of(*other);
        fail(SimErrorKind::DataRace, s, oc, detail, step, buffer);
      }
      ++counters_.race_warnings;
      if (sim_.warnings.size() < kMaxStoredWarnings) {
        sim_.warnings.push_back(to_string(s.coord) + ": " + detail);
      }
      if (ww && gid < cell.writer) apply = false;
    }
    if (is_write) {
      if (apply) cell.writer = gid;
    } else if (cell.reader == kNone) {
      cell.reader = gid;
    } else if (cell.reader != gid) {
      cell.multi_reader = true;
    }
    return apply;
  }

  bool check_global(const LaneState& s, const detail::MemRequest& r, std::uint64_t step) {
    auto& cells = global_shadow_[r.buffer.value];
    if (cells.empty()) cells.resize(mem_.info(r.buffer).length);
    GlobalCell& cell = cells[r.index];
    const auto me = static_cast<std::int64_t>(block_linear_);
    const std::uint64_t gid = s.coord.global_linear_id;
    std::optional<std::uint64_t> cross = cell.writers.other_than(me);
    if (!cross && r.is_write) cross = cell.readers.other_than(me);
    const std::string what =
        "buffer " + std::to_string(r.buffer.value) + "[" + std::to_string(r.index) + "]";
    const bool apply = check_interval(cell.interval, s, r.is_write, cross, what, step,
                                      r.buffer.value);
    (r.is_write ? cell.writers : cell.readers).note(me, gid);
    return apply;
  }

  bool check_shared(const LaneState& s, std::uint64_t address, const detail::MemRequest& r,
                    std::uint64_t step) {
    bool apply = true;
    for (std::uint32_t b = 0; b < r.width; ++b) {
      const std::string what = "shared byte " + std::to_string(address + b);
      // A race on any byte of the access is reported once.
      if (!check_interval(shared_shadow_[address + b], s, r.is_write, std::nullopt, what, step,
                          std::nullopt)) {
        apply = false;
      }
    }
    return apply;
  }

  // ---- errors ---------------------------------------------------------------

  static std::string hex(std::uint64_t v) {
    static const char* digits = "0123456789abcdef";
    std::string out;
    do {
      out.insert(out.begin(), digits[v & 0xf]);
      v >>= 4;
    } while (v != 0);
    return out;
  }

  [[noreturn]] void fail(SimErrorKind kind, const LaneState& s, std::optional<ThreadCoord> other,
                         std::string detail, std::optional<std::uint64_t> step,
                         std::optional<std::uint32_t> buffer = std::nullopt) {
    SimErrorContext ctx;
    ctx.threads.push_back(s.coord);
    if (other) ctx.threads.push_back(*other);
    ctx.buffer = buffer;
    ctx.step = step;
    ctx.kernel = kernel_.name;
    ctx.detail = std::move(detail);
    throw SimError(kind, std::move(ctx));
  }

  detail::SimulatorState& sim_;
  const SimOptions& opts_;
  const Kernel& kernel_;
  const LaunchConfig cfg_;
  DeviceMemory& mem_;
  const std::uint32_t depth_;

  Counters counters_;
  MetricsReport children_;

  std::uint64_t block_linear_ = 0;
  Dim3 block_idx_;
  // Unique per (block, barrier interval); 0 never matches a live cell.
  std::uint64_t interval_id_ = 0;
  std::unique_ptr<LaneState[]> lanes_;
  std::vector<WarpRun> warps_;
  std::vector<std::byte> shared_;
  std::vector<IntervalCell> shared_shadow_;
  std::unordered_map<std::uint32_t, std::vector<GlobalCell>> global_shadow_;
  std::vector<LaneAccess> accesses_;
};

}  // namespace

Simulator::Simulator(SimOptions opts) : impl_(std::make_unique<detail::SimulatorState>(opts)) {}
Simulator::~Simulator() = default;
Simulator::Simulator(Simulator&&) noexcept = default;
Simulator& Simulator::operator=(Simulator&&) noexcept = default;

const SimOptions& Simulator::options() const noexcept { return impl_->opts; }

MetricsReport Simulator::launch(const Kernel& kernel, const LaunchConfig& cfg, DeviceMemory& mem) {
  impl_->warnings.clear();
  impl_->branch_log.clear();
  validate(cfg, impl_->opts);
  GridRun grid(*impl_, kernel, cfg, mem, 0);
  return grid.run();
}

const std::vector<std::string>& Simulator::warnings() const noexcept { return impl_->warnings; }

const std::vector<BranchRecord>& Simulator::branch_log() const noexcept {
  return impl_->branch_log;
}

MetricsReport launch_kernel(const Kernel& kernel, const LaunchConfig& cfg, DeviceMemory& mem,
                            const SimOptions& opts) {
  Simulator sim(opts);
  return sim.launch(kernel, cfg, mem);
}

}  // namespace vgpu::simt
