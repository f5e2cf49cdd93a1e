#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <functional>
#include <source_location>
#include <string>
#include <type_traits>
#include <utility>

#include "vgpu/simt/memory.hpp"
#include "vgpu/simt/types.hpp"

namespace vgpu::simt {

class ThreadCtx;

using KernelFn = std::function<void(ThreadCtx&)>;

struct Kernel {
  std::string name;
  KernelFn body;
};

namespace detail {
struct LaneState;
struct MemRequest {
  Space space = Space::Global;
  BufferId buffer;
  ElementType type = ElementType::I32;
  std::uint32_t width = 0;
  std::uint64_t index = 0;
  std::uint64_t view_offset = 0;  // shared views only
  std::uint64_t view_count = 0;   // shared views only
  bool is_write = false;
  std::uint64_t bits = 0;
};
template <class T>
std::uint64_t to_bits(T v) noexcept {
  std::uint64_t b = 0;
  std::memcpy(&b, &v, sizeof(T));
  return b;
}
template <class T>
T from_bits(std::uint64_t b) noexcept {
  T v;
  std::memcpy(&v, &b, sizeof(T));
  return v;
}
}  // namespace detail

/// The view a kernel body has of its thread. Every memory access, structured
/// branch, barrier and child launch goes through here; the simulator groups
/// the lanes of a warp that reach the same call site into one warp-wide
/// instruction.
class ThreadCtx {
 public:
  using Loc = std::source_location;

  explicit ThreadCtx(detail::LaneState* lane, const ThreadCoord* coord,
                     const LaunchConfig* cfg, std::uint32_t thread_linear,
                     std::uint32_t depth) noexcept
      : lane_(lane), coord_(coord), cfg_(cfg), thread_linear_(thread_linear), depth_(depth) {}

  ThreadCtx(const ThreadCtx&) = delete;
  ThreadCtx& operator=(const ThreadCtx&) = delete;

  const ThreadCoord& coord() const noexcept { return *coord_; }
  Dim3 thread_idx() const noexcept { return coord_->thread_idx; }
  Dim3 block_idx() const noexcept { return coord_->block_idx; }
  Dim3 block_dim() const noexcept { return cfg_->block; }
  Dim3 grid_dim() const noexcept { return cfg_->grid; }
  std::uint32_t thread_linear() const noexcept { return thread_linear_; }
  std::uint64_t global_id() const noexcept { return coord_->global_linear_id; }
  std::uint32_t lane() const noexcept { return coord_->lane; }
  std::uint32_t warp_id() const noexcept { return coord_->warp_id; }
  std::uint32_t depth() const noexcept { return depth_; }
  const LaunchConfig& config() const noexcept { return *cfg_; }

  template <DeviceElement T>
  T load(Buffer<T> b, std::size_t i, Loc loc = Loc::current()) {
    detail::MemRequest r;
    r.space = Space::Global;
    r.buffer = b.id;
    r.type = element_type_of<T>();
    r.width = sizeof(T);
    r.index = i;
    return detail::from_bits<T>(memory_op(r, loc));
  }

  template <DeviceElement T>
  void store(Buffer<T> b, std::size_t i, T value, Loc loc = Loc::current()) {
    detail::MemRequest r;
    r.space = Space::Global;
    r.buffer = b.id;
    r.type = element_type_of<T>();
    r.width = sizeof(T);
    r.index = i;
    r.is_write = true;
    r.bits = detail::to_bits(value);
    memory_op(r, loc);
  }

  template <DeviceElement T>
  T load(Shared<T> s, std::size_t i, Loc loc = Loc::current()) {
    return detail::from_bits<T>(memory_op(shared_request(s, i, false, 0), loc));
  }

  template <DeviceElement T>
  void store(Shared<T> s, std::size_t i, T value, Loc loc = Loc::current()) {
    memory_op(shared_request(s, i, true, detail::to_bits(value)), loc);
  }

  /// Typed view of `count` elements starting `offset_bytes` into the block's
  /// shared region. Bounds are checked on access.
  template <DeviceElement T>
  Shared<T> shared(std::size_t offset_bytes, std::size_t count) const noexcept {
    return Shared<T>{offset_bytes, count};
  }

  /// Block-wide barrier.
  void sync(Loc loc = Loc::current());

  /// Structured two-way branch. Lanes whose predicate holds run `then_fn`
  /// with the rest masked off, then the others run `else_fn`, then the warp
  /// reconverges. Counts one divergence event when the active lanes disagree.
  template <class Then, class Else = void (*)()>
  void structured_if(bool pred, Then&& then_fn, Else&& else_fn = [] {},
                     Loc loc = Loc::current()) {
    if (enter_branch(pred, loc)) {
      std::forward<Then>(then_fn)();
    } else {
      std::forward<Else>(else_fn)();
    }
    leave_branch(loc);
  }

  /// Predicated select: both operands already evaluated, no branch.
  template <class T>
  static constexpr T select(bool pred, T if_true, T if_false) noexcept {
    return pred ? if_true : if_false;
  }

  /// Declares `n` arithmetic operations for the thread_steps counter.
  void alu(std::uint64_t n = 1) noexcept { steps_ += n; }
  std::uint64_t steps() const noexcept { return steps_; }

  /// Launches a child grid from the device. It runs to completion before
  /// this thread continues.
  void launch(const Kernel& kernel, const LaunchConfig& cfg, Loc loc = Loc::current());

 private:
  template <class T>
  static detail::MemRequest shared_request(Shared<T> s, std::size_t i, bool write,
                                           std::uint64_t bits) noexcept {
    detail::MemRequest r;
    r.space = Space::Shared;
    r.type = element_type_of<T>();
    r.width = sizeof(T);
    r.index = i;
    r.view_offset = s.offset_bytes;
    r.view_count = s.count;
    r.is_write = write;
    r.bits = bits;
    return r;
  }

  std::uint64_t memory_op(const detail::MemRequest& r, const Loc& loc);
  bool enter_branch(bool pred, const Loc& loc);
  void leave_branch(const Loc& loc);

  detail::LaneState* lane_;
  const ThreadCoord* coord_;
  const LaunchConfig* cfg_;
  std::uint32_t thread_linear_;
  std::uint32_t depth_;
  std::uint64_t steps_ = 0;
};

}  // namespace vgpu::simt
