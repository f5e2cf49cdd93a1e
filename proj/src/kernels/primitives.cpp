#include "vgpu/kernels/primitives.hpp"

#include <bit>
#include <string>

#include "vgpu/simt/simulator.hpp"

namespace vgpu::kernels {

using simt::Buffer;
using simt::DeviceMemory;
using simt::Kernel;
using simt::LaunchConfig;
using simt::Simulator;
using simt::ThreadCtx;

std::string_view to_string(KernelErrorKind kind) noexcept {
  switch (kind) {
    case KernelErrorKind::LengthMismatch: return "LengthMismatch";
    case KernelErrorKind::ShapeMismatch: return "ShapeMismatch";
    case KernelErrorKind::NotPowerOfTwo: return "NotPowerOfTwo";
    case KernelErrorKind::CapacityExceeded: return "CapacityExceeded";
  }
  return "Unknown";
}

KernelError::KernelError(KernelErrorKind kind, const std::string& what)
    : std::invalid_argument(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

namespace {

void require_pow2(std::size_t n, const Options& opts) {
  if (!opts.pad_to_pow2 && !std::has_single_bit(n)) {
    throw KernelError(KernelErrorKind::NotPowerOfTwo,
                      "length " + std::to_string(n) + " is not a power of two");
  }
}

template <class T>
typename StepTrace<T>::Row input_row(std::span<const T> input) {
  return typename StepTrace<T>::Row(input.begin(), input.end());
}

// out[i] += offsets[i / chunk] for every element of a multi-block result.
std::uint32_t vector_block(const Options& opts) {
  return opts.block_dim ? opts.block_dim : kVectorBlock;
}

std::size_t tree_block(const Options& opts, std::size_t min_block = 1) {
  if (opts.block_dim == 0) return kBlockCapacity;
  return std::max(min_block, std::bit_floor(std::size_t{opts.block_dim}));
}

template <class T>
void add_block_offsets(Simulator& sim, DeviceMemory& mem, simt::MetricsReport& metrics,
                       Buffer<T> out, const std::vector<T>& offsets, std::size_t chunk) {
  auto doff = mem.upload(offsets);
  const std::size_t n = out.size;
  Kernel k{"addBlockOffsets", [=](ThreadCtx& t) {
             const std::uint64_t i = t.global_id();
             if (i >= n) return;
             const T v = t.load(out, i) + t.load(doff, i / chunk);
             t.alu();
             t.store(out, i, v);
           }};
  metrics += sim.launch(k, simt::linear_launch(n, kVectorBlock), mem);
}

}  // namespace

template <class T>
VectorResult<T> vector_add(std::span<const T> a, std::span<const T> b, const Options& opts) {
  if (a.size() != b.size()) {
    throw KernelError(KernelErrorKind::LengthMismatch,
                      std::to_string(a.size()) + " vs " + std::to_string(b.size()));
  }
  VectorResult<T> res;
  const std::size_t n = a.size();
  if (n == 0) return res;

  DeviceMemory mem;
  auto da = mem.upload(a);
  auto db = mem.upload(b);
  auto dc = mem.allocate<T>(n);
  Kernel k{"vectorAdd", [=](ThreadCtx& t) {
             const std::uint64_t i = t.thread_idx().x + t.block_idx().x * t.block_dim().x;
             if (i < n) {
               const T sum = t.load(da, i) + t.load(db, i);
               t.alu();
               t.store(dc, i, sum);
             }
           }};
  Simulator sim(opts.sim);
  res.metrics = sim.launch(k, simt::linear_launch(n, vector_block(opts)), mem);
  res.values = mem.download(dc);
  return res;
}

template <class T>
ReduceResult<T> reduce_sum(std::span<const T> input, ReduceVariant variant, const Options& opts) {
  ReduceResult<T> res;
  const std::size_t n = input.size();
  if (n == 0) return res;
  require_pow2(n, opts);

  const auto tpb = static_cast<std::uint32_t>(std::bit_ceil(std::min(n, tree_block(opts))));
  const LaunchConfig cfg = simt::linear_launch(n, tpb, tpb * sizeof(T));
  StepTrace<T>* trace = nullptr;
  if (cfg.grid.x == 1) {
    res.trace.rows.push_back(input_row(input));
    res.trace.rows.resize(std::countr_zero(tpb) + 1, typename StepTrace<T>::Row(n));
    trace = &res.trace;
  }
  auto record = [trace, n](std::size_t step, std::uint32_t tid, T v) {
    if (trace && tid < n) trace->rows[step][tid] = v;
  };

  DeviceMemory mem;
  auto din = mem.upload(input);
  auto dout = mem.allocate<T>(cfg.grid.x);

  Kernel k;
  if (variant == ReduceVariant::Interleaved) {
    k = {"reduceInterleaved", [=](ThreadCtx& t) {
           auto sdata = t.shared<T>(0, tpb);
           const std::uint32_t tid = t.thread_linear();
           const std::uint64_t i = t.block_idx().x * tpb + tid;
           t.store(sdata, tid, i < n ? t.load(din, i) : T{});
           t.sync();
           std::size_t step = 1;
           for (std::uint32_t s = 1; s < tpb; s *= 2, ++step) {
             t.structured_if(tid % (2 * s) == 0, [&] {
               const T sum = t.load(sdata, tid) + t.load(sdata, tid + s);
               t.alu();
               t.store(sdata, tid, sum);
               record(step, tid, sum);
             });
             t.sync();
           }
           t.structured_if(tid == 0, [&] { t.store(dout, t.block_idx().x, t.load(sdata, 0)); });
         }};
  } else {
    k = {"reduceSum", [=](ThreadCtx& t) {
           auto sdata = t.shared<T>(0, tpb);
           const std::uint32_t tid = t.thread_linear();
           const std::uint64_t i = t.block_idx().x * tpb + tid;
           t.store(sdata, tid, i < n ? t.load(din, i) : T{});
           t.sync();
           std::size_t step = 1;
           for (std::uint32_t s = tpb / 2; s > 0; s >>= 1, ++step) {
             t.structured_if(tid < s, [&] {
               const T sum = t.load(sdata, tid) + t.load(sdata, tid + s);
               t.alu();
               t.store(sdata, tid, sum);
               record(step, tid, sum);
             });
             t.sync();
           }
           t.structured_if(tid == 0, [&] { t.store(dout, t.block_idx().x, t.load(sdata, 0)); });
         }};
  }
  Simulator sim(opts.sim);
  res.metrics = sim.launch(k, cfg, mem);
  for (const T& partial : mem.download(dout)) res.sum += partial;
  return res;
}

template <class T>
VectorResult<T> inclusive_scan_hillis_steele(std::span<const T> input, const Options& opts) {
  VectorResult<T> res;
  const std::size_t n = input.size();
  if (n == 0) return res;
  require_pow2(n, opts);

  const std::size_t padded = std::bit_ceil(n);
  const auto tpb = static_cast<std::uint32_t>(std::min(padded, tree_block(opts, 2)));
  std::vector<T> host(input.begin(), input.end());
  host.resize(padded, T{});

  StepTrace<T>* trace = nullptr;
  if (padded == tpb) {
    res.trace.rows.push_back(input_row(input));
    res.trace.rows.resize(std::countr_zero(tpb) + 1, typename StepTrace<T>::Row(n));
    trace = &res.trace;
  }

  DeviceMemory mem;
  auto din = mem.upload(host);
  auto dout = mem.allocate<T>(padded);
  Kernel k{"hillisSteeleScan", [=](ThreadCtx& t) {
             auto a = t.shared<T>(0, tpb);
             const std::uint32_t tid = t.thread_linear();
             const std::uint64_t i = t.global_id();
             T mine = t.load(din, i);
             t.store(a, tid, mine);
             t.sync();
             std::size_t step = 1;
             for (std::uint32_t d = 1; d < tpb; d *= 2, ++step) {
               T v{};
               t.structured_if(tid >= d, [&] { v = t.load(a, tid - d); });
               t.sync();
               t.structured_if(tid >= d, [&] {
                 mine += v;
                 t.alu();
                 t.store(a, tid, mine);
               });
               t.sync();
               if (trace && tid < n) trace->rows[step][tid] = mine;
             }
             t.store(dout, i, mine);
           }};
  Simulator sim(opts.sim);
  res.metrics = sim.launch(k, simt::linear_launch(padded, tpb, tpb * sizeof(T)), mem);

  if (padded > tpb) {
    const auto partial = mem.download(dout);
    std::vector<T> totals;
    for (std::size_t b = tpb - 1; b < padded; b += tpb) totals.push_back(partial[b]);
    const auto scanned = inclusive_scan_hillis_steele<T>(totals, opts);
    res.metrics += scanned.metrics;
    std::vector<T> offsets(totals.size(), T{});
    for (std::size_t b = 1; b < totals.size(); ++b) offsets[b] = scanned.values[b - 1];
    add_block_offsets(sim, mem, res.metrics, dout, offsets, tpb);
  }
  res.values = mem.download(dout);
  res.values.resize(n);
  return res;
}

template <class T>
VectorResult<T> exclusive_scan_blelloch(std::span<const T> input, const Options& opts) {
  VectorResult<T> res;
  const std::size_t n = input.size();
  if (n == 0) return res;
  require_pow2(n, opts);

  const std::size_t padded = std::max<std::size_t>(2, std::bit_ceil(n));
  const std::size_t chunk = std::min(padded, 2 * tree_block(opts));
  const auto tpb = static_cast<std::uint32_t>(chunk / 2);
  std::vector<T> host(input.begin(), input.end());
  host.resize(padded, T{});

  DeviceMemory mem;
  auto din = mem.upload(host);
  auto dout = mem.allocate<T>(padded);
  Kernel k{"exclusiveScan", [=](ThreadCtx& t) {
             auto temp = t.shared<T>(0, chunk);
             const std::uint32_t tid = t.thread_linear();
             const std::uint64_t base = t.block_idx().x * chunk;
             t.store(temp, 2 * tid, t.load(din, base + 2 * tid));
             t.store(temp, 2 * tid + 1, t.load(din, base + 2 * tid + 1));
             t.sync();

             for (std::uint64_t stride = 1; stride <= tpb; stride *= 2) {
               const std::uint64_t index = (tid + 1) * stride * 2 - 1;
               t.structured_if(index < chunk, [&] {
                 const T v = t.load(temp, index) + t.load(temp, index - stride);
                 t.alu();
                 t.store(temp, index, v);
               });
               t.sync();
             }

             t.structured_if(tid == 0, [&] { t.store(temp, chunk - 1, T{}); });
             t.sync();

             for (std::uint64_t stride = tpb; stride > 0; stride /= 2) {
               const std::uint64_t index = (tid + 1) * stride * 2 - 1;
               t.structured_if(index < chunk, [&] {
                 const T left = t.load(temp, index - stride);
                 const T cur = t.load(temp, index);
                 t.store(temp, index - stride, cur);
                 t.alu();
                 t.store(temp, index, cur + left);
               });
               t.sync();
             }

             t.store(dout, base + 2 * tid, t.load(temp, 2 * tid));
             t.store(dout, base + 2 * tid + 1, t.load(temp, 2 * tid + 1));
           }};
  Simulator sim(opts.sim);
  res.metrics = sim.launch(k, simt::linear_launch(padded / 2, tpb, chunk * sizeof(T)), mem);

  if (padded > chunk) {
    const auto partial = mem.download(dout);
    std::vector<T> totals;
    for (std::size_t b = chunk - 1; b < padded; b += chunk) totals.push_back(partial[b] + host[b]);
    auto offsets = exclusive_scan_blelloch<T>(totals, opts);
    res.metrics += offsets.metrics;
    add_block_offsets(sim, mem, res.metrics, dout, offsets.values, chunk);
  }
  res.values = mem.download(dout);
  res.values.resize(n);
  return res;
}

#define VGPU_INSTANTIATE(T)                                                                     \
  template VectorResult<T> vector_add<T>(std::span<const T>, std::span<const T>, const Options&); \
  template ReduceResult<T> reduce_sum<T>(std::span<const T>, ReduceVariant, const Options&);    \
  template VectorResult<T> inclusive_scan_hillis_steele<T>(std::span<const T>, const Options&); \
  template VectorResult<T> exclusive_scan_blelloch<T>(std::span<const T>, const Options&);

VGPU_INSTANTIATE(std::int32_t)
VGPU_INSTANTIATE(std::int64_t)
VGPU_INSTANTIATE(float)
VGPU_INSTANTIATE(double)

#undef VGPU_INSTANTIATE

}  // namespace vgpu::kernels
