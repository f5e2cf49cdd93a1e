#include <string>

#include "vgpu/kernels/primitives.hpp"
#include "vgpu/simt/simulator.hpp"

namespace vgpu::kernels {

using simt::Dim3;
using simt::LaunchConfig;
using simt::ThreadCtx;

namespace {

std::string shape(std::size_t r, std::size_t c) {
  return std::to_string(r) + "x" + std::to_string(c);
}

LaunchConfig tile_grid(std::size_t rows, std::size_t cols, std::size_t shared_bytes = 0) {
  LaunchConfig cfg;
  cfg.block = Dim3{kTile, kTile, 1};
  cfg.grid = Dim3{static_cast<std::uint32_t>((cols + kTile - 1) / kTile),
                  static_cast<std::uint32_t>((rows + kTile - 1) / kTile), 1};
  cfg.shared_mem_bytes = shared_bytes;
  return cfg;
}

}  // namespace

template <class T>
MatrixResult<T> matrix_add(const Matrix<T>& a, const Matrix<T>& b, const Options& opts) {
  if (a.rows != b.rows || a.cols != b.cols) {
    throw KernelError(KernelErrorKind::ShapeMismatch,
                      shape(a.rows, a.cols) + " vs " + shape(b.rows, b.cols));
  }
  MatrixResult<T> res{Matrix<T>(a.rows, a.cols), {}};
  if (a.data.empty()) return res;

  simt::DeviceMemory mem;
  auto da = mem.upload(a.data);
  auto db = mem.upload(b.data);
  auto dc = mem.allocate<T>(a.data.size());
  const std::size_t rows = a.rows, cols = a.cols;
  simt::Kernel k{"matrixAdd", [=](ThreadCtx& t) {
                   const std::uint64_t col = t.block_idx().x * t.block_dim().x + t.thread_idx().x;
                   const std::uint64_t row = t.block_idx().y * t.block_dim().y + t.thread_idx().y;
                   if (row < rows && col < cols) {
                     const std::uint64_t idx = row * cols + col;
                     const T sum = t.load(da, idx) + t.load(db, idx);
                     t.alu();
                     t.store(dc, idx, sum);
                   }
                 }};
  simt::Simulator sim(opts.sim);
  res.metrics = sim.launch(k, tile_grid(rows, cols), mem);
  res.value.data = mem.download(dc);
  return res;
}

template <class T>
MatrixResult<T> matmul(const Matrix<T>& a, const Matrix<T>& b, MatmulVariant variant,
                       const Options& opts) {
  if (a.cols != b.rows) {
    throw KernelError(KernelErrorKind::ShapeMismatch,
                      shape(a.rows, a.cols) + " times " + shape(b.rows, b.cols));
  }
  const std::size_t m = a.rows, inner = a.cols, n = b.cols;
  MatrixResult<T> res{Matrix<T>(m, n), {}};
  if (m == 0 || n == 0) return res;

  simt::DeviceMemory mem;
  auto da = mem.upload(a.data);
  auto db = mem.upload(b.data);
  auto dc = mem.allocate<T>(m * n);
  simt::Kernel k;
  LaunchConfig cfg;

  if (variant == MatmulVariant::Naive) {
    k = {"matmulNaive", [=](ThreadCtx& t) {
           const std::uint64_t row = t.block_idx().y * t.block_dim().y + t.thread_idx().y;
           const std::uint64_t col = t.block_idx().x * t.block_dim().x + t.thread_idx().x;
           if (row < m && col < n) {
             T sum{};
             for (std::size_t kk = 0; kk < inner; ++kk) {
               sum += t.load(da, row * inner + kk) * t.load(db, kk * n + col);
               t.alu(2);
             }
             t.store(dc, row * n + col, sum);
           }
         }};
    cfg = tile_grid(m, n);
  } else {
    constexpr std::size_t tile_elems = std::size_t{kTile} * kTile;
    k = {"matmulTiled", [=](ThreadCtx& t) {
           auto as = t.shared<T>(0, tile_elems);
           auto bs = t.shared<T>(tile_elems * sizeof(T), tile_elems);
           const std::uint32_t tx = t.thread_idx().x, ty = t.thread_idx().y;
           const std::uint64_t row = t.block_idx().y * kTile + ty;
           const std::uint64_t col = t.block_idx().x * kTile + tx;
           T sum{};
           for (std::size_t tile = 0; tile * kTile < inner; ++tile) {
             const std::uint64_t a_col = tile * kTile + tx;
             const std::uint64_t b_row = tile * kTile + ty;
             T va{}, vb{};
             if (row < m && a_col < inner) va = t.load(da, row * inner + a_col);
             if (b_row < inner && col < n) vb = t.load(db, b_row * n + col);
             t.store(as, ty * kTile + tx, va);
             t.store(bs, ty * kTile + tx, vb);
             t.sync();
             for (std::uint32_t kk = 0; kk < kTile; ++kk) {
               sum += t.load(as, ty * kTile + kk) * t.load(bs, kk * kTile + tx);
               t.alu(2);
             }
             t.sync();
           }
           if (row < m && col < n) t.store(dc, row * n + col, sum);
         }};
    cfg = tile_grid(m, n, 2 * tile_elems * sizeof(T));
  }

  simt::Simulator sim(opts.sim);
  res.metrics = sim.launch(k, cfg, mem);
  res.value.data = mem.download(dc);
  return res;
}

#define VGPU_INSTANTIATE(T)                                                                  \
  template MatrixResult<T> matrix_add<T>(const Matrix<T>&, const Matrix<T>&, const Options&); \
  template MatrixResult<T> matmul<T>(const Matrix<T>&, const Matrix<T>&, MatmulVariant,       \
                                     const Options&);

VGPU_INSTANTIATE(std::int32_t)
VGPU_INSTANTIATE(std::int64_t)
VGPU_INSTANTIATE(float)
VGPU_INSTANTIATE(double)

#undef VGPU_INSTANTIATE

}  // namespace vgpu::kernels
