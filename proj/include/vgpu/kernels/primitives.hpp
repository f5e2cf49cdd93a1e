#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "vgpu/kernels/matrix.hpp"
#include "vgpu/kernels/step_trace.hpp"
#include "vgpu/simt/metrics.hpp"
#include "vgpu/simt/types.hpp"

namespace vgpu::kernels {

enum class KernelErrorKind { LengthMismatch, ShapeMismatch, NotPowerOfTwo, CapacityExceeded };

std::string_view to_string(KernelErrorKind kind) noexcept;

class KernelError : public std::invalid_argument {
 public:
  KernelError(KernelErrorKind kind, const std::string& what);
  KernelErrorKind kind() const noexcept { return kind_; }

 private:
  KernelErrorKind kind_;
};

enum class ReduceVariant { Interleaved, Sequential };

struct Options {
  simt::SimOptions sim;
  // When false, inputs whose length is not a power of two are rejected with
  // NotPowerOfTwo instead of being padded with the additive identity.
  bool pad_to_pow2 = true;
  // Threads per block for the 1-D primitives, 0 for the primitive's default.
  // Reductions and scans round it down to a power of two, and scans use at
  // least 2.
  std::uint32_t block_dim = 0;
};

// Largest input that fits one block; traces are only recorded up to here.
inline constexpr std::size_t kBlockCapacity = 1024;
inline constexpr std::uint32_t kVectorBlock = 256;
inline constexpr std::uint32_t kTile = 16;

template <class T>
struct VectorResult {
  std::vector<T> values;
  StepTrace<T> trace;  // empty unless the primitive records one
  simt::MetricsReport metrics;
};

template <class T>
struct ReduceResult {
  T sum{};
  StepTrace<T> trace;
  simt::MetricsReport metrics;
};

template <class T>
struct MatrixResult {
  Matrix<T> value;
  simt::MetricsReport metrics;
};

enum class MatmulVariant { Naive, Tiled };

template <class T>
VectorResult<T> vector_add(std::span<const T> a, std::span<const T> b, const Options& opts = {});

/// Block-level tree reduction; multi-block inputs reduce to per-block partial
/// sums that the host adds up. The trace is recorded for single-block inputs.
template <class T>
ReduceResult<T> reduce_sum(std::span<const T> input, ReduceVariant variant,
                           const Options& opts = {});

/// In-place doubling-distance scan, one thread per element.
template <class T>
VectorResult<T> inclusive_scan_hillis_steele(std::span<const T> input, const Options& opts = {});

/// Up-sweep / down-sweep scan with two elements per thread.
template <class T>
VectorResult<T> exclusive_scan_blelloch(std::span<const T> input, const Options& opts = {});

template <class T>
MatrixResult<T> matrix_add(const Matrix<T>& a, const Matrix<T>& b, const Options& opts = {});

template <class T>
MatrixResult<T> matmul(const Matrix<T>& a, const Matrix<T>& b, MatmulVariant variant,
                       const Options& opts = {});

}  // namespace vgpu::kernels
