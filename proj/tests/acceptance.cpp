// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "access_oracle.hpp"
#include "stream_oracle.hpp"
#include "vgpu/kernels/primitives.hpp"
#include "vgpu/memperf/cache.hpp"
#include "vgpu/memperf/flow.hpp"
#include "vgpu/simt/simulator.hpp"
#include "vgpu/streams/scenario.hpp"

namespace {

using namespace vgpu;
using kernels::Matrix;
using I = std::int64_t;
using Clock = std::chrono::steady_clock;

// Pinned tolerances and budgets.
constexpr double kFloatRelTol = 1e-9;
constexpr double kVectorAddBudgetSec = 1.0;
constexpr double kOracleSuiteBudgetSec = 60.0;
constexpr int kOracleCases = 1000;
constexpr std::size_t kMaxVectorLen = 4096;
constexpr std::size_t kMaxMatrixSide = 64;
constexpr int kMatmulFullSizeEvery = 50;  // every 50th matmul case is 64x64x64
constexpr std::size_t kSmallMatrixSide = 24;
constexpr int kFloatEvery = 4;            // every 4th oracle case runs in double
constexpr int kScanIdentityCases = 1000;
constexpr int kAccessCases = 10000;
constexpr int kStreamPrograms = 500;
constexpr int kLruTraces = 1000;
constexpr int kL3Traces = 100;
constexpr int kRepeatForDeterminism = 5;

const std::vector<I> kSixteen{8, 3, 5, 7, 2, 9, 1, 6, 4, 10, 12, 15, 11, 14, 13, 16};

class Check {
 public:
  void expect(bool ok, const std::string& what) {
    if (!ok && failures_.size() < 5) failures_.push_back(what);
    if (!ok) ++count_;
  }
  bool ok() const { return count_ == 0; }
  std::string summary() const {
    std::string s = std::to_string(count_) + " failure(s)";
    for (const auto& f : failures_) s += "; " + f;
    return s;
  }

 private:
  std::vector<std::string> failures_;
  std::size_t count_ = 0;
};

template <class T>
std::string str(const std::vector<T>& v) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
  os << ']';
  return os.str();
}

std::string str(const kernels::StepTrace<I>::Row& r) {
  std::string s = "[";
  for (std::size_t i = 0; i < r.size(); ++i) {
    s += (i ? "," : "") + (r[i] ? std::to_string(*r[i]) : std::string("_"));
  }
  return s + "]";
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Row with `values` at every `every`-th column and blank cells elsewhere.
kernels::StepTrace<I>::Row sparse(std::size_t every, const std::vector<I>& values) {
  kernels::StepTrace<I>::Row r(16);
  for (std::size_t k = 0; k < values.size(); ++k) r[k * every] = values[k];
  return r;
}

kernels::StepTrace<I>::Row dense(const std::vector<I>& values) {
  return {values.begin(), values.end()};
}

// ---- sequential oracles -----------------------------------------------------

template <class T>
std::vector<T> inclusive_oracle(const std::vector<T>& x) {
  std::vector<T> out(x.size());
  T acc{};
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = acc += x[i];
  return out;
}

template <class T>
std::vector<T> exclusive_oracle(const std::vector<T>& x) {
  std::vector<T> out(x.size());
  T acc{};
  for (std::size_t i = 0; i < x.size(); ++i) {
    out[i] = acc;
    acc += x[i];
  }
  return out;
}

template <class T>
Matrix<T> matmul_oracle(const Matrix<T>& a, const Matrix<T>& b) {
  Matrix<T> c(a.rows, b.cols);
  for (std::size_t i = 0; i < a.rows; ++i) {
    for (std::size_t j = 0; j < b.cols; ++j) {
      T s{};
      for (std::size_t k = 0; k < a.cols; ++k) s += a(i, k) * b(k, j);
      c(i, j) = s;
    }
  }
  return c;
}

// Tolerance scales with the larger of |want| and the summed term magnitudes.
bool close(double got, double want, double scale) {
  return std::abs(got - want) <= kFloatRelTol * std::max({1.0, std::abs(want), scale});
}

bool close(I got, I want, double) { return got == want; }

template <class T>
bool all_close(const std::vector<T>& got, const std::vector<T>& want, const std::vector<double>& scale) {
  if (got.size() != want.size()) return false;
  for (std::size_t i = 0; i < got.size(); ++i) {
    if (!close(got[i], want[i], scale[i])) return false;
  }
  return true;
}

template <class T>
std::vector<double> abs_prefix(const std::vector<T>& x) {
  std::vector<double> s(x.size());
  double acc = 0;
  for (std::size_t i = 0; i < x.size(); ++i) s[i] = acc += std::abs(static_cast<double>(x[i]));
  return s;
}

class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng(seed) {}

  std::size_t log_uniform(std::size_t max) {
    const double u = std::uniform_real_distribution<double>(0, std::log(double(max) + 1))(rng);
    return std::clamp<std::size_t>(static_cast<std::size_t>(std::exp(u)), 1, max);
  }

  template <class T>
  std::vector<T> vec(std::size_t n) {
    std::vector<T> v(n);
    for (auto& x : v) x = value<T>();
    return v;
  }

  template <class T>
  Matrix<T> mat(std::size_t r, std::size_t c) {
    return Matrix<T>(r, c, vec<T>(r * c));
  }

  template <class T>
  T value() {
    if constexpr (std::is_floating_point_v<T>) {
      return std::uniform_real_distribution<T>(-1, 1)(rng);
    } else {
      return std::uniform_int_distribution<T>(-1000, 1000)(rng);
    }
  }

  std::size_t upto(std::size_t n) { return std::uniform_int_distribution<std::size_t>(1, n)(rng); }

  std::mt19937_64 rng;
};

// ---- criteria ---------------------------------------------------------------

void golden_vector_add(Check& c) {
  const auto t0 = Clock::now();
  const std::vector<I> a{1, 2, 3, 4, 5}, b{10, 20, 30, 40, 50};
  const auto r = kernels::vector_add<I>(a, b);
  const double secs = seconds_since(t0);
  c.expect(r.values == std::vector<I>{11, 22, 33, 44, 55}, "result " + str(r.values));
  c.expect(secs < kVectorAddBudgetSec, "took " + std::to_string(secs) + " s");
}

void golden_reduction(Check& c) {
  const auto r = kernels::reduce_sum<I>(kSixteen, kernels::ReduceVariant::Interleaved);
  c.expect(r.sum == 136, "sum " + std::to_string(r.sum));
  const std::vector<kernels::StepTrace<I>::Row> want{
      dense(kSixteen), sparse(2, {11, 12, 11, 7, 14, 27, 25, 29}), sparse(4, {23, 18, 41, 54}),
      sparse(8, {41, 95}), sparse(16, {136})};
  c.expect(r.trace.rows.size() == want.size(), "rows " + std::to_string(r.trace.rows.size()));
  for (std::size_t i = 0; i < std::min(want.size(), r.trace.rows.size()); ++i) {
    c.expect(r.trace.rows[i] == want[i], "row " + std::to_string(i) + " " + str(r.trace.rows[i]));
  }
}

void golden_hillis_steele(Check& c) {
  const auto r = kernels::inclusive_scan_hillis_steele<I>(kSixteen);
  const std::vector<std::vector<I>> want{
      kSixteen,
      {8, 11, 8, 12, 9, 11, 10, 7, 10, 14, 22, 27, 26, 25, 27, 29},
      {8, 11, 16, 23, 17, 23, 19, 18, 20, 21, 32, 41, 48, 52, 53, 54},
      {8, 11, 16, 23, 25, 34, 35, 41, 37, 44, 51, 59, 68, 73, 85, 95},
      {8, 11, 16, 23, 25, 34, 35, 41, 45, 55, 67, 82, 93, 107, 120, 136}};
  c.expect(r.trace.rows.size() == want.size(), "rows " + std::to_string(r.trace.rows.size()));
  for (std::size_t i = 0; i < std::min(want.size(), r.trace.rows.size()); ++i) {
    c.expect(r.trace.rows[i] == dense(want[i]), "row " + std::to_string(i) + " " + str(r.trace.rows[i]));
  }
  c.expect(r.values == want.back(), "final " + str(r.values));
}

void exclusive_scan(Check& c) {
  const std::vector<I> want{0, 8, 11, 16, 23, 25, 34, 35, 41, 45, 55, 67, 82, 93, 107, 120};
  const auto r = kernels::exclusive_scan_blelloch<I>(kSixteen);
  c.expect(r.values == want, "16-element array " + str(r.values));

  Gen g(2024);
  for (int t = 0; t < kScanIdentityCases; ++t) {
    const std::size_t n = std::size_t{1} << (g.rng() % 13);  // 1 .. 4096
    const auto x = g.vec<I>(n);
    const auto ex = kernels::exclusive_scan_blelloch<I>(x).values;
    const auto in = inclusive_oracle(x);
    bool ok = ex.size() == n;
    for (std::size_t i = 0; ok && i < n; ++i) ok = ex[i] + x[i] == in[i];
    c.expect(ok, "case " + std::to_string(t) + " n=" + std::to_string(n));
  }
}

template <class T>
void vector_cases(Check& c, Gen& g, int t) {
  const std::size_t n = g.log_uniform(kMaxVectorLen);
  const auto x = g.vec<T>(n), y = g.vec<T>(n);
  const std::string tag = " case " + std::to_string(t) + " n=" + std::to_string(n);
  const auto scale = abs_prefix(x);

  std::vector<T> sum(n);
  std::vector<double> add_scale(n);
  for (std::size_t i = 0; i < n; ++i) {
    sum[i] = x[i] + y[i];
    add_scale[i] = std::abs(double(x[i])) + std::abs(double(y[i]));
  }
  c.expect(all_close(kernels::vector_add<T>(x, y).values, sum, add_scale), "vector_add" + tag);

  const T total = inclusive_oracle(x).back();
  for (auto v : {kernels::ReduceVariant::Interleaved, kernels::ReduceVariant::Sequential}) {
    c.expect(close(kernels::reduce_sum<T>(x, v).sum, total, scale.back()),
             (v == kernels::ReduceVariant::Interleaved ? "reduce interleaved" : "reduce sequential") + tag);
  }
  c.expect(all_close(kernels::inclusive_scan_hillis_steele<T>(x).values, inclusive_oracle(x), scale),
           "hillis_steele" + tag);
  c.expect(all_close(kernels::exclusive_scan_blelloch<T>(x).values, exclusive_oracle(x), scale),
           "blelloch" + tag);
}

template <class T>
void matrix_cases(Check& c, Gen& g, int t) {
  const std::string tag = " case " + std::to_string(t);
  {
    const std::size_t r = g.upto(kMaxMatrixSide), k = g.upto(kMaxMatrixSide);
    const auto a = g.mat<T>(r, k), b = g.mat<T>(r, k);
    Matrix<T> want(r, k);
    for (std::size_t i = 0; i < want.data.size(); ++i) want.data[i] = a.data[i] + b.data[i];
    const std::vector<double> scale(want.data.size(), 2.0 * 1000);
    c.expect(all_close(kernels::matrix_add(a, b).value.data, want.data, scale), "matrix_add" + tag);
  }
  const bool full = t % kMatmulFullSizeEvery == 0;
  const std::size_t m = full ? kMaxMatrixSide : g.upto(kSmallMatrixSide);
  const std::size_t k = full ? kMaxMatrixSide : g.upto(kSmallMatrixSide);
  const std::size_t n = full ? kMaxMatrixSide : g.upto(kSmallMatrixSide);
  const auto a = g.mat<T>(m, k), b = g.mat<T>(k, n);
  const auto want = matmul_oracle(a, b);
  const std::vector<double> scale(want.data.size(), double(k) * 1000 * 1000);
  const std::string shape = " " + std::to_string(m) + "x" + std::to_string(k) + "x" + std::to_string(n);
  for (auto v : {kernels::MatmulVariant::Naive, kernels::MatmulVariant::Tiled}) {
    const auto got = kernels::matmul(a, b, v).value;
    c.expect(got.rows == m && got.cols == n && all_close(got.data, want.data, scale),
             (v == kernels::MatmulVariant::Naive ? "matmul naive" : "matmul tiled") + tag + shape);
  }
}

void oracle_suites(Check& c) {
  const auto t0 = Clock::now();
  Gen g(7);
  for (int t = 0; t < kOracleCases; ++t) {
    if (t % kFloatEvery == 0) {
      vector_cases<double>(c, g, t);
      matrix_cases<double>(c, g, t);
    } else {
      vector_cases<I>(c, g, t);
      matrix_cases<I>(c, g, t);
    }
  }
  const double secs = seconds_since(t0);
  std::printf("      oracle suites: %d cases per primitive in %.1f s\n", kOracleCases, secs);
  c.expect(secs < kOracleSuiteBudgetSec, "took " + std::to_string(secs) + " s");
}

simt::MetricsReport run_load_pattern(std::uint64_t stride) {
  simt::DeviceMemory mem;
  auto buf = mem.allocate<std::int32_t>(32 * stride);
  simt::Kernel k{"load", [=](simt::ThreadCtx& t) { (void)t.load(buf, t.lane() * stride); }};
  return simt::launch_kernel(k, simt::linear_launch(32, 32), mem);
}

void coalescing(Check& c) {
  std::vector<simt::LaneAccess> contiguous, stride2;
  for (std::uint64_t l = 0; l < 32; ++l) {
    contiguous.push_back({l * 4, 4});
    stride2.push_back({l * 8, 4});
  }
  c.expect(simt::coalesce_count(contiguous) == 1, "contiguous");
  c.expect(simt::coalesce_count(stride2) == 2, "stride 2");
  c.expect(run_load_pattern(1).global_transactions == 1, "kernel contiguous");
  c.expect(run_load_pattern(2).global_transactions == 2, "kernel stride 2");

  Gen g(31);
  const std::uint32_t widths[] = {1, 2, 4, 8, 16};
  const std::uint32_t segments[] = {32, 64, 128, 256};
  for (int t = 0; t < kAccessCases; ++t) {
    const std::size_t lanes = g.upto(32);
    const std::uint32_t w = widths[g.rng() % 5];
    const std::uint32_t seg = t % 2 ? 128 : segments[g.rng() % 4];
    const std::uint64_t base = g.rng() % 4096;
    const std::uint64_t span = std::uint64_t{1} << (4 + g.rng() % 14);
    std::vector<simt::LaneAccess> acc;
    for (std::size_t l = 0; l < lanes; ++l) {
      const std::uint64_t addr = t % 3 == 0 ? base + l * w * (1 + g.rng() % 3) : base + g.rng() % span;
      acc.push_back({addr, w});
    }
    c.expect(simt::coalesce_count(acc, seg) == vgpu_test::segments_oracle(acc, seg),
             "case " + std::to_string(t));
  }
}

simt::MetricsReport run_shared_pattern(std::uint32_t stride) {
  simt::DeviceMemory mem;
  simt::Kernel k{"bank", [=](simt::ThreadCtx& t) {
                   auto sh = t.shared<std::int32_t>(0, 32 * std::max(1u, stride));
                   (void)t.load(sh, t.lane() * stride);
                 }};
  return simt::launch_kernel(k, simt::linear_launch(32, 32, 32 * 4 * std::max(1u, stride)), mem);
}

void bank_conflicts(Check& c) {
  std::vector<simt::LaneAccess> lane, twice, broadcast;
  for (std::uint64_t l = 0; l < 32; ++l) {
    lane.push_back({l * 4, 4});
    twice.push_back({l * 8, 4});
    broadcast.push_back({12, 4});
  }
  c.expect(simt::bank_conflict_degree(lane) == 1, "shared[lane]");
  c.expect(simt::bank_conflict_degree(twice) == 2, "shared[2*lane]");
  c.expect(simt::bank_conflict_degree(broadcast) == 1, "broadcast");
  c.expect(run_shared_pattern(1).bank_conflict_extra_cycles == 0, "kernel shared[lane]");
  c.expect(run_shared_pattern(2).bank_conflict_extra_cycles == 1, "kernel shared[2*lane]");
  c.expect(run_shared_pattern(0).bank_conflict_extra_cycles == 0, "kernel broadcast");

  Gen g(37);
  const std::uint32_t widths[] = {1, 2, 4, 8};
  for (int t = 0; t < kAccessCases; ++t) {
    simt::BankGeometry geo;
    geo.bank_count = t % 4 == 0 ? 16 : 32;
    geo.bank_width_bytes = t % 5 == 0 ? 8 : 4;
    const std::size_t lanes = g.upto(32);
    const std::uint32_t w = widths[g.rng() % 4];
    std::vector<simt::LaneAccess> acc;
    const std::uint64_t stride = g.rng() % 9;
    for (std::size_t l = 0; l < lanes; ++l) {
      const std::uint64_t addr = t % 2 ? (l * stride * 4) : (g.rng() % 1024) / w * w;
      acc.push_back({addr, w});
    }
    c.expect(simt::bank_conflict_degree(acc, geo) == vgpu_test::bank_oracle(acc, geo),
             "case " + std::to_string(t));
  }
}

void divergence(Check& c) {
  for (std::uint32_t warps = 1; warps <= 8; ++warps) {
    const std::size_t n = warps * 32;
    std::vector<int> in(n);
    for (std::size_t i = 0; i < n; ++i) in[i] = i % 2 == 0 ? int(i) + 1 : -int(i) - 1;
    std::vector<int> want(n);
    for (std::size_t i = 0; i < n; ++i) want[i] = in[i] > 0 ? in[i] * 2 : in[i] / 2;

    simt::DeviceMemory mem;
    auto din = mem.upload(in);
    auto branchy_out = mem.allocate<int>(n);
    auto predicated_out = mem.allocate<int>(n);
    simt::Kernel branchy{"warpDivergenceExample", [=](simt::ThreadCtx& t) {
                           const auto tid = t.thread_idx().x;
                           t.structured_if(
                               t.load(din, tid) > 0,
                               [&] { t.store(branchy_out, tid, t.load(din, tid) * 2); },
                               [&] { t.store(branchy_out, tid, t.load(din, tid) / 2); });
                         }};
    simt::Kernel predicated{"warpDivergenceAvoided", [=](simt::ThreadCtx& t) {
                              const auto tid = t.thread_idx().x;
                              const int value = t.load(din, tid);
                              t.store(predicated_out, tid,
                                      simt::ThreadCtx::select(value > 0, value * 2, value / 2));
                            }};
    const auto cfg = simt::linear_launch(n, static_cast<std::uint32_t>(n));
    const auto r1 = simt::launch_kernel(branchy, cfg, mem);
    const auto r2 = simt::launch_kernel(predicated, cfg, mem);
    const std::string tag = " warps=" + std::to_string(warps);
    c.expect(r1.divergence_events == warps, "branchy events " + std::to_string(r1.divergence_events) + tag);
    c.expect(mem.download(branchy_out) == want, "branchy output" + tag);
    c.expect(r2.divergence_events == 0, "predicated events" + tag);
    c.expect(mem.download(predicated_out) == want, "predicated output" + tag);
  }

  // The flag-driven double-or-increment kernel diverges the same way.
  std::vector<float> data(64);
  std::vector<int> flags(64);
  for (std::size_t i = 0; i < 64; ++i) {
    data[i] = float(i);
    flags[i] = int(i % 2);
  }
  simt::DeviceMemory mem;
  auto dd = mem.upload(data);
  auto df = mem.upload(flags);
  simt::Kernel compute{"compute", [=](simt::ThreadCtx& t) {
                         const auto index = t.thread_idx().x;
                         t.structured_if(
                             t.load(df, index) == 1,
                             [&] { t.store(dd, index, t.load(dd, index) * 2); },
                             [&] { t.store(dd, index, t.load(dd, index) + 1); });
                       }};
  const auto r = simt::launch_kernel(compute, simt::linear_launch(64, 64), mem);
  const auto out = mem.download(dd);
  bool ok = true;
  for (std::size_t i = 0; i < 64; ++i) ok = ok && out[i] == (flags[i] == 1 ? data[i] * 2 : data[i] + 1);
  c.expect(r.divergence_events == 2 && ok, "compute kernel");
}

template <class F>
std::string error_of(F&& f) {
  try {
    f();
  } catch (const simt::SimError& e) {
    return std::string(simt::to_string(e.kind())) + ": " + e.what();
  }
  return "no error";
}

void barrier_misuse(Check& c) {
  simt::Kernel bad_barrier{"barrierInBranch", [](simt::ThreadCtx& t) {
                             t.structured_if(t.lane() < 16, [&] { t.sync(); });
                           }};
  std::string first;
  for (int i = 0; i < kRepeatForDeterminism; ++i) {
    simt::DeviceMemory mem;
    const auto e = error_of([&] { simt::launch_kernel(bad_barrier, simt::linear_launch(64, 64), mem); });
    if (i == 0) first = e;
    c.expect(e.rfind("BarrierDivergence", 0) == 0, "barrier run " + std::to_string(i) + ": " + e);
    c.expect(e == first, "barrier message changed between runs");
  }

  for (int i = 0; i < kRepeatForDeterminism; ++i) {
    simt::DeviceMemory mem;
    auto cell = mem.allocate<int>(1);
    simt::Kernel race{"writeWrite", [=](simt::ThreadCtx& t) {
                        if (t.thread_linear() == 0 || t.thread_linear() == 33) {
                          t.store(cell, 0, static_cast<int>(t.thread_linear()));
                        }
                      }};
    const auto e = error_of([&] { simt::launch_kernel(race, simt::linear_launch(64, 64), mem); });
    if (i == 0) first = e;
    c.expect(e.rfind("DataRace", 0) == 0, "race run " + std::to_string(i) + ": " + e);
    c.expect(e == first, "race message changed between runs");
  }
}

void streams_overlap(Check& c) {
  using namespace vgpu::streams;
  auto batch = [](std::uint32_t s2) {
    return std::vector<StreamOp>{{"copy_a", 1, OpKind::CopyH2D, 10, {}},
                                 {"kernel_a", 1, OpKind::Kernel, 10, {}},
                                 {"copy_b", s2, OpKind::CopyH2D, 10, {}},
                                 {"kernel_b", s2, OpKind::Kernel, 10, {}}};
  };
  const auto two = simulate_timeline(batch(2), {});
  const auto one = simulate_timeline(batch(1), {});
  c.expect(two.makespan == 30, "two-stream makespan " + std::to_string(two.makespan));
  c.expect(one.makespan == 40, "one-stream makespan " + std::to_string(one.makespan));
  c.expect(makespan_report(two).overlap_savings == 10, "savings");

  std::mt19937_64 rng(77);
  const EngineModel wide{2, 2, 2};
  for (int t = 0; t < kStreamPrograms; ++t) {
    const auto p = vgpu_test::random_program(rng, 8);
    const std::string tag = " program " + std::to_string(t);
    for (const EngineModel& eng : {EngineModel{}, wide}) {
      const auto s = simulate_timeline(p.ops, p.events, eng);
      const auto bad = validate_schedule(s, p.events);
      c.expect(bad.empty(), "infeasible" + tag + ": " + bad);
      const double opt = vgpu_test::brute_force_optimum(p.ops, p.events, eng);
      c.expect(opt <= s.makespan, "beats optimum" + tag);
      c.expect(s.makespan <= vgpu_test::serialized(p.ops), "exceeds serialized" + tag);
    }
    const double opt1 = vgpu_test::brute_force_optimum(p.ops, p.events, {});
    const double opt2 = vgpu_test::brute_force_optimum(p.ops, p.events, wide);
    c.expect(opt2 <= opt1 && opt1 <= vgpu_test::serialized(p.ops), "engine bound" + tag);
  }
}

void tiled_vs_naive(Check& c) {
  Gen g(64);
  const auto a = g.mat<I>(64, 64), b = g.mat<I>(64, 64);
  const auto naive = kernels::matmul(a, b, kernels::MatmulVariant::Naive);
  const auto tiled = kernels::matmul(a, b, kernels::MatmulVariant::Tiled);
  std::printf("      64x64 global transactions: naive %llu, tiled %llu\n",
              static_cast<unsigned long long>(naive.metrics.global_transactions),
              static_cast<unsigned long long>(tiled.metrics.global_transactions));
  c.expect(tiled.metrics.global_transactions < naive.metrics.global_transactions, "transactions");
  c.expect(tiled.value == naive.value, "results differ");
  c.expect(tiled.value == matmul_oracle(a, b), "result vs oracle");
}

void memperf_suite(Check& c) {
  using namespace vgpu::memperf;
  std::mt19937_64 rng(99);
  for (int t = 0; t < kLruTraces; ++t) {
    std::vector<std::uint64_t> trace(1 + rng() % 400);
    const std::uint64_t span = 1 + rng() % 64;
    for (auto& x : trace) x = rng() % span;
    std::uint64_t prev = trace.size() + 1;
    for (std::size_t cap = 1; cap <= 40; ++cap) {
      const auto r = simulate_cache(trace, {cap, 64});
      c.expect(r.misses <= prev, "inclusion trace " + std::to_string(t) + " cap " + std::to_string(cap));
      prev = r.misses;
    }
  }
  for (int t = 0; t < kL3Traces; ++t) {
    const std::size_t cores = 1 + rng() % 8;
    const std::size_t total = rng() % 65;
    std::vector<std::vector<std::uint64_t>> traces(cores);
    auto& active = traces[rng() % cores];
    active.resize(50 + rng() % 400);
    const std::uint64_t span = 1 + rng() % 80;
    for (auto& x : active) x = rng() % span;
    const auto st = simulate_l3(traces, {total, cores, L3Policy::Static});
    const auto dy = simulate_l3(traces, {total, cores, L3Policy::Dynamic});
    for (std::size_t k = 0; k < cores; ++k) {
      c.expect(dy[k].misses <= st[k].misses, "L3 trace " + std::to_string(t));
    }
  }
  TrainingFlowSpec spec;
  spec.dataset_bytes = 4ull << 30;
  spec.batch_bytes = 256ull << 20;
  spec.epochs = 3;
  spec.vram_capacity = 8ull << 30;
  spec.ram_capacity = 16ull << 30;
  const auto report = estimate_training_flow(spec);
  c.expect(report.epochs.size() == 3 && report.epochs[0].disk_to_ram_bytes == spec.dataset_bytes,
           "epoch 1 loads the dataset");
  for (std::size_t e = 1; e < report.epochs.size(); ++e) {
    c.expect(report.epochs[e].disk_to_ram_bytes == 0,
             "epoch " + std::to_string(e + 1) + " disk bytes " +
                 std::to_string(report.epochs[e].disk_to_ram_bytes));
  }
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<void(Check&)>>> criteria{
      {"golden vector add", golden_vector_add},
      {"golden reduction", golden_reduction},
      {"golden Hillis-Steele scan", golden_hillis_steele},
      {"exclusive scan", exclusive_scan},
      {"oracle suites", oracle_suites},
      {"coalescing", coalescing},
      {"bank conflicts", bank_conflicts},
      {"divergence", divergence},
      {"barrier misuse and races", barrier_misuse},
      {"streams overlap", streams_overlap},
      {"tiled vs naive matmul", tiled_vs_naive},
      {"memperf", memperf_suite},
  };
  int failed = 0;
  for (const auto& [name, run] : criteria) {
    Check c;
    const auto t0 = Clock::now();
    try {
      run(c);
    } catch (const std::exception& e) {
      c.expect(false, std::string("exception: ") + e.what());
    }
    const double secs = seconds_since(t0);
    if (c.ok()) {
      std::printf("PASS  %-28s %7.2f s\n", name, secs);
    } else {
      ++failed;
      std::printf("FAIL  %-28s %7.2f s  %s\n", name, secs, c.summary().c_str());
    }
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", int(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
