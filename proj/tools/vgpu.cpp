#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "vgpu/kernels/primitives.hpp"
#include "vgpu/memperf/flow.hpp"
#include "vgpu/simt/error.hpp"
#include "vgpu/streams/scenario.hpp"
#include "vgpu/util/json_file.hpp"

namespace {

using nlohmann::json;
using I = std::int64_t;
namespace kn = vgpu::kernels;

constexpr int kExitUsage = 2;
constexpr int kExitSimulation = 3;

// Any failure the user can fix by changing the command line or input files.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunArgs {
  std::string kernel;
  std::string variant;
  std::uint64_t size = 0;
  bool size_given = false;
  std::uint32_t block_dim = 0;
  std::uint64_t seed = 0;
  std::vector<std::string> inputs;
  std::string output;
  std::string format = "text";
  bool one_based = false;
};

const std::vector<std::string> kKernels{"vector_add", "reduce_sum", "scan", "matrix_add", "matmul"};

std::vector<std::string> variants_of(const std::string& kernel) {
  if (kernel == "reduce_sum") return {"interleaved", "sequential"};
  if (kernel == "scan") return {"hillis_steele", "blelloch"};
  if (kernel == "matmul") return {"tiled", "naive"};
  return {};
}

std::string join(const std::vector<std::string>& v, const char* sep) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? sep : "") + v[i];
  return out;
}

void check_kernel(RunArgs& a) {
  if (std::find(kKernels.begin(), kKernels.end(), a.kernel) == kKernels.end()) {
    throw UsageError("UnknownKernel: '" + a.kernel + "' (known: " + join(kKernels, ", ") + ")");
  }
  const auto vs = variants_of(a.kernel);
  if (a.variant.empty()) {
    if (!vs.empty()) a.variant = vs.front();
    return;
  }
  if (std::find(vs.begin(), vs.end(), a.variant) == vs.end()) {
    throw UsageError("kernel " + a.kernel + " has no variant '" + a.variant + "'" +
                     (vs.empty() ? "" : " (known: " + join(vs, ", ") + ")"));
  }
}

std::vector<I> load_vector(const std::string& path) {
  const json j = vgpu::util::read_json_file(path);
  if (!j.is_array()) throw UsageError(path + ": expected an array of integers");
  std::vector<I> v;
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number_integer()) {
      throw UsageError(path + "[" + std::to_string(i) + "]: expected an integer");
    }
    v.push_back(j[i].get<I>());
  }
  return v;
}

kn::Matrix<I> load_matrix(const std::string& path) {
  const json j = vgpu::util::read_json_file(path);
  try {
    for (const auto& row : j) {
      for (const auto& x : row) {
        if (!x.is_number_integer()) throw std::invalid_argument("matrix: entries must be integers");
      }
    }
    return kn::matrix_from_json<I>(j);
  } catch (const std::exception& e) {
    throw UsageError(path + ": " + e.what());
  }
}

class Inputs {
 public:
  explicit Inputs(const RunArgs& a) : args_(a), rng_(a.seed) {
    if (a.size_given && a.size == 0) throw UsageError("--size must be positive");
    if (a.inputs.empty() && !a.size_given) throw UsageError("give --size or --input");
  }

  std::vector<I> vector(std::size_t index) {
    if (!args_.inputs.empty()) {
      auto v = load_vector(args_.inputs.at(index));
      if (args_.size_given && v.size() != args_.size) {
        throw UsageError(args_.inputs[index] + " has " + std::to_string(v.size()) +
                         " elements but --size is " + std::to_string(args_.size));
      }
      if (v.empty()) throw UsageError(args_.inputs[index] + ": input is empty");
      return v;
    }
    std::vector<I> v(args_.size);
    for (auto& x : v) x = draw();
    return v;
  }

  kn::Matrix<I> matrix(std::size_t index) {
    if (!args_.inputs.empty()) return load_matrix(args_.inputs.at(index));
    kn::Matrix<I> m(args_.size, args_.size);
    for (auto& x : m.data) x = draw();
    return m;
  }

  void expect_files(std::size_t n) const {
    if (!args_.inputs.empty() && args_.inputs.size() != n) {
      throw UsageError("kernel " + args_.kernel + " takes " + std::to_string(n) + " --input file" +
                       (n == 1 ? "" : "s"));
    }
  }

  bool generated() const { return args_.inputs.empty(); }

 private:
  I draw() { return std::uniform_int_distribution<I>(-1000, 1000)(rng_); }

  const RunArgs& args_;
  std::mt19937_64 rng_;
};

std::string aligned(const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> w;
  for (const auto& r : rows) {
    w.resize(std::max(w.size(), r.size()), 0);
    for (std::size_t i = 0; i < r.size(); ++i) w[i] = std::max(w[i], r[i].size());
  }
  std::string out;
  for (const auto& r : rows) {
    std::string line;
    for (std::size_t i = 0; i < r.size(); ++i) {
      const std::string pad(w[i] - r[i].size(), ' ');
      line += i == 0 ? r[i] + pad : "  " + pad + r[i];
    }
    while (!line.empty() && line.back() == ' ') line.pop_back();
    out += line + '\n';
  }
  return out;
}

std::string num(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

std::string render_metrics(const vgpu::simt::MetricsReport& m) {
  const json j = vgpu::simt::to_json(m);
  std::vector<std::vector<std::string>> rows{{"counter", "total"}};
  for (const auto& [name, _] : m.per_kernel) rows[0].push_back(name);
  const json totals = vgpu::simt::to_json(static_cast<const vgpu::simt::Counters&>(m));
  for (const auto& [key, value] : totals.items()) {
    std::vector<std::string> r{key, std::to_string(value.get<std::uint64_t>())};
    for (const auto& [name, c] : m.per_kernel) {
      r.push_back(std::to_string(vgpu::simt::to_json(c).at(key).get<std::uint64_t>()));
    }
    rows.push_back(std::move(r));
  }
  return aligned(rows);
}

std::string values_line(const std::vector<I>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? " " : "") + std::to_string(v[i]);
  return s + '\n';
}

std::string matrix_lines(const kn::Matrix<I>& m) {
  std::string s;
  for (std::size_t r = 0; r < m.rows; ++r) {
    s += values_line({m.data.begin() + r * m.cols, m.data.begin() + (r + 1) * m.cols});
  }
  return s;
}

// Prints `text` or `doc` depending on --format and writes `doc` to --output.
void emit(const RunArgs& a, const json& doc, const std::string& text) {
  if (!a.output.empty()) {
    std::ofstream out(a.output);
    if (!out) throw UsageError("cannot write " + a.output);
    out << doc.dump(2) << '\n';
  }
  if (a.format == "json") {
    std::cout << doc.dump(2) << '\n';
  } else {
    std::cout << text;
  }
}

kn::Options kernel_options(const RunArgs& a) {
  kn::Options o;
  o.block_dim = a.block_dim;
  return o;
}

json header(const RunArgs& a, const Inputs& in) {
  json doc{{"kernel", a.kernel}};
  doc["variant"] = a.variant.empty() ? json() : json(a.variant);
  if (in.generated()) doc["seed"] = a.seed;
  if (a.block_dim) doc["block_dim"] = a.block_dim;
  return doc;
}

int cmd_run(RunArgs a) {
  check_kernel(a);
  Inputs in(a);
  const auto opts = kernel_options(a);
  json doc = header(a, in);
  std::string text;
  vgpu::simt::MetricsReport metrics;

  if (a.kernel == "vector_add") {
    in.expect_files(2);
    const auto x = in.vector(0), y = in.vector(1);
    const auto r = kn::vector_add<I>(x, y, opts);
    doc["size"] = x.size();
    doc["result"] = r.values;
    text = values_line(r.values);
    metrics = r.metrics;
  } else if (a.kernel == "reduce_sum") {
    in.expect_files(1);
    const auto x = in.vector(0);
    const auto variant =
        a.variant == "sequential" ? kn::ReduceVariant::Sequential : kn::ReduceVariant::Interleaved;
    const auto r = kn::reduce_sum<I>(x, variant, opts);
    doc["size"] = x.size();
    doc["result"] = r.sum;
    text = std::to_string(r.sum) + '\n';
    metrics = r.metrics;
  } else if (a.kernel == "scan") {
    in.expect_files(1);
    const auto x = in.vector(0);
    const auto r = a.variant == "blelloch" ? kn::exclusive_scan_blelloch<I>(x, opts)
                                           : kn::inclusive_scan_hillis_steele<I>(x, opts);
    doc["size"] = x.size();
    doc["result"] = r.values;
    text = values_line(r.values);
    metrics = r.metrics;
  } else {
    in.expect_files(2);
    const auto x = in.matrix(0), y = in.matrix(1);
    const auto r = a.kernel == "matrix_add"
                       ? kn::matrix_add(x, y, opts)
                       : kn::matmul(x, y,
                                    a.variant == "naive" ? kn::MatmulVariant::Naive
                                                         : kn::MatmulVariant::Tiled,
                                    opts);
    doc["shape"] = {{x.rows, x.cols}, {y.rows, y.cols}};
    doc["result"] = kn::to_json(r.value);
    text = matrix_lines(r.value);
    metrics = r.metrics;
  }
  doc["metrics"] = vgpu::simt::to_json(metrics);
  emit(a, doc, text + '\n' + render_metrics(metrics));
  return 0;
}

int cmd_trace(RunArgs a) {
  check_kernel(a);
  if (a.kernel != "reduce_sum" && !(a.kernel == "scan" && a.variant == "hillis_steele")) {
    throw UsageError("TraceUnsupported: " + a.kernel + (a.variant.empty() ? "" : " " + a.variant) +
                     " records no step trace (traced: reduce_sum, scan --variant hillis_steele)");
  }
  Inputs in(a);
  in.expect_files(1);
  const auto x = in.vector(0);
  const auto opts = kernel_options(a);
  kn::StepTrace<I> trace;
  json doc = header(a, in);
  if (a.kernel == "reduce_sum") {
    const auto variant =
        a.variant == "sequential" ? kn::ReduceVariant::Sequential : kn::ReduceVariant::Interleaved;
    auto r = kn::reduce_sum<I>(x, variant, opts);
    doc["result"] = r.sum;
    trace = std::move(r.trace);
  } else {
    auto r = kn::inclusive_scan_hillis_steele<I>(x, opts);
    doc["result"] = r.values;
    trace = std::move(r.trace);
  }
  if (trace.rows.empty()) {
    throw UsageError("traces are recorded only when the input fits one block (" +
                     std::to_string(kn::kBlockCapacity) + " elements at the default block size)");
  }
  doc["size"] = x.size();
  doc["trace"] = kn::to_json(trace);
  emit(a, doc, kn::render_table(trace, a.one_based));
  return 0;
}

int cmd_pipeline(const std::string& path, RunArgs a, std::size_t width) {
  const auto sc = vgpu::streams::load_scenario(path);
  const auto s = vgpu::streams::simulate_timeline(sc.ops, sc.events, sc.engines);
  if (const auto bad = vgpu::streams::validate_schedule(s, sc.events); !bad.empty()) {
    throw std::runtime_error("schedule failed validation: " + bad);
  }
  const auto rep = vgpu::streams::makespan_report(s);
  json doc{{"schedule", vgpu::streams::to_json(s)}, {"report", vgpu::streams::to_json(rep)}};

  std::string text = sc.ops.empty() ? std::string() : vgpu::streams::render_gantt(s, width) + '\n';
  std::vector<std::vector<std::string>> rows{{"makespan", num(rep.makespan)},
                                             {"serialized", num(rep.serialized_total)},
                                             {"overlap savings", num(rep.overlap_savings)}};
  text += aligned(rows) + '\n';
  std::vector<std::vector<std::string>> eng{{"engine", "busy", "utilization"}};
  for (const auto& e : rep.engines) eng.push_back({e.name, num(e.busy), num(e.utilization)});
  text += aligned(eng);
  if (!rep.critical_path.empty()) text += "\ncritical path: " + join(rep.critical_path, " -> ") + '\n';
  emit(a, doc, text);
  return 0;
}

int cmd_memflow(const std::string& path, RunArgs a) {
  const auto spec = vgpu::memperf::load_flow_spec(path);
  const auto report = vgpu::memperf::estimate_training_flow(spec);
  json doc{{"spec", vgpu::memperf::to_json(spec)}, {"report", vgpu::memperf::to_json(report)}};
  emit(a, doc, vgpu::memperf::render_text(report));
  return 0;
}

int cmd_report(const std::string& path, RunArgs a) {
  json j = vgpu::util::read_json_file(path);
  if (j.is_object() && j.contains("metrics")) j = j["metrics"];
  vgpu::simt::MetricsReport m;
  try {
    m = vgpu::simt::metrics_from_json(j);
  } catch (const std::invalid_argument& e) {
    throw UsageError(path + ": " + e.what());
  }
  emit(a, vgpu::simt::to_json(m), render_metrics(m));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Functional SIMT simulator: kernels, traces, stream timelines and memory flows"};
  app.require_subcommand(1);

  RunArgs args;
  std::string path;
  std::size_t width = 72;
  auto add_format = [&](CLI::App* sub) {
    sub->add_option("--format", args.format, "Output format")->check(CLI::IsMember({"text", "json"}));
    sub->add_option("--output", args.output, "Also write the JSON document to this file");
  };
  auto add_kernel = [&](CLI::App* sub) {
    sub->add_option("--kernel", args.kernel, "vector_add | reduce_sum | scan | matrix_add | matmul")
        ->required();
    sub->add_option("--variant", args.variant,
                    "reduce_sum: interleaved|sequential; scan: hillis_steele|blelloch; "
                    "matmul: tiled|naive");
    sub->add_option("--size", args.size, "Elements (or matrix side) of generated input");
    sub->add_option("--block-dim", args.block_dim, "Threads per block for 1-D kernels")
        ->check(CLI::Range(1u, 1024u));
    sub->add_option("--seed", args.seed, "Seed for generated input");
    sub->add_option("--input", args.inputs, "Comma-separated JSON input files")->delimiter(',');
    add_format(sub);
  };

  auto* run = app.add_subcommand("run", "Run a primitive and report its metrics");
  add_kernel(run);
  auto* trace = app.add_subcommand("trace", "Print the per-step thread table of a primitive");
  add_kernel(trace);
  trace->add_flag("--one-based", args.one_based, "Number thread columns from T1");
  auto* pipeline = app.add_subcommand("pipeline", "Schedule a stream scenario");
  pipeline->add_option("scenario", path, "Scenario JSON")->required();
  pipeline->add_option("--width", width, "Gantt chart width")->check(CLI::Range(8, 1000));
  add_format(pipeline);
  auto* memflow = app.add_subcommand("memflow", "Estimate training data movement per epoch");
  memflow->add_option("spec", path, "Training flow JSON")->required();
  add_format(memflow);
  auto* report = app.add_subcommand("report", "Validate and render a metrics report");
  report->add_option("metrics", path, "Metrics JSON, or a run output containing one")->required();
  add_format(report);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }
  args.size_given = run->count("--size") + trace->count("--size") > 0;

  try {
    if (*run) return cmd_run(args);
    if (*trace) return cmd_trace(args);
    if (*pipeline) return cmd_pipeline(path, args, width);
    if (*memflow) return cmd_memflow(path, args);
    return cmd_report(path, args);
  } catch (const vgpu::simt::SimError& e) {
    std::cerr << "error: " << e.what() << '\n';
    if (args.format == "json") std::cerr << vgpu::simt::to_json(e).dump() << '\n';
    return kExitSimulation;
  } catch (const vgpu::streams::TimelineError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitSimulation;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
  } catch (const vgpu::util::SchemaError& e) {
    std::cerr << "error: " << e.what() << '\n';
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitSimulation;
  }
  return kExitUsage;
}
