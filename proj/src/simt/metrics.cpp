#include "vgpu/simt/metrics.hpp"

#include <stdexcept>

namespace vgpu::simt {

namespace {

struct Field {
  const char* key;
  std::uint64_t Counters::*member;
};

constexpr Field kFields[] = {
    {"global_transactions", &Counters::global_transactions},
    {"divergence_events", &Counters::divergence_events},
    {"bank_conflict_extra_cycles", &Counters::bank_conflict_extra_cycles},
    {"barriers_executed", &Counters::barriers_executed},
    {"thread_steps", &Counters::thread_steps},
    {"child_launches", &Counters::child_launches},
    {"race_warnings", &Counters::race_warnings},
};

Counters counters_from_json(const nlohmann::json& j, const std::string& where) {
  if (!j.is_object()) throw std::invalid_argument(where + ": expected object");
  Counters c;
  for (const auto& f : kFields) {
    auto it = j.find(f.key);
    if (it == j.end()) throw std::invalid_argument(where + "." + f.key + ": missing");
    if (!it->is_number_unsigned()) {
      throw std::invalid_argument(where + "." + f.key + ": expected non-negative integer");
    }
    c.*f.member = it->get<std::uint64_t>();
  }
  return c;
}

}  // namespace

Counters& Counters::operator+=(const Counters& o) noexcept {
  for (const auto& f : kFields) this->*f.member += o.*f.member;
  return *this;
}

void MetricsReport::add(const std::string& kernel, const Counters& c) {
  static_cast<Counters&>(*this) += c;
  per_kernel[kernel] += c;
}

MetricsReport& MetricsReport::operator+=(const MetricsReport& o) {
  static_cast<Counters&>(*this) += o;
  for (const auto& [name, c] : o.per_kernel) per_kernel[name] += c;
  return *this;
}

nlohmann::json to_json(const Counters& c) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& f : kFields) j[f.key] = c.*f.member;
  return j;
}

nlohmann::json to_json(const MetricsReport& r) {
  nlohmann::json j = to_json(static_cast<const Counters&>(r));
  nlohmann::json per = nlohmann::json::object();
  for (const auto& [name, c] : r.per_kernel) per[name] = to_json(c);
  j["per_kernel"] = std::move(per);
  return j;
}

MetricsReport metrics_from_json(const nlohmann::json& j) {
  MetricsReport r;
  static_cast<Counters&>(r) = counters_from_json(j, "metrics");
  auto it = j.find("per_kernel");
  if (it == j.end()) throw std::invalid_argument("metrics.per_kernel: missing");
  if (!it->is_object()) throw std::invalid_argument("metrics.per_kernel: expected object");
  for (const auto& [name, c] : it->items()) {
    r.per_kernel[name] = counters_from_json(c, "metrics.per_kernel." + name);
  }
  return r;
}

}  // namespace vgpu::simt
