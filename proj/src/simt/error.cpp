#include "vgpu/simt/error.hpp"

namespace vgpu::simt {

namespace {

std::string compose(SimErrorKind kind, const SimErrorContext& ctx) {
  std::string msg(to_string(kind));
  if (!ctx.kernel.empty()) msg += " in kernel '" + ctx.kernel + "'";
  if (!ctx.threads.empty()) msg += " at " + to_string(ctx.threads.front());
  if (!ctx.detail.empty()) msg += ": " + ctx.detail;
  return msg;
}

nlohmann::json dim_json(const Dim3& d) { return nlohmann::json::array({d.x, d.y, d.z}); }

}  // namespace

std::string_view to_string(SimErrorKind kind) noexcept {
  switch (kind) {
    case SimErrorKind::OutOfBounds: return "OutOfBounds";
    case SimErrorKind::DataRace: return "DataRace";
    case SimErrorKind::BarrierDivergence: return "BarrierDivergence";
    case SimErrorKind::LaunchConfigInvalid: return "LaunchConfigInvalid";
    case SimErrorKind::NestingLimit: return "NestingLimit";
  }
  return "Unknown";
}

SimError::SimError(SimErrorKind kind, SimErrorContext context)
    : std::runtime_error(compose(kind, context)), kind_(kind), context_(std::move(context)) {}

nlohmann::json to_json(const ThreadCoord& c) {
  return {{"block_idx", dim_json(c.block_idx)},
          {"thread_idx", dim_json(c.thread_idx)},
          {"global_linear_id", c.global_linear_id},
          {"warp_id", c.warp_id},
          {"lane", c.lane}};
}

nlohmann::json to_json(const SimError& e) {
  nlohmann::json threads = nlohmann::json::array();
  for (const auto& t : e.context().threads) threads.push_back(to_json(t));
  nlohmann::json j = {{"kind", std::string(to_string(e.kind()))},
                      {"threads", std::move(threads)},
                      {"kernel", e.context().kernel},
                      {"detail", e.context().detail},
                      {"message", e.what()}};
  j["buffer"] = e.context().buffer ? nlohmann::json(*e.context().buffer) : nlohmann::json();
  j["step"] = e.context().step ? nlohmann::json(*e.context().step) : nlohmann::json();
  return j;
}

}  // namespace vgpu::simt
