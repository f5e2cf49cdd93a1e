#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "vgpu/simt/types.hpp"

namespace vgpu::simt {

enum class SimErrorKind {
  OutOfBounds,
  DataRace,
  BarrierDivergence,
  LaunchConfigInvalid,
  NestingLimit,
};

std::string_view to_string(SimErrorKind kind) noexcept;

struct SimErrorContext {
  // First entry is the thread that triggered the error; a second entry, when
  // present, is the other party (e.g. the earlier conflicting access).
  std::vector<ThreadCoord> threads;
  std::optional<std::uint32_t> buffer;
  std::optional<std::uint64_t> step;
  std::string kernel;
  std::string detail;
};

class SimError : public std::runtime_error {
 public:
  SimError(SimErrorKind kind, SimErrorContext context);

  SimErrorKind kind() const noexcept { return kind_; }
  const SimErrorContext& context() const noexcept { return context_; }

 private:
  SimErrorKind kind_;
  SimErrorContext context_;
};

nlohmann::json to_json(const ThreadCoord& c);
nlohmann::json to_json(const SimError& e);

}  // namespace vgpu::simt
