#pragma once

#include <algorithm>
#include <cstddef>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

namespace vgpu::kernels {

/// Per-step snapshot of a primitive's working array. Row 0 is the input; each
/// later row holds the value a thread produced in that step, or nothing when
/// the thread sat idle.
template <class T>
struct StepTrace {
  using Row = std::vector<std::optional<T>>;
  std::vector<Row> rows;

  std::size_t steps() const noexcept { return rows.empty() ? 0 : rows.size() - 1; }
  std::size_t width() const noexcept { return rows.empty() ? 0 : rows.front().size(); }
  bool operator==(const StepTrace&) const = default;
};

template <class T>
nlohmann::json to_json(const StepTrace<T>& trace) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : trace.rows) {
    nlohmann::json r = nlohmann::json::array();
    for (const auto& cell : row) r.push_back(cell ? nlohmann::json(*cell) : nlohmann::json());
    rows.push_back(std::move(r));
  }
  return rows;
}

template <class T>
StepTrace<T> step_trace_from_json(const nlohmann::json& j) {
  StepTrace<T> t;
  if (!j.is_array()) throw std::invalid_argument("trace: expected array of rows");
  for (const auto& r : j) {
    typename StepTrace<T>::Row row;
    for (const auto& c : r) row.push_back(c.is_null() ? std::nullopt : std::optional<T>(c.get<T>()));
    t.rows.push_back(std::move(row));
  }
  return t;
}

/// Aligned table in the layout of a per-thread step table: a header of thread
/// labels, then "Initial" and "Step k" rows. Idle cells are left blank.
template <class T>
std::string render_table(const StepTrace<T>& trace, bool one_based = false) {
  std::vector<std::vector<std::string>> cells;
  std::vector<std::string> header{"Step"};
  for (std::size_t i = 0; i < trace.width(); ++i) {
    header.push_back("T" + std::to_string(one_based ? i + 1 : i));
  }
  cells.push_back(header);
  for (std::size_t r = 0; r < trace.rows.size(); ++r) {
    std::vector<std::string> line{r == 0 ? "Initial" : "Step " + std::to_string(r)};
    for (const auto& c : trace.rows[r]) {
      if (!c) {
        line.emplace_back();
        continue;
      }
      std::ostringstream os;
      os << *c;
      line.push_back(os.str());
    }
    cells.push_back(line);
  }

  std::vector<std::size_t> w(header.size(), 0);
  for (const auto& line : cells) {
    for (std::size_t i = 0; i < line.size(); ++i) w[i] = std::max(w[i], line[i].size());
  }
  std::string out;
  for (const auto& line : cells) {
    std::string text;
    for (std::size_t i = 0; i < line.size(); ++i) {
      if (i) text += " | ";
      const std::string& s = line[i];
      text += i == 0 ? s + std::string(w[i] - s.size(), ' ') : std::string(w[i] - s.size(), ' ') + s;
    }
    while (!text.empty() && text.back() == ' ') text.pop_back();
    out += text + '\n';
  }
  return out;
}

}  // namespace vgpu::kernels
