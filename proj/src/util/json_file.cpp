#include "vgpu/util/json_file.hpp"

#include <fstream>
#include <sstream>

namespace vgpu::util {

namespace {

std::string line_col(const std::string& text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return std::to_string(line) + ":" + std::to_string(col);
}

}  // namespace

nlohmann::json parse_json(const std::string& text, const std::string& source) {
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw SchemaError(source + ":" + line_col(text, e.byte == 0 ? 0 : e.byte - 1) +
                      ": invalid JSON: " + e.what());
  }
}

nlohmann::json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SchemaError(path.string() + ": cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_json(ss.str(), path.string());
}

const nlohmann::json& require(const nlohmann::json& obj, const char* key, const std::string& where) {
  if (!obj.is_object()) throw SchemaError(where + ": expected object");
  auto it = obj.find(key);
  if (it == obj.end()) throw SchemaError(where + "." + key + ": missing");
  return *it;
}

double require_non_negative(const nlohmann::json& obj, const char* key, const std::string& where) {
  const auto& v = require(obj, key, where);
  if (!v.is_number() || v.get<double>() < 0) {
    throw SchemaError(where + "." + key + ": expected non-negative number");
  }
  return v.get<double>();
}

std::uint64_t require_count(const nlohmann::json& obj, const char* key, const std::string& where) {
  const auto& v = require(obj, key, where);
  if (!v.is_number_integer() || (!v.is_number_unsigned() && v.get<std::int64_t>() < 0)) {
    throw SchemaError(where + "." + key + ": expected non-negative integer");
  }
  return v.get<std::uint64_t>();
}

std::string require_string(const nlohmann::json& obj, const char* key, const std::string& where) {
  const auto& v = require(obj, key, where);
  if (!v.is_string()) throw SchemaError(where + "." + key + ": expected string");
  return v.get<std::string>();
}

}  // namespace vgpu::util
