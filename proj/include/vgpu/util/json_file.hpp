#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>

#include "json.hpp"

namespace vgpu::util {

/// Raised for unreadable files, malformed JSON and schema violations. The
/// message names the source and either a line:column or a field path.
class SchemaError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

nlohmann::json parse_json(const std::string& text, const std::string& source = "<input>");
nlohmann::json read_json_file(const std::filesystem::path& path);

// Field accessors that report `where.key` on failure.
const nlohmann::json& require(const nlohmann::json& obj, const char* key, const std::string& where);
double require_non_negative(const nlohmann::json& obj, const char* key, const std::string& where);
std::uint64_t require_count(const nlohmann::json& obj, const char* key, const std::string& where);
std::string require_string(const nlohmann::json& obj, const char* key, const std::string& where);

}  // namespace vgpu::util
