#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

// Small helpers for reading schema-checked JSON documents. All accessors
// throw cosim::schema_error carrying the offending path.
namespace cosim::json_io {

using nlohmann::json;

json load_file(const std::filesystem::path& path);
void save_file(const std::filesystem::path& path, const json& doc);

const json& require(const json& obj, const std::string& key, const std::string& path);
void require_object(const json& j, const std::string& path);
void require_array(const json& j, const std::string& path);

std::string get_string(const json& obj, const std::string& key, const std::string& path);
double get_number(const json& obj, const std::string& key, const std::string& path);
std::vector<std::string> get_string_list(const json& obj, const std::string& key,
                                         const std::string& path);

std::string opt_string(const json& obj, const std::string& key, const std::string& path,
                       const std::string& fallback = {});
double opt_number(const json& obj, const std::string& key, const std::string& path,
                  double fallback);

/// Rejects members not listed in `allowed`.
void check_keys(const json& obj, std::initializer_list<const char*> allowed,
                const std::string& path);

} // namespace cosim::json_io
