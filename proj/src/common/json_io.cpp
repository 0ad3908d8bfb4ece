#include "cosim/common/json_io.hpp"

#include "cosim/common/error.hpp"

#include <algorithm>
#include <fstream>

namespace cosim::json_io {

json load_file(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw io_error(path.string(), "cannot open file");
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw schema_error(path.string(), e.what());
    }
}

void save_file(const std::filesystem::path& path, const json& doc)
{
    std::ofstream out(path);
    if (!out) throw io_error(path.string(), "cannot open file for writing");
    out << doc.dump(2) << '\n';
    if (!out) throw io_error(path.string(), "write failed");
}

void require_object(const json& j, const std::string& path)
{
    if (!j.is_object()) throw schema_error(path, "expected object");
}

void require_array(const json& j, const std::string& path)
{
    if (!j.is_array()) throw schema_error(path, "expected array");
}

const json& require(const json& obj, const std::string& key, const std::string& path)
{
    require_object(obj, path);
    auto it = obj.find(key);
    if (it == obj.end()) throw schema_error(path + "/" + key, "missing required member");
    return *it;
}

std::string get_string(const json& obj, const std::string& key, const std::string& path)
{
    const auto& v = require(obj, key, path);
    if (!v.is_string()) throw schema_error(path + "/" + key, "expected string");
    return v.get<std::string>();
}

double get_number(const json& obj, const std::string& key, const std::string& path)
{
    const auto& v = require(obj, key, path);
    if (!v.is_number()) throw schema_error(path + "/" + key, "expected number");
    return v.get<double>();
}

std::vector<std::string> get_string_list(const json& obj, const std::string& key,
                                         const std::string& path)
{
    const auto& v = require(obj, key, path);
    require_array(v, path + "/" + key);
    std::vector<std::string> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (!v[i].is_string())
            throw schema_error(path + "/" + key + "/" + std::to_string(i), "expected string");
        out.push_back(v[i].get<std::string>());
    }
    return out;
}

std::string opt_string(const json& obj, const std::string& key, const std::string& path,
                       const std::string& fallback)
{
    if (!obj.contains(key) || obj.at(key).is_null()) return fallback;
    return get_string(obj, key, path);
}

double opt_number(const json& obj, const std::string& key, const std::string& path,
                  double fallback)
{
    if (!obj.contains(key)) return fallback;
    return get_number(obj, key, path);
}

void check_keys(const json& obj, std::initializer_list<const char*> allowed,
                const std::string& path)
{
    require_object(obj, path);
    for (const auto& [k, _] : obj.items()) {
        const bool known = std::any_of(allowed.begin(), allowed.end(),
                                       [&](const char* a) { return k == a; });
        if (!known) throw schema_error(path + "/" + k, "unknown member");
    }
}

} // namespace cosim::json_io
