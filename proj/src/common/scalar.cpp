#include "cosim/common/scalar.hpp"

#include "cosim/common/error.hpp"

#include <sstream>

namespace cosim {

std::optional<double> as_number(const scalar& s)
{
    if (const auto* d = std::get_if<double>(&s)) return *d;
    return std::nullopt;
}

std::string to_string(const scalar& s)
{
    return std::visit(
        [](const auto& v) -> std::string {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, double>) {
                std::ostringstream os;
                os.precision(17);
                os << v;
                return os.str();
            } else if constexpr (std::is_same_v<T, bool>) {
                return v ? "true" : "false";
            } else {
                return v;
            }
        },
        s);
}

nlohmann::json to_json(const scalar& s)
{
    return std::visit([](const auto& v) { return nlohmann::json(v); }, s);
}

scalar scalar_from_json(const nlohmann::json& j, const std::string& path)
{
    if (j.is_boolean()) return j.get<bool>();
    if (j.is_number()) return j.get<double>();
    if (j.is_string()) return j.get<std::string>();
    throw schema_error(path, "expected number, boolean or string");
}

} // namespace cosim
