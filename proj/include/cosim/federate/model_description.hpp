#pragma once

#include "cosim/common/diagnostics.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

namespace cosim::federate {

enum class data_type { real, integer, boolean, string };
enum class causality { parameter, input, output, local };
enum class variability { constant, discrete, continuous };
enum class model_kind { cs, me };

std::string_view to_string(data_type v);
std::string_view to_string(causality v);
std::string_view to_string(variability v);
std::string_view to_string(model_kind v);

using value_ref = std::uint32_t;

/// Typed variable value. The alternative index matches data_type.
using value = std::variant<double, std::int64_t, bool, std::string>;

data_type type_of(const value& v);
value default_value(data_type t);
/// Converts `v` to type `t` where the conversion is lossless (integer <-> real,
/// integral reals to integer). Throws cosim::error otherwise.
value coerce(const value& v, data_type t);
/// Numeric view used for recording traces: booleans map to 0/1, strings to NaN.
double to_double(const value& v);

struct variable {
    std::string name;
    value_ref ref = 0;
    data_type type = data_type::real;
    federate::causality causality = causality::local;
    federate::variability variability = variability::continuous;
    std::optional<value> start;

    friend bool operator==(const variable&, const variable&) = default;
};

struct model_description {
    std::string model_name;
    model_kind kind = model_kind::cs;
    std::vector<variable> variables;
    int state_dim = 0;

    const variable* find(std::string_view name) const;
    const variable* find(value_ref ref) const;
    std::vector<const variable*> with_causality(causality c) const;

    friend bool operator==(const model_description&, const model_description&) = default;
};

/// value_ref uniqueness, name uniqueness, parameter variability, start types, state_dim.
validation_report validate(const model_description& md);

nlohmann::json to_json(const model_description& md);
model_description model_description_from_json(const nlohmann::json& j, const std::string& path = "");

} // namespace cosim::federate
