#pragma once

#include "cosim/common/error.hpp"
#include "cosim/federate/model_description.hpp"

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace cosim::federate {

class duplicate_name : public error {
public:
    using error::error;
};

class unknown_variable : public error {
public:
    explicit unknown_variable(const std::string& name) : error("unknown variable '" + name + "'") {}
};

class direction_error : public error {
public:
    using error::error;
};

/// What the co-simulation side needs to remember about a variable in order to
/// pick the right typed getter or setter.
struct accessor {
    value_ref ref = 0;
    data_type type = data_type::real;
    federate::causality direction = causality::local;

    friend bool operator==(const accessor&, const accessor&) = default;
};

/// Parameters and attributes (inputs and outputs) of a model, in declaration order.
struct attribute_map {
    std::vector<std::string> params;
    std::vector<std::string> attributes;
    std::map<std::string, accessor> records;
};

attribute_map to_attribute_map(const model_description& md);

enum class access { get, set };

/// Plain lookup when `mode` is empty; otherwise also checks the direction.
/// Getting an input is only allowed once it has been written.
accessor select_accessor(const attribute_map& map, const std::string& name,
                         std::optional<access> mode = std::nullopt,
                         const std::set<std::string>& written_inputs = {});

} // namespace cosim::federate
