#pragma once

#include "cosim/common/diagnostics.hpp"
#include "cosim/common/error.hpp"
#include "cosim/sysconfig/container.hpp"

#include <map>
#include <set>
#include <string>
#include <vector>

namespace cosim::sysconfig {

class missing_binding : public error {
public:
    explicit missing_binding(std::string type_label)
        : error("missing binding for type '" + type_label + "'"), type_label_(std::move(type_label)) {}
    const std::string& type_label() const noexcept { return type_label_; }

private:
    std::string type_label_;
};

class arity_mismatch : public error {
public:
    using error::error;
};

class unknown_component : public error {
public:
    explicit unknown_component(std::string id)
        : error("unknown component '" + id + "'"), id_(std::move(id)) {}
    const std::string& id() const noexcept { return id_; }

private:
    std::string id_;
};

class sc_type_mismatch : public error {
public:
    using error::error;
};

/// Checks every ontology rule. An empty report means the container is well formed.
validation_report validate(const container& c);

/// Concrete attributes for one component slot of a generic type.
struct instance_binding {
    std::map<std::string, scalar> attributes;
};

/// type_label -> one binding per slot, assigned to slots in component id order.
using binding_map = std::map<std::string, std::vector<instance_binding>>;

/// Turns a TC-GSC into a TS-SC with the same topology and bound attributes.
container instantiate(const container& generic, const binding_map& bindings);

/// Lineage check: does `specific` instantiate `generic`?
validation_report check_instantiation(const container& generic, const container& specific);

struct extraction {
    container extracted;
    container remainder;
    /// Terminals of extracted components attached to cut connection points.
    std::vector<std::string> boundary;
    /// Connection points joining extracted and remaining components.
    std::vector<std::string> cut_points;
};

extraction extract_subsystem(const container& c, const std::set<std::string>& component_ids);

struct mapping_result {
    bool feasible = false;
    /// Test system component -> RI component.
    std::map<std::string, std::string> assignment;
    /// Components that could not be placed (empty when feasible).
    std::vector<std::string> unsatisfiable;

    friend bool operator==(const mapping_result&, const mapping_result&) = default;
};

/// Integer capacity of an RI component (`capacity` attribute, default 1).
int ri_capacity(const component& c);

mapping_result map_to_ri(const container& test_system, const container& ri);

} // namespace cosim::sysconfig
