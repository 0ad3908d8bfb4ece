#pragma once

#include "cosim/common/diagnostics.hpp"
#include "cosim/common/error.hpp"
#include "cosim/common/scalar.hpp"
#include "cosim/sysconfig/container.hpp"

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

// Test description documents. Every document is a JSON object whose
// "document" member names its kind; references to other documents are paths
// relative to the referring file.
namespace cosim::testspec {

class dangling_reference : public error {
public:
    explicit dangling_reference(std::string id, const std::string& what = "")
        : error("dangling reference '" + id + "'" + (what.empty() ? "" : ": " + what)), id_(std::move(id)) {}
    const std::string& id() const noexcept { return id_; }

private:
    std::string id_;
};

class invariant_violation : public error {
public:
    invariant_violation(std::string rule, const std::string& what)
        : error("invariant " + rule + " violated: " + what), rule_(std::move(rule)) {}
    const std::string& rule() const noexcept { return rule_; }

private:
    std::string rule_;
};

struct function_entry {
    std::string id;
    std::string description;

    friend bool operator==(const function_entry&, const function_entry&) = default;
};

struct use_case {
    std::string id;
    std::string name;
    std::vector<function_entry> functions;

    friend bool operator==(const use_case&, const use_case&) = default;
};

enum class objective_kind { validation, verification, characterization };

std::string_view to_string(objective_kind k);
std::optional<objective_kind> parse_objective_kind(std::string_view s);

struct test_objective {
    std::string statement;
    objective_kind kind = objective_kind::validation;

    friend bool operator==(const test_objective&, const test_objective&) = default;
};

/// `metric` is a comparison expression over output signals that may use the
/// trace aggregates min/max/final.
struct criterion {
    std::string id;
    std::string metric;
    std::string threshold;

    friend bool operator==(const criterion&, const criterion&) = default;
};

struct test_case {
    std::string id;
    std::string name;
    std::string generic_config; // path as written in the document
    std::vector<use_case> use_cases;
    std::vector<std::string> sut;
    std::vector<std::string> oui;
    std::vector<std::string> dui;
    std::vector<std::string> fut;
    std::vector<std::string> fui;
    std::vector<test_objective> poi;
    std::vector<criterion> criteria;

    /// The referenced TC-GSC.
    std::shared_ptr<const sysconfig::container> gsc;

    friend bool operator==(const test_case& a, const test_case& b);
};

/// Varied input: `target` is `component.attribute` of the test system.
struct parameter_descriptor {
    std::string name;
    std::string unit;
    std::string target;
    std::vector<scalar> values;

    friend bool operator==(const parameter_descriptor&, const parameter_descriptor&) = default;
};

/// Observed signal: `signal` is `component.terminal` (with a quantity) or
/// `component.attribute`.
struct signal_descriptor {
    std::string name;
    std::string unit;
    std::string signal;
    std::string quantity;

    friend bool operator==(const signal_descriptor&, const signal_descriptor&) = default;
};

enum class step_action { set_parameter, apply_event, wait_until, assess, sweep };

std::string_view to_string(step_action a);
std::optional<step_action> parse_step_action(std::string_view s);

struct procedure_step {
    step_action action = step_action::set_parameter;
    std::map<std::string, scalar> args;

    friend bool operator==(const procedure_step&, const procedure_step&) = default;
};

struct test_specification {
    std::string id;
    std::string test_case;   // path as written
    std::string test_system; // path as written
    std::vector<parameter_descriptor> inputs;
    std::vector<signal_descriptor> outputs;
    std::vector<procedure_step> test_design;
    /// Assessment parameters (envelope anchors, tolerances, Q(V) curve).
    std::map<std::string, scalar> assessment;

    std::shared_ptr<const testspec::test_case> tc;
    std::shared_ptr<const sysconfig::container> ts;

    friend bool operator==(const test_specification& a, const test_specification& b);
};

/// Names accepted in assessment sections and CLI overrides, with defaults.
const std::map<std::string, scalar>& assessment_defaults();

// ---------------------------------------------------------------- test case

/// Schema-level parse; references are resolved against `base_dir` but not
/// checked. Throws schema_error, io_error.
test_case read_test_case(const nlohmann::json& doc, const std::filesystem::path& base_dir);

/// Reference and invariant checks of a read test case.
validation_report check_test_case(const test_case& tc);

/// read_test_case + check_test_case. Throws schema_error, io_error,
/// dangling_reference, invariant_violation.
test_case parse_test_case(const nlohmann::json& doc, const std::filesystem::path& base_dir);
test_case load_test_case(const std::filesystem::path& file);

nlohmann::json to_json(const test_case& tc);

// ---------------------------------------------------------------- test spec

/// Parses the specification and the documents it references. The
/// specification itself is not validated. Throws like parse_test_case.
test_specification parse_test_specification(const nlohmann::json& doc, const std::filesystem::path& base_dir);
test_specification load_test_specification(const std::filesystem::path& file);

validation_report validate_test_specification(const test_specification& spec);

nlohmann::json to_json(const test_specification& spec);

/// Converts an error thrown while parsing into a diagnostic.
diagnostic diagnostic_from(const error& e);

} // namespace cosim::testspec
