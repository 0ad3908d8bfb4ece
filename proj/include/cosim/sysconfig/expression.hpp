#pragma once

#include "cosim/common/error.hpp"
#include "cosim/common/scalar.hpp"

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

// Comparison expressions shared by configuration constraints and test criteria.
//
//   expr       := conjunction ('or' conjunction)*
//   conjunction:= comparison ('and' comparison)*
//   comparison := operand op literal
//   operand    := name | aggregate '(' name ')'      aggregate in {min, max, final}
//   op         := '<' | '<=' | '≤' | '=' | '==' | '>=' | '≥' | '>'
//   literal    := number | 'string' | "string" | true | false
//
// `and` binds tighter than `or`; there are no parentheses.
namespace cosim::sysconfig {

class expression_error : public error {
public:
    using error::error;
};

enum class compare_op { lt, le, eq, ge, gt };
enum class aggregate { none, min, max, final };

struct comparison {
    aggregate agg = aggregate::none;
    std::string name;
    compare_op op = compare_op::eq;
    scalar literal;
};

struct expression {
    /// Disjunction of conjunctions.
    std::vector<std::vector<comparison>> clauses;

    std::vector<std::string> referenced_names() const;
    bool uses_aggregates() const;
};

/// Throws expression_error on malformed input. Aggregates are only
/// accepted when `allow_aggregates` is set.
expression parse_expression(std::string_view text, bool allow_aggregates = false);

/// Resolves an operand to a value; nullopt means "unknown operand".
using operand_lookup = std::function<std::optional<scalar>(aggregate, const std::string&)>;

/// Throws expression_error when an operand is unknown or types are incomparable.
bool evaluate(const expression& e, const operand_lookup& lookup);

bool compare(const scalar& lhs, compare_op op, const scalar& rhs);

} // namespace cosim::sysconfig
