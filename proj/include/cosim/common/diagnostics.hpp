#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace cosim {

enum class severity { error, warning };

struct diagnostic {
    severity level = severity::error;
    std::string object_id;
    std::string code;    // stable rule identifier, e.g. "cp_domain_mismatch"
    std::string message;

    friend bool operator==(const diagnostic&, const diagnostic&) = default;
};

using validation_report = std::vector<diagnostic>;

std::string_view to_string(severity s);

/// Sort by (object id, code, message) so reports are reproducible.
void sort_report(validation_report& report);

bool has_errors(const validation_report& report);

/// `SEVERITY object_id: message`
std::string format_diagnostic(const diagnostic& d);

} // namespace cosim
