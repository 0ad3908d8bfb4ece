#include "cosim/common/diagnostics.hpp"

#include <algorithm>
#include <tuple>

namespace cosim {

std::string_view to_string(severity s)
{
    return s == severity::error ? "ERROR" : "WARNING";
}

void sort_report(validation_report& report)
{
    std::stable_sort(report.begin(), report.end(), [](const diagnostic& a, const diagnostic& b) {
        return std::tie(a.object_id, a.code, a.message) < std::tie(b.object_id, b.code, b.message);
    });
    report.erase(std::unique(report.begin(), report.end()), report.end());
}

bool has_errors(const validation_report& report)
{
    return std::any_of(report.begin(), report.end(),
                       [](const diagnostic& d) { return d.level == severity::error; });
}

std::string format_diagnostic(const diagnostic& d)
{
    std::string out{to_string(d.level)};
    out += ' ';
    out += d.object_id.empty() ? "-" : d.object_id;
    out += ": ";
    out += d.message;
    return out;
}

} // namespace cosim
