#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace cosim::master {

struct time_series {
    std::vector<double> t;
    std::vector<double> v;

    std::size_t size() const noexcept { return t.size(); }
    void push(double time, double value);

    /// Bitwise comparison, so NaN samples compare equal to themselves.
    friend bool operator==(const time_series& a, const time_series& b);
};

/// Convergence record of one loop group at one synchronization point.
struct loop_record {
    double t = 0.0;
    std::vector<std::string> group;
    int iterations = 0;
    std::vector<double> residuals; // one per pass, pass 0 first
};

struct result_store {
    std::map<std::pair<std::string, std::string>, time_series> series;
    /// Recorded variable names per instance, in description order.
    std::map<std::string, std::vector<std::string>> variables;
    std::vector<loop_record> loops;

    const time_series& at(const std::string& instance, const std::string& variable) const;

    friend bool operator==(const result_store& a, const result_store& b)
    {
        return a.series == b.series;
    }
};

/// One CSV per instance: `<dir>/<prefix><instance>.csv`, header `t,<var>,...`.
/// Returns the written paths in instance order.
std::vector<std::filesystem::path> export_csv(const result_store& r, const std::filesystem::path& dir,
                                              const std::string& prefix = "");

std::string format_time(double t);
std::string format_value(double v);

} // namespace cosim::master
