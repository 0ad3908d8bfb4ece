#include "cosim/master/results.hpp"

#include "cosim/common/error.hpp"

#include <cstdio>
#include <cstring>
#include <fstream>

namespace cosim::master {

void time_series::push(double time, double value)
{
    if (!t.empty() && !(time > t.back())) throw error("time series samples must be strictly increasing");
    t.push_back(time);
    v.push_back(value);
}

bool operator==(const time_series& a, const time_series& b)
{
    auto same = [](const std::vector<double>& x, const std::vector<double>& y) {
        return x.size() == y.size() && (x.empty() || std::memcmp(x.data(), y.data(), x.size() * sizeof(double)) == 0);
    };
    return same(a.t, b.t) && same(a.v, b.v);
}

const time_series& result_store::at(const std::string& instance, const std::string& variable) const
{
    const auto it = series.find({instance, variable});
    if (it == series.end()) throw error("no series for '" + instance + "." + variable + "'");
    return it->second;
}

std::string format_time(double t)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.9f", t);
    return buf;
}

std::string format_value(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::vector<std::filesystem::path> export_csv(const result_store& r, const std::filesystem::path& dir,
                                              const std::string& prefix)
{
    std::filesystem::create_directories(dir);
    std::vector<std::filesystem::path> written;
    for (const auto& [instance, names] : r.variables) {
        if (names.empty()) continue;
        const auto path = dir / (prefix + instance + ".csv");
        std::ofstream out(path, std::ios::binary);
        if (!out) throw io_error(path.string(), "cannot open for writing");
        std::vector<const time_series*> cols;
        out << "t";
        for (const auto& n : names) {
            out << ',' << n;
            cols.push_back(&r.at(instance, n));
        }
        out << '\n';
        for (std::size_t i = 0; i < cols.front()->size(); ++i) {
            out << format_time(cols.front()->t[i]);
            for (const auto* c : cols) out << ',' << format_value(c->v[i]);
            out << '\n';
        }
        if (!out) throw io_error(path.string(), "write failed");
        written.push_back(path);
    }
    return written;
}

} // namespace cosim::master
