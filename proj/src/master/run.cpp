#include "cosim/master/run.hpp"

#include <cmath>
#include <set>

namespace cosim::master {

namespace {

using federate::value_ref;

struct wire {
    const connection* conn;
    cs_federate* source;
    value_ref source_ref;
    value_ref target_ref;
};

double change(const value& a, const value& b)
{
    if (a == b) return 0.0;
    const double d = std::abs(federate::to_double(a) - federate::to_double(b));
    return std::isnan(d) ? INFINITY : d;
}

class executor {
public:
    explicit executor(scenario& s) : s_(s), graph_(build_schedule(s))
    {
        const double delta = sync_interval(s);
        delta_ticks_ = std::llround(delta * 1e9);
        for (const auto& c : s.connections()) {
            auto* src = s.at(c.source.instance).object.get();
            const auto* out = src->description().find(c.source.variable);
            const auto* in = s.at(c.target.instance).object->description().find(c.target.variable);
            inputs_[c.target.instance].push_back({&c, src, out->ref, in->ref});
        }
    }

    result_store execute()
    {
        for (auto& [id, slot] : s_.federates()) guarded(id, 0.0, [&] { slot.object->initialize(0.0, slot.params); });

        const auto stop_ticks = std::llround(s_.stop_time * 1e9);
        if (stop_ticks < 0) throw error("stop time must not be negative");
        const auto points = stop_ticks / delta_ticks_;
        for (std::int64_t k = 0; k <= points; ++k) {
            k_ = k;
            for (const auto& unit : graph_.units) {
                if (unit.loop)
                    run_loop(unit.members);
                else
                    advance(unit.members.front());
            }
            record(time_of(k * delta_ticks_));
        }
        return std::move(results_);
    }

private:
    // division keeps decimal grid points exact (t = 0.1 is the literal 0.1)
    static double time_of(std::int64_t ticks) { return static_cast<double>(ticks) / 1e9; }
    double now() const { return time_of(k_ * delta_ticks_); }

    template <class F>
    void guarded(const std::string& id, double t, F&& f)
    {
        try {
            f();
        } catch (const federate_error&) {
            throw;
        } catch (const std::exception& e) {
            throw federate_error(id, t, e.what());
        }
    }

    value input_value(const wire& w) const
    {
        const auto& c = *w.conn;
        if (c.mode == connection_mode::time_shifted) {
            if (k_ == 0) {
                if (c.initial) return *c.initial;
                return federate::default_value(w.source->description().find(w.source_ref)->type);
            }
            return previous_.at(c.source);
        }
        if (c.mode == connection_mode::iterative && !advanced_.count(c.source.instance)) {
            if (auto it = guess_.find(c.source); it != guess_.end()) return it->second;
        }
        return w.source->get_output(w.source_ref);
    }

    void advance(const std::string& id)
    {
        auto& slot = s_.federates().at(id);
        auto& fed = *slot.object;
        const double t = now();
        guarded(id, t, [&] {
            if (auto it = inputs_.find(id); it != inputs_.end())
                for (const auto& w : it->second) fed.set_input(w.target_ref, input_value(w));
            if (k_ == 0) {
                if (fed.update_outputs(0.0) != federate::step_status::ok)
                    throw federate_error(id, t, fed.last_error());
                return;
            }
            const auto h = std::llround(slot.step_size * 1e9);
            const auto start = (k_ - 1) * delta_ticks_;
            for (std::int64_t j = start; j < start + delta_ticks_; j += h) {
                guarded(id, time_of(j), [&] {
                    if (fed.do_step(time_of(j), time_of(h)) != federate::step_status::ok)
                        throw federate_error(id, time_of(j), fed.last_error());
                });
            }
        });
        advanced_.insert(id);
    }

    // Gauss-Seidel over the group. Pass 0 starts from the values the loop
    // interface held at the previous point; every further pass is one iteration.
    void run_loop(const std::vector<std::string>& members)
    {
        const std::set<std::string> in_group(members.begin(), members.end());
        std::vector<const wire*> loop_edges;
        for (const auto& m : members)
            if (auto it = inputs_.find(m); it != inputs_.end())
                for (const auto& w : it->second)
                    if (w.conn->mode == connection_mode::iterative && in_group.count(w.conn->source.instance))
                        loop_edges.push_back(&w);

        std::map<std::string, std::any> snapshot;
        for (const auto& m : members)
            guarded(m, now(), [&] { snapshot[m] = s_.federates().at(m).object->save_state(); });

        guess_.clear();
        for (const auto* w : loop_edges) guess_[w->conn->source] = w->source->get_output(w->source_ref);

        loop_record rec{now(), members, 0, {}};
        for (int pass = 0;; ++pass) {
            if (pass > 0) {
                for (const auto& m : members) {
                    advanced_.erase(m);
                    guarded(m, now(), [&] { s_.federates().at(m).object->restore_state(snapshot.at(m)); });
                }
            }
            for (const auto& m : members) advance(m);

            double residual = 0.0;
            std::map<endpoint, value> current;
            for (const auto* w : loop_edges) {
                auto v = w->source->get_output(w->source_ref);
                residual = std::max(residual, change(v, guess_.at(w->conn->source)));
                current[w->conn->source] = std::move(v);
            }
            rec.residuals.push_back(residual);
            rec.iterations = pass;
            if (residual < s_.epsilon) break;
            if (pass >= s_.max_iterations) {
                results_.loops.push_back(rec);
                throw convergence_failure(members, now(), residual);
            }
            guess_ = std::move(current);
        }
        guess_.clear();
        results_.loops.push_back(std::move(rec));
    }

    void record(double t)
    {
        for (const auto& [id, slot] : s_.federates()) {
            auto& names = results_.variables[id];
            const bool first = names.empty();
            for (const auto* v : slot.object->description().with_causality(federate::causality::output)) {
                const auto val = slot.object->get_output(v->ref);
                if (first) names.push_back(v->name);
                results_.series[{id, v->name}].push(t, federate::to_double(val));
                previous_[{id, v->name}] = val;
            }
        }
        advanced_.clear();
    }

    scenario& s_;
    schedule_graph graph_;
    std::int64_t delta_ticks_ = 0;
    std::int64_t k_ = 0;
    std::map<std::string, std::vector<wire>> inputs_;
    std::map<endpoint, value> previous_;
    std::map<endpoint, value> guess_;
    std::set<std::string> advanced_;
    result_store results_;
};

} // namespace

result_store run(scenario& s)
{
    return executor(s).execute();
}

} // namespace cosim::master
