#include "cosim/cli/cli.hpp"

#include "cosim/common/json_io.hpp"
#include "cosim/sysconfig/io.hpp"
#include "cosim/testrunner/campaign.hpp"
#include "cosim/testspec/documents.hpp"
#include "cosim/testspec/experiment.hpp"
#include "cosim/testspec/workflow.hpp"

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

namespace cosim::cli {

namespace fs = std::filesystem;

namespace {

class usage_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

void print(std::ostream& out, validation_report report)
{
    sort_report(report);
    for (const auto& d : report) out << format_diagnostic(d) << '\n';
}

void print_summary(std::ostream& out, const fs::path& dir)
{
    std::ifstream in(dir / "summary.csv");
    out << in.rdbuf();
}

// Overrides name known parameters; anything else is a usage error.
void apply_overrides(testspec::experiment& exp, const cli_config& cfg)
{
    for (const auto& [k, v] : cfg.overrides) {
        try {
            testrunner::apply_override(exp, k, v);
        } catch (const error& e) {
            throw usage_error(e.what());
        }
    }
}

int do_validate(const cli_config& cfg, std::ostream& out)
{
    validation_report all;
    for (const auto& f : cfg.inputs) {
        auto r = testspec::check_document(f);
        all.insert(all.end(), r.begin(), r.end());
    }
    print(out, all);
    return all.empty() ? ok : failed;
}

int do_compile(const cli_config& cfg, std::ostream& out)
{
    const auto& spec_file = cfg.inputs.at(0);
    testspec::experiment exp;
    try {
        const auto spec = testspec::load_test_specification(spec_file);
        const auto ri = sysconfig::load_container(*cfg.ri);
        testspec::compile_options opt;
        if (cfg.seed) opt.seed = *cfg.seed;
        exp = testspec::compile_experiment(spec, ri, opt);
    } catch (const io_error&) {
        throw;
    } catch (const error& e) {
        print(out, {testspec::diagnostic_from(e)});
        return failed;
    }
    const fs::path target = cfg.out ? *cfg.out : fs::path(exp.id + ".json");
    const auto base = fs::absolute(target).parent_path();
    exp.test_spec = fs::absolute(spec_file).lexically_normal().lexically_relative(base).generic_string();
    json_io::save_file(target, testspec::to_json(exp));
    spdlog::info("wrote {}", target.string());
    return ok;
}

int do_run(const cli_config& cfg, std::ostream& out)
{
    auto exp = testspec::load_experiment(cfg.inputs.at(0));
    if (cfg.seed) exp.plan.seed = *cfg.seed;
    apply_overrides(exp, cfg);
    auto report = testspec::validate_experiment(exp);
    if (has_errors(report)) {
        print(out, report);
        return failed;
    }
    const auto plan = testrunner::load_campaign_plan(*cfg.plan);
    report = testrunner::validate_plan(plan);
    if (!report.empty()) {
        print(out, report);
        return failed;
    }
    spdlog::info("{}: {} sweep points, seed {}", exp.id, plan.sweep.size(), exp.plan.seed);
    const auto result = testrunner::run_frt_campaign(exp, plan);
    const fs::path dir = cfg.out ? *cfg.out : fs::path("campaign");
    testrunner::emit_report(result, dir);
    print_summary(out, dir);
    return testrunner::all_pass(result) ? ok : failed;
}

int do_assess(const cli_config& cfg, std::ostream& out)
{
    const auto& dir = cfg.inputs.at(0);
    auto result = testrunner::load_report(dir);
    if (!cfg.overrides.empty()) {
        testspec::experiment holder;
        holder.assessment = result.assessment;
        for (const auto& [k, v] : cfg.overrides) {
            if (k.find('.') != std::string::npos)
                throw usage_error("assess accepts assessment parameters only: " + k);
        }
        apply_overrides(holder, cfg);
        result.assessment = holder.assessment;
    }
    testrunner::reassess(result);
    testrunner::emit_report(result, cfg.out ? *cfg.out : dir);
    print_summary(out, cfg.out ? *cfg.out : dir);
    return testrunner::all_pass(result) ? ok : failed;
}

int do_workflow(const cli_config& cfg, std::ostream& out)
{
    const auto& file = cfg.inputs.at(0);
    testspec::workflow_state state;
    if (fs::exists(file)) state = testspec::workflow_state_from_json(json_io::load_file(file));

    if (!cfg.event.empty()) {
        const auto e = testspec::parse_workflow_event(cfg.event);
        if (!e) throw usage_error("unknown workflow event: " + cfg.event);
        try {
            state = testspec::advance_workflow(state, *e);
        } catch (const testspec::illegal_transition& ex) {
            out << "error " << testspec::to_string(state.current) << ": " << ex.what() << '\n';
            return failed;
        }
        json_io::save_file(file, testspec::to_json(state));
    }
    for (const auto& t : state.history)
        out << testspec::to_string(t.from) << " --" << testspec::to_string(t.event) << "--> "
            << testspec::to_string(t.to) << '\n';
    out << "current: " << testspec::to_string(state.current) << '\n';
    return ok;
}

} // namespace

int dispatch(const cli_config& cfg, std::ostream& out, std::ostream& err)
{
    try {
        switch (cfg.command) {
        case subcommand::validate: return do_validate(cfg, out);
        case subcommand::compile: return do_compile(cfg, out);
        case subcommand::run: return do_run(cfg, out);
        case subcommand::assess: return do_assess(cfg, out);
        case subcommand::workflow: return do_workflow(cfg, out);
        }
    } catch (const usage_error& e) {
        err << "usage error: " << e.what() << '\n';
        return usage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return execution;
    }
    return usage;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Validate, compile, run and assess co-simulation test campaigns", "cosim"};
    app.require_subcommand(1);

    cli_config cfg;
    std::vector<std::string> sets;
    std::uint64_t seed = 0;
    std::string input;
    std::vector<std::string> inputs;
    std::string ri, plan, outp;

    auto add_common = [&](CLI::App* s) {
        s->add_option("--set", sets, "key=value override (repeatable)");
    };

    auto* validate = app.add_subcommand("validate", "check documents, print diagnostics");
    validate->add_option("files", inputs, "SC, test case, test spec or experiment")->required()->check(CLI::ExistingFile);

    auto* compile = app.add_subcommand("compile", "test specification + RI -> experiment");
    compile->add_option("test_spec", input)->required()->check(CLI::ExistingFile);
    compile->add_option("--ri", ri, "research infrastructure SC")->required()->check(CLI::ExistingFile);
    compile->add_option("-o,--out", outp, "experiment file");
    auto* compile_seed = compile->add_option("--seed", seed);

    auto* run = app.add_subcommand("run", "execute the sweep campaign");
    run->add_option("experiment", input)->required()->check(CLI::ExistingFile);
    run->add_option("--plan", plan)->required()->check(CLI::ExistingFile);
    run->add_option("-o,--out", outp, "output directory");
    auto* run_seed = run->add_option("--seed", seed);
    add_common(run);

    auto* assess = app.add_subcommand("assess", "re-evaluate verdicts from stored traces");
    assess->add_option("outdir", input)->required()->check(CLI::ExistingDirectory);
    assess->add_option("-o,--out", outp, "write the re-assessed report elsewhere");
    add_common(assess);

    auto* workflow = app.add_subcommand("workflow", "show or advance the workflow state");
    workflow->add_option("state", input, "state file (created on first event)")->required();
    workflow->add_option("event", cfg.event, "proceed | loop_back")
        ->check(CLI::IsMember({"proceed", "loop_back"}));

    std::vector<std::string> argv(args.rbegin(), args.rend());
    try {
        app.parse(argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return ok;
    } catch (const CLI::ParseError& e) {
        err << e.what() << "\n\n" << app.help();
        return usage;
    }

    auto* sub = app.get_subcommands().front();
    const std::string name = sub->get_name();
    if (name == "validate") cfg.command = subcommand::validate;
    else if (name == "compile") cfg.command = subcommand::compile;
    else if (name == "run") cfg.command = subcommand::run;
    else if (name == "assess") cfg.command = subcommand::assess;
    else cfg.command = subcommand::workflow;

    if (cfg.command == subcommand::validate)
        for (const auto& f : inputs) cfg.inputs.emplace_back(f);
    else
        cfg.inputs.emplace_back(input);
    if (!ri.empty()) cfg.ri = ri;
    if (!plan.empty()) cfg.plan = plan;
    if (!outp.empty()) cfg.out = outp;
    if (compile_seed->count() || run_seed->count()) cfg.seed = seed;
    for (const auto& s : sets) {
        const auto eq = s.find('=');
        if (eq == std::string::npos || eq == 0) {
            err << "--set expects key=value, got '" << s << "'\n\n" << app.help();
            return usage;
        }
        cfg.overrides.emplace_back(s.substr(0, eq), s.substr(eq + 1));
    }
    return dispatch(cfg, out, err);
}

void configure_logging()
{
    auto logger = spdlog::stderr_logger_mt("cosim");
    spdlog::set_default_logger(logger);
    spdlog::set_pattern("[%l] %v");
    auto level = spdlog::level::warn;
    if (const char* v = std::getenv("COSIM_LOG")) {
        const std::string s = v;
        if (s == "error") level = spdlog::level::err;
        else if (s == "info") level = spdlog::level::info;
        else if (s == "debug") level = spdlog::level::debug;
    }
    spdlog::set_level(level);
}

} // namespace cosim::cli
