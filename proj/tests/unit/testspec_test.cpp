#include <doctest.h>

#include "cosim/common/json_io.hpp"
#include "cosim/master/schedule.hpp"
#include "cosim/models/library.hpp"
#include "cosim/sysconfig/io.hpp"
#include "cosim/testspec/experiment.hpp"
#include "cosim/testspec/workflow.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include <unistd.h>

using namespace cosim;
using namespace cosim::testspec;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const fs::path frt_dir = fs::path(COSIM_DATA_DIR) / "frt";

json frt_doc(const std::string& name) { return json_io::load_file(frt_dir / name); }

std::set<std::pair<std::string, std::string>> codes(const validation_report& r)
{
    std::set<std::pair<std::string, std::string>> out;
    for (const auto& d : r) out.emplace(d.object_id, d.code);
    return out;
}

sysconfig::container frt_ri() { return sysconfig::load_container(frt_dir / "ri_sc.json"); }

// private scratch directory per test process
fs::path scratch()
{
    static const fs::path dir = [] {
        auto d = fs::temp_directory_path() / ("cosim_testspec_" + std::to_string(::getpid()));
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

} // namespace

TEST_CASE("FRT test case")
{
    const auto tc = parse_test_case(frt_doc("test_case.json"), frt_dir);
    CHECK(tc.fut == std::vector<std::string>{"frt_capability", "reactive_power_control"});
    REQUIRE(tc.poi.size() == 1);
    CHECK(tc.poi[0].kind == objective_kind::validation);
    CHECK(tc.gsc->type == sysconfig::sc_type::tc_gsc);
    CHECK(check_test_case(tc).empty());
}

TEST_CASE("test case errors")
{
    auto doc = frt_doc("test_case.json");

    SUBCASE("oui outside sut")
    {
        doc["oui"].push_back("transmission_grid");
        try {
            parse_test_case(doc, frt_dir);
            FAIL("expected invariant_violation");
        } catch (const invariant_violation& e) {
            CHECK(e.rule() == "oui ⊆ sut");
        }
    }
    SUBCASE("fui outside fut")
    {
        doc["fui"].push_back("active_power_infeed");
        CHECK_THROWS_AS(parse_test_case(doc, frt_dir), invariant_violation);
    }
    SUBCASE("unknown component")
    {
        doc["sut"].push_back("battery");
        try {
            parse_test_case(doc, frt_dir);
            FAIL("expected dangling_reference");
        } catch (const dangling_reference& e) {
            CHECK(e.id() == "battery");
        }
    }
    SUBCASE("unknown function")
    {
        doc["fut"].push_back("islanding");
        CHECK_THROWS_AS(parse_test_case(doc, frt_dir), dangling_reference);
    }
    SUBCASE("bad objective kind")
    {
        doc["poi"][0]["kind"] = "exploration";
        try {
            parse_test_case(doc, frt_dir);
            FAIL("expected schema_error");
        } catch (const schema_error& e) {
            CHECK(e.path() == "/poi/0/kind");
        }
    }
    SUBCASE("missing generic config")
    {
        doc["generic_config"] = "nowhere.json";
        CHECK_THROWS_AS(parse_test_case(doc, frt_dir), dangling_reference);
    }
    SUBCASE("duplicate function id")
    {
        doc["use_cases"][0]["functions"].push_back({{"id", "frt_capability"}});
        CHECK_THROWS_AS(parse_test_case(doc, frt_dir), invariant_violation);
    }
    SUBCASE("bad metric")
    {
        doc["criteria"][0]["metric"] = "min(U_PCC) >=";
        CHECK_THROWS_AS(parse_test_case(doc, frt_dir), invariant_violation);
    }
}

TEST_CASE("minimal test case")
{
    const auto dir = scratch();
    json gsc{{"sc_type", "TC-GSC"},
             {"name", "one"},
             {"domains", {{{"name", "electric"}}}},
             {"components",
              {{{"id", "pv"}, {"type_label", "pv inverter"},
                {"terminals", {{{"id", "ac"}, {"direction", "out"}, {"domain", "electric"}}}}}}},
             {"connection_points", json::array()}};
    json_io::save_file(dir / "one_gsc.json", gsc);
    json doc{{"document", "test_case"},
             {"id", "tc_min"},
             {"generic_config", "one_gsc.json"},
             {"use_cases", json::array()},
             {"sut", {"pv"}},
             {"oui", {"pv"}},
             {"dui", json::array()},
             {"fut", json::array()},
             {"fui", json::array()},
             {"poi", {{{"statement", "characterize the inverter"}, {"kind", "characterization"}}}}};
    const auto tc = parse_test_case(doc, dir);
    CHECK(tc.sut == std::vector<std::string>{"pv"});
    CHECK(tc.criteria.empty());
    doc["criteria"] = json::array();
    CHECK(to_json(tc) == doc);
}

TEST_CASE("test specification validation")
{
    auto spec = load_test_specification(frt_dir / "test_spec.json");
    CHECK(validate_test_specification(spec).empty());
    REQUIRE(spec.inputs.size() == 3);
    CHECK(spec.inputs[0].values.size() == 4);

    SUBCASE("nonexistent output signal")
    {
        spec.outputs.push_back({"omega", "pu", "wind_turbine.rotor", "speed"});
        const auto r = validate_test_specification(spec);
        REQUIRE(r.size() == 1);
        CHECK(r[0].code == "unresolved_output");
    }
    SUBCASE("input not an attribute")
    {
        spec.inputs[0].target = "transmission_grid.pcc";
        const auto r = validate_test_specification(spec);
        REQUIRE(r.size() == 1);
        CHECK(r[0].code == "unresolved_input");
    }
    SUBCASE("empty design")
    {
        spec.test_design.clear();
        const auto r = validate_test_specification(spec);
        REQUIRE(r.size() == 1);
        CHECK(r[0].code == "empty_test_design");
    }
    SUBCASE("broken lineage")
    {
        auto ts = *spec.ts;
        ts.components.back().type_label = "diesel generator";
        spec.ts = std::make_shared<const sysconfig::container>(ts);
        const auto r = validate_test_specification(spec);
        CHECK(codes(r).count({"wind_turbine", "lineage"}) == 1);
    }
    SUBCASE("unknown step template")
    {
        auto doc = frt_doc("test_spec.json");
        doc["test_design"][0]["action"] = "dance";
        CHECK_THROWS_AS(parse_test_specification(doc, frt_dir), schema_error);
    }
    SUBCASE("unknown assessment parameter")
    {
        auto doc = frt_doc("test_spec.json");
        doc["assessment"]["U_min"] = 0.1;
        CHECK_THROWS_AS(parse_test_specification(doc, frt_dir), schema_error);
    }
}

TEST_CASE("compile FRT experiment")
{
    const auto spec = load_test_specification(frt_dir / "test_spec.json");
    const auto exp = compile_experiment(spec, frt_ri());
    CHECK(validate_experiment(exp).empty());

    std::set<std::string> ids;
    for (const auto& f : exp.plan.federates) {
        ids.insert(f.id);
        CHECK(models::is_model(f.model));
    }
    CHECK(ids == std::set<std::string>{"delay", "frt", "grid", "qv", "wtg"});
    CHECK(exp.representation.at("transmission_grid") == "grid");
    CHECK(exp.representation.at("collection_grid") == "grid");
    CHECK(exp.plan.find("wtg")->integrator == federate::integrator_kind::rk4);
    CHECK(std::get<double>(exp.plan.find("grid")->params.at("pcc_x")) == 0.06);
    CHECK(std::get<std::int64_t>(exp.plan.find("grid")->params.at("pcc_bus")) == 10);
    CHECK(exp.plan.stop_time == 1.8);
    CHECK(exp.observe.at("U_PCC").str() == "grid.U_pcc");
    CHECK(exp.bindings.at("y").str() == "grid.fault_t_off");

    // grid and the WTG capsule iterate together; the controllers run downstream
    auto s = models::build_scenario(exp.plan);
    const auto g = master::build_schedule(s);
    REQUIRE(g.loop_groups.size() == 1);
    CHECK(g.loop_groups[0] == std::vector<std::string>{"grid", "wtg"});
    auto pos = [&](const std::string& id) {
        return std::find(g.order.begin(), g.order.end(), id) - g.order.begin();
    };
    CHECK(pos("frt") > pos("grid"));
    CHECK(pos("qv") > pos("frt"));
    CHECK(pos("delay") > pos("qv"));

    // every connection follows a connection point of the test system
    for (const auto& c : exp.plan.connections) CHECK(c.source.instance != c.target.instance);
    int shifted = 0, iterative = 0;
    for (const auto& c : exp.plan.connections) {
        shifted += c.mode == master::connection_mode::time_shifted;
        iterative += c.mode == master::connection_mode::iterative;
    }
    CHECK(shifted == 3);
    CHECK(iterative == 2);

    CHECK(compile_experiment(spec, frt_ri()) == exp);
}

TEST_CASE("compile without a delay host")
{
    const auto spec = load_test_specification(frt_dir / "test_spec.json");
    auto ri = frt_ri();
    std::erase_if(ri.components, [](const auto& c) { return c.id == "net_delay"; });
    try {
        compile_experiment(spec, ri);
        FAIL("expected infeasible_mapping");
    } catch (const infeasible_mapping& e) {
        CHECK(e.core() == std::vector<std::string>{"comm_link"});
    }
}

TEST_CASE("compile single-component SuT")
{
    auto spec = load_test_specification(frt_dir / "test_spec.json");
    auto tc = *spec.tc;
    tc.sut = {"frt_control"};
    tc.oui = {"frt_control"};
    tc.dui = {"control"};
    tc.criteria.clear();
    spec.tc = std::make_shared<const test_case>(tc);
    spec.inputs.clear();
    std::erase_if(spec.outputs, [](const auto& o) { return o.name == "U_PCC" || o.name == "Q_PCC"; });

    auto ri = frt_ri();
    std::erase_if(ri.components, [](const auto& c) { return c.id != "me_frt"; });
    const auto exp = compile_experiment(spec, ri);
    REQUIRE(exp.plan.federates.size() == 2);
    CHECK(exp.plan.find("frt")->model == "frt_fsm");
    const auto* eq = exp.plan.find(equivalent_id);
    REQUIRE(eq != nullptr);
    REQUIRE(eq->description);
    // a source for the measured voltage and sinks for the FRT commands
    const auto* u = eq->description->find("collection_grid_meas_U");
    REQUIRE(u != nullptr);
    CHECK(u->causality == federate::causality::output);
    CHECK(eq->description->find("vector_control_frt_state") != nullptr);
    CHECK(eq->description->find("wpp_controller_frt_state") != nullptr);
    CHECK(exp.representation.at("transmission_grid") == equivalent_id);
    CHECK(validate_experiment(exp).empty());

    auto s = models::build_scenario(exp.plan);
    CHECK_NOTHROW(master::build_schedule(s));
}

TEST_CASE("round trip of the shipped documents")
{
    const auto tc = load_test_case(frt_dir / "test_case.json");
    CHECK(parse_test_case(to_json(tc), frt_dir) == tc);
    CHECK(to_json(tc) == frt_doc("test_case.json"));

    const auto spec = load_test_specification(frt_dir / "test_spec.json");
    CHECK(parse_test_specification(to_json(spec), frt_dir) == spec);
    CHECK(to_json(spec) == frt_doc("test_spec.json"));

    const auto exp = load_experiment(frt_dir / "experiment.json");
    CHECK(parse_experiment(to_json(exp), frt_dir) == exp);
    CHECK(validate_experiment(exp).empty());

    for (const char* name : {"tc_gsc.json", "ts_sc.json", "ri_sc.json"}) {
        const auto c = sysconfig::load_container(frt_dir / name);
        CHECK(sysconfig::container_from_json(sysconfig::to_json(c)) == c);
    }
}

TEST_CASE("invalid fixture corpus")
{
    const fs::path dir = fs::path(COSIM_FIXTURE_DIR) / "invalid";
    const auto manifest = json_io::load_file(dir / "manifest.json");
    REQUIRE(manifest["documents"].size() == 10);
    for (const auto& entry : manifest["documents"]) {
        const auto file = entry["file"].get<std::string>();
        CAPTURE(file);
        std::set<std::pair<std::string, std::string>> expected;
        for (const auto& e : entry["expect"]) expected.emplace(e["object_id"], e["code"]);
        CHECK(codes(check_document(dir / file)) == expected);
    }
}

TEST_CASE("valid documents check clean")
{
    for (const char* name : {"tc_gsc.json", "ts_sc.json", "ri_sc.json", "test_case.json", "test_spec.json",
                             "experiment.json"}) {
        CAPTURE(name);
        CHECK(check_document(frt_dir / name).empty());
    }
}

TEST_CASE("workflow")
{
    workflow_state s;
    for (int i = 0; i < 6; ++i) s = advance_workflow(s, workflow_event::proceed);
    CHECK(s.current == stage::evaluation);
    CHECK(s.history.size() == 6);
    CHECK_THROWS_AS(advance_workflow(s, workflow_event::proceed), illegal_transition);

    for (int k = 0; k < 7; ++k) {
        workflow_state at;
        for (int i = 0; i < k; ++i) at = advance_workflow(at, workflow_event::proceed);
        if (at.current == stage::pre_assessment) {
            const auto back = advance_workflow(at, workflow_event::loop_back);
            CHECK(back.current == stage::test_spec);
        } else {
            CHECK_THROWS_AS(advance_workflow(at, workflow_event::loop_back), illegal_transition);
        }
    }

    workflow_state w;
    for (int loops = 0; loops < 3; ++loops) {
        while (w.current != stage::pre_assessment) w = advance_workflow(w, workflow_event::proceed);
        w = advance_workflow(w, workflow_event::loop_back);
    }
    for (int i = 0; i < 4; ++i) w = advance_workflow(w, workflow_event::proceed);
    CHECK(w.current == stage::evaluation);
    CHECK(workflow_state_from_json(to_json(w)) == w);
}
