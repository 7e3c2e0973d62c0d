#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include <dqm/config.hpp>

using namespace dqm;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir() {
    const fs::path dir = fs::temp_directory_path() / "dqm_config_tests";
    fs::create_directories(dir);
    return dir;
}

fs::path write_file(const std::string& name, const std::string& text) {
    const fs::path path = scratch_dir() / name;
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << text;
    return path;
}

template <typename Fn> std::string message_of(Fn&& fn) {
    try {
        fn();
    } catch (const std::invalid_argument& e) {
        return e.what();
    }
    return "";
}

} // namespace

TEST_CASE("probe and control names round trip") {
    CHECK(probe_kind_from_name("ghz") == ProbeKind::ghz);
    CHECK(probe_kind_from_name("bell_singlet") == ProbeKind::bell_singlet);
    CHECK(probe_kind_from_name("product") == ProbeKind::product);
    CHECK_THROWS_AS(probe_kind_from_name("w_state"), std::invalid_argument);

    CHECK(probe_name(ProbeKind::ghz) == "ghz");
    CHECK(probe_name(ProbeKind::custom) == "custom");

    CHECK(control_from_name("none") == ControlStrategy::none);
    CHECK(control_from_name("cancel") == ControlStrategy::cancel);
    CHECK(control_from_name("alignment") == ControlStrategy::alignment);
    CHECK(control_from_name("pi_pulse") == ControlStrategy::pi_pulse);
    CHECK(control_from_name("pi-pulse") == ControlStrategy::pi_pulse);
    CHECK_THROWS_AS(control_from_name("grape"), std::invalid_argument);

    CHECK(control_name(ControlStrategy::pi_pulse) == "pi-pulse");
    CHECK(control_name(ControlStrategy::none) == "none");
}

TEST_CASE("builtin selection fills in every default") {
    unsetenv("QFI_OUT");
    ConfigOverrides o;
    o.scenario = "clock_sync";
    const RunConfig cfg = parse_config(o);

    CHECK(cfg.scenario.name == "clock_sync");
    CHECK(cfg.repetitions == 1);
    CHECK(cfg.output.directory.empty());
    CHECK(cfg.output.csv);
    CHECK(cfg.output.json);

    CHECK(cfg.resolved["scenario"] == "clock_sync");
    CHECK(cfg.resolved["probe"] == "bell_singlet");
    CHECK(cfg.resolved["control"] == "none");
    CHECK(cfg.resolved["sweep"] ==
          ConfigJson({0.5, 1.0, 2.0, 4.0, 8.0}));
    CHECK(cfg.resolved["steps_per_unit_time"] == 2000);
    CHECK(cfg.resolved["estimation"]["shots"] == 100000);
    CHECK(cfg.resolved["estimation"]["rounds"] == 1);
    CHECK(cfg.resolved["repetitions"] == 1);
    CHECK(!cfg.resolved.contains("out"));
    CHECK(cfg.resolved["formats"] == ConfigJson({"csv", "json"}));
}

TEST_CASE("flag overrides beat config file values") {
    unsetenv("QFI_OUT");
    const fs::path file = write_file("override.json",
                                     R"({"scenario": "radar",
                                         "shots": 4444,
                                         "sweep": [1.0],
                                         "rounds": 3})");
    ConfigOverrides o;
    o.config_file = file.string();
    o.sweep = {2.0, 4.0};
    o.steps = 500;
    o.seed = 9;
    o.shots = 2222;
    o.probe = "ghz";
    o.control = "cancel";
    o.formats = {"csv"};
    o.repetitions = 2;
    const RunConfig cfg = parse_config(o);

    CHECK(cfg.scenario.estimation.shots == 2222);
    CHECK(cfg.scenario.estimation.rounds == 3); // file value, no flag
    CHECK(cfg.scenario.estimation.seed == 9);
    CHECK(cfg.scenario.sweep == std::vector<double>{2.0, 4.0});
    CHECK(cfg.scenario.steps_per_unit_time == 500);
    CHECK(cfg.scenario.probe.kind == ProbeKind::ghz);
    CHECK(cfg.scenario.control == ControlStrategy::cancel);
    CHECK(cfg.repetitions == 2);
    CHECK(cfg.output.csv);
    CHECK(!cfg.output.json);
    CHECK(cfg.resolved["formats"] == ConfigJson({"csv"}));
    CHECK(!cfg.resolved.contains("shots")); // echoed under estimation only
    CHECK(cfg.resolved["estimation"]["shots"] == 2222);
}

TEST_CASE("unknown keys are rejected by name") {
    ConfigOverrides o;
    o.config_file =
        write_file("unknown1.json", R"({"scenario": "radar", "wat": 1})")
            .string();
    CHECK(message_of([&] { parse_config(o); }) == "unknown config key: wat");

    o.config_file = write_file("unknown2.json",
                               R"({"scenario": "radar",
                                   "estimation": {"shotz": 7}})")
                        .string();
    CHECK(message_of([&] { parse_config(o); }) ==
          "unknown config key: estimation.shotz");

    const ConfigJson node_extra = ConfigJson::parse(R"({
        "parameters": 1,
        "nodes": [{"qubits": 1,
                   "field": {"kind": "constant_z", "parameter": 0},
                   "extra": 2}],
        "truth": [0.1],
        "weights": [1.0]
    })");
    CHECK(message_of([&] { scenario_from_json(node_extra); }) ==
          "unknown config key: scenario.nodes[0].extra");
}

TEST_CASE("weight validation happens before any simulation") {
    ConfigOverrides o;
    o.config_file = write_file("weights_long.json",
                               R"({"scenario": "radar",
                                   "weights": [1.0, 2.0, 3.0]})")
                        .string();
    CHECK(message_of([&] { parse_config(o); }) ==
          "config key weights: expected 2 entries, got 3");

    o.config_file = write_file("weights_zero.json",
                               R"({"scenario": "radar",
                                   "weights": [0.0, 0.0]})")
                        .string();
    CHECK(message_of([&] { parse_config(o); }) ==
          "config key weights: must not be all zero");
}

TEST_CASE("sweep entries must be positive and present") {
    ConfigOverrides o;
    o.config_file = write_file("sweep_empty.json",
                               R"({"scenario": "clock_sync", "sweep": []})")
                        .string();
    CHECK(message_of([&] { parse_config(o); }) ==
          "config key sweep: must not be empty");

    o.config_file = write_file("sweep_neg.json",
                               R"({"scenario": "clock_sync", "sweep": [1, -2]})")
                        .string();
    CHECK(message_of([&] { parse_config(o); }) ==
          "config key sweep: entries must be positive");

    o = ConfigOverrides{};
    o.scenario = "clock_sync";
    o.sweep = {1.0, 0.0};
    CHECK(message_of([&] { parse_config(o); }) ==
          "config key T: entries must be positive");
}

TEST_CASE("random scenario tags reproduce the generator") {
    ConfigOverrides o;
    o.scenario = "random:5:2:2:3";
    const RunConfig cfg = parse_config(o);
    const Scenario direct = random_scenario(5, 2, 2, 3, 1.0);

    CHECK(cfg.scenario.name == "random-5");
    CHECK(cfg.scenario.network.parameter_count == 2);
    CHECK(cfg.scenario.network.nodes.size() == 2);
    CHECK(cfg.scenario.network.total_qubits() == 3);
    CHECK(cfg.scenario.truth.isApprox(direct.truth, 0.0));
    CHECK(cfg.scenario.weights.isApprox(direct.weights, 0.0));

    o.scenario = "random:5:2:2:3:0.5";
    const RunConfig smooth = parse_config(o);
    const Scenario direct_smooth = random_scenario(5, 2, 2, 3, 0.5);
    const ParameterPoint x = smooth.scenario.truth;
    const PauliVector a =
        smooth.scenario.network.nodes[0].field.evaluate(x, 0.37);
    const PauliVector b = direct_smooth.network.nodes[0].field.evaluate(x, 0.37);
    CHECK((a - b).norm() == doctest::Approx(0.0).epsilon(1e-15));

    o.scenario = "random:5:2:2";
    CHECK_THROWS_AS(parse_config(o), std::invalid_argument);
    o.scenario = "random:x:2:2:3";
    CHECK(message_of([&] { parse_config(o); }) ==
          "bad random scenario tag: random:x:2:2:3");
}

TEST_CASE("inline scenario objects build full networks") {
    const ConfigJson spec = ConfigJson::parse(R"({
        "name": "mixed-pair",
        "parameters": 2,
        "nodes": [
            {"qubits": 1, "field": {"kind": "constant_z", "parameter": 0}},
            {"qubits": 2, "field": {"kind": "angle", "parameter": 1}}
        ],
        "truth": [0.3, -0.2],
        "weights": [1.0, -1.0],
        "sweep": [1.0],
        "steps_per_unit_time": 100,
        "probe": "ghz",
        "control": "alignment",
        "estimation": {"shots": 5000}
    })");
    const Scenario sc = scenario_from_json(spec);

    CHECK(sc.name == "mixed-pair");
    CHECK(sc.network.parameter_count == 2);
    REQUIRE(sc.network.nodes.size() == 2);
    CHECK(sc.network.nodes[0].qubit_count == 1);
    CHECK(sc.network.nodes[1].qubit_count == 2);
    CHECK(sc.probe.kind == ProbeKind::ghz);
    CHECK(sc.probe.qubits == 3);
    CHECK(sc.control == ControlStrategy::alignment);
    CHECK(sc.estimation.shots == 5000);
    CHECK(sc.start.isApprox(sc.truth, 0.0)); // start defaults to truth

    const PauliVector f0 = sc.network.nodes[0].field.evaluate(sc.truth, 0.0);
    CHECK(f0.x() == 0.0);
    CHECK(f0.z() == doctest::Approx(0.3));
    const PauliVector f1 = sc.network.nodes[1].field.evaluate(sc.truth, 0.0);
    CHECK(f1.x() == doctest::Approx(std::sin(-0.2)));
    CHECK(f1.z() == doctest::Approx(std::cos(-0.2)));
}

TEST_CASE("tabulated fields interpolate their samples") {
    const ConfigJson spec = ConfigJson::parse(R"({
        "parameters": 1,
        "nodes": [{"qubits": 1,
                   "field": {"kind": "tabulated", "parameter": 0,
                             "times": [0.0, 1.0, 2.0],
                             "samples": [[0, 0, 0], [0, 0, 1], [1, 0, 1]]}}],
        "truth": [0.5],
        "weights": [1.0]
    })");
    const Scenario sc = scenario_from_json(spec);
    const PauliVector mid =
        sc.network.nodes[0].field.evaluate(sc.truth, 0.5);
    CHECK(mid.z() == doctest::Approx(0.25)); // 0.5 * interpolated 0.5
    const PauliVector late =
        sc.network.nodes[0].field.evaluate(sc.truth, 1.5);
    CHECK(late.x() == doctest::Approx(0.25));
    CHECK(late.z() == doctest::Approx(0.5));
}

TEST_CASE("field specs are validated") {
    auto scenario_with_field = [](const std::string& field) {
        return ConfigJson::parse(R"({
            "parameters": 2,
            "nodes": [{"qubits": 1, "field": )" +
                                 field + R"(}],
            "truth": [0.1, 0.2],
            "weights": [1.0, 0.0]
        })");
    };
    CHECK(message_of([&] {
              scenario_from_json(scenario_with_field(R"({"parameter": 0})"));
          }) == "config key scenario.nodes[0].field.kind: required");
    CHECK(message_of([&] {
              scenario_from_json(
                  scenario_with_field(R"({"kind": "constant_z"})"));
          }) == "config key scenario.nodes[0].field.parameter: required");
    CHECK(message_of([&] {
              scenario_from_json(scenario_with_field(
                  R"({"kind": "constant_z", "parameter": 2})"));
          }) ==
          "config key scenario.nodes[0].field.parameter: out of range for 2 "
          "parameters");
    CHECK(message_of([&] {
              scenario_from_json(scenario_with_field(
                  R"({"kind": "constant_z", "parameter": 0, "times": [0, 1]})"));
          }) ==
          "config key scenario.nodes[0].field: times/samples only apply to "
          "tabulated fields");
    CHECK(message_of([&] {
              scenario_from_json(scenario_with_field(
                  R"({"kind": "tabulated", "parameter": 0})"));
          }) ==
          "config key scenario.nodes[0].field: tabulated fields need times "
          "and samples");
    CHECK(message_of([&] {
              scenario_from_json(
                  scenario_with_field(R"({"kind": "warp", "parameter": 0})"));
          }) == "config key scenario.nodes[0].field.kind: unknown field kind: "
                "warp");
}

TEST_CASE("bare scenario files and manifests are both accepted") {
    unsetenv("QFI_OUT");
    const fs::path bare = write_file("bare_scenario.json", R"({
        "parameters": 1,
        "nodes": [{"qubits": 1, "field": {"kind": "constant_z", "parameter": 0}}],
        "truth": [0.2],
        "weights": [1.0],
        "sweep": [1.0]
    })");
    ConfigOverrides o;
    o.config_file = bare.string();
    const RunConfig from_bare = parse_config(o);
    CHECK(from_bare.scenario.network.total_qubits() == 1);
    CHECK(from_bare.scenario.sweep == std::vector<double>{1.0});

    ConfigOverrides radar;
    radar.scenario = "radar";
    radar.sweep = {1.0};
    const RunConfig first = parse_config(radar);

    ConfigJson manifest;
    manifest["tool"] = {{"name", "dqm"}, {"version", "0.1.0"}};
    manifest["config"] = first.resolved;
    const fs::path file = write_file("manifest_roundtrip.json",
                                     manifest.dump(2) + "\n");
    ConfigOverrides replay;
    replay.config_file = file.string();
    const RunConfig second = parse_config(replay);
    CHECK(second.resolved == first.resolved);
}

TEST_CASE("probe constraints and missing scenarios are reported") {
    ConfigOverrides o;
    CHECK(message_of([&] { parse_config(o); }) ==
          "no scenario selected (use --scenario or --config)");

    o.config_file = (scratch_dir() / "nope.json").string();
    const std::string missing = message_of([&] { parse_config(o); });
    CHECK(missing.rfind("config file not found:", 0) == 0);

    o.config_file = write_file("broken.json", "{oops").string();
    const std::string parse_err = message_of([&] { parse_config(o); });
    CHECK(parse_err.rfind("config parse error:", 0) == 0);

    o = ConfigOverrides{};
    o.scenario = "random:3:2:2:3";
    o.probe = "bell_singlet";
    CHECK(message_of([&] { parse_config(o); }) ==
          "config key probe: bell_singlet needs a two-qubit network");

    o = ConfigOverrides{};
    o.scenario = "no_such_scenario";
    CHECK_THROWS_AS(parse_config(o), std::invalid_argument);
}

TEST_CASE("environment output directory is a fallback only") {
    setenv("QFI_OUT", "/tmp/from-env", 1);
    ConfigOverrides o;
    o.scenario = "clock_sync";
    const RunConfig from_env = parse_config(o);
    CHECK(from_env.output.directory == "/tmp/from-env");
    CHECK(from_env.resolved["out"] == "/tmp/from-env");

    o.out_dir = "/tmp/explicit";
    const RunConfig from_flag = parse_config(o);
    CHECK(from_flag.output.directory == "/tmp/explicit");
    unsetenv("QFI_OUT");
}
