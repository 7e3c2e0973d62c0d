#include <dqm/config.hpp>

#include <cstdlib>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace dqm {

namespace {

[[noreturn]] void fail_key(const std::string& key, const std::string& what) {
    throw std::invalid_argument("config key " + key + ": " + what);
}

double number_value(const ConfigJson& v, const std::string& key) {
    if (!v.is_number())
        fail_key(key, "expected a number");
    return v.get<double>();
}

int int_value(const ConfigJson& v, const std::string& key, int minimum) {
    if (!v.is_number_integer())
        fail_key(key, "expected an integer");
    const auto raw = v.get<std::int64_t>();
    if (raw < minimum)
        fail_key(key, "must be at least " + std::to_string(minimum));
    if (raw > std::numeric_limits<int>::max())
        fail_key(key, "out of range");
    return static_cast<int>(raw);
}

std::int64_t count_value(const ConfigJson& v, const std::string& key,
                         std::int64_t minimum) {
    if (!v.is_number_integer())
        fail_key(key, "expected an integer");
    const auto raw = v.get<std::int64_t>();
    if (raw < minimum)
        fail_key(key, "must be at least " + std::to_string(minimum));
    return raw;
}

std::uint64_t seed_value(const ConfigJson& v, const std::string& key) {
    if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<std::int64_t>() < 0))
        fail_key(key, "expected a non-negative integer");
    return v.get<std::uint64_t>();
}

RealVector vector_value(const ConfigJson& v, const std::string& key,
                        Eigen::Index expected) {
    if (!v.is_array())
        fail_key(key, "expected an array of numbers");
    RealVector out(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (const auto& entry : v) {
        if (!entry.is_number())
            fail_key(key, "expected an array of numbers");
        out[i++] = entry.get<double>();
    }
    if (expected >= 0 && out.size() != expected)
        fail_key(key, "expected " + std::to_string(expected) +
                          " entries, got " + std::to_string(out.size()));
    return out;
}

std::vector<double> sweep_value(const ConfigJson& v, const std::string& key) {
    RealVector raw = vector_value(v, key, -1);
    if (raw.size() == 0)
        fail_key(key, "must not be empty");
    std::vector<double> out(raw.data(), raw.data() + raw.size());
    for (double t : out)
        if (!(t > 0.0))
            fail_key(key, "entries must be positive");
    return out;
}

void apply_estimation(EstimationSettings& est, const ConfigJson& spec,
                      const std::string& prefix) {
    if (!spec.is_object())
        fail_key(prefix, "expected an object");
    for (const auto& [key, value] : spec.items()) {
        const std::string full = prefix + "." + key;
        if (key == "shots")
            est.shots = count_value(value, full, 2);
        else if (key == "stage1_fraction") {
            est.stage1_fraction = number_value(value, full);
            if (est.stage1_fraction < 0.0 || est.stage1_fraction >= 1.0)
                fail_key(full, "must lie in [0, 1)");
        } else if (key == "rounds")
            est.rounds = int_value(value, full, 1);
        else if (key == "seed")
            est.seed = seed_value(value, full);
        else if (key == "horizon") {
            est.horizon = number_value(value, full);
            if (!(est.horizon > 0.0))
                fail_key(full, "must be positive");
        } else if (key == "stage1_half_width") {
            est.stage1_half_width = number_value(value, full);
            if (!(est.stage1_half_width > 0.0))
                fail_key(full, "must be positive");
        } else
            throw std::invalid_argument("unknown config key: " + full);
    }
}

FieldFunction field_from_json(const ConfigJson& spec, int parameters,
                              const std::string& prefix) {
    if (!spec.is_object())
        fail_key(prefix, "expected an object");
    std::string kind;
    int parameter = -1;
    std::vector<double> times;
    std::vector<PauliVector> samples;
    bool has_times = false, has_samples = false;
    for (const auto& [key, value] : spec.items()) {
        const std::string full = prefix + "." + key;
        if (key == "kind") {
            if (!value.is_string())
                fail_key(full, "expected a string");
            kind = value.get<std::string>();
        } else if (key == "parameter") {
            parameter = int_value(value, full, 0);
        } else if (key == "times") {
            RealVector raw = vector_value(value, full, -1);
            times.assign(raw.data(), raw.data() + raw.size());
            has_times = true;
        } else if (key == "samples") {
            if (!value.is_array())
                fail_key(full, "expected an array of [x, y, z] triples");
            for (const auto& entry : value) {
                RealVector triple = vector_value(entry, full, 3);
                samples.push_back(PauliVector(triple[0], triple[1], triple[2]));
            }
            has_samples = true;
        } else
            throw std::invalid_argument("unknown config key: " + full);
    }
    if (kind.empty())
        fail_key(prefix + ".kind", "required");
    if (parameter < 0)
        fail_key(prefix + ".parameter", "required");
    if (parameter >= parameters)
        fail_key(prefix + ".parameter",
                 "out of range for " + std::to_string(parameters) +
                     " parameters");
    if (kind == "tabulated") {
        if (!has_times || !has_samples)
            fail_key(prefix, "tabulated fields need times and samples");
        return tabulated_field(parameter, std::move(times),
                               std::move(samples));
    }
    if (has_times || has_samples)
        fail_key(prefix, "times/samples only apply to tabulated fields");
    if (kind == "constant_z")
        return constant_z_field(parameter);
    if (kind == "angle")
        return angle_field(parameter);
    if (kind == "ac")
        return ac_field(parameter);
    fail_key(prefix + ".kind", "unknown field kind: " + kind);
}

Scenario random_from_tag(const std::string& tag) {
    std::vector<std::string> parts;
    std::size_t begin = 0;
    while (begin <= tag.size()) {
        const std::size_t end = tag.find(':', begin);
        if (end == std::string::npos) {
            parts.push_back(tag.substr(begin));
            break;
        }
        parts.push_back(tag.substr(begin, end - begin));
        begin = end + 1;
    }
    if (parts.size() < 5 || parts.size() > 6)
        throw std::invalid_argument(
            "random scenario tag must be "
            "random:<seed>:<parameters>:<nodes>:<qubits>[:<smoothness>]");
    try {
        const auto seed = static_cast<std::uint64_t>(std::stoull(parts[1]));
        const int d = std::stoi(parts[2]);
        const int nodes = std::stoi(parts[3]);
        const int qubits = std::stoi(parts[4]);
        const double smooth = parts.size() == 6 ? std::stod(parts[5]) : 1.0;
        return random_scenario(seed, d, nodes, qubits, smooth);
    } catch (const std::invalid_argument&) {
        throw std::invalid_argument("bad random scenario tag: " + tag);
    } catch (const std::out_of_range&) {
        throw std::invalid_argument("bad random scenario tag: " + tag);
    }
}

void parse_formats(const std::vector<std::string>& names, OutputSpec& out) {
    out.csv = false;
    out.json = false;
    for (const auto& name : names) {
        if (name == "csv")
            out.csv = true;
        else if (name == "json")
            out.json = true;
        else
            throw std::invalid_argument("unknown format: " + name);
    }
    if (!out.csv && !out.json)
        throw std::invalid_argument("config key formats: must not be empty");
}

std::vector<std::string> format_names(const ConfigJson& v,
                                      const std::string& key) {
    if (!v.is_array())
        fail_key(key, "expected an array of format names");
    std::vector<std::string> names;
    for (const auto& entry : v) {
        if (!entry.is_string())
            fail_key(key, "expected an array of format names");
        names.push_back(entry.get<std::string>());
    }
    return names;
}

} // namespace

ProbeKind probe_kind_from_name(const std::string& name) {
    if (name == "ghz")
        return ProbeKind::ghz;
    if (name == "bell_singlet")
        return ProbeKind::bell_singlet;
    if (name == "product")
        return ProbeKind::product;
    throw std::invalid_argument("unknown probe: " + name);
}

ControlStrategy control_from_name(const std::string& name) {
    if (name == "none")
        return ControlStrategy::none;
    if (name == "cancel")
        return ControlStrategy::cancel;
    if (name == "alignment")
        return ControlStrategy::alignment;
    if (name == "pi_pulse" || name == "pi-pulse")
        return ControlStrategy::pi_pulse;
    throw std::invalid_argument("unknown control: " + name);
}

std::string probe_name(ProbeKind kind) {
    switch (kind) {
    case ProbeKind::ghz:
        return "ghz";
    case ProbeKind::bell_singlet:
        return "bell_singlet";
    case ProbeKind::product:
        return "product";
    case ProbeKind::custom:
        return "custom";
    }
    return "unknown";
}

std::string control_name(ControlStrategy strategy) {
    return control_tag(strategy);
}

Scenario scenario_from_json(const ConfigJson& spec) {
    if (!spec.is_object())
        throw std::invalid_argument("scenario spec must be an object");
    if (!spec.contains("parameters"))
        fail_key("scenario.parameters", "required");
    const int d = int_value(spec["parameters"], "scenario.parameters", 1);

    Scenario sc;
    sc.name = "custom";
    sc.network.parameter_count = d;
    bool has_truth = false, has_weights = false, has_start = false;

    for (const auto& [key, value] : spec.items()) {
        const std::string full = "scenario." + key;
        if (key == "parameters")
            continue;
        if (key == "name") {
            if (!value.is_string())
                fail_key(full, "expected a string");
            sc.name = value.get<std::string>();
        } else if (key == "nodes") {
            if (!value.is_array() || value.empty())
                fail_key(full, "expected a non-empty array");
            int index = 0;
            for (const auto& node : value) {
                const std::string node_key =
                    full + "[" + std::to_string(index) + "]";
                if (!node.is_object())
                    fail_key(node_key, "expected an object");
                SensorNode built;
                bool has_field = false;
                for (const auto& [nk, nv] : node.items()) {
                    if (nk == "qubits")
                        built.qubit_count =
                            int_value(nv, node_key + ".qubits", 1);
                    else if (nk == "field") {
                        built.field =
                            field_from_json(nv, d, node_key + ".field");
                        has_field = true;
                    } else
                        throw std::invalid_argument("unknown config key: " +
                                                    node_key + "." + nk);
                }
                if (!has_field)
                    fail_key(node_key + ".field", "required");
                sc.network.nodes.push_back(std::move(built));
                ++index;
            }
        } else if (key == "truth") {
            sc.truth = vector_value(value, full, d);
            has_truth = true;
        } else if (key == "start") {
            sc.start = vector_value(value, full, d);
            has_start = true;
        } else if (key == "weights") {
            sc.weights = vector_value(value, full, d);
            has_weights = true;
        } else if (key == "sweep") {
            sc.sweep = sweep_value(value, full);
        } else if (key == "steps_per_unit_time") {
            sc.steps_per_unit_time = int_value(value, full, 1);
        } else if (key == "probe") {
            if (!value.is_string())
                fail_key(full, "expected a string");
            sc.probe.kind = probe_kind_from_name(value.get<std::string>());
        } else if (key == "control") {
            if (!value.is_string())
                fail_key(full, "expected a string");
            sc.control = control_from_name(value.get<std::string>());
        } else if (key == "estimation") {
            apply_estimation(sc.estimation, value, full);
        } else
            throw std::invalid_argument("unknown config key: " + full);
    }

    if (sc.network.nodes.empty())
        fail_key("scenario.nodes", "required");
    if (!has_truth)
        fail_key("scenario.truth", "required");
    if (!has_weights)
        fail_key("scenario.weights", "required");
    if (!has_start)
        sc.start = sc.truth;
    sc.probe.qubits = sc.network.total_qubits();
    return sc;
}

RunConfig parse_config(const ConfigOverrides& overrides) {
    ConfigJson doc = ConfigJson::object();
    if (!overrides.config_file.empty()) {
        std::ifstream in(overrides.config_file);
        if (!in)
            throw std::invalid_argument("config file not found: " +
                                        overrides.config_file);
        try {
            doc = ConfigJson::parse(in);
        } catch (const nlohmann::json::parse_error& e) {
            throw std::invalid_argument(std::string("config parse error: ") +
                                        e.what());
        }
        if (!doc.is_object())
            throw std::invalid_argument("config root must be an object");
        if (doc.contains("config")) {
            // a run manifest: the embedded config reproduces the run
            if (!doc["config"].is_object())
                fail_key("config", "expected an object");
            doc = doc["config"];
        }
        if (doc.contains("nodes"))
            doc = ConfigJson{{"scenario", doc}};
    }
    if (!overrides.scenario.empty())
        doc["scenario"] = overrides.scenario;
    if (!doc.contains("scenario"))
        throw std::invalid_argument(
            "no scenario selected (use --scenario or --config)");

    RunConfig cfg;
    const ConfigJson source = doc["scenario"];
    if (source.is_string()) {
        const std::string name = source.get<std::string>();
        cfg.scenario = name.rfind("random:", 0) == 0 ? random_from_tag(name)
                                                     : builtin_scenario(name);
    } else if (source.is_object()) {
        cfg.scenario = scenario_from_json(source);
    } else {
        fail_key("scenario", "expected a name or an object");
    }

    Scenario& sc = cfg.scenario;
    const int d = sc.network.parameter_count;
    std::string out_dir;
    bool out_set = false;

    for (const auto& [key, value] : doc.items()) {
        if (key == "scenario")
            continue;
        if (key == "truth")
            sc.truth = vector_value(value, key, d);
        else if (key == "start")
            sc.start = vector_value(value, key, d);
        else if (key == "weights")
            sc.weights = vector_value(value, key, d);
        else if (key == "sweep")
            sc.sweep = sweep_value(value, key);
        else if (key == "steps_per_unit_time")
            sc.steps_per_unit_time = int_value(value, key, 1);
        else if (key == "seed")
            sc.estimation.seed = seed_value(value, key);
        else if (key == "shots")
            sc.estimation.shots = count_value(value, key, 2);
        else if (key == "rounds")
            sc.estimation.rounds = int_value(value, key, 1);
        else if (key == "probe") {
            if (!value.is_string())
                fail_key(key, "expected a string");
            sc.probe = ProbeSpec{probe_kind_from_name(value.get<std::string>()),
                                 sc.network.total_qubits(), {}};
        } else if (key == "control") {
            if (!value.is_string())
                fail_key(key, "expected a string");
            sc.control = control_from_name(value.get<std::string>());
        } else if (key == "estimation")
            apply_estimation(sc.estimation, value, key);
        else if (key == "repetitions")
            cfg.repetitions = int_value(value, key, 1);
        else if (key == "out") {
            if (!value.is_string())
                fail_key(key, "expected a string");
            out_dir = value.get<std::string>();
            out_set = true;
        } else if (key == "formats")
            parse_formats(format_names(value, key), cfg.output);
        else
            throw std::invalid_argument("unknown config key: " + key);
    }

    if (!overrides.sweep.empty()) {
        for (double t : overrides.sweep)
            if (!(t > 0.0))
                fail_key("T", "entries must be positive");
        sc.sweep = overrides.sweep;
    }
    if (overrides.steps) {
        if (*overrides.steps < 1)
            fail_key("M", "must be at least 1");
        sc.steps_per_unit_time = *overrides.steps;
    }
    if (overrides.seed)
        sc.estimation.seed = *overrides.seed;
    if (overrides.shots) {
        if (*overrides.shots < 2)
            fail_key("shots", "must be at least 2");
        sc.estimation.shots = *overrides.shots;
    }
    if (overrides.rounds) {
        if (*overrides.rounds < 1)
            fail_key("rounds", "must be at least 1");
        sc.estimation.rounds = *overrides.rounds;
    }
    if (overrides.probe)
        sc.probe = ProbeSpec{probe_kind_from_name(*overrides.probe),
                             sc.network.total_qubits(), {}};
    if (overrides.control)
        sc.control = control_from_name(*overrides.control);
    if (overrides.out_dir) {
        out_dir = *overrides.out_dir;
        out_set = true;
    }
    if (!overrides.formats.empty())
        parse_formats(overrides.formats, cfg.output);
    if (overrides.repetitions) {
        if (*overrides.repetitions < 1)
            fail_key("repetitions", "must be at least 1");
        cfg.repetitions = *overrides.repetitions;
    }

    if (!out_set) {
        if (const char* env = std::getenv("QFI_OUT"))
            out_dir = env;
    }
    cfg.output.directory = out_dir;

    validate_network(sc.network);
    if (sc.truth.size() != d)
        fail_key("truth", "expected " + std::to_string(d) + " entries, got " +
                              std::to_string(sc.truth.size()));
    if (sc.start.size() != d)
        fail_key("start", "expected " + std::to_string(d) + " entries, got " +
                              std::to_string(sc.start.size()));
    if (sc.weights.size() != d)
        fail_key("weights", "expected " + std::to_string(d) +
                                " entries, got " +
                                std::to_string(sc.weights.size()));
    if (sc.weights.norm() == 0.0)
        fail_key("weights", "must not be all zero");
    if (sc.probe.kind != ProbeKind::custom)
        sc.probe.qubits = sc.network.total_qubits();
    if (sc.probe.kind == ProbeKind::bell_singlet &&
        sc.network.total_qubits() != 2)
        fail_key("probe", "bell_singlet needs a two-qubit network");

    ConfigJson est = {{"shots", sc.estimation.shots},
                      {"stage1_fraction", sc.estimation.stage1_fraction},
                      {"rounds", sc.estimation.rounds},
                      {"seed", sc.estimation.seed},
                      {"horizon", sc.estimation.horizon},
                      {"stage1_half_width", sc.estimation.stage1_half_width}};
    ConfigJson resolved;
    resolved["scenario"] = source;
    resolved["truth"] = std::vector<double>(sc.truth.data(),
                                            sc.truth.data() + sc.truth.size());
    resolved["start"] = std::vector<double>(sc.start.data(),
                                            sc.start.data() + sc.start.size());
    resolved["weights"] = std::vector<double>(
        sc.weights.data(), sc.weights.data() + sc.weights.size());
    resolved["sweep"] = sc.sweep;
    resolved["steps_per_unit_time"] = sc.steps_per_unit_time;
    resolved["probe"] = probe_name(sc.probe.kind);
    resolved["control"] = control_name(sc.control);
    resolved["estimation"] = est;
    resolved["repetitions"] = cfg.repetitions;
    if (!cfg.output.directory.empty())
        resolved["out"] = cfg.output.directory;
    std::vector<std::string> formats;
    if (cfg.output.csv)
        formats.push_back("csv");
    if (cfg.output.json)
        formats.push_back("json");
    resolved["formats"] = formats;
    cfg.resolved = std::move(resolved);
    return cfg;
}

} // namespace dqm
