#include <CLI11.hpp>

#include <iostream>
#include <string>

#include <dqm/config.hpp>
#include <dqm/reports.hpp>

namespace {

using namespace dqm;

void add_common(CLI::App* sub, ConfigOverrides& o) {
    sub->add_option("--scenario", o.scenario,
                    "builtin name or random:<seed>:<d>:<N>:<Q>[:<smoothness>]");
    sub->add_option("--config", o.config_file,
                    "JSON config file, scenario object, or run manifest");
    sub->add_option("--T", o.sweep, "time horizons (comma separated)")
        ->delimiter(',');
    sub->add_option("--M", o.steps, "grid steps per unit time");
    sub->add_option("--seed", o.seed, "random stream seed");
    sub->add_option("--shots", o.shots, "total shot budget");
    sub->add_option("--rounds", o.rounds, "entangled refinement rounds");
    sub->add_option("--probe", o.probe, "ghz, product, or bell_singlet");
    sub->add_option("--control", o.control,
                    "none, cancel, alignment, or pi-pulse");
    sub->add_option("--repetitions", o.repetitions,
                    "independent estimation repetitions");
    sub->add_option("--out", o.out_dir,
                    "output directory (default: QFI_OUT env var)");
    sub->add_option("--format", o.formats, "artifact formats: csv,json")
        ->delimiter(',');
}

void report_written(const ReportFiles& files) {
    for (const auto& path : files.written)
        std::cout << "wrote " << path << "\n";
}

int run_qfi(const ConfigOverrides& overrides) {
    RunConfig cfg = parse_config(overrides);
    RunOptions opts;
    opts.repetitions = cfg.repetitions;
    const ScenarioReport report = run_scenario(cfg.scenario, opts);
    std::cout << "scenario: " << report.name << "\n"
              << summary_table(report);
    if (auto slope = qfi_loglog_slope(report))
        std::cout << "log-log slope of qfi_controlled vs T: "
                  << format_number(*slope) << "\n";
    report_written(write_reports(cfg, &report, nullptr, nullptr));
    return 0;
}

int run_estimate(const ConfigOverrides& overrides) {
    RunConfig cfg = parse_config(overrides);
    Scenario& sc = cfg.scenario;
    if (!overrides.sweep.empty()) {
        sc.estimation.horizon = overrides.sweep.front();
        cfg.resolved["estimation"]["horizon"] = sc.estimation.horizon;
    }

    RunOptions opts;
    opts.with_estimation = true;
    opts.repetitions = cfg.repetitions;
    opts.sweep_override = {sc.estimation.horizon};
    const ScenarioReport report = run_scenario(sc, opts);

    const ScenarioRow& row = report.rows.front();
    const double wtw = sc.weights.squaredNorm();
    std::cout << "scenario: " << report.name << "\n"
              << "T: " << format_number(row.horizon)
              << "  effective qfi: " << format_number(row.qfi_controlled)
              << "  weak bound (w^T w / J): "
              << format_number(wtw / row.qfi_controlled) << "\n"
              << "repetition  shots      theta_hat          mu*variance"
                 "        ratio_to_crb\n";
    double mean_ratio = 0.0;
    for (std::size_t rep = 0; rep < report.estimation.size(); ++rep) {
        const auto& run = report.estimation[rep];
        const double mu = static_cast<double>(run.shots);
        const double ratio =
            run.sample_variance * mu * row.qfi_controlled / wtw;
        mean_ratio += ratio;
        std::cout << rep << "  " << run.shots << "  "
                  << format_number(run.theta_hat) << "  "
                  << format_number(mu * run.sample_variance) << "  "
                  << format_number(ratio) << "\n";
    }
    if (!report.estimation.empty())
        std::cout << "mean ratio_to_crb: "
                  << format_number(mean_ratio /
                                   static_cast<double>(
                                       report.estimation.size()))
                  << "\n";
    report_written(write_reports(cfg, &report, nullptr, nullptr));
    return 0;
}

int run_control_export(const ConfigOverrides& overrides) {
    RunConfig cfg = parse_config(overrides);
    const Scenario& sc = cfg.scenario;
    const double horizon = sc.sweep.front();
    const TimeGrid grid(horizon, sc.grid_steps(horizon));
    const ControlProtocol protocol =
        synthesize_control(sc.network, sc.start, sc.weights, sc.control, grid);
    const double residual =
        verify_protocol(sc.network, sc.start, sc.weights, protocol, grid)
            .value;

    int active_rows = 0;
    for (const auto& row : protocol_table(protocol))
        if (row.h.norm() > 0.0)
            ++active_rows;

    ControlExportInfo info;
    info.strategy = sc.control;
    info.horizon = horizon;
    info.steps = grid.steps;
    info.qubits = protocol.qubit_count();
    info.max_amplitude = protocol.max_amplitude();
    info.residual = residual;

    std::cout << "scenario: " << sc.name << "\n"
              << "strategy: " << control_name(sc.control)
              << "  T: " << format_number(horizon)
              << "  steps: " << grid.steps
              << "  qubits: " << protocol.qubit_count() << "\n"
              << "active rows: " << active_rows
              << "  max amplitude: " << format_number(info.max_amplitude)
              << "  alignment residual: " << format_number(residual) << "\n";
    report_written(write_reports(cfg, nullptr, &protocol, &info));
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"networked qubit sensing workbench: QFI sweeps, local "
                 "control synthesis, and adaptive estimation\n"
                 "shortcut: a bare scenario name runs the QFI summary, "
                 "e.g. `qfi clock_sync`"};
    app.require_subcommand(0, 1);

    ConfigOverrides for_qfi, for_estimate, for_export;
    CLI::App* cmd_qfi = app.add_subcommand("qfi", "QFI sweep summary table");
    add_common(cmd_qfi, for_qfi);
    CLI::App* cmd_estimate = app.add_subcommand(
        "estimate", "adaptive maximum-likelihood estimation runs");
    add_common(cmd_estimate, for_estimate);
    CLI::App* cmd_export = app.add_subcommand(
        "control-export", "synthesize and export the control protocol");
    add_common(cmd_export, for_export);
    CLI::App* cmd_list =
        app.add_subcommand("list-scenarios", "print builtin scenario names");

    std::vector<std::string> args(argv + 1, argv + argc);
    if (!args.empty() && !args.front().empty() && args.front()[0] != '-' &&
        app.get_subcommand_no_throw(args.front()) == nullptr) {
        args.insert(args.begin(), {"qfi", "--scenario"});
    }

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (cmd_qfi->parsed())
            return run_qfi(for_qfi);
        if (cmd_estimate->parsed())
            return run_estimate(for_estimate);
        if (cmd_export->parsed())
            return run_control_export(for_export);
        if (cmd_list->parsed()) {
            for (const auto& name : builtin_names())
                std::cout << name << "\n";
            std::cout << "random:<seed>:<parameters>:<nodes>:<qubits>"
                         "[:<smoothness>]\n";
            return 0;
        }
        std::cout << app.help();
        return 1;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
