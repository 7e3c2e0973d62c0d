#pragma once

#include <optional>
#include <string>
#include <vector>

#include <dqm/config.hpp>
#include <dqm/control.hpp>

namespace dqm {

// Locale-independent, 12 significant digits.
std::string format_number(double v);

std::string summary_table(const ScenarioReport& report);
std::string summary_csv(const ScenarioReport& report);
std::string estimation_csv(const ScenarioReport& report, int parameters);
std::string protocol_csv(const ControlProtocol& protocol);

// Least-squares slope of log(qfi_controlled) against log(T); empty unless
// at least two rows carry positive information.
std::optional<double> qfi_loglog_slope(const ScenarioReport& report);

struct ControlExportInfo {
    ControlStrategy strategy = ControlStrategy::none;
    double horizon = 0.0;
    int steps = 0;
    int qubits = 0;
    double max_amplitude = 0.0;
    double residual = 0.0;
};

std::string run_manifest(const RunConfig& config, const ScenarioReport* report,
                         const ControlExportInfo* control_info);

struct ReportFiles {
    std::vector<std::string> written;
};

// Renders every requested artifact first, then writes them in one pass.
// On any write failure the files created so far are removed before the
// error propagates.
ReportFiles write_reports(const RunConfig& config, const ScenarioReport* report,
                          const ControlProtocol* protocol,
                          const ControlExportInfo* control_info);

} // namespace dqm
