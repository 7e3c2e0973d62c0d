#include <dqm/reports.hpp>

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace dqm {

namespace {

constexpr const char* tool_version = "0.1.0";

std::string pad_left(const std::string& s, std::size_t width) {
    if (s.size() >= width)
        return ' ' + s; // keep a gap when a cell overflows its column
    return std::string(width - s.size(), ' ') + s;
}

void append_row(std::string& out, const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i)
            out += ',';
        out += cells[i];
    }
    out += '\n';
}

ConfigJson row_json(const ScenarioRow& row) {
    return ConfigJson{{"T", row.horizon},
                      {"qfi_controlled", row.qfi_controlled},
                      {"qfi_uncontrolled", row.qfi_uncontrolled},
                      {"bound", row.upper_bound},
                      {"cfi", row.cfi},
                      {"precision_bound", row.precision}};
}

// information at the estimation horizon, for the ratio-to-CRB column
const ScenarioRow* row_for_horizon(const ScenarioReport& report,
                                   double horizon) {
    for (const auto& row : report.rows)
        if (std::abs(row.horizon - horizon) <= 1e-12 * (1.0 + horizon))
            return &row;
    return report.rows.empty() ? nullptr : &report.rows.front();
}

} // namespace

std::string format_number(double v) {
    if (v == 0.0)
        return "0"; // covers the negative-zero artifact of exact negation
    char buffer[64];
    auto result = std::to_chars(buffer, buffer + sizeof(buffer), v,
                                std::chars_format::general, 12);
    return std::string(buffer, result.ptr);
}

std::string summary_csv(const ScenarioReport& report) {
    std::string out =
        "T,qfi_controlled,qfi_uncontrolled,bound,cfi,precision_bound\n";
    for (const auto& row : report.rows)
        append_row(out, {format_number(row.horizon),
                         format_number(row.qfi_controlled),
                         format_number(row.qfi_uncontrolled),
                         format_number(row.upper_bound),
                         format_number(row.cfi),
                         format_number(row.precision)});
    return out;
}

std::string summary_table(const ScenarioReport& report) {
    static const char* headers[] = {"T",     "qfi_controlled",
                                    "qfi_uncontrolled", "bound",
                                    "cfi",   "precision_bound"};
    const std::size_t width = 17;
    std::string out;
    for (const char* h : headers)
        out += pad_left(h, width);
    out += '\n';
    for (const auto& row : report.rows) {
        for (double v : {row.horizon, row.qfi_controlled, row.qfi_uncontrolled,
                         row.upper_bound, row.cfi, row.precision})
            out += pad_left(format_number(v), width);
        out += '\n';
    }
    return out;
}

std::string estimation_csv(const ScenarioReport& report, int parameters) {
    std::string out = "repetition,round,protocol,shots,theta_hat,variance";
    for (int j = 0; j < parameters; ++j)
        out += ",x" + std::to_string(j);
    out += '\n';
    for (std::size_t rep = 0; rep < report.estimation.size(); ++rep) {
        for (const auto& record : report.estimation[rep].trace) {
            std::vector<std::string> cells = {
                std::to_string(rep),
                std::to_string(record.round),
                record.protocol,
                std::to_string(record.shots),
                format_number(record.theta_hat),
                format_number(record.variance_estimate)};
            for (int j = 0; j < parameters; ++j)
                cells.push_back(format_number(record.x_hat[j]));
            append_row(out, cells);
        }
    }
    return out;
}

std::string protocol_csv(const ControlProtocol& protocol) {
    std::string out = "step,time,qubit,cx,cy,cz\n";
    for (const auto& row : protocol_table(protocol)) {
        if (row.h.norm() == 0.0)
            continue;
        append_row(out, {std::to_string(row.step),
                         format_number(protocol.grid.edge(row.step)),
                         std::to_string(row.qubit), format_number(row.h[0]),
                         format_number(row.h[1]), format_number(row.h[2])});
    }
    return out;
}

std::optional<double> qfi_loglog_slope(const ScenarioReport& report) {
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    int n = 0;
    for (const auto& row : report.rows) {
        if (!(row.horizon > 0.0) || !(row.qfi_controlled > 0.0))
            continue;
        const double x = std::log(row.horizon);
        const double y = std::log(row.qfi_controlled);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++n;
    }
    const double denom = n * sxx - sx * sx;
    if (n < 2 || std::abs(denom) < 1e-30)
        return std::nullopt;
    return (n * sxy - sx * sy) / denom;
}

std::string run_manifest(const RunConfig& config, const ScenarioReport* report,
                         const ControlExportInfo* control_info) {
    ConfigJson manifest;
    manifest["tool"] = {
        {"name", "dqm"},
        {"version", tool_version},
        {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." +
                      std::to_string(EIGEN_MAJOR_VERSION) + "." +
                      std::to_string(EIGEN_MINOR_VERSION)},
        {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                              std::to_string(NLOHMANN_JSON_VERSION_MINOR) +
                              "." +
                              std::to_string(NLOHMANN_JSON_VERSION_PATCH)}};
    manifest["config"] = config.resolved;

    ConfigJson results = ConfigJson::object();
    if (report) {
        ConfigJson rows = ConfigJson::array();
        for (const auto& row : report->rows)
            rows.push_back(row_json(row));
        results["qfi_rows"] = std::move(rows);
        if (auto slope = qfi_loglog_slope(*report))
            results["qfi_loglog_slope"] = *slope;

        if (!report->estimation.empty()) {
            const auto& est = config.scenario.estimation;
            const ScenarioRow* row = row_for_horizon(*report, est.horizon);
            const double wtw = config.scenario.weights.squaredNorm();
            ConfigJson runs = ConfigJson::array();
            for (const auto& run : report->estimation) {
                ConfigJson entry = {{"theta_hat", run.theta_hat},
                                    {"sample_variance", run.sample_variance},
                                    {"shots", run.shots}};
                if (row && row->qfi_controlled > 0.0 && run.shots > 0) {
                    const double crb =
                        wtw / (static_cast<double>(run.shots) *
                               row->qfi_controlled);
                    entry["ratio_to_crb"] = run.sample_variance / crb;
                }
                runs.push_back(std::move(entry));
            }
            ConfigJson block = {{"repetitions", report->estimation.size()},
                                {"runs", std::move(runs)}};
            if (row && row->qfi_controlled > 0.0)
                block["crb_single_shot"] =
                    config.scenario.weights.squaredNorm() /
                    row->qfi_controlled;
            results["estimation"] = std::move(block);
        }
    }
    if (control_info) {
        results["control"] = {
            {"strategy", control_name(control_info->strategy)},
            {"horizon", control_info->horizon},
            {"steps", control_info->steps},
            {"qubits", control_info->qubits},
            {"max_amplitude", control_info->max_amplitude},
            {"residual", control_info->residual}};
    }
    manifest["results"] = std::move(results);
    return manifest.dump(2) + "\n";
}

ReportFiles write_reports(const RunConfig& config, const ScenarioReport* report,
                          const ControlProtocol* protocol,
                          const ControlExportInfo* control_info) {
    ReportFiles files;
    if (config.output.directory.empty())
        return files;

    std::vector<std::pair<std::string, std::string>> artifacts;
    if (config.output.csv && report) {
        artifacts.emplace_back("qfi_table.csv", summary_csv(*report));
        if (!report->estimation.empty())
            artifacts.emplace_back(
                "estimation_trace.csv",
                estimation_csv(*report,
                               config.scenario.network.parameter_count));
    }
    if (config.output.csv && protocol)
        artifacts.emplace_back("protocol.csv", protocol_csv(*protocol));
    if (config.output.json)
        artifacts.emplace_back("manifest.json",
                               run_manifest(config, report, control_info));
    if (artifacts.empty())
        return files;

    namespace fs = std::filesystem;
    const fs::path dir(config.output.directory);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec)
        throw std::runtime_error("cannot create output directory: " +
                                 dir.string());

    for (const auto& [name, content] : artifacts) {
        const fs::path path = dir / name;
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        if (out)
            out.write(content.data(),
                      static_cast<std::streamsize>(content.size()));
        if (!out) {
            for (const auto& written : files.written)
                fs::remove(fs::path(written), ec);
            fs::remove(path, ec);
            throw std::runtime_error("failed to write " + path.string());
        }
        files.written.push_back(path.string());
    }
    return files;
}

} // namespace dqm
