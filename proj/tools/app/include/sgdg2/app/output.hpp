#pragma once

#include <filesystem>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "sgdg2/app/config.hpp"
#include "sgdg2/runner.hpp"

namespace sgdg2::app {

/// Column names of a run CSV, in order.
const std::vector<std::string>& run_columns();

/// "{:.17g}", or "nan"/"inf"/"-inf".
std::string format_number(double value);

/// `# key = value` lines for every setting, then `# created = <timestamp>`.
void write_header(std::ostream& out, const ExperimentConfig& config, std::string_view command,
                  std::string_view timestamp);

void write_run_columns(std::ostream& out, std::string_view prefix_columns = {});
/// One CSV line; `prefix` (already comma-terminated) is prepended.
void write_run_row(std::ostream& out, const RunRow& row, std::string_view prefix = {});

/// Header, column line and every row of a finished run.
void write_run_csv(std::ostream& out, const ExperimentConfig& config, std::string_view command,
                   const RunRecord& record, std::string_view timestamp);

/// The rate-controller audit: iteration,p,h,h_opt,branch.
void write_hopt_trace(std::ostream& out, const ExperimentConfig& config, const RunRecord& record,
                      std::string_view timestamp);

/// Strips '#' comment lines.
std::string csv_body(std::string_view csv);

/// UTC, ISO 8601.
std::string current_timestamp();

nlohmann::json config_json(const ExperimentConfig& config);

/// Status, counters, last evaluation and (for up to 1024 parameters) the
/// final parameter vector.
nlohmann::json run_summary(const ExperimentConfig& config, const RunResult& result);

void write_text_file(const std::filesystem::path& path, std::string_view text);

}  // namespace sgdg2::app
