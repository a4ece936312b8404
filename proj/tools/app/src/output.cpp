#include "sgdg2/app/output.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/chrono.h>
#include <fmt/format.h>

#include "sgdg2/error.hpp"

namespace sgdg2::app {

namespace {

std::string optional_number(const std::optional<double>& value) {
  return value ? format_number(*value) : std::string();
}

std::optional<Evaluation> last_evaluation(const RunRecord& record) {
  for (auto it = record.rows.rbegin(); it != record.rows.rend(); ++it) {
    const Evaluation& e = it->evaluation;
    if (e.train_loss || e.train_accuracy || e.test_accuracy) return e;
  }
  return std::nullopt;
}

}  // namespace

const std::vector<std::string>& run_columns() {
  static const std::vector<std::string> columns{
      "iteration",      "grad_evals",    "epoch", "minibatch_loss", "train_loss",
      "train_accuracy", "test_accuracy", "h",     "h_opt",          "branch"};
  return columns;
}

std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  return fmt::format("{:.17g}", value);
}

void write_header(std::ostream& out, const ExperimentConfig& config, std::string_view command,
                  std::string_view timestamp) {
  out << "# command = " << command << '\n';
  for (const auto& [key, value] : settings(config)) out << "# " << key << " = " << value << '\n';
  out << "# created = " << timestamp << '\n';
}

void write_run_columns(std::ostream& out, std::string_view prefix_columns) {
  out << prefix_columns;
  const auto& columns = run_columns();
  for (std::size_t i = 0; i < columns.size(); ++i) out << (i ? "," : "") << columns[i];
  out << '\n';
}

void write_run_row(std::ostream& out, const RunRow& row, std::string_view prefix) {
  out << prefix << row.iteration << ',' << row.grad_evals << ',' << row.epoch << ','
      << format_number(row.minibatch_loss) << ',' << optional_number(row.evaluation.train_loss)
      << ',' << optional_number(row.evaluation.train_accuracy) << ','
      << optional_number(row.evaluation.test_accuracy) << ',' << format_number(row.h) << ','
      << optional_number(row.h_opt) << ',' << (row.branch ? to_string(*row.branch) : "") << '\n';
}

void write_run_csv(std::ostream& out, const ExperimentConfig& config, std::string_view command,
                   const RunRecord& record, std::string_view timestamp) {
  write_header(out, config, command, timestamp);
  write_run_columns(out);
  for (const RunRow& row : record.rows) write_run_row(out, row);
}

void write_hopt_trace(std::ostream& out, const ExperimentConfig& config, const RunRecord& record,
                      std::string_view timestamp) {
  write_header(out, config, "hopt-trace", timestamp);
  out << "iteration,p,h,h_opt,branch\n";
  for (const RunRow& row : record.rows) {
    out << row.iteration << ',' << optional_number(row.p) << ',' << format_number(row.h) << ','
        << optional_number(row.h_opt) << ',' << (row.branch ? to_string(*row.branch) : "")
        << '\n';
  }
}

std::string csv_body(std::string_view csv) {
  std::istringstream in{std::string(csv)};
  std::string line;
  std::string body;
  while (std::getline(in, line)) {
    if (!line.empty() && line.front() == '#') continue;
    body += line;
    body += '\n';
  }
  return body;
}

std::string current_timestamp() {
  const auto now = std::chrono::floor<std::chrono::seconds>(std::chrono::system_clock::now());
  return fmt::format("{:%Y-%m-%dT%H:%M:%SZ}", now);
}

nlohmann::json config_json(const ExperimentConfig& config) {
  nlohmann::json out = nlohmann::json::object();
  for (const auto& [key, value] : settings(config)) out[key] = value;
  return out;
}

nlohmann::json run_summary(const ExperimentConfig& config, const RunResult& result) {
  nlohmann::json out;
  out["config"] = config_json(config);
  out["status"] = result.status == RunStatus::completed ? "completed" : "diverged";
  out["iterations"] = result.final_state.iteration;
  out["grad_evals"] = result.final_state.grad_evals;
  out["final_h"] = result.final_state.h;
  out["diverged_at"] = result.diverged_at ? nlohmann::json(*result.diverged_at) : nlohmann::json();
  if (!result.message.empty()) out["message"] = result.message;
  nlohmann::json final_metrics = nlohmann::json::object();
  if (const auto e = last_evaluation(result.record)) {
    if (e->train_loss) final_metrics["train_loss"] = *e->train_loss;
    if (e->train_accuracy) final_metrics["train_accuracy"] = *e->train_accuracy;
    if (e->test_accuracy) final_metrics["test_accuracy"] = *e->test_accuracy;
  }
  out["final"] = final_metrics;
  if (result.final_params.size() <= 1024) {
    out["final_params"] = std::vector<double>(result.final_params.begin(), result.final_params.end());
  }
  return out;
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::io_error, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorCode::io_error, "write failed for " + path.string());
}

}  // namespace sgdg2::app
