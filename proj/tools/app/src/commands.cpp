#include "sgdg2/app/commands.hpp"

#include <limits>
#include <map>
#include <random>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>

#include "sgdg2/app/experiment.hpp"
#include "sgdg2/app/output.hpp"
#include "sgdg2/app/svg.hpp"
#include "sgdg2/error.hpp"
#include "sgdg2/quadratic.hpp"

namespace sgdg2::app {

namespace {

int exit_code_for(const Error& error) {
  return error.code() == ErrorCode::numeric_overflow ? kExitFailed : kExitUsage;
}

std::string metric(const std::optional<double>& value) {
  return value ? fmt::format("{:.6g}", *value) : std::string("-");
}

void print_progress(std::ostream& out, const RunRow& row) {
  fmt::print(out, "epoch {:>3}  iter {:>7}  grad_evals {:>8}  h {:<12.5g} train_loss {}  train_acc {}  test_acc {}\n",
             row.epoch, row.iteration, row.grad_evals, row.h, metric(row.evaluation.train_loss),
             metric(row.evaluation.train_accuracy), metric(row.evaluation.test_accuracy));
}

bool has_evaluation(const RunRow& row) {
  const Evaluation& e = row.evaluation;
  return e.train_loss || e.train_accuracy || e.test_accuracy;
}

// Curve shown for a run: test accuracy when there is a test set, else
// train accuracy, else train loss.
Series progress_series(const std::string& name, const RunRecord& record, bool& is_loss) {
  Series s{name, {}, {}};
  is_loss = false;
  for (const RunRow& row : record.rows) {
    if (!has_evaluation(row)) continue;
    const Evaluation& e = row.evaluation;
    s.x.push_back(static_cast<double>(row.grad_evals));
    if (e.test_accuracy) {
      s.y.push_back(*e.test_accuracy);
    } else if (e.train_accuracy) {
      s.y.push_back(*e.train_accuracy);
    } else {
      s.y.push_back(e.train_loss.value_or(std::numeric_limits<double>::quiet_NaN()));
      is_loss = true;
    }
  }
  return s;
}

Series rate_series(const std::string& name, const RunRecord& record) {
  Series s{name, {}, {}};
  for (const RunRow& row : record.rows) {
    s.x.push_back(static_cast<double>(row.grad_evals));
    s.y.push_back(row.h);
  }
  return s;
}

void write_charts(const std::filesystem::path& dir, const std::vector<Series>& progress,
                  bool progress_is_loss, const std::vector<Series>& rates, const std::string& title) {
  ChartOptions accuracy;
  accuracy.title = title;
  accuracy.x_label = "gradient evaluations";
  accuracy.y_label = progress_is_loss ? "train loss" : "accuracy";
  accuracy.log_y = progress_is_loss;
  write_text_file(dir / (progress_is_loss ? "loss.svg" : "accuracy.svg"),
                  line_chart(progress, accuracy));
  ChartOptions rate;
  rate.title = title;
  rate.x_label = "gradient evaluations";
  rate.y_label = "learning rate h";
  rate.log_y = true;
  write_text_file(dir / "learning_rate.svg", line_chart(rates, rate));
}

std::string run_label(OptimizerKind kind, double h0) {
  return fmt::format("{} h0={}", to_string(kind), h0);
}

}  // namespace

int cmd_train(const ExperimentConfig& config, std::ostream& out, std::ostream& err) {
  try {
    const Experiment experiment = build_experiment(config);
    RunHooks hooks;
    hooks.on_row = [&out](const RunRow& row) {
      if (has_evaluation(row)) print_progress(out, row);
    };
    const RunResult result = run_experiment(config, experiment, hooks);

    std::ostringstream csv;
    write_run_csv(csv, config, "train", result.record, current_timestamp());
    write_text_file(config.out / "run.csv", csv.str());
    write_text_file(config.out / "summary.json", run_summary(config, result).dump(2) + "\n");
    if (config.svg) {
      bool is_loss = false;
      const std::string label = run_label(config.optimizer, config.h0);
      write_charts(config.out, {progress_series(label, result.record, is_loss)}, is_loss,
                   {rate_series(label, result.record)}, std::string(to_string(config.dataset)));
    }
    if (result.status == RunStatus::diverged) {
      fmt::print(err, "run diverged at iteration {}: {}\n", result.diverged_at.value_or(0),
                 result.message);
      return kExitFailed;
    }
    fmt::print(out, "wrote {}\n", (config.out / "run.csv").string());
    return kExitOk;
  } catch (const Error& error) {
    fmt::print(err, "error: {}\n", error.what());
    return exit_code_for(error);
  }
}

int cmd_compare(const ExperimentConfig& config, std::ostream& out, std::ostream& err) {
  try {
    const Experiment experiment = build_experiment(config);
    std::ostringstream csv;
    write_header(csv, config, "compare", current_timestamp());
    write_run_columns(csv, "optimizer,h0,");
    nlohmann::json runs = nlohmann::json::array();
    std::vector<Series> progress;
    std::vector<Series> rates;
    bool is_loss = false;
    bool any_diverged = false;

    for (const OptimizerKind kind : config.optimizers) {
      for (const double h0 : config.h0_list) {
        ExperimentConfig run_config = config;
        run_config.optimizer = kind;
        run_config.h0 = h0;
        const RunResult result = run_experiment(run_config, experiment);
        const std::string prefix = fmt::format("{},{},", to_string(kind), format_number(h0));
        for (const RunRow& row : result.record.rows) write_run_row(csv, row, prefix);

        nlohmann::json summary = run_summary(run_config, result);
        summary.erase("config");
        summary.erase("final_params");
        summary["optimizer"] = std::string(to_string(kind));
        summary["h0"] = h0;
        runs.push_back(summary);

        const std::string label = run_label(kind, h0);
        progress.push_back(progress_series(label, result.record, is_loss));
        rates.push_back(rate_series(label, result.record));
        if (result.status == RunStatus::diverged) {
          any_diverged = true;
          fmt::print(out, "{:<24} diverged at iteration {}\n", label, result.diverged_at.value_or(0));
        } else {
          fmt::print(out, "{:<24} completed, final {}\n", label, summary["final"].dump());
        }
      }
    }
    write_text_file(config.out / "compare.csv", csv.str());
    nlohmann::json report;
    report["config"] = config_json(config);
    report["runs"] = runs;
    write_text_file(config.out / "compare.json", report.dump(2) + "\n");
    if (config.svg) write_charts(config.out, progress, is_loss, rates, "compare");
    return any_diverged ? kExitFailed : kExitOk;
  } catch (const Error& error) {
    fmt::print(err, "error: {}\n", error.what());
    return exit_code_for(error);
  }
}

int cmd_hopt_trace(const ExperimentConfig& config, std::ostream& out, std::ostream& err) {
  try {
    ExperimentConfig trace_config = config;
    trace_config.optimizer = OptimizerKind::sgd_g2;
    const Experiment experiment = build_experiment(trace_config);
    const RunResult result = run_experiment(trace_config, experiment);
    std::ostringstream csv;
    write_hopt_trace(csv, trace_config, result.record, current_timestamp());
    write_text_file(trace_config.out / "hopt_trace.csv", csv.str());
    std::map<std::string, std::size_t> counts;
    for (const RunRow& row : result.record.rows) {
      if (row.branch) ++counts[std::string(to_string(*row.branch))];
    }
    for (const auto& [branch, count] : counts) fmt::print(out, "{:<15} {}\n", branch, count);
    if (result.status == RunStatus::diverged) {
      fmt::print(err, "run diverged at iteration {}: {}\n", result.diverged_at.value_or(0),
                 result.message);
      return kExitFailed;
    }
    fmt::print(out, "wrote {}\n", (trace_config.out / "hopt_trace.csv").string());
    return kExitOk;
  } catch (const Error& error) {
    fmt::print(err, "error: {}\n", error.what());
    return exit_code_for(error);
  }
}

namespace {

struct SlopeCheck {
  std::string name;
  const OrderFit* fit;
  double lo;
  double hi;
  bool hard;
};

void print_fit_table(std::ostream& out, const std::string& name, const OrderFit& fit) {
  fmt::print(out, "{}\n{:>14}  {:>24}  {}\n", name, "h", "error", "stable");
  for (const OrderPoint& p : fit.points) {
    fmt::print(out, "{:>14.8g}  {:>24.17g}  {}\n", p.h, p.error, p.stable ? "yes" : "no");
  }
}

}  // namespace

int cmd_order_check(const OrderCheckOptions& options, std::ostream& out, std::ostream& err) {
  const std::vector<double> steps = options.h_list.empty() ? dyadic_steps(3, 8) : options.h_list;
  if (steps.size() < 4) {
    fmt::print(err, "error: order-check needs at least 4 step sizes, got {}\n", steps.size());
    return kExitUsage;
  }
  try {
    std::mt19937_64 rng(options.seed);
    std::vector<SlopeCheck> checks;
    std::vector<std::pair<std::string, OrderFit>> fits;
    if (options.kind == CheckKind::ode) {
      const std::string scheme = options.scheme.empty() ? "heun" : options.scheme;
      if (scheme != "euler" && scheme != "heun") {
        fmt::print(err, "error: ode order-check takes --scheme euler or heun\n");
        return kExitUsage;
      }
      RandomQuadraticOptions q;
      q.dimension = options.dim == 0 ? 5 : options.dim;
      q.samples = 1;
      q.spread = 0.0;
      q.min_eigenvalue = 0.1;
      q.max_eigenvalue = 1.0;
      const QuadraticProblem problem = make_random_quadratic(q, rng);
      std::normal_distribution<double> normal;
      ParamVector x0(static_cast<Eigen::Index>(q.dimension));
      for (Eigen::Index i = 0; i < x0.size(); ++i) x0(i) = normal(rng);
      const OdeScheme kind = scheme == "euler" ? OdeScheme::euler : OdeScheme::heun;
      fits.emplace_back(scheme + " global error", ode_global_error(problem, kind, x0, options.t_end, steps));
      checks.push_back(kind == OdeScheme::euler
                           ? SlopeCheck{"euler slope", &fits.back().second, 0.9, 1.1, true}
                           : SlopeCheck{"heun slope", &fits.back().second, 1.9, 2.1, true});
    } else {
      const std::string scheme = options.scheme.empty() ? "sh" : options.scheme;
      if (scheme != "sgd" && scheme != "sh") {
        fmt::print(err, "error: moments order-check takes --scheme sgd or sh\n");
        return kExitUsage;
      }
      RandomQuadraticOptions q;
      q.dimension = options.dim == 0 ? 2 : options.dim;
      q.samples = options.samples;
      const QuadraticProblem problem = make_random_quadratic(q, rng);
      std::normal_distribution<double> normal(0.0, 2.0);
      ParamVector x(static_cast<Eigen::Index>(q.dimension));
      for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = normal(rng);
      const MomentScheme kind = scheme == "sgd" ? MomentScheme::sgd : MomentScheme::sh;
      const MomentReport report = moment_residual_scan(problem, x, kind, steps);
      fits.emplace_back(scheme + " first moment residual", report.first_moment);
      fits.emplace_back(scheme + " second moment residual", report.second_moment);
      const double inf = std::numeric_limits<double>::infinity();
      if (kind == MomentScheme::sgd) {
        checks.push_back({"sgd first moment slope", &fits[0].second, 1.9, 2.6, true});
        checks.push_back({"sgd second moment slope", &fits[1].second, -inf, inf, false});
      } else {
        checks.push_back({"sh first moment slope", &fits[0].second, -inf, inf, false});
        checks.push_back({"sh second moment slope", &fits[1].second, 2.9, inf, true});
      }
    }

    bool passed = true;
    for (const auto& [name, fit] : fits) print_fit_table(out, name, fit);
    for (const SlopeCheck& check : checks) {
      const OrderFit& fit = *check.fit;
      if (fit.status == FitStatus::exact_match) {
        fmt::print(out, "{}: exact match (residual at rounding level)\n", check.name);
        if (check.hard) passed = false;
        continue;
      }
      const bool ok = fit.slope >= check.lo && fit.slope <= check.hi;
      if (check.hard) {
        passed = passed && ok;
        fmt::print(out, "{}: {:.4f} (r = {:.6f}) bound [{}, {}] {}\n", check.name, fit.slope,
                   fit.correlation, check.lo, check.hi, ok ? "PASS" : "FAIL");
      } else {
        fmt::print(out, "{}: {:.4f} (r = {:.6f}) reported only\n", check.name, fit.slope,
                   fit.correlation);
      }
    }

    if (options.csv) {
      std::ostringstream csv;
      csv << "series,h,error,stable\n";
      for (const auto& [name, fit] : fits) {
        for (const OrderPoint& p : fit.points) {
          csv << name << ',' << format_number(p.h) << ',' << format_number(p.error) << ','
              << (p.stable ? 1 : 0) << '\n';
        }
      }
      write_text_file(*options.csv, csv.str());
    }
    return passed ? kExitOk : kExitFailed;
  } catch (const Error& error) {
    fmt::print(err, "error: {}\n", error.what());
    return exit_code_for(error);
  }
}

namespace {

// One string option per setting key; applied over the config file in key
// order after parsing.
struct ExperimentOptions {
  std::string config_file;
  std::map<std::string, std::string> values;
};

void add_experiment_options(CLI::App& command, ExperimentOptions& options) {
  command.add_option("--config", options.config_file, "key = value config file; flags override it");
  for (const std::string& key : setting_keys()) {
    command.add_option_function<std::string>(
        "--" + key, [&options, key](const std::string& value) { options.values[key] = value; },
        "setting '" + key + "'");
  }
}

ExperimentConfig resolve(const ExperimentOptions& options) {
  ExperimentConfig config;
  if (!options.config_file.empty()) apply_config_file(config, options.config_file);
  for (const std::string& key : setting_keys()) {
    if (const auto it = options.values.find(key); it != options.values.end()) {
      apply_setting(config, key, it->second);
    }
  }
  apply_environment(config);
  validate(config);
  return config;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"SGD-G2 and stochastic Heun experiments"};
  app.require_subcommand(1);

  ExperimentOptions train_options;
  CLI::App* train = app.add_subcommand("train", "train one model and write run.csv");
  add_experiment_options(*train, train_options);

  ExperimentOptions compare_options;
  CLI::App* compare = app.add_subcommand("compare", "run every optimizer x h0 pair");
  add_experiment_options(*compare, compare_options);

  ExperimentOptions trace_options;
  CLI::App* trace = app.add_subcommand("hopt-trace", "dump the SGD-G2 rate-controller columns");
  add_experiment_options(*trace, trace_options);

  OrderCheckOptions order;
  std::string kind = "ode";
  std::string h_list;
  CLI::App* check = app.add_subcommand("order-check", "convergence-order scans on quadratics");
  check->add_option("--kind", kind, "ode or moments")->check(CLI::IsMember({"ode", "moments"}));
  check->add_option("--scheme", order.scheme, "euler/heun (ode), sgd/sh (moments)");
  check->add_option("--h-list", h_list, "comma-separated, strictly decreasing step sizes");
  check->add_option("--dim", order.dim, "problem dimension");
  check->add_option("--samples", order.samples, "samples of the moment-check quadratic");
  check->add_option("--seed", order.seed, "problem seed");
  check->add_option("--t-end", order.t_end, "ODE horizon");
  std::string csv_path;
  check->add_option("--csv", csv_path, "write the (h, error) table here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*train) return cmd_train(resolve(train_options), out, err);
    if (*compare) return cmd_compare(resolve(compare_options), out, err);
    if (*trace) return cmd_hopt_trace(resolve(trace_options), out, err);
    order.kind = kind == "ode" ? CheckKind::ode : CheckKind::moments;
    if (!h_list.empty()) {
      ExperimentConfig scratch;
      apply_setting(scratch, "h0-list", h_list);
      order.h_list = scratch.h0_list;
    }
    if (!csv_path.empty()) order.csv = csv_path;
    return cmd_order_check(order, out, err);
  } catch (const Error& error) {
    fmt::print(err, "error: {}\n", error.what());
    return kExitUsage;
  }
}

}  // namespace sgdg2::app
