#pragma once

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "sgdg2/app/config.hpp"
#include "sgdg2/convlab.hpp"

namespace sgdg2::app {

inline constexpr int kExitOk = 0;
/// Diverged run or failed hard check.
inline constexpr int kExitFailed = 1;
/// Bad arguments, bad config, missing or malformed data.
inline constexpr int kExitUsage = 2;

/// run.csv, summary.json and (with svg) accuracy.svg + learning_rate.svg in config.out.
int cmd_train(const ExperimentConfig& config, std::ostream& out, std::ostream& err);

/// Every (optimizer, h0) pair of config.optimizers x config.h0_list on one
/// dataset: compare.csv, compare.json and overlay SVGs in config.out.
int cmd_compare(const ExperimentConfig& config, std::ostream& out, std::ostream& err);

/// SGD-G2 rate-controller audit written to config.out/hopt_trace.csv.
int cmd_hopt_trace(const ExperimentConfig& config, std::ostream& out, std::ostream& err);

enum class CheckKind { ode, moments };

struct OrderCheckOptions {
  CheckKind kind = CheckKind::ode;
  /// euler | heun for ode, sgd | sh for moments; empty picks heun / sh.
  std::string scheme;
  /// Empty means 2^-3 .. 2^-8.
  std::vector<double> h_list;
  /// 0 picks 5 (ode) or 2 (moments).
  std::size_t dim = 0;
  /// Samples of the moment-check quadratic.
  std::size_t samples = 4;
  std::uint64_t seed = 1;
  double t_end = 1.0;
  std::optional<std::filesystem::path> csv;
};

/// Prints the (h, error) table and fitted slopes; exit 1 when a hard bound
/// fails (Euler [0.9, 1.1], Heun [1.9, 2.1], SGD first moment [1.9, 2.6],
/// SH second moment >= 2.9).
int cmd_order_check(const OrderCheckOptions& options, std::ostream& out, std::ostream& err);

/// Whole command line (argv[0] included).
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace sgdg2::app
