#include "sgdg2/app/config.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "sgdg2/error.hpp"

namespace sgdg2::app {

namespace {

std::string trim(std::string_view text) {
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = text.find_last_not_of(" \t\r\n");
  return std::string(text.substr(first, last - first + 1));
}

std::string canonical_key(std::string_view key) {
  std::string out(key);
  for (char& c : out) {
    if (c == '_') c = '-';
  }
  return out;
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value) {
  throw Error(ErrorCode::invalid_argument, fmt::format("invalid value '{}' for {}", value, key));
}

double parse_double(std::string_view key, std::string_view value) {
  const std::string text = trim(value);
  char* end = nullptr;
  const double parsed = std::strtod(text.c_str(), &end);
  if (text.empty() || end != text.c_str() + text.size()) bad_value(key, value);
  return parsed;
}

std::uint64_t parse_unsigned(std::string_view key, std::string_view value) {
  const std::string text = trim(value);
  if (text.empty() || text.front() == '-') bad_value(key, value);
  char* end = nullptr;
  const unsigned long long parsed = std::strtoull(text.c_str(), &end, 10);
  if (end != text.c_str() + text.size()) bad_value(key, value);
  return parsed;
}

bool parse_bool(std::string_view key, std::string_view value) {
  const std::string text = trim(value);
  if (text == "true" || text == "1" || text == "yes" || text == "on") return true;
  if (text == "false" || text == "0" || text == "no" || text == "off") return false;
  bad_value(key, value);
}

std::vector<std::string> split_list(std::string_view value) {
  std::vector<std::string> items;
  std::string current;
  std::istringstream stream{std::string(value)};
  while (std::getline(stream, current, ',')) {
    std::string item = trim(current);
    if (!item.empty()) items.push_back(std::move(item));
  }
  return items;
}

std::vector<double> parse_double_list(std::string_view key, std::string_view value) {
  std::vector<double> out;
  for (const auto& item : split_list(value)) out.push_back(parse_double(key, item));
  return out;
}

std::string format_double(double v) { return fmt::format("{}", v); }

std::string format_doubles(const std::vector<double>& values) {
  std::vector<std::string> parts;
  for (double v : values) parts.push_back(format_double(v));
  return fmt::format("{}", fmt::join(parts, ","));
}

}  // namespace

std::string_view to_string(DatasetKind kind) noexcept {
  switch (kind) {
    case DatasetKind::mnist: return "mnist";
    case DatasetKind::fmnist: return "fmnist";
    case DatasetKind::blobs: return "blobs";
    case DatasetKind::quadratic: return "quadratic";
  }
  return "unknown";
}

const std::vector<std::string>& setting_keys() {
  static const std::vector<std::string> keys{
      "dataset",        "data-dir",          "hidden",          "optimizer",
      "h0",             "beta",              "batch-size",      "epochs",
      "max-iterations", "seed",              "eval-every",      "out",
      "svg",            "blob-classes",      "blob-per-class",  "blob-test-per-class",
      "blob-dim",       "blob-separation",   "quad-dim",        "quad-samples",
      "quad-min-eig",   "quad-max-eig",      "quad-spread",     "quad-curvatures",
      "quad-x0",        "h0-list",           "optimizers",
  };
  return keys;
}

void apply_setting(ExperimentConfig& c, std::string_view raw_key, std::string_view raw_value) {
  const std::string key = canonical_key(trim(raw_key));
  const std::string value = trim(raw_value);
  if (key == "dataset") {
    if (value == "mnist") c.dataset = DatasetKind::mnist;
    else if (value == "fmnist") c.dataset = DatasetKind::fmnist;
    else if (value == "blobs") c.dataset = DatasetKind::blobs;
    else if (value == "quadratic") c.dataset = DatasetKind::quadratic;
    else bad_value(key, value);
  } else if (key == "data-dir") {
    c.data_dir = value;
  } else if (key == "hidden") {
    c.hidden.clear();
    if (value != "none") {
      for (const auto& item : split_list(value)) {
        const auto width = parse_unsigned(key, item);
        if (width == 0) bad_value(key, value);
        c.hidden.push_back(width);
      }
    }
  } else if (key == "optimizer") {
    const auto kind = parse_optimizer_kind(value);
    if (!kind) bad_value(key, value);
    c.optimizer = *kind;
  } else if (key == "h0") {
    c.h0 = parse_double(key, value);
  } else if (key == "beta") {
    c.beta = parse_double(key, value);
  } else if (key == "batch-size") {
    c.batch_size = parse_unsigned(key, value);
  } else if (key == "epochs") {
    c.epochs = parse_unsigned(key, value);
  } else if (key == "max-iterations") {
    c.max_iterations = parse_unsigned(key, value);
  } else if (key == "seed") {
    c.seed = parse_unsigned(key, value);
  } else if (key == "eval-every") {
    c.eval_every = parse_unsigned(key, value);
  } else if (key == "out") {
    c.out = value;
  } else if (key == "svg") {
    c.svg = parse_bool(key, value);
  } else if (key == "blob-classes") {
    c.blob_classes = static_cast<int>(parse_unsigned(key, value));
  } else if (key == "blob-per-class") {
    c.blob_per_class = parse_unsigned(key, value);
  } else if (key == "blob-test-per-class") {
    c.blob_test_per_class = parse_unsigned(key, value);
  } else if (key == "blob-dim") {
    c.blob_dim = parse_unsigned(key, value);
  } else if (key == "blob-separation") {
    c.blob_separation = parse_double(key, value);
  } else if (key == "quad-dim") {
    c.quad_dim = parse_unsigned(key, value);
  } else if (key == "quad-samples") {
    c.quad_samples = parse_unsigned(key, value);
  } else if (key == "quad-min-eig") {
    c.quad_min_eig = parse_double(key, value);
  } else if (key == "quad-max-eig") {
    c.quad_max_eig = parse_double(key, value);
  } else if (key == "quad-spread") {
    c.quad_spread = parse_double(key, value);
  } else if (key == "quad-curvatures") {
    c.quad_curvatures = parse_double_list(key, value);
  } else if (key == "quad-x0") {
    c.quad_x0 = parse_double_list(key, value);
  } else if (key == "h0-list") {
    c.h0_list = parse_double_list(key, value);
  } else if (key == "optimizers") {
    c.optimizers.clear();
    for (const auto& item : split_list(value)) {
      const auto kind = parse_optimizer_kind(item);
      if (!kind) bad_value(key, value);
      c.optimizers.push_back(*kind);
    }
  } else {
    throw Error(ErrorCode::invalid_argument, fmt::format("unknown setting '{}'", raw_key));
  }
}

void apply_config_text(ExperimentConfig& config, std::string_view text) {
  std::istringstream stream{std::string(text)};
  std::string line;
  int number = 0;
  while (std::getline(stream, line)) {
    ++number;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCode::invalid_argument,
                  fmt::format("config line {}: expected key = value", number));
    }
    apply_setting(config, std::string_view(line).substr(0, eq),
                  std::string_view(line).substr(eq + 1));
  }
}

void apply_config_file(ExperimentConfig& config, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io_error, "cannot open config file " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  apply_config_text(config, text.str());
}

void apply_environment(ExperimentConfig& config) {
  if (!config.data_dir.empty()) return;
  if (const char* dir = std::getenv("SGDG2_DATA_DIR"); dir != nullptr && *dir != '\0') {
    config.data_dir = dir;
  }
}

void validate(const ExperimentConfig& c) {
  auto fail = [](const std::string& message) { throw Error(ErrorCode::invalid_argument, message); };
  if (!(c.h0 > 0.0) || !std::isfinite(c.h0)) fail("h0 must be > 0");
  if (!(c.beta > 0.0 && c.beta < 1.0)) fail("beta must lie in (0, 1)");
  if (c.batch_size < 1) fail("batch-size must be >= 1");
  if (c.blob_classes < 2) fail("blob-classes must be >= 2");
  if (c.blob_per_class < 1) fail("blob-per-class must be >= 1");
  if (c.blob_dim < 1) fail("blob-dim must be >= 1");
  if (c.quad_dim < 1 || c.quad_samples < 1) fail("quad-dim and quad-samples must be >= 1");
  if (!(c.quad_min_eig > 0.0 && c.quad_min_eig <= c.quad_max_eig)) {
    fail("need 0 < quad-min-eig <= quad-max-eig");
  }
  if (c.quad_x0.empty()) fail("quad-x0 needs at least one value");
  for (double h : c.h0_list) {
    if (!(h > 0.0)) fail("h0-list entries must be > 0");
  }
  if (c.h0_list.empty() || c.optimizers.empty()) fail("h0-list and optimizers must be non-empty");
}

std::vector<std::pair<std::string, std::string>> settings(const ExperimentConfig& c) {
  std::vector<std::string> optimizers;
  for (auto kind : c.optimizers) optimizers.emplace_back(to_string(kind));
  std::vector<std::string> hidden;
  for (auto width : c.hidden) hidden.push_back(std::to_string(width));
  return {
      {"dataset", std::string(to_string(c.dataset))},
      {"data-dir", c.data_dir.string()},
      {"hidden", hidden.empty() ? "none" : fmt::format("{}", fmt::join(hidden, ","))},
      {"optimizer", std::string(to_string(c.optimizer))},
      {"h0", format_double(c.h0)},
      {"beta", format_double(c.beta)},
      {"batch-size", std::to_string(c.batch_size)},
      {"epochs", std::to_string(c.epochs)},
      {"max-iterations", std::to_string(c.max_iterations)},
      {"seed", std::to_string(c.seed)},
      {"eval-every", std::to_string(c.eval_every)},
      {"out", c.out.string()},
      {"svg", c.svg ? "true" : "false"},
      {"blob-classes", std::to_string(c.blob_classes)},
      {"blob-per-class", std::to_string(c.blob_per_class)},
      {"blob-test-per-class", std::to_string(c.blob_test_per_class)},
      {"blob-dim", std::to_string(c.blob_dim)},
      {"blob-separation", format_double(c.blob_separation)},
      {"quad-dim", std::to_string(c.quad_dim)},
      {"quad-samples", std::to_string(c.quad_samples)},
      {"quad-min-eig", format_double(c.quad_min_eig)},
      {"quad-max-eig", format_double(c.quad_max_eig)},
      {"quad-spread", format_double(c.quad_spread)},
      {"quad-curvatures", format_doubles(c.quad_curvatures)},
      {"quad-x0", format_doubles(c.quad_x0)},
      {"h0-list", format_doubles(c.h0_list)},
      {"optimizers", fmt::format("{}", fmt::join(optimizers, ","))},
  };
}

}  // namespace sgdg2::app
