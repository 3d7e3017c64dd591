// Command-line frontend: estimate on CSV data, draw contaminated samples,
// run the simulation experiments.
#pragma once

#include "irmean/irmean.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace irmean::cli {

enum ExitCode : int {
  kOk = 0,
  kParseError = 2,
  kConfigError = 3,
  kNumericError = 4,
};

/// Malformed input file.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Inconsistent or missing settings.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Command { Estimate, Simulate, Bench };

struct RunConfig {
  Command command = Command::Estimate;
  std::optional<std::filesystem::path> input_path;
  std::optional<std::filesystem::path> output_path;  // estimate: stdout when absent
  std::optional<double> epsilon;
  std::string cov_mode = "known";  // known | isotropic | arbitrary
  std::optional<std::filesystem::path> sigma_path;
  bool adaptive = false;
  double a = 0.9;
  double delta = 0.1;
  std::optional<double> a5;  // calibrated when absent
  std::vector<std::uint64_t> seeds;
  std::optional<std::string> experiment;
  std::optional<std::string> scheme;
  std::optional<double> scheme_a;
  std::optional<double> scheme_b;
  Index n = 500;
  Index p = 20;
  std::vector<double> epsilons;
  std::optional<int> k_override;
  bool early_stop = false;
  int max_steps = 500;
  unsigned workers = 0;
};

/// Headerless comma-separated numbers, one observation per line.
Matrix read_matrix_csv(const std::filesystem::path& path);
void write_matrix_csv(const std::filesystem::path& path, const Matrix& m);

/// 17 significant digits, enough to read back the same double.
std::string format_double(double x);

/// "1,2,5-8" -> {1, 2, 5, 6, 7, 8}
std::vector<std::uint64_t> parse_seed_list(const std::vector<std::string>& tokens);

/// Summary file next to a bench output: results.csv -> results.summary.csv.
std::filesystem::path summary_path(const std::filesystem::path& output);

int cmd_estimate(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_simulate(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_bench(const RunConfig& cfg, std::ostream& out, std::ostream& err);

/// Parses argv-style arguments (without the program name) and dispatches.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace irmean::cli
