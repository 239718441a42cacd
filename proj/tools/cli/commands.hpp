#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace fdh::cli {

enum class InputFormat { long_csv, wide, raw, coef };
enum class Route { manova, pc_anova, np_mood, np_kw, pairwise_wilcoxon };

[[nodiscard]] InputFormat parse_format(const std::string& text);
[[nodiscard]] Route parse_route(const std::string& text);
[[nodiscard]] std::string to_string(Route route);

/// Exit status of every subcommand.
enum ExitCode : int { exit_ok = 0, exit_usage = 1, exit_validation = 2, exit_computation = 3 };

struct PipelineConfig {
  std::string input;
  InputFormat format = InputFormat::long_csv;
  int degree = 3;
  int basis_dimension = 20;
  double lambda = 0.0;  ///< 0 selects plain least squares
  bool loocv = false;
  int penalty_order = 2;
  int grid_points = 101;  ///< registration grid for raw input
  Route route = Route::manova;
  std::optional<int> q;
  std::optional<double> var_threshold;
  double alpha = 0.05;
  std::uint64_t seed = 20200101;
  int permutations = 0;  ///< > 0 switches the spatial tests to a permutation reference
  std::string out = ".";

  /// Throws ValidationError when the combination of options is inconsistent.
  void validate() const;
};

struct RegisterConfig {
  std::string input;
  std::string out = ".";
  int grid_points = 101;
};

struct SimulateConfig {
  std::string config;
  std::optional<int> reps;
  bool full = false;
  std::uint64_t seed = 20200101;
  int workers = 1;
  std::string out = ".";
};

/// Raw curves to registered long CSV on a uniform [0, 1] grid. Writes
/// registered.csv into the output directory and returns its path.
std::string cmd_register(const RegisterConfig& config, std::ostream& log);

/// Runs ingestion, smoothing, optional FPCA and the configured test. Writes
/// report.csv and report.md plus intermediate tables; returns the report paths.
std::vector<std::string> cmd_test(const PipelineConfig& config, std::ostream& log);

/// Runs a simulation study and writes study.csv and study.md.
std::vector<std::string> cmd_simulate(const SimulateConfig& config, std::ostream& log);

/// Runs body and maps library exceptions onto exit codes, printing the message.
int guarded(const std::function<void()>& body, std::ostream& err);

}  // namespace fdh::cli
