#pragma once

#include <cstdint>
#include <istream>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fdhomog/basis.hpp"
#include "fdhomog/rng.hpp"
#include "fdhomog/smooth.hpp"

namespace fdh::sim {

enum class MeanModel { m1, m2, m3 };
enum class ErrorFamily { gaussian, lognormal };

/// Test route applied to each replicate: all basis coefficients, or the first
/// q functional principal component scores.
struct Method {
  enum class Kind { basis_coef, pc } kind = Kind::basis_coef;
  int q = 0;

  [[nodiscard]] std::string name() const;
  static Method parse(const std::string& text);  ///< "basis-coef" or "pc-<q>"
  friend bool operator==(const Method&, const Method&) = default;
};

struct Scenario {
  MeanModel mean = MeanModel::m1;
  ErrorFamily family = ErrorFamily::gaussian;
  double sigma = 0.05;
  int group_size = 25;
  int groups = 3;
  int grid_points = 51;
  int kl_terms = 20;
  int basis_dimension = 18;
  int degree = 3;
  double alpha = 0.05;

  /// True when sigma or the group size falls outside the published design.
  [[nodiscard]] bool extrapolated() const;
  friend bool operator==(const Scenario&, const Scenario&) = default;
};

struct CellSpec {
  Scenario scenario;
  Method method;
  int reps = 300;
};

struct StudyResult {
  CellSpec cell;
  int accepted = 0;
  int completed = 0;
  int excluded = 0;
  std::uint64_t seed = 0;

  [[nodiscard]] double acceptance() const noexcept {
    return completed > 0 ? static_cast<double>(accepted) / completed : 0.0;
  }
};

[[nodiscard]] std::string to_string(MeanModel model);
[[nodiscard]] std::string to_string(ErrorFamily family);
[[nodiscard]] MeanModel parse_mean_model(const std::string& text);
[[nodiscard]] ErrorFamily parse_error_family(const std::string& text);

/// Group mean curve; group is 1-based.
[[nodiscard]] double mean_function(MeanModel model, int group, double t);

/// Truncated Karhunen-Loeve expansion of a Wiener process with covariance
/// sigma^2 min(s, t), sampled on a fixed grid.
class WienerKl {
 public:
  WienerKl(double sigma, int terms, std::span<const double> grid);

  [[nodiscard]] static double eigenvalue(double sigma, int k);  ///< k is 1-based
  [[nodiscard]] static double eigenfunction(int k, double t);

  /// Gaussian path: sum_k sqrt(lambda_k) xi_k f_k(t).
  [[nodiscard]] Vector sample(PhiloxEngine& rng) const;
  /// Centered log-normal path: exp(eps(t)) - exp(v(t) / 2).
  [[nodiscard]] Vector sample_lognormal(PhiloxEngine& rng) const;
  /// Truncated pointwise variance v(t) = sum_k lambda_k f_k(t)^2.
  [[nodiscard]] const Vector& variance() const noexcept { return variance_; }

 private:
  Matrix loadings_;  ///< grid x terms, entries sqrt(lambda_k) f_k(t_s)
  Vector variance_;
  Vector offset_;    ///< exp(v / 2)
};

[[nodiscard]] Vector wiener_kl_sample(double sigma, int terms, std::span<const double> grid, PhiloxEngine& rng);
[[nodiscard]] Vector lognormal_error_sample(double sigma, int terms, std::span<const double> grid, PhiloxEngine& rng);

struct Replicate {
  CurveSet curves;
  CoefficientSet coefficients;
};

[[nodiscard]] Replicate generate_replicate(const Scenario& scenario, PhiloxEngine& rng);

/// Replicate r draws its data from the stream (seed, stream_id(cell_index, r)).
/// Replicates are spread over `workers` threads and reduced in index order,
/// so the result does not depend on the worker count.
[[nodiscard]] StudyResult run_cell(const CellSpec& cell, std::uint64_t seed, int workers = 1,
                                   std::uint32_t cell_index = 0);

/// Simulation cells are the distinct scenarios of the config, indexed in order
/// of first appearance; rows that differ only in method share a cell index and
/// therefore analyse the same simulated data.
[[nodiscard]] std::vector<StudyResult> run_study(std::span<const CellSpec> cells, std::uint64_t seed, int workers = 1);

/// Columns mean_model, error_family, sigma, n_i, method, reps, alpha in any
/// order, separated by commas, tabs or spaces. reps_override replaces every
/// reps value when set.
[[nodiscard]] std::vector<CellSpec> read_study_config(std::istream& in, const std::string& source,
                                                      std::optional<int> reps_override = std::nullopt);
[[nodiscard]] std::string write_study_config(std::span<const CellSpec> cells);

/// One published table: 45 scenarios (M1-M3 x n_i in {15, 25, 35} x sigma in
/// {0.02, 0.05, 0.10, 0.20, 0.40}), each run with basis-coef, pc-3, pc-5 and
/// pc-8, giving 180 config rows.
[[nodiscard]] std::vector<CellSpec> published_design(ErrorFamily family, int reps);

[[nodiscard]] std::string study_csv(std::span<const StudyResult> results);
/// Rows mean model x n_i x method, one column per sigma.
[[nodiscard]] std::string study_markdown(std::span<const StudyResult> results);

}  // namespace fdh::sim
