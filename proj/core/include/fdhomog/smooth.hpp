#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fdhomog/basis.hpp"

namespace fdh {

/// Group membership for a set of observations.
///
/// index[r] is the 0-based group of row r; names[g] is the label shown to
/// users for group g. Groups built from names are numbered in order of first
/// appearance.
struct GroupLabels {
  std::vector<int> index;
  std::vector<std::string> names;

  static GroupLabels from_names(std::span<const std::string> labels);
  /// Names become "1".."m". Throws InvalidDesignError on negative indices or
  /// an empty group.
  static GroupLabels from_indices(std::vector<int> index);

  [[nodiscard]] int groups() const noexcept { return static_cast<int>(names.size()); }
  [[nodiscard]] std::size_t size() const noexcept { return index.size(); }
  [[nodiscard]] std::vector<int> sizes() const;
};

/// Group sizes for 0-based labels; throws InvalidDesignError if any of the
/// groups 0..max(label) is empty or a label is negative.
[[nodiscard]] std::vector<int> group_sizes(std::span<const int> labels);

/// One measured curve in its original units.
struct RawCurve {
  std::string id;
  std::string group;
  std::vector<double> v;  ///< strictly increasing abscissas
  std::vector<double> y;
  std::optional<double> v_reset;  ///< terminal abscissa; defaults to max v

  [[nodiscard]] double terminal() const { return v_reset.value_or(v.empty() ? 0.0 : v.back()); }
};

/// Sample curves discretized on a common grid.
struct CurveSet {
  std::vector<double> grid;  ///< strictly increasing
  Matrix values;             ///< one row per curve, one column per grid point
  std::vector<std::string> ids;
  GroupLabels labels;

  [[nodiscard]] Eigen::Index curves() const noexcept { return values.rows(); }
  /// Throws ValidationError when shapes or invariants disagree.
  void validate() const;
};

/// Basis coefficients of a set of curves, one row per curve.
struct CoefficientSet {
  Matrix coefficients;
  std::vector<std::string> ids;
  GroupLabels labels;
  std::optional<BSplineBasis> basis;

  [[nodiscard]] Eigen::Index curves() const noexcept { return coefficients.rows(); }
  [[nodiscard]] Eigen::Index dimension() const noexcept { return coefficients.cols(); }
  void validate() const;
};

/// Maps each curve onto [0, 1] by u = v / V_reset and linearly interpolates
/// its ordinates onto the target grid. No extrapolation is performed.
[[nodiscard]] CurveSet register_domain(std::span<const RawCurve> curves, std::span<const double> grid);

/// Linear operator mapping sampled values on a fixed grid to basis
/// coefficients, for plain (lambda = 0) or penalized least squares.
///
/// The system is solved as the stacked least-squares problem
/// [B; sqrt(lambda) D] a ~ [y; 0] through a column-pivoting QR, which reduces
/// to the ordinary least-squares solution at lambda = 0.
class BasisSmoother {
 public:
  BasisSmoother(const BSplineBasis& basis, std::span<const double> grid, double lambda = 0.0,
                int order = 2);

  /// Coefficients for every row of values (curves x grid points).
  [[nodiscard]] Matrix fit(const Matrix& values) const;
  /// p x M matrix S with a = S y.
  [[nodiscard]] const Matrix& operator_matrix() const noexcept { return smoother_; }
  [[nodiscard]] const Matrix& design() const noexcept { return design_; }
  /// Diagonal of the hat matrix H = B S.
  [[nodiscard]] Vector hat_diagonal() const;
  [[nodiscard]] double hat_trace() const { return hat_diagonal().sum(); }
  [[nodiscard]] double lambda() const noexcept { return lambda_; }

 private:
  Matrix design_;
  Matrix smoother_;
  double lambda_;
};

[[nodiscard]] CoefficientSet fit_least_squares(const CurveSet& curves, const BSplineBasis& basis);

[[nodiscard]] CoefficientSet fit_pspline(const CurveSet& curves, const BSplineBasis& basis,
                                         double lambda, int order = 2);

struct LoocvResult {
  double lambda = 0.0;
  std::vector<double> lambdas;
  std::vector<double> scores;  ///< CV(lambda); non-finite where h_ss = 1
};

/// 25 log-spaced values in [1e-6, 1e3].
[[nodiscard]] std::vector<double> default_lambda_grid();

/// Pointwise leave-one-out cross-validation summed over all curves; picks a
/// single shared lambda, ties going to the larger value.
[[nodiscard]] LoocvResult select_lambda_loocv(const CurveSet& curves, const BSplineBasis& basis,
                                              std::span<const double> lambda_grid, int order = 2);

}  // namespace fdh
