#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

namespace fdh {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Closed real interval [lo, hi].
struct Interval {
  double lo = 0.0;
  double hi = 1.0;

  [[nodiscard]] double length() const noexcept { return hi - lo; }
  [[nodiscard]] bool contains(double t) const noexcept { return t >= lo && t <= hi; }
};

/// Clamped B-spline basis with equally spaced interior knots.
///
/// Boundary knots have multiplicity degree+1, so the first and last basis
/// functions interpolate the endpoints. There are dimension-degree-1
/// interior knots and the full knot vector has dimension+degree+1 entries.
class BSplineBasis {
 public:
  BSplineBasis(int degree, int dimension, Interval domain);

  [[nodiscard]] int degree() const noexcept { return degree_; }
  [[nodiscard]] int dimension() const noexcept { return dimension_; }
  [[nodiscard]] Interval domain() const noexcept { return domain_; }
  [[nodiscard]] const std::vector<double>& knots() const noexcept { return knots_; }
  [[nodiscard]] std::vector<double> interior_knots() const;

  /// Index of the knot span containing t: knots[i] <= t < knots[i+1], with the
  /// right endpoint assigned to the last nonempty span.
  [[nodiscard]] int find_span(double t) const;

  /// Writes the degree+1 possibly-nonzero basis values at t into out and
  /// returns the index of the first of them. t must lie inside the domain.
  int nonzero_values(double t, std::span<double> out) const;

 private:
  int degree_;
  int dimension_;
  Interval domain_;
  std::vector<double> knots_;
};

[[nodiscard]] BSplineBasis make_basis(int degree, int dimension, Interval domain = {});

/// Design matrix with one row per grid point and one column per basis function.
[[nodiscard]] Matrix eval_basis(const BSplineBasis& basis, std::span<const double> grid);

/// Values of the curve sum_k coef[k] * phi_k on a grid.
[[nodiscard]] Vector eval_expansion(const BSplineBasis& basis, const Vector& coef,
                                    std::span<const double> grid);

/// L2 inner products of the basis functions, integrated span by span with
/// (degree+1)-point Gauss-Legendre quadrature (exact for these integrands).
[[nodiscard]] Matrix gram_matrix(const BSplineBasis& basis);

/// Difference matrix D of the given order, shape (dimension-order) x dimension.
[[nodiscard]] Matrix difference_matrix(int dimension, int order);

/// P = D'D for the order-th difference matrix.
[[nodiscard]] Matrix difference_penalty(int dimension, int order);

struct GaussLegendreRule {
  std::vector<double> nodes;    ///< on [-1, 1]
  std::vector<double> weights;
};

[[nodiscard]] GaussLegendreRule gauss_legendre(int points);

/// n equally spaced points covering [domain.lo, domain.hi], endpoints included.
[[nodiscard]] std::vector<double> uniform_grid(int n, Interval domain = {});

}  // namespace fdh
