#include "fdhomog/basis.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "fdhomog/errors.hpp"

namespace fdh {

BSplineBasis::BSplineBasis(int degree, int dimension, Interval domain)
    : degree_(degree), dimension_(dimension), domain_(domain) {
  if (degree < 0) {
    throw InvalidBasisError("basis degree must be nonnegative, got " + std::to_string(degree));
  }
  if (dimension < degree + 1) {
    throw InvalidBasisError("basis dimension " + std::to_string(dimension) +
                            " is too small for degree " + std::to_string(degree) +
                            " (need at least " + std::to_string(degree + 1) + ")");
  }
  if (!(std::isfinite(domain.lo) && std::isfinite(domain.hi) && domain.lo < domain.hi)) {
    throw InvalidBasisError("basis domain must be a nonempty finite interval");
  }

  const int spans = dimension - degree;
  knots_.reserve(static_cast<std::size_t>(dimension + degree + 1));
  knots_.insert(knots_.end(), static_cast<std::size_t>(degree + 1), domain.lo);
  for (int k = 1; k < spans; ++k) {
    knots_.push_back(domain.lo + domain.length() * static_cast<double>(k) / spans);
  }
  knots_.insert(knots_.end(), static_cast<std::size_t>(degree + 1), domain.hi);
}

std::vector<double> BSplineBasis::interior_knots() const {
  return {knots_.begin() + degree_ + 1, knots_.end() - degree_ - 1};
}

int BSplineBasis::find_span(double t) const {
  if (t >= domain_.hi) {
    return dimension_ - 1;
  }
  const auto first = knots_.begin() + degree_;
  const auto last = knots_.begin() + dimension_ + 1;
  const auto it = std::upper_bound(first, last, t);
  return static_cast<int>(std::distance(knots_.begin(), it)) - 1;
}

int BSplineBasis::nonzero_values(double t, std::span<double> out) const {
  if (!domain_.contains(t)) {
    throw DomainError("evaluation point " + std::to_string(t) + " lies outside the basis domain [" +
                      std::to_string(domain_.lo) + ", " + std::to_string(domain_.hi) + "]");
  }
  const int p = degree_;
  const int span = find_span(t);

  // Cox-de Boor triangle, left/right differences reused across levels.
  std::vector<double> left(static_cast<std::size_t>(p + 1));
  std::vector<double> right(static_cast<std::size_t>(p + 1));
  out[0] = 1.0;
  for (int j = 1; j <= p; ++j) {
    left[j] = t - knots_[span + 1 - j];
    right[j] = knots_[span + j] - t;
    double saved = 0.0;
    for (int r = 0; r < j; ++r) {
      const double temp = out[r] / (right[r + 1] + left[j - r]);
      out[r] = saved + right[r + 1] * temp;
      saved = left[j - r] * temp;
    }
    out[j] = saved;
  }
  return span - p;
}

BSplineBasis make_basis(int degree, int dimension, Interval domain) {
  return BSplineBasis(degree, dimension, domain);
}

Matrix eval_basis(const BSplineBasis& basis, std::span<const double> grid) {
  const int p = basis.degree();
  Matrix design = Matrix::Zero(static_cast<Eigen::Index>(grid.size()), basis.dimension());
  std::vector<double> values(static_cast<std::size_t>(p + 1));
  for (std::size_t s = 0; s < grid.size(); ++s) {
    const int first = basis.nonzero_values(grid[s], values);
    for (int a = 0; a <= p; ++a) {
      design(static_cast<Eigen::Index>(s), first + a) = values[a];
    }
  }
  return design;
}

Vector eval_expansion(const BSplineBasis& basis, const Vector& coef, std::span<const double> grid) {
  if (coef.size() != basis.dimension()) {
    throw InvalidArgumentError("coefficient vector length does not match basis dimension");
  }
  return eval_basis(basis, grid) * coef;
}

GaussLegendreRule gauss_legendre(int points) {
  if (points < 1) {
    throw InvalidArgumentError("Gauss-Legendre rule needs at least one node");
  }
  GaussLegendreRule rule;
  rule.nodes.resize(static_cast<std::size_t>(points));
  rule.weights.resize(static_cast<std::size_t>(points));
  const int n = points;
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = pk;
      }
      // p1 = P_n(x), p0 = P_{n-1}(x)
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) {
        break;
      }
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) {
    rule.nodes[n / 2] = 0.0;
  }
  return rule;
}

Matrix gram_matrix(const BSplineBasis& basis) {
  const int p = basis.degree();
  const int dim = basis.dimension();
  const auto& knots = basis.knots();
  const GaussLegendreRule rule = gauss_legendre(p + 1);

  Matrix gram = Matrix::Zero(dim, dim);
  std::vector<double> values(static_cast<std::size_t>(p + 1));
  for (int span = p; span < dim; ++span) {
    const double a = knots[span];
    const double b = knots[span + 1];
    if (!(b > a)) {
      continue;
    }
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (a + b);
    for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
      // Interior nodes never hit a knot, so the span lookup matches `span`.
      const double t = mid + half * rule.nodes[q];
      const int first = basis.nonzero_values(t, values);
      const double w = half * rule.weights[q];
      for (int r = 0; r <= p; ++r) {
        for (int c = 0; c <= p; ++c) {
          gram(first + r, first + c) += w * values[r] * values[c];
        }
      }
    }
  }
  // Enforce exact symmetry.
  return 0.5 * (gram + gram.transpose());
}

Matrix difference_matrix(int dimension, int order) {
  if (order < 0 || order >= dimension) {
    throw InvalidArgumentError("difference order " + std::to_string(order) +
                               " must lie in [0, dimension) with dimension " +
                               std::to_string(dimension));
  }
  Matrix d = Matrix::Identity(dimension, dimension);
  for (int k = 0; k < order; ++k) {
    const Eigen::Index rows = d.rows() - 1;
    d = (d.bottomRows(rows) - d.topRows(rows)).eval();
  }
  return d;
}

Matrix difference_penalty(int dimension, int order) {
  const Matrix d = difference_matrix(dimension, order);
  return d.transpose() * d;
}

std::vector<double> uniform_grid(int n, Interval domain) {
  if (n < 2) {
    throw InvalidArgumentError("a uniform grid needs at least two points");
  }
  std::vector<double> grid(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    grid[k] = domain.lo + domain.length() * static_cast<double>(k) / (n - 1);
  }
  grid.back() = domain.hi;
  return grid;
}

}  // namespace fdh
