#include "fdhomog/smooth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>

#include "fdhomog/errors.hpp"

namespace fdh {

GroupLabels GroupLabels::from_names(std::span<const std::string> labels) {
  GroupLabels out;
  std::map<std::string, int> seen;
  out.index.reserve(labels.size());
  for (const auto& name : labels) {
    auto [it, inserted] = seen.try_emplace(name, static_cast<int>(out.names.size()));
    if (inserted) {
      out.names.push_back(name);
    }
    out.index.push_back(it->second);
  }
  return out;
}

GroupLabels GroupLabels::from_indices(std::vector<int> index) {
  const auto sizes = group_sizes(index);
  GroupLabels out;
  out.index = std::move(index);
  for (std::size_t g = 0; g < sizes.size(); ++g) {
    out.names.push_back(std::to_string(g + 1));
  }
  return out;
}

std::vector<int> GroupLabels::sizes() const {
  std::vector<int> counts(names.size(), 0);
  for (int g : index) {
    ++counts.at(static_cast<std::size_t>(g));
  }
  return counts;
}

std::vector<int> group_sizes(std::span<const int> labels) {
  int groups = 0;
  for (int g : labels) {
    if (g < 0) {
      throw InvalidDesignError("group labels must be nonnegative");
    }
    groups = std::max(groups, g + 1);
  }
  std::vector<int> counts(static_cast<std::size_t>(groups), 0);
  for (int g : labels) {
    ++counts[g];
  }
  for (int g = 0; g < groups; ++g) {
    if (counts[g] == 0) {
      throw InvalidDesignError("group " + std::to_string(g + 1) + " is empty");
    }
  }
  return counts;
}

void CurveSet::validate() const {
  if (static_cast<std::size_t>(values.cols()) != grid.size()) {
    throw ValidationError("curve values have " + std::to_string(values.cols()) +
                          " columns but the grid has " + std::to_string(grid.size()) + " points");
  }
  if (static_cast<std::size_t>(values.rows()) != labels.size() ||
      static_cast<std::size_t>(values.rows()) != ids.size()) {
    throw ValidationError("curve ids, labels and values disagree on the number of curves");
  }
  for (std::size_t s = 1; s < grid.size(); ++s) {
    if (!(grid[s] > grid[s - 1])) {
      throw ValidationError("grid must be strictly increasing");
    }
  }
  for (int size : labels.sizes()) {
    if (size == 0) {
      throw InvalidDesignError("every group must contain at least one curve");
    }
  }
}

void CoefficientSet::validate() const {
  if (static_cast<std::size_t>(coefficients.rows()) != labels.size() ||
      static_cast<std::size_t>(coefficients.rows()) != ids.size()) {
    throw ValidationError("coefficient rows, ids and labels disagree on the number of curves");
  }
  if (basis && basis->dimension() != coefficients.cols()) {
    throw ValidationError("coefficient columns (" + std::to_string(coefficients.cols()) +
                          ") do not match basis dimension (" + std::to_string(basis->dimension()) +
                          ")");
  }
}

namespace {

void validate_raw(const RawCurve& curve) {
  if (curve.v.size() != curve.y.size()) {
    throw ValidationError("curve " + curve.id + ": abscissa and ordinate counts differ");
  }
  if (curve.v.size() < 2) {
    throw ValidationError("curve " + curve.id + ": needs at least two points");
  }
  for (std::size_t k = 1; k < curve.v.size(); ++k) {
    if (!(curve.v[k] > curve.v[k - 1])) {
      throw ValidationError("curve " + curve.id + ": abscissas are not strictly increasing");
    }
  }
  const double terminal = curve.terminal();
  if (!(terminal > 0.0)) {
    throw ValidationError("curve " + curve.id + ": terminal abscissa must be positive");
  }
  if (curve.v.back() > terminal) {
    throw ValidationError("curve " + curve.id + ": abscissas exceed the terminal abscissa");
  }
}

double interpolate(std::span<const double> u, std::span<const double> y, double t) {
  const auto it = std::lower_bound(u.begin(), u.end(), t);
  const auto k = static_cast<std::size_t>(std::distance(u.begin(), it));
  if (k < u.size() && u[k] == t) {
    return y[k];
  }
  const double w = (t - u[k - 1]) / (u[k] - u[k - 1]);
  return y[k - 1] + w * (y[k] - y[k - 1]);
}

}  // namespace

CurveSet register_domain(std::span<const RawCurve> curves, std::span<const double> grid) {
  if (curves.empty()) {
    throw ValidationError("no curves to register");
  }
  CurveSet out;
  out.grid.assign(grid.begin(), grid.end());
  out.values.resize(static_cast<Eigen::Index>(curves.size()), static_cast<Eigen::Index>(grid.size()));
  std::vector<std::string> groups;
  for (std::size_t r = 0; r < curves.size(); ++r) {
    const RawCurve& curve = curves[r];
    validate_raw(curve);
    const double terminal = curve.terminal();
    std::vector<double> u(curve.v.size());
    std::transform(curve.v.begin(), curve.v.end(), u.begin(), [terminal](double v) { return v / terminal; });
    for (std::size_t s = 0; s < grid.size(); ++s) {
      if (grid[s] < u.front() || grid[s] > u.back()) {
        throw CoverageError(curve.id, "curve " + curve.id + ": grid point " + std::to_string(grid[s]) +
                                          " lies outside its registered range [" +
                                          std::to_string(u.front()) + ", " + std::to_string(u.back()) +
                                          "]");
      }
      out.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(s)) = interpolate(u, curve.y, grid[s]);
    }
    out.ids.push_back(curve.id);
    groups.push_back(curve.group);
  }
  out.labels = GroupLabels::from_names(groups);
  out.validate();
  return out;
}

BasisSmoother::BasisSmoother(const BSplineBasis& basis, std::span<const double> grid, double lambda,
                             int order)
    : design_(eval_basis(basis, grid)), lambda_(lambda) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw InvalidArgumentError("smoothing parameter must be a finite nonnegative number");
  }
  const Eigen::Index p = design_.cols();
  const Eigen::Index m = design_.rows();

  Matrix stacked = design_;
  if (lambda > 0.0) {
    const Matrix d = difference_matrix(static_cast<int>(p), order);
    stacked.resize(m + d.rows(), p);
    stacked.topRows(m) = design_;
    stacked.bottomRows(d.rows()) = std::sqrt(lambda) * d;
  }
  const Eigen::ColPivHouseholderQR<Matrix> qr(stacked);
  if (qr.rank() < p) {
    throw SingularFitError("basis design is rank deficient (rank " + std::to_string(qr.rank()) + " < " +
                           std::to_string(p) + " basis functions on " + std::to_string(m) +
                           " grid points); use fewer basis functions or a positive penalty");
  }
  Matrix rhs = Matrix::Zero(stacked.rows(), m);
  rhs.topRows(m).setIdentity();
  smoother_ = qr.solve(rhs);
}

Matrix BasisSmoother::fit(const Matrix& values) const {
  if (values.cols() != smoother_.cols()) {
    throw ValidationError("curve values do not match the smoother grid");
  }
  return values * smoother_.transpose();
}

Vector BasisSmoother::hat_diagonal() const {
  return (design_.array() * smoother_.transpose().array()).rowwise().sum();
}

namespace {

CoefficientSet fit_with(const CurveSet& curves, const BSplineBasis& basis, double lambda, int order) {
  curves.validate();
  const BasisSmoother smoother(basis, curves.grid, lambda, order);
  return CoefficientSet{smoother.fit(curves.values), curves.ids, curves.labels, basis};
}

}  // namespace

CoefficientSet fit_least_squares(const CurveSet& curves, const BSplineBasis& basis) {
  return fit_with(curves, basis, 0.0, 2);
}

CoefficientSet fit_pspline(const CurveSet& curves, const BSplineBasis& basis, double lambda, int order) {
  return fit_with(curves, basis, lambda, order);
}

std::vector<double> default_lambda_grid() {
  constexpr int count = 25;
  std::vector<double> grid(count);
  const double lo = -6.0;
  const double hi = 3.0;
  for (int k = 0; k < count; ++k) {
    grid[k] = std::pow(10.0, lo + (hi - lo) * k / (count - 1));
  }
  return grid;
}

LoocvResult select_lambda_loocv(const CurveSet& curves, const BSplineBasis& basis,
                                std::span<const double> lambda_grid, int order) {
  if (lambda_grid.empty()) {
    throw InvalidArgumentError("lambda grid is empty");
  }
  curves.validate();
  LoocvResult result;
  result.lambdas.assign(lambda_grid.begin(), lambda_grid.end());
  result.scores.reserve(lambda_grid.size());

  for (double lambda : lambda_grid) {
    double score = std::numeric_limits<double>::quiet_NaN();
    try {
      const BasisSmoother smoother(basis, curves.grid, lambda, order);
      const Vector h = smoother.hat_diagonal();
      const Matrix fitted = smoother.fit(curves.values) * smoother.design().transpose();
      const Matrix residual = curves.values - fitted;
      const Eigen::ArrayXd denom = 1.0 - h.array();
      if ((denom.abs() > 1e-10).all()) {
        score = (residual.array().rowwise() / denom.transpose()).square().sum();
      }
    } catch (const SingularFitError&) {
    }
    result.scores.push_back(score);
  }

  double best = std::numeric_limits<double>::infinity();
  for (double s : result.scores) {
    if (std::isfinite(s)) {
      best = std::min(best, s);
    }
  }
  if (!std::isfinite(best)) {
    throw SelectionError("cross-validation scores are non-finite for every lambda in the grid");
  }
  const double tie = best * (1.0 + 1e-12);
  bool found = false;
  for (std::size_t k = 0; k < result.scores.size(); ++k) {
    if (std::isfinite(result.scores[k]) && result.scores[k] <= tie &&
        (!found || result.lambdas[k] > result.lambda)) {
      result.lambda = result.lambdas[k];
      found = true;
    }
  }
  return result;
}

}  // namespace fdh
