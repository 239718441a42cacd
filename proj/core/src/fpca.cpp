#include "fdhomog/fpca.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

#include "fdhomog/errors.hpp"

namespace fdh {

GramRoot sqrt_gram(const Matrix& psi) {
  if (psi.rows() != psi.cols() || psi.rows() == 0) {
    throw InvalidArgumentError("Gram matrix must be square and nonempty");
  }
  const Eigen::SelfAdjointEigenSolver<Matrix> eig(psi);
  if (eig.info() != Eigen::Success) {
    throw ConditioningError("eigendecomposition of the Gram matrix failed");
  }
  const Vector& values = eig.eigenvalues();
  const double largest = values.maxCoeff();
  if (!(largest > 0.0) || values.minCoeff() <= 1e-12 * largest) {
    throw ConditioningError(fmt::format(
        "Gram matrix is not positive definite (eigenvalue range [{:.3g}, {:.3g}])", values.minCoeff(),
        largest));
  }
  const Matrix& vectors = eig.eigenvectors();
  GramRoot out;
  out.root = vectors * values.cwiseSqrt().asDiagonal() * vectors.transpose();
  out.inverse_root = vectors * values.cwiseSqrt().cwiseInverse().asDiagonal() * vectors.transpose();
  out.root = 0.5 * (out.root + out.root.transpose()).eval();
  out.inverse_root = 0.5 * (out.inverse_root + out.inverse_root.transpose()).eval();
  return out;
}

FpcaModel fpca_fit(const CoefficientSet& coeffs, const Matrix& psi) {
  const Matrix& a = coeffs.coefficients;
  const Eigen::Index n = a.rows();
  const Eigen::Index p = a.cols();
  if (n < 2) {
    throw InsufficientDataError("functional PCA needs at least two curves");
  }
  if (psi.rows() != p || psi.cols() != p) {
    throw InvalidArgumentError("Gram matrix size does not match the coefficient dimension");
  }
  const GramRoot root = sqrt_gram(psi);

  FpcaModel model;
  model.psi = psi;
  model.basis = coeffs.basis;
  model.mean = a.colwise().mean().transpose();
  const Matrix centered = a.rowwise() - model.mean.transpose();
  const Matrix weighted = centered * root.root;
  Matrix covariance = weighted.transpose() * weighted / static_cast<double>(n);
  covariance = 0.5 * (covariance + covariance.transpose()).eval();

  const Eigen::SelfAdjointEigenSolver<Matrix> eig(covariance);
  if (eig.info() != Eigen::Success) {
    throw ConditioningError("eigendecomposition of the coefficient covariance failed");
  }
  // Scale of the raw data, so identical curves (zero covariance up to rounding)
  // keep no component.
  const double scale = (a * root.root).squaredNorm() / static_cast<double>(n);
  const Vector values = eig.eigenvalues().reverse();
  const Matrix vectors = eig.eigenvectors().rowwise().reverse();
  const double largest = values.size() > 0 ? values(0) : 0.0;
  const double cutoff = std::max(1e-12 * largest, 1e-24 * scale);

  Eigen::Index kept = 0;
  while (kept < values.size() && values(kept) > cutoff && values(kept) > 0.0) {
    ++kept;
  }
  model.eigenvalues = values.head(kept);
  Matrix u = vectors.leftCols(kept);
  model.eigenfunctions = root.inverse_root * u;

  for (Eigen::Index k = 0; k < kept; ++k) {
    Eigen::Index pivot = 0;
    model.eigenfunctions.col(k).cwiseAbs().maxCoeff(&pivot);
    if (model.eigenfunctions(pivot, k) < 0.0) {
      model.eigenfunctions.col(k) *= -1.0;
      u.col(k) *= -1.0;
    }
  }
  model.scores = weighted * u;
  return model;
}

Matrix fpca_scores(const FpcaModel& model, const Matrix& coefficients, int q) {
  if (q < 0 || q > model.components()) {
    throw RangeError(fmt::format("requested {} components but the model retains {}", q, model.components()));
  }
  if (coefficients.cols() != model.mean.size()) {
    throw InvalidArgumentError("coefficient dimension does not match the FPCA model");
  }
  const Matrix centered = coefficients.rowwise() - model.mean.transpose();
  return centered * model.psi * model.eigenfunctions.leftCols(q);
}

Matrix fpca_scores(const FpcaModel& model, const CoefficientSet& coeffs, int q) {
  return fpca_scores(model, coeffs.coefficients, q);
}

ExplainedVariance explained_variance(const FpcaModel& model) {
  ExplainedVariance out;
  const double total = model.eigenvalues.sum();
  double running = 0.0;
  for (Eigen::Index k = 0; k < model.eigenvalues.size(); ++k) {
    const double share = model.eigenvalues(k) / total;
    running += share;
    out.proportion.push_back(share);
    out.cumulative.push_back(std::min(running, 1.0));
  }
  if (!out.cumulative.empty()) {
    out.cumulative.back() = 1.0;
  }
  return out;
}

int components_for_variance(const FpcaModel& model, double threshold) {
  if (!(threshold > 0.0 && threshold <= 1.0)) {
    throw InvalidArgumentError("variance threshold must lie in (0, 1]");
  }
  const ExplainedVariance ev = explained_variance(model);
  for (std::size_t k = 0; k < ev.cumulative.size(); ++k) {
    // Relative slack so a threshold of exactly 1 is reachable under rounding.
    if (ev.cumulative[k] >= threshold - 1e-12) {
      return static_cast<int>(k + 1);
    }
  }
  return model.components();
}

std::string format_variance_percentages(const FpcaModel& model, int count) {
  const ExplainedVariance ev = explained_variance(model);
  std::string out;
  const auto shown = std::min<std::size_t>(static_cast<std::size_t>(std::max(count, 0)), ev.proportion.size());
  for (std::size_t k = 0; k < shown; ++k) {
    if (k > 0) {
      out += ", ";
    }
    out += fmt::format("{:.3f}", 100.0 * ev.proportion[k]);
  }
  return out;
}

Matrix reconstruct(const FpcaModel& model, int q) {
  if (q < 0 || q > model.components()) {
    throw RangeError(fmt::format("requested {} components but the model retains {}", q, model.components()));
  }
  Matrix out = model.scores.leftCols(q) * model.eigenfunctions.leftCols(q).transpose();
  out.rowwise() += model.mean.transpose();
  return out;
}

Matrix eigenfunction_values(const FpcaModel& model, std::span<const double> grid) {
  if (!model.basis) {
    throw InvalidArgumentError("FPCA model carries no basis; cannot evaluate eigenfunctions");
  }
  return eval_basis(*model.basis, grid) * model.eigenfunctions;
}

}  // namespace fdh
