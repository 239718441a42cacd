#pragma once

#include <span>
#include <string>
#include <vector>

#include "fdhomog/basis.hpp"
#include "fdhomog/smooth.hpp"

namespace fdh {

struct GramRoot {
  Matrix root;          ///< symmetric C with C*C = Psi
  Matrix inverse_root;  ///< C^{-1}
};

/// Symmetric square root of a positive-definite Gram matrix by eigendecomposition.
[[nodiscard]] GramRoot sqrt_gram(const Matrix& psi);

/// Functional PCA of basis-expanded curves.
///
/// Coefficients are centered by the pooled mean. The covariance uses divisor n,
/// so score column k has mean zero and (divisor-n) variance eigenvalues[k].
/// Eigenfunction k is the curve eigenfunctions.col(k)' * Phi(t) and the
/// eigenfunctions are orthonormal in L2: B' Psi B = I.
struct FpcaModel {
  Vector mean;               ///< pooled mean coefficient vector
  Vector eigenvalues;        ///< decreasing, strictly positive
  Matrix eigenfunctions;     ///< p x r, column k holds b_k
  Matrix scores;             ///< n x r
  Matrix psi;                ///< Gram matrix used in the fit
  std::optional<BSplineBasis> basis;

  [[nodiscard]] int components() const noexcept { return static_cast<int>(eigenvalues.size()); }
};

[[nodiscard]] FpcaModel fpca_fit(const CoefficientSet& coeffs, const Matrix& psi);

/// Scores (a - mean)' Psi b_k of arbitrary coefficient rows on the first q components.
[[nodiscard]] Matrix fpca_scores(const FpcaModel& model, const Matrix& coefficients, int q);
[[nodiscard]] Matrix fpca_scores(const FpcaModel& model, const CoefficientSet& coeffs, int q);

struct ExplainedVariance {
  std::vector<double> proportion;
  std::vector<double> cumulative;
};

[[nodiscard]] ExplainedVariance explained_variance(const FpcaModel& model);

/// Smallest q whose cumulative explained variance reaches threshold, in (0, 1].
[[nodiscard]] int components_for_variance(const FpcaModel& model, double threshold);

/// Percentages of the first `count` components, three decimals, comma separated
/// (for example "99.639, 0.284, 0.046, 0.020").
[[nodiscard]] std::string format_variance_percentages(const FpcaModel& model, int count = 4);

/// Mean plus the first q components, one row per fitted curve.
[[nodiscard]] Matrix reconstruct(const FpcaModel& model, int q);

/// Eigenfunction k evaluated on a grid, one column per component.
[[nodiscard]] Matrix eigenfunction_values(const FpcaModel& model, std::span<const double> grid);

}  // namespace fdh
