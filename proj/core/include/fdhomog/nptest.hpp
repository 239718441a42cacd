#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "fdhomog/basis.hpp"
#include "fdhomog/report.hpp"

namespace fdh {

/// x / |x|, or the zero vector when |x| <= 1e-12.
[[nodiscard]] Vector spatial_sign(const Vector& x);

struct SpatialMedianOptions {
  double tolerance = 1e-9;  ///< on the norm of the Weiszfeld step
  int max_iterations = 1000;
};

/// Minimizer of sum_i |x_i - mu| over the rows of data (Weiszfeld iteration
/// with the Vardi-Zhang step at data points). One-dimensional data returns
/// the sample median, averaging the two middle values for even n.
[[nodiscard]] Vector spatial_median(const Matrix& data, const SpatialMedianOptions& options = {});

/// Sum of Euclidean distances from the rows of data to point.
[[nodiscard]] double spatial_median_objective(const Matrix& data, const Vector& point);

/// Row i holds spatial_sign(x_i - center).
[[nodiscard]] Matrix spatial_signs(const Matrix& data, const Vector& center);

/// Centered spatial ranks: row i is n^{-1} sum_k spatial_sign(x_i - x_k).
[[nodiscard]] Matrix spatial_ranks(const Matrix& data);

enum class SpatialTest { mood, kruskal };

enum class PValueReference { chi2, permutation };

struct SpatialTestOptions {
  double alpha = 0.05;
  PValueReference reference = PValueReference::chi2;
  int permutations = 999;
  std::uint64_t seed = 20200101;
  /// Throw DegenerateGeometryError on a singular normalizer instead of
  /// falling back to a pseudo-inverse statistic with a permutation p-value.
  bool strict = false;
};

/// Mood-type test on spatial signs about the pooled spatial median;
/// chi-squared reference with d(m-1) degrees of freedom.
[[nodiscard]] TestReport mood_multivariate(const Matrix& data, std::span<const int> labels,
                                           const SpatialTestOptions& options = {});

/// Kruskal-Wallis-type test on centered spatial ranks; chi-squared reference
/// with d(m-1) degrees of freedom.
[[nodiscard]] TestReport kruskal_multivariate(const Matrix& data, std::span<const int> labels,
                                              const SpatialTestOptions& options = {});

/// (1 + #{Q_perm >= Q_obs}) / (1 + permutations). Permutation b draws its
/// shuffle from the stream (seed, b), so the result does not depend on the
/// order in which permutations are evaluated.
[[nodiscard]] double permutation_pvalue(SpatialTest test, const Matrix& data, std::span<const int> labels,
                                        int permutations, std::uint64_t seed);

/// Observed statistic Q for the given test (pseudo-inverse normalizer).
[[nodiscard]] double spatial_statistic(SpatialTest test, const Matrix& data, std::span<const int> labels);

struct RankSumResult {
  double rank_sum = 0.0;  ///< sum of the ranks of the first sample in the pooled sample
  double u = 0.0;         ///< rank_sum - n1 (n1 + 1) / 2
  double z = 0.0;
  double p_value = 1.0;
};

/// Two-sided Wilcoxon rank-sum test, normal approximation with tie and
/// continuity corrections.
[[nodiscard]] RankSumResult wilcoxon_rank_sum(std::span<const double> x, std::span<const double> y);

/// Benjamini-Hochberg step-up adjusted p-values, in input order.
[[nodiscard]] std::vector<double> benjamini_hochberg(std::span<const double> p);

struct PairwiseTable {
  Matrix raw_p;       ///< m x m, symmetric, NaN diagonal
  Matrix adjusted_p;  ///< BH over the m(m-1)/2 pairs
  Matrix rank_sum;    ///< (i, j): rank sum of group i in the pooled pair (i, j)
};

[[nodiscard]] PairwiseTable wilcoxon_pairwise_bh(std::span<const double> values, std::span<const int> labels);

}  // namespace fdh
