#pragma once

#include <optional>
#include <span>
#include <vector>

#include "fdhomog/basis.hpp"
#include "fdhomog/report.hpp"

namespace fdh {

/// Between-group (H) and within-group (E) sums of squares and cross products.
struct SscpPair {
  Matrix between;
  Matrix within;
  int observations = 0;
  int groups = 0;
  int dimension = 0;
};

/// Rows of data are observations; labels are 0-based groups.
[[nodiscard]] SscpPair manova_sscp(const Matrix& data, std::span<const int> labels);

/// The four classical MANOVA criteria with their F approximations.
///
/// When E is singular only Pillai's trace is formed, from the eigenvalues of
/// (H + E)^+ H; the other three are reported as unavailable.
struct ManovaResult {
  TestReport wilks;
  TestReport pillai;
  TestReport hotelling_lawley;
  TestReport roy;
  std::vector<double> eigenvalues;  ///< of E^{-1} H, decreasing; empty when E is singular
  bool within_singular = false;

  /// Pillai's trace is the headline statistic.
  [[nodiscard]] const TestReport& headline() const noexcept { return pillai; }
  [[nodiscard]] std::vector<TestReport> reports() const { return {pillai, wilks, hotelling_lawley, roy}; }
};

[[nodiscard]] ManovaResult manova_test(const SscpPair& sscp, double alpha = 0.05);

/// SSCP + test, refusing designs with n <= p + m where the within-group SSCP
/// cannot be estimated reliably.
[[nodiscard]] ManovaResult manova(const Matrix& data, std::span<const int> labels, double alpha = 0.05);

/// One-way ANOVA F test. Zero within-group variation gives p = 1 when the
/// group means also coincide and p = 0 otherwise.
[[nodiscard]] TestReport anova_oneway(std::span<const double> values, std::span<const int> labels,
                                      double alpha = 0.05);

struct BonferroniBattery {
  std::vector<TestReport> components;  ///< one ANOVA per column, tested at alpha / q
  std::vector<double> adjusted_p;      ///< min(1, q * p)
  double alpha = 0.05;
  double per_test_alpha = 0.05;
  bool reject = false;
};

/// Univariate ANOVA on each column of scores with Bonferroni-split level.
[[nodiscard]] BonferroniBattery bonferroni_battery(const Matrix& scores, std::span<const int> labels,
                                                   double alpha = 0.05);

}  // namespace fdh
