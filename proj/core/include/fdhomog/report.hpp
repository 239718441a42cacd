#pragma once

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace fdh {

/// Outcome of one hypothesis test.
struct TestReport {
  std::string method;     ///< e.g. "manova", "anova", "np-mood"
  std::string statistic;  ///< e.g. "pillai", "F", "Q"
  double value = 0.0;
  double df1 = 0.0;
  std::optional<double> df2;
  double p_value = 1.0;
  double alpha = 0.05;
  std::string reference;  ///< null distribution used: "F", "chi2", "permutation", "normal"
  bool available = true;  ///< false when the statistic could not be formed
  std::vector<std::pair<std::string, double>> auxiliary;
  std::vector<std::string> notes;

  [[nodiscard]] bool reject() const noexcept { return available && p_value < alpha; }
};

/// Upper-tail probabilities; infinite statistics map to 0, nonpositive to 1.
[[nodiscard]] double f_upper_tail(double statistic, double df1, double df2);
[[nodiscard]] double chi2_upper_tail(double statistic, double df);
[[nodiscard]] double normal_cdf(double z);

/// CSV columns: method,statistic,value,df1,df2,p_value,alpha,reference,available
[[nodiscard]] std::string reports_to_csv(std::span<const TestReport> reports);
[[nodiscard]] std::vector<TestReport> reports_from_csv(const std::string& text);
[[nodiscard]] std::string reports_to_markdown(std::span<const TestReport> reports);

/// Shortest representation that parses back to the same double; "NA" for NaN.
[[nodiscard]] std::string format_number(double x);
[[nodiscard]] double parse_number(const std::string& text);

}  // namespace fdh
