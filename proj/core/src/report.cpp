#include "fdhomog/report.hpp"

#include <fmt/format.h>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/fisher_f.hpp>
#include <boost/math/distributions/normal.hpp>
#include <cmath>
#include <limits>
#include <sstream>

#include "fdhomog/errors.hpp"
#include "fdhomog/table.hpp"

namespace fdh {

double f_upper_tail(double statistic, double df1, double df2) {
  if (std::isnan(statistic)) {
    throw ComputationError("F statistic is NaN");
  }
  if (!(df1 > 0.0 && df2 > 0.0)) {
    throw ComputationError(fmt::format("F distribution needs positive degrees of freedom, got ({}, {})", df1, df2));
  }
  if (statistic <= 0.0) {
    return 1.0;
  }
  if (std::isinf(statistic)) {
    return 0.0;
  }
  const boost::math::fisher_f dist(df1, df2);
  return boost::math::cdf(boost::math::complement(dist, statistic));
}

double chi2_upper_tail(double statistic, double df) {
  if (std::isnan(statistic)) {
    throw ComputationError("chi-squared statistic is NaN");
  }
  if (!(df > 0.0)) {
    throw ComputationError(fmt::format("chi-squared distribution needs positive degrees of freedom, got {}", df));
  }
  if (statistic <= 0.0) {
    return 1.0;
  }
  if (std::isinf(statistic)) {
    return 0.0;
  }
  const boost::math::chi_squared dist(df);
  return boost::math::cdf(boost::math::complement(dist, statistic));
}

double normal_cdf(double z) {
  if (std::isinf(z)) {
    return z > 0 ? 1.0 : 0.0;
  }
  return boost::math::cdf(boost::math::normal(), z);
}

std::string format_number(double x) {
  if (std::isnan(x)) {
    return "NA";
  }
  if (std::isinf(x)) {
    return x > 0 ? "Inf" : "-Inf";
  }
  return fmt::format("{}", x);
}

double parse_number(const std::string& text) {
  if (text == "NA" || text == "NaN" || text == "nan") {
    return std::numeric_limits<double>::quiet_NaN();
  }
  if (text == "Inf" || text == "inf") {
    return std::numeric_limits<double>::infinity();
  }
  if (text == "-Inf" || text == "-inf") {
    return -std::numeric_limits<double>::infinity();
  }
  std::size_t used = 0;
  double value = 0.0;
  try {
    value = std::stod(text, &used);
  } catch (const std::exception&) {
    throw ValidationError("not a number: '" + text + "'");
  }
  if (used != text.size()) {
    throw ValidationError("not a number: '" + text + "'");
  }
  return value;
}

std::string reports_to_csv(std::span<const TestReport> reports) {
  std::string out = "method,statistic,value,df1,df2,p_value,alpha,reference,available\n";
  for (const auto& r : reports) {
    out += fmt::format("{},{},{},{},{},{},{},{},{}\n", r.method, r.statistic, format_number(r.value),
                       format_number(r.df1), r.df2 ? format_number(*r.df2) : "NA", format_number(r.p_value),
                       format_number(r.alpha), r.reference, r.available ? 1 : 0);
  }
  return out;
}

std::vector<TestReport> reports_from_csv(const std::string& text) {
  std::istringstream in(text);
  const CsvTable table = read_csv(in, "report");
  const auto col = [&](const char* name) { return table.require_column(name); };
  const std::size_t method = col("method");
  const std::size_t statistic = col("statistic");
  const std::size_t value = col("value");
  const std::size_t df1 = col("df1");
  const std::size_t df2 = col("df2");
  const std::size_t p = col("p_value");
  const std::size_t alpha = col("alpha");
  const std::size_t reference = col("reference");
  const std::size_t available = col("available");

  std::vector<TestReport> out;
  for (const auto& row : table.rows) {
    TestReport r;
    r.method = row.fields[method];
    r.statistic = row.fields[statistic];
    r.value = parse_number(row.fields[value]);
    r.df1 = parse_number(row.fields[df1]);
    if (row.fields[df2] != "NA") {
      r.df2 = parse_number(row.fields[df2]);
    }
    r.p_value = parse_number(row.fields[p]);
    r.alpha = parse_number(row.fields[alpha]);
    r.reference = row.fields[reference];
    r.available = row.fields[available] == "1";
    out.push_back(std::move(r));
  }
  return out;
}

namespace {

std::string format_p(double p) {
  if (std::isnan(p)) {
    return "NA";
  }
  if (p < 0.001) {
    return "<0.001";
  }
  return fmt::format("{:.4f}", p);
}

std::string format_df(double df) {
  if (std::isnan(df)) {
    return "NA";
  }
  if (df == std::round(df)) {
    return fmt::format("{:.0f}", df);
  }
  return fmt::format("{:.2f}", df);
}

}  // namespace

std::string reports_to_markdown(std::span<const TestReport> reports) {
  std::string out = "| Method | Statistic | Value | df1 | df2 | p-value | Reference |\n";
  out += "|---|---|---|---|---|---|---|\n";
  for (const auto& r : reports) {
    if (!r.available) {
      out += fmt::format("| {} | {} | unavailable | | | | {} |\n", r.method, r.statistic, r.reference);
      continue;
    }
    out += fmt::format("| {} | {} | {:.4f} | {} | {} | {} | {} |\n", r.method, r.statistic, r.value,
                       format_df(r.df1), r.df2 ? format_df(*r.df2) : "", format_p(r.p_value), r.reference);
  }
  for (const auto& r : reports) {
    for (const auto& note : r.notes) {
      out += fmt::format("\nNote ({}): {}\n", r.method, note);
    }
  }
  return out;
}

}  // namespace fdh
