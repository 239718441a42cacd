#include "fdhomog/paramtest.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>

#include "fdhomog/errors.hpp"
#include "fdhomog/smooth.hpp"

namespace fdh {

SscpPair manova_sscp(const Matrix& data, std::span<const int> labels) {
  if (static_cast<std::size_t>(data.rows()) != labels.size()) {
    throw InvalidDesignError("number of labels does not match number of observations");
  }
  const std::vector<int> sizes = group_sizes(labels);
  const int m = static_cast<int>(sizes.size());
  const Eigen::Index p = data.cols();

  const Vector grand = data.colwise().mean().transpose();
  Matrix means = Matrix::Zero(m, p);
  for (Eigen::Index r = 0; r < data.rows(); ++r) {
    means.row(labels[r]) += data.row(r);
  }
  for (int g = 0; g < m; ++g) {
    means.row(g) /= sizes[g];
  }

  SscpPair out;
  out.observations = static_cast<int>(data.rows());
  out.groups = m;
  out.dimension = static_cast<int>(p);
  out.between = Matrix::Zero(p, p);
  for (int g = 0; g < m; ++g) {
    const Vector diff = means.row(g).transpose() - grand;
    out.between.noalias() += sizes[g] * diff * diff.transpose();
  }
  Matrix residual = data;
  for (Eigen::Index r = 0; r < data.rows(); ++r) {
    residual.row(r) -= means.row(labels[r]);
  }
  out.within = residual.transpose() * residual;
  return out;
}

namespace {

TestReport make_report(const char* statistic, double value, double alpha) {
  TestReport r;
  r.method = "manova";
  r.statistic = statistic;
  r.value = value;
  r.alpha = alpha;
  r.reference = "F";
  return r;
}

TestReport unavailable(const char* statistic, double alpha, const std::string& why) {
  TestReport r = make_report(statistic, std::numeric_limits<double>::quiet_NaN(), alpha);
  r.available = false;
  r.p_value = std::numeric_limits<double>::quiet_NaN();
  r.df1 = std::numeric_limits<double>::quiet_NaN();
  r.notes.push_back(why);
  return r;
}

void attach_f(TestReport& r, double f, double df1, double df2) {
  r.df1 = df1;
  r.df2 = df2;
  r.auxiliary.emplace_back("F", f);
  if (!(df1 > 0.0 && df2 > 0.0)) {
    r.available = false;
    r.p_value = std::numeric_limits<double>::quiet_NaN();
    r.notes.push_back(fmt::format("F approximation has nonpositive degrees of freedom ({}, {})", df1, df2));
    return;
  }
  r.p_value = f_upper_tail(f, df1, df2);
}

/// Pillai F approximation for V with s = min(p, h).
TestReport pillai_report(double v, double p, double h, double e, double alpha) {
  TestReport r = make_report("pillai", v, alpha);
  const double s = std::min(p, h);
  const double m_star = (std::abs(h - p) - 1.0) / 2.0;
  const double n_star = (e - p - 1.0) / 2.0;
  const double df1 = s * (2.0 * m_star + s + 1.0);
  const double df2 = s * (2.0 * n_star + s + 1.0);
  const double gap = s - v;
  const double f = gap <= 0.0 ? std::numeric_limits<double>::infinity()
                              : (2.0 * n_star + s + 1.0) / (2.0 * m_star + s + 1.0) * v / gap;
  attach_f(r, f, df1, df2);
  return r;
}

}  // namespace

ManovaResult manova_test(const SscpPair& sscp, double alpha) {
  const double p = sscp.dimension;
  const double h = sscp.groups - 1;
  const double e = sscp.observations - sscp.groups;
  if (sscp.groups < 2) {
    throw InvalidDesignError("MANOVA needs at least two groups");
  }
  if (e <= 0.0) {
    // No within-group degrees of freedom at all.
    ManovaResult out;
    out.within_singular = true;
    const std::string why = "no within-group degrees of freedom (one observation per group)";
    out.wilks = unavailable("wilks", alpha, why);
    out.pillai = unavailable("pillai", alpha, why);
    out.hotelling_lawley = unavailable("hotelling-lawley", alpha, why);
    out.roy = unavailable("roy", alpha, why);
    return out;
  }

  const Matrix& hm = sscp.between;
  const Matrix& em = sscp.within;
  const Matrix total = hm + em;

  const Eigen::SelfAdjointEigenSolver<Matrix> e_eig(em, Eigen::EigenvaluesOnly);
  const Eigen::SelfAdjointEigenSolver<Matrix> t_eig(total);
  const double t_max = std::max(t_eig.eigenvalues().cwiseAbs().maxCoeff(), std::numeric_limits<double>::min());
  const bool singular = e_eig.eigenvalues().minCoeff() <= 1e-12 * t_max;

  ManovaResult out;
  out.within_singular = singular;

  if (singular) {
    // Pillai from the pseudo-inverse of H + E restricted to its range.
    const Vector& tv = t_eig.eigenvalues();
    const Matrix& tq = t_eig.eigenvectors();
    double v = 0.0;
    int rank = 0;
    for (Eigen::Index k = 0; k < tv.size(); ++k) {
      if (tv(k) > 1e-12 * t_max) {
        v += tq.col(k).dot(hm * tq.col(k)) / tv(k);
        ++rank;
      }
    }
    const std::string why = "within-group SSCP matrix is singular";
    if (rank == 0) {
      out.pillai = unavailable("pillai", alpha, "all observations coincide");
    } else {
      out.pillai = pillai_report(v, rank, h, e, alpha);
      out.pillai.notes.push_back(fmt::format("{}; Pillai computed on the {}-dimensional range of H + E", why, rank));
    }
    out.wilks = unavailable("wilks", alpha, why);
    out.hotelling_lawley = unavailable("hotelling-lawley", alpha, why);
    out.roy = unavailable("roy", alpha, why);
    return out;
  }

  const Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> ge(hm, em, Eigen::EigenvaluesOnly);
  if (ge.info() != Eigen::Success) {
    throw ComputationError("generalized eigendecomposition of (H, E) failed");
  }
  std::vector<double> lambda(ge.eigenvalues().data(), ge.eigenvalues().data() + ge.eigenvalues().size());
  for (double& l : lambda) {
    l = std::max(l, 0.0);
  }
  std::sort(lambda.begin(), lambda.end(), std::greater<>());
  out.eigenvalues = lambda;

  const double s = std::min(p, h);
  const double m_star = (std::abs(h - p) - 1.0) / 2.0;
  const double n_star = (e - p - 1.0) / 2.0;

  // Wilks, Rao's F.
  {
    double wilks = 1.0;
    for (double l : lambda) {
      wilks /= 1.0 + l;
    }
    TestReport r = make_report("wilks", wilks, alpha);
    const double denom = p * p + h * h - 5.0;
    const double t = denom > 0.0 ? std::sqrt((p * p * h * h - 4.0) / denom) : 1.0;
    const double w = e + h - (p + h + 1.0) / 2.0;
    const double df1 = p * h;
    const double df2 = w * t - (p * h - 2.0) / 2.0;
    const double root = std::pow(wilks, 1.0 / t);
    const double f = root <= 0.0 ? std::numeric_limits<double>::infinity() : (1.0 - root) / root * df2 / df1;
    attach_f(r, f, df1, df2);
    out.wilks = r;
  }

  {
    double v = 0.0;
    for (double l : lambda) {
      v += l / (1.0 + l);
    }
    out.pillai = pillai_report(v, p, h, e, alpha);
  }

  {
    const double u = std::accumulate(lambda.begin(), lambda.end(), 0.0);
    TestReport r = make_report("hotelling-lawley", u, alpha);
    const double df1 = s * (2.0 * m_star + s + 1.0);
    const double df2 = 2.0 * (s * n_star + 1.0);
    const double f = df2 * u / (s * s * (2.0 * m_star + s + 1.0));
    attach_f(r, f, df1, df2);
    out.hotelling_lawley = r;
  }

  {
    const double top = lambda.empty() ? 0.0 : lambda.front();
    TestReport r = make_report("roy", top / (1.0 + top), alpha);
    const double q = std::max(p, h);
    const double df1 = q;
    const double df2 = e - q + h;
    attach_f(r, df2 / df1 * top, df1, df2);
    r.auxiliary.emplace_back("largest_root", top);
    r.notes.push_back("Roy's F is an upper bound; its p-value is a lower bound");
    out.roy = r;
  }
  return out;
}

ManovaResult manova(const Matrix& data, std::span<const int> labels, double alpha) {
  const SscpPair sscp = manova_sscp(data, labels);
  if (sscp.observations <= sscp.dimension + sscp.groups) {
    throw InvalidDesignError(fmt::format(
        "MANOVA needs more observations ({}) than dependent variables plus groups ({} + {}); "
        "reduce the dimension with the pc-anova route or use fewer basis functions",
        sscp.observations, sscp.dimension, sscp.groups));
  }
  return manova_test(sscp, alpha);
}

TestReport anova_oneway(std::span<const double> values, std::span<const int> labels, double alpha) {
  if (values.size() != labels.size()) {
    throw InvalidDesignError("number of labels does not match number of observations");
  }
  const std::vector<int> sizes = group_sizes(labels);
  const int m = static_cast<int>(sizes.size());
  const int n = static_cast<int>(values.size());
  if (m < 2) {
    throw InvalidDesignError("ANOVA needs at least two groups");
  }
  if (n <= m) {
    throw InvalidDesignError("ANOVA needs more observations than groups");
  }
  std::vector<double> sums(static_cast<std::size_t>(m), 0.0);
  double grand = 0.0;
  for (int r = 0; r < n; ++r) {
    sums[labels[r]] += values[r];
    grand += values[r];
  }
  grand /= n;
  double ssb = 0.0;
  for (int g = 0; g < m; ++g) {
    const double mean = sums[g] / sizes[g];
    ssb += sizes[g] * (mean - grand) * (mean - grand);
  }
  double ssw = 0.0;
  double sst = 0.0;
  for (int r = 0; r < n; ++r) {
    const double mean = sums[labels[r]] / sizes[labels[r]];
    ssw += (values[r] - mean) * (values[r] - mean);
    sst += (values[r] - grand) * (values[r] - grand);
  }

  TestReport report;
  report.method = "anova";
  report.statistic = "F";
  report.alpha = alpha;
  report.reference = "F";
  report.df1 = m - 1;
  report.df2 = n - m;
  report.auxiliary = {{"ssb", ssb}, {"ssw", ssw}};
  const double tiny = 1e-13 * sst;
  if (sst <= std::numeric_limits<double>::min()) {
    report.value = 0.0;
    report.p_value = 1.0;
    report.notes.push_back("all values equal");
  } else if (ssw <= tiny) {
    report.value = std::numeric_limits<double>::infinity();
    report.p_value = 0.0;
    report.notes.push_back("zero within-group variation with distinct group means");
  } else {
    report.value = (ssb / (m - 1)) / (ssw / (n - m));
    report.p_value = f_upper_tail(report.value, m - 1, n - m);
  }
  return report;
}

BonferroniBattery bonferroni_battery(const Matrix& scores, std::span<const int> labels, double alpha) {
  const Eigen::Index q = scores.cols();
  if (q < 1) {
    throw InvalidArgumentError("Bonferroni battery needs at least one component");
  }
  BonferroniBattery out;
  out.alpha = alpha;
  out.per_test_alpha = alpha / static_cast<double>(q);
  std::vector<double> column(static_cast<std::size_t>(scores.rows()));
  for (Eigen::Index k = 0; k < q; ++k) {
    Eigen::Map<Vector>(column.data(), scores.rows()) = scores.col(k);
    TestReport r = anova_oneway(column, labels, out.per_test_alpha);
    r.method = fmt::format("anova-pc{}", k + 1);
    out.adjusted_p.push_back(std::min(1.0, static_cast<double>(q) * r.p_value));
    out.reject = out.reject || r.reject();
    out.components.push_back(std::move(r));
  }
  return out;
}

}  // namespace fdh
