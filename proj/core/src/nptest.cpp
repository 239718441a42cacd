#include "fdhomog/nptest.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "fdhomog/errors.hpp"
#include "fdhomog/rng.hpp"
#include "fdhomog/smooth.hpp"

namespace fdh {

Vector spatial_sign(const Vector& x) {
  const double norm = x.norm();
  if (norm <= 1e-12) {
    return Vector::Zero(x.size());
  }
  return x / norm;
}

double spatial_median_objective(const Matrix& data, const Vector& point) {
  return (data.rowwise() - point.transpose()).rowwise().norm().sum();
}

namespace {

/// Vardi-Zhang condition: x_j minimizes the objective when the unit pull of
/// the other points does not exceed its multiplicity.
bool data_point_optimal(const Matrix& data, Eigen::Index j, double coincide) {
  const Vector x = data.row(j).transpose();
  Vector pull = Vector::Zero(data.cols());
  int multiplicity = 0;
  for (Eigen::Index i = 0; i < data.rows(); ++i) {
    const Vector diff = data.row(i).transpose() - x;
    const double dist = diff.norm();
    if (dist <= coincide) {
      ++multiplicity;
    } else {
      pull += diff / dist;
    }
  }
  return pull.norm() <= multiplicity;
}

}  // namespace

Vector spatial_median(const Matrix& data, const SpatialMedianOptions& options) {
  const Eigen::Index n = data.rows();
  const Eigen::Index d = data.cols();
  if (n < 1) {
    throw InsufficientDataError("spatial median of an empty sample");
  }
  if (d == 1) {
    std::vector<double> v(data.data(), data.data() + n);
    std::sort(v.begin(), v.end());
    const auto half = static_cast<std::size_t>(n / 2);
    Vector out(1);
    out(0) = n % 2 == 1 ? v[half] : 0.5 * (v[half - 1] + v[half]);
    return out;
  }
  if (n == 1) {
    return data.row(0).transpose();
  }

  const double coincide = 1e-12 * (1.0 + data.cwiseAbs().maxCoeff());
  Vector y = data.colwise().mean().transpose();
  for (int iter = 0; iter < options.max_iterations; ++iter) {
    Vector weighted = Vector::Zero(d);
    Vector pull = Vector::Zero(d);
    double weight_sum = 0.0;
    int coincident = 0;
    Matrix hessian = Matrix::Zero(d, d);
    Eigen::Index nearest = 0;
    double nearest_dist = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < n; ++i) {
      const Vector diff = data.row(i).transpose() - y;
      const double dist = diff.norm();
      if (dist < nearest_dist) {
        nearest = i;
        nearest_dist = dist;
      }
      if (dist <= coincide) {
        ++coincident;
        continue;
      }
      const double w = 1.0 / dist;
      weighted += w * data.row(i).transpose();
      pull += w * diff;
      weight_sum += w;
      const Vector u = w * diff;
      hessian += w * (Matrix::Identity(d, d) - u * u.transpose());
    }
    if (weight_sum == 0.0) {
      return y;  // every point coincides with y
    }
    const Vector target = weighted / weight_sum;
    Vector next;
    if (coincident == 0) {
      next = target;
      // Weiszfeld contracts slowly when the optimum lies close to a data
      // point; a Newton step is taken whenever it does better.
      const Vector newton = y + hessian.ldlt().solve(pull);
      if (newton.allFinite() &&
          spatial_median_objective(data, newton) < spatial_median_objective(data, target)) {
        next = newton;
      }
    } else {
      // Vardi-Zhang: a data point is optimal when the pull of the others
      // does not exceed its multiplicity.
      const double r = pull.norm();
      if (r <= coincident) {
        return y;
      }
      const double beta = coincident / r;
      next = (1.0 - beta) * target + beta * y;
    }
    const double step = (next - y).norm();
    y = std::move(next);
    if (step <= options.tolerance) {
      return y;
    }
    // Iterates approach an optimal data point only sublinearly, so test the
    // closest one directly once progress stalls.
    if (coincident == 0 && iter >= 20 && data_point_optimal(data, nearest, coincide)) {
      return data.row(nearest).transpose();
    }
  }
  throw ConvergenceError(std::vector<double>(y.data(), y.data() + y.size()),
                         fmt::format("spatial median did not converge in {} iterations", options.max_iterations));
}

Matrix spatial_signs(const Matrix& data, const Vector& center) {
  Matrix out(data.rows(), data.cols());
  for (Eigen::Index i = 0; i < data.rows(); ++i) {
    out.row(i) = spatial_sign(data.row(i).transpose() - center).transpose();
  }
  return out;
}

Matrix spatial_ranks(const Matrix& data) {
  const Eigen::Index n = data.rows();
  Matrix out = Matrix::Zero(n, data.cols());
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index k = i + 1; k < n; ++k) {
      const Vector s = spatial_sign((data.row(i) - data.row(k)).transpose());
      out.row(i) += s.transpose();
      out.row(k) -= s.transpose();
    }
  }
  return out / static_cast<double>(n);
}

namespace {

/// Transformed observations premultiplied by a (pseudo-)inverse square root of
/// their normalizer, so Q is a sum of squared group totals.
struct Standardized {
  Matrix z;
  int rank = 0;
  int dimension = 0;
};

Standardized standardize(SpatialTest test, const Matrix& data) {
  Matrix t;
  if (test == SpatialTest::mood) {
    t = spatial_signs(data, spatial_median(data));
  } else {
    t = spatial_ranks(data);
  }
  const double n = static_cast<double>(data.rows());
  Matrix normalizer = t.transpose() * t / n;
  normalizer = 0.5 * (normalizer + normalizer.transpose()).eval();
  const Eigen::SelfAdjointEigenSolver<Matrix> eig(normalizer);
  const Vector& values = eig.eigenvalues();
  const double largest = values.size() > 0 ? values.maxCoeff() : 0.0;

  Standardized out;
  out.dimension = static_cast<int>(data.cols());
  std::vector<Eigen::Index> kept;
  for (Eigen::Index k = 0; k < values.size(); ++k) {
    if (largest > 1e-300 && values(k) > 1e-10 * largest) {
      kept.push_back(k);
    }
  }
  out.rank = static_cast<int>(kept.size());
  Matrix factor(data.cols(), out.rank);
  for (int c = 0; c < out.rank; ++c) {
    factor.col(c) = eig.eigenvectors().col(kept[c]) / std::sqrt(values(kept[c]));
  }
  out.z = t * factor;
  return out;
}

double statistic(const Matrix& z, std::span<const int> labels, std::span<const int> sizes) {
  Matrix totals = Matrix::Zero(static_cast<Eigen::Index>(sizes.size()), z.cols());
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    totals.row(labels[i]) += z.row(i);
  }
  double q = 0.0;
  for (std::size_t g = 0; g < sizes.size(); ++g) {
    q += totals.row(static_cast<Eigen::Index>(g)).squaredNorm() / sizes[g];
  }
  return q;
}

double permutation_from(const Matrix& z, std::span<const int> labels, std::span<const int> sizes,
                        double observed, int permutations, std::uint64_t seed) {
  if (permutations < 99) {
    throw InvalidArgumentError("permutation p-values need at least 99 permutations");
  }
  const double threshold = observed - 1e-9 * std::max(1.0, std::abs(observed));
  std::vector<int> shuffled(labels.begin(), labels.end());
  int at_least = 0;
  for (int b = 0; b < permutations; ++b) {
    std::copy(labels.begin(), labels.end(), shuffled.begin());
    PhiloxEngine engine(seed, static_cast<std::uint64_t>(b));
    std::shuffle(shuffled.begin(), shuffled.end(), engine);
    if (statistic(z, shuffled, sizes) >= threshold) {
      ++at_least;
    }
  }
  return (1.0 + at_least) / (1.0 + permutations);
}

std::vector<int> checked_sizes(const Matrix& data, std::span<const int> labels) {
  if (static_cast<std::size_t>(data.rows()) != labels.size()) {
    throw InvalidDesignError("number of labels does not match number of observations");
  }
  std::vector<int> sizes = group_sizes(labels);
  if (sizes.size() < 2) {
    throw InvalidDesignError("homogeneity tests need at least two groups");
  }
  return sizes;
}

TestReport spatial_test(SpatialTest test, const Matrix& data, std::span<const int> labels,
                        const SpatialTestOptions& options) {
  const std::vector<int> sizes = checked_sizes(data, labels);
  const Standardized st = standardize(test, data);
  const bool singular = st.rank < st.dimension;
  if (singular && options.strict) {
    throw DegenerateGeometryError(fmt::format(
        "{} normalizer is singular (rank {} < dimension {})", test == SpatialTest::mood ? "spatial sign" : "spatial rank",
        st.rank, st.dimension));
  }

  TestReport report;
  report.method = test == SpatialTest::mood ? "np-mood" : "np-kw";
  report.statistic = "Q";
  report.alpha = options.alpha;
  report.value = statistic(st.z, labels, sizes);
  report.df1 = static_cast<double>(st.dimension) * (static_cast<double>(sizes.size()) - 1.0);

  if (singular || options.reference == PValueReference::permutation) {
    report.reference = "permutation";
    report.p_value = permutation_from(st.z, labels, sizes, report.value, options.permutations, options.seed);
    report.auxiliary.emplace_back("permutations", options.permutations);
    if (singular) {
      report.notes.push_back(fmt::format(
          "normalizer is singular (rank {} < dimension {}); statistic uses its pseudo-inverse and the "
          "p-value comes from {} label permutations",
          st.rank, st.dimension, options.permutations));
    }
  } else {
    report.reference = "chi2";
    report.p_value = chi2_upper_tail(report.value, report.df1);
  }
  return report;
}

}  // namespace

TestReport mood_multivariate(const Matrix& data, std::span<const int> labels, const SpatialTestOptions& options) {
  return spatial_test(SpatialTest::mood, data, labels, options);
}

TestReport kruskal_multivariate(const Matrix& data, std::span<const int> labels, const SpatialTestOptions& options) {
  return spatial_test(SpatialTest::kruskal, data, labels, options);
}

double spatial_statistic(SpatialTest test, const Matrix& data, std::span<const int> labels) {
  const std::vector<int> sizes = checked_sizes(data, labels);
  return statistic(standardize(test, data).z, labels, sizes);
}

double permutation_pvalue(SpatialTest test, const Matrix& data, std::span<const int> labels, int permutations,
                          std::uint64_t seed) {
  const std::vector<int> sizes = checked_sizes(data, labels);
  const Standardized st = standardize(test, data);
  const double observed = statistic(st.z, labels, sizes);
  return permutation_from(st.z, labels, sizes, observed, permutations, seed);
}

RankSumResult wilcoxon_rank_sum(std::span<const double> x, std::span<const double> y) {
  if (x.empty() || y.empty()) {
    throw InvalidDesignError("rank-sum test needs two nonempty samples");
  }
  const std::size_t n1 = x.size();
  const std::size_t n2 = y.size();
  const std::size_t n = n1 + n2;
  std::vector<std::pair<double, bool>> pooled;
  pooled.reserve(n);
  for (double v : x) {
    pooled.emplace_back(v, true);
  }
  for (double v : y) {
    pooled.emplace_back(v, false);
  }
  std::sort(pooled.begin(), pooled.end(), [](const auto& a, const auto& b) { return a.first < b.first; });

  RankSumResult out;
  double tie_term = 0.0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && pooled[j].first == pooled[i].first) {
      ++j;
    }
    const double rank = 0.5 * static_cast<double>(i + 1 + j);  // average of ranks i+1..j
    const double t = static_cast<double>(j - i);
    tie_term += t * t * t - t;
    for (std::size_t k = i; k < j; ++k) {
      if (pooled[k].second) {
        out.rank_sum += rank;
      }
    }
    i = j;
  }
  const double a = static_cast<double>(n1);
  const double b = static_cast<double>(n2);
  const double nn = static_cast<double>(n);
  out.u = out.rank_sum - a * (a + 1.0) / 2.0;
  const double centered = out.u - a * b / 2.0;
  const double sigma = std::sqrt(a * b / 12.0 * ((nn + 1.0) - tie_term / (nn * (nn - 1.0))));
  if (!(sigma > 0.0)) {
    out.z = 0.0;
    out.p_value = 1.0;
    return out;
  }
  const double correction = centered > 0.0 ? 0.5 : (centered < 0.0 ? -0.5 : 0.0);
  out.z = (centered - correction) / sigma;
  const double lower = normal_cdf(out.z);
  out.p_value = std::min(1.0, 2.0 * std::min(lower, 1.0 - lower));
  return out;
}

std::vector<double> benjamini_hochberg(std::span<const double> p) {
  const std::size_t m = p.size();
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return p[a] < p[b]; });
  std::vector<double> out(m);
  double running = 1.0;
  for (std::size_t k = m; k-- > 0;) {
    const double scaled = p[order[k]] * static_cast<double>(m) / static_cast<double>(k + 1);
    running = std::min(running, scaled);
    out[order[k]] = std::min(1.0, running);
  }
  return out;
}

PairwiseTable wilcoxon_pairwise_bh(std::span<const double> values, std::span<const int> labels) {
  if (values.size() != labels.size()) {
    throw InvalidDesignError("number of labels does not match number of observations");
  }
  const std::vector<int> sizes = group_sizes(labels);
  const auto m = static_cast<Eigen::Index>(sizes.size());
  if (m < 2) {
    throw InvalidDesignError("pairwise comparisons need at least two groups");
  }
  std::vector<std::vector<double>> groups(static_cast<std::size_t>(m));
  for (std::size_t r = 0; r < values.size(); ++r) {
    groups[labels[r]].push_back(values[r]);
  }
  const double nan = std::numeric_limits<double>::quiet_NaN();
  PairwiseTable out{Matrix::Constant(m, m, nan), Matrix::Constant(m, m, nan), Matrix::Constant(m, m, nan)};
  std::vector<double> raw;
  std::vector<std::pair<Eigen::Index, Eigen::Index>> pairs;
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = i + 1; j < m; ++j) {
      const RankSumResult r = wilcoxon_rank_sum(groups[i], groups[j]);
      const double pooled = static_cast<double>(groups[i].size() + groups[j].size());
      out.rank_sum(i, j) = r.rank_sum;
      out.rank_sum(j, i) = pooled * (pooled + 1.0) / 2.0 - r.rank_sum;
      out.raw_p(i, j) = out.raw_p(j, i) = r.p_value;
      raw.push_back(r.p_value);
      pairs.emplace_back(i, j);
    }
  }
  const std::vector<double> adjusted = benjamini_hochberg(raw);
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    out.adjusted_p(pairs[k].first, pairs[k].second) = adjusted[k];
    out.adjusted_p(pairs[k].second, pairs[k].first) = adjusted[k];
  }
  return out;
}

}  // namespace fdh
