#include <gtest/gtest.h>

#include <random>

#include "fdhomog/basis.hpp"
#include "fdhomog/errors.hpp"
#include "fdhomog/fpca.hpp"
#include "oracles.hpp"

namespace fdh {
namespace {

Matrix gaussian(Eigen::Index rows, Eigen::Index cols, unsigned seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> z;
  Matrix out(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) {
      out(i, j) = z(gen);
    }
  }
  return out;
}

CoefficientSet coefficient_set(const Matrix& a) {
  std::vector<int> index(static_cast<std::size_t>(a.rows()));
  std::vector<std::string> ids;
  for (std::size_t r = 0; r < index.size(); ++r) {
    index[r] = static_cast<int>(r % 2);
    ids.push_back("c" + std::to_string(r));
  }
  return CoefficientSet{a, ids, GroupLabels::from_indices(index), std::nullopt};
}

/// Coefficients with a decaying spectrum in the L2 geometry of a cubic basis.
struct Fixture {
  BSplineBasis basis = make_basis(3, 8);
  Matrix psi = gram_matrix(basis);
  Matrix a;
  FpcaModel model;

  explicit Fixture(unsigned seed = 1) {
    Matrix raw = gaussian(30, 8, seed);
    for (Eigen::Index k = 0; k < 8; ++k) {
      raw.col(k) *= std::pow(0.6, static_cast<double>(k));
    }
    a = raw;
    model = fpca_fit(coefficient_set(a), psi);
  }
};

TEST(SqrtGram, IdentityAndDiagonal) {
  const GramRoot id = sqrt_gram(Matrix::Identity(3, 3));
  EXPECT_LT((id.root - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff(), 1e-15);
  Matrix d = Matrix::Zero(2, 2);
  d(0, 0) = 4.0;
  d(1, 1) = 9.0;
  const GramRoot r = sqrt_gram(d);
  EXPECT_NEAR(r.root(0, 0), 2.0, 1e-15);
  EXPECT_NEAR(r.root(1, 1), 3.0, 1e-15);
  EXPECT_NEAR(r.inverse_root(1, 1), 1.0 / 3.0, 1e-15);
}

TEST(SqrtGram, MultipliesBackToCubicGram) {
  const Matrix psi = gram_matrix(make_basis(3, 18));
  const GramRoot r = sqrt_gram(psi);
  EXPECT_LT((r.root * r.root - psi).cwiseAbs().maxCoeff(), 1e-9);
  EXPECT_LT((r.root * r.inverse_root - Matrix::Identity(18, 18)).cwiseAbs().maxCoeff(), 1e-9);
  EXPECT_EQ(r.root, r.root.transpose());
}

TEST(SqrtGram, SingularInputRejected) {
  Matrix s = Matrix::Ones(2, 2);
  EXPECT_THROW((void)sqrt_gram(s), ConditioningError);
}

TEST(Fpca, IdenticalCurvesKeepNoComponent) {
  Matrix a(5, 4);
  a.rowwise() = Eigen::RowVector4d(0.3, -1.0, 2.0, 0.7);
  const FpcaModel model = fpca_fit(coefficient_set(a), gram_matrix(make_basis(3, 4)));
  EXPECT_EQ(model.components(), 0);
  EXPECT_EQ(model.scores.cols(), 0);
}

TEST(Fpca, MirroredCurvesGiveOneComponent) {
  const Vector c = Eigen::Vector4d(1.0, -0.5, 0.25, 2.0);
  const Vector center = Eigen::Vector4d(0.1, 0.2, 0.3, 0.4);
  Matrix a(2, 4);
  a.row(0) = (center + c).transpose();
  a.row(1) = (center - c).transpose();
  const FpcaModel model = fpca_fit(coefficient_set(a), gram_matrix(make_basis(3, 4)));
  ASSERT_EQ(model.components(), 1);
  EXPECT_NEAR(explained_variance(model).proportion[0], 1.0, 1e-15);
  EXPECT_EQ(components_for_variance(model, 0.99), 1);
}

TEST(Fpca, TraceIdentity) {
  const Matrix a = gaussian(10, 5, 4);
  const Matrix psi = gram_matrix(make_basis(2, 5));
  const FpcaModel model = fpca_fit(coefficient_set(a), psi);
  const GramRoot r = sqrt_gram(psi);
  const Matrix centered = a.rowwise() - a.colwise().mean();
  const double trace = (r.root * centered.transpose() * centered * r.root).trace() / 10.0;
  EXPECT_NEAR(model.eigenvalues.sum(), trace, 1e-10);
}

TEST(Fpca, EigenvaluesMatchSvdOracle) {
  const Matrix a = gaussian(6, 4, 12);
  const Matrix psi = gram_matrix(make_basis(3, 4));
  const FpcaModel model = fpca_fit(coefficient_set(a), psi);
  const Vector reference = oracle::svd_fpca_eigenvalues(a, psi);
  ASSERT_EQ(model.components(), 4);
  for (int k = 0; k < 4; ++k) {
    EXPECT_NEAR(model.eigenvalues(k), reference(k), 1e-8);
  }
}

TEST(Fpca, EigenfunctionsOrthonormalInL2) {
  const Fixture f;
  const Matrix gram = f.model.eigenfunctions.transpose() * f.psi * f.model.eigenfunctions;
  EXPECT_LT((gram - Matrix::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(Fpca, ScoresCenteredAndUncorrelated) {
  const Fixture f;
  const Matrix& xi = f.model.scores;
  const double n = static_cast<double>(xi.rows());
  EXPECT_LT(xi.colwise().mean().cwiseAbs().maxCoeff(), 1e-8);
  const Matrix cov = xi.transpose() * xi / n;
  const double l1 = f.model.eigenvalues(0);
  for (Eigen::Index j = 0; j < cov.rows(); ++j) {
    EXPECT_NEAR(cov(j, j), f.model.eigenvalues(j), 1e-8);
    for (Eigen::Index k = 0; k < cov.cols(); ++k) {
      if (j != k) {
        EXPECT_LT(std::abs(cov(j, k)), 1e-8 * l1);
      }
    }
  }
}

TEST(Fpca, EigenvaluesSumToTotalL2Variance) {
  const Fixture f;
  const Matrix centered = f.a.rowwise() - f.a.colwise().mean();
  double total = 0.0;
  for (Eigen::Index i = 0; i < centered.rows(); ++i) {
    total += centered.row(i) * f.psi * centered.row(i).transpose();
  }
  EXPECT_NEAR(f.model.eigenvalues.sum(), total / static_cast<double>(centered.rows()), 1e-8);
}

TEST(Fpca, SignConventionLargestEntryPositive) {
  const Fixture f;
  for (Eigen::Index k = 0; k < f.model.eigenfunctions.cols(); ++k) {
    Eigen::Index pivot = 0;
    f.model.eigenfunctions.col(k).cwiseAbs().maxCoeff(&pivot);
    EXPECT_GT(f.model.eigenfunctions(pivot, k), 0.0);
  }
  // Negating all coefficients leaves the eigenfunctions unchanged.
  const FpcaModel flipped = fpca_fit(coefficient_set(-f.a), f.psi);
  EXPECT_LT((flipped.eigenfunctions - f.model.eigenfunctions).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(FpcaScores, ReproduceFittedScores) {
  const Fixture f;
  const Matrix xi = fpca_scores(f.model, f.a, f.model.components());
  EXPECT_LT((xi - f.model.scores).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(FpcaScores, MeanCurveScoresZero) {
  const Fixture f;
  const Matrix xi = fpca_scores(f.model, Matrix(f.model.mean.transpose()), 3);
  EXPECT_LT(xi.cwiseAbs().maxCoeff(), 1e-14);
}

TEST(FpcaScores, MeanPlusFirstEigenfunction) {
  const Fixture f;
  const Matrix row = (f.model.mean + f.model.eigenfunctions.col(0)).transpose();
  const Matrix xi = fpca_scores(f.model, row, 4);
  EXPECT_NEAR(xi(0, 0), 1.0, 1e-10);
  EXPECT_LT(xi.rightCols(3).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(FpcaScores, TooManyComponentsIsRangeError) {
  const Fixture f;
  EXPECT_THROW((void)fpca_scores(f.model, f.a, f.model.components() + 1), RangeError);
  EXPECT_THROW((void)reconstruct(f.model, -1), RangeError);
}

TEST(ExplainedVariance, ThreeToOne) {
  FpcaModel model;
  model.eigenvalues = Eigen::Vector2d(3.0, 1.0);
  const auto ev = explained_variance(model);
  EXPECT_DOUBLE_EQ(ev.proportion[0], 0.75);
  EXPECT_DOUBLE_EQ(ev.proportion[1], 0.25);
  EXPECT_EQ(ev.cumulative.back(), 1.0);
}

TEST(ExplainedVariance, FourComponentLayout) {
  FpcaModel model;
  model.eigenvalues = Vector(5);
  model.eigenvalues << 99.639, 0.284, 0.046, 0.020, 0.011;
  EXPECT_EQ(format_variance_percentages(model), "99.639, 0.284, 0.046, 0.020");
  EXPECT_EQ(format_variance_percentages(model, 2), "99.639, 0.284");
}

TEST(ExplainedVariance, ThresholdSelectsSmallestQ) {
  FpcaModel model;
  model.eigenvalues = Eigen::Vector4d(90.0, 6.0, 3.0, 1.0);
  EXPECT_EQ(components_for_variance(model, 0.9), 1);
  EXPECT_EQ(components_for_variance(model, 0.95), 2);
  EXPECT_EQ(components_for_variance(model, 0.99), 3);
  EXPECT_EQ(components_for_variance(model, 1.0), 4);
  EXPECT_THROW((void)components_for_variance(model, 0.0), InvalidArgumentError);
}

TEST(Reconstruct, FullRankReproducesData) {
  const Fixture f;
  ASSERT_EQ(f.model.components(), 8);
  EXPECT_LT((reconstruct(f.model, 8) - f.a).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(Reconstruct, ZeroComponentsGiveMean) {
  const Fixture f;
  const Matrix r = reconstruct(f.model, 0);
  for (Eigen::Index i = 0; i < r.rows(); ++i) {
    EXPECT_LT((r.row(i).transpose() - f.model.mean).cwiseAbs().maxCoeff(), 1e-15);
  }
}

TEST(Reconstruct, ErrorNonincreasingInQ) {
  const Fixture f;
  double previous = std::numeric_limits<double>::infinity();
  for (int q = 0; q <= f.model.components(); ++q) {
    const Matrix diff = f.a - reconstruct(f.model, q);
    double err = 0.0;
    for (Eigen::Index i = 0; i < diff.rows(); ++i) {
      err += diff.row(i) * f.psi * diff.row(i).transpose();
    }
    EXPECT_LE(err, previous + 1e-12);
    previous = err;
  }
  EXPECT_LT(previous, 1e-12);
}

TEST(Fpca, TooFewCurves) {
  EXPECT_THROW((void)fpca_fit(CoefficientSet{Matrix::Ones(1, 4), {"a"}, GroupLabels::from_indices({0}), std::nullopt},
                              gram_matrix(make_basis(3, 4))),
               InsufficientDataError);
}

TEST(EigenfunctionValues, UnitL2NormOnDenseGrid) {
  Fixture f;
  f.model.basis = f.basis;
  const auto grid = uniform_grid(4001);
  const Matrix values = eigenfunction_values(f.model, grid);
  for (Eigen::Index k = 0; k < values.cols(); ++k) {
    // Composite Simpson rule on 4000 intervals.
    double sq = 0.0;
    for (Eigen::Index s = 0; s < values.rows(); ++s) {
      const double w = (s == 0 || s + 1 == values.rows()) ? 1.0 : (s % 2 == 1 ? 4.0 : 2.0);
      sq += w * values(s, k) * values(s, k);
    }
    sq /= 3.0 * 4000.0;
    EXPECT_NEAR(sq, 1.0, 1e-8);
  }
}

}  // namespace
}  // namespace fdh
