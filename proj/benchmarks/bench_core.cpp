#include <benchmark/benchmark.h>

#include <random>

#include "fdhomog/basis.hpp"
#include "fdhomog/fpca.hpp"
#include "fdhomog/nptest.hpp"
#include "fdhomog/paramtest.hpp"
#include "fdhomog/sim.hpp"
#include "fdhomog/smooth.hpp"

namespace {

using namespace fdh;

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

std::vector<int> balanced(int groups, int size) {
  std::vector<int> labels;
  for (int g = 0; g < groups; ++g) {
    labels.insert(labels.end(), static_cast<std::size_t>(size), g);
  }
  return labels;
}

CurveSet curves(int n, int points) {
  CurveSet set;
  set.grid = uniform_grid(points);
  set.values = gaussian(n, points, 1);
  const auto labels = balanced(3, n / 3);
  for (int i = 0; i < n; ++i) {
    set.ids.push_back("c" + std::to_string(i));
  }
  set.labels = GroupLabels::from_indices(labels);
  return set;
}

void BM_GramMatrix(benchmark::State& state) {
  const auto basis = make_basis(3, static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(gram_matrix(basis));
  }
}
BENCHMARK(BM_GramMatrix)->Arg(18)->Arg(40);

void BM_LeastSquaresFit(benchmark::State& state) {
  const CurveSet set = curves(75, 51);
  const auto basis = make_basis(3, 18);
  for (auto _ : state) {
    benchmark::DoNotOptimize(fit_least_squares(set, basis));
  }
}
BENCHMARK(BM_LeastSquaresFit);

void BM_LoocvSelection(benchmark::State& state) {
  const CurveSet set = curves(75, 101);
  const auto basis = make_basis(3, 20);
  const auto lambdas = default_lambda_grid();
  for (auto _ : state) {
    benchmark::DoNotOptimize(select_lambda_loocv(set, basis, lambdas));
  }
}
BENCHMARK(BM_LoocvSelection);

void BM_FpcaFit(benchmark::State& state) {
  const auto basis = make_basis(3, 18);
  const CoefficientSet coef = fit_least_squares(curves(75, 51), basis);
  const Matrix psi = gram_matrix(basis);
  for (auto _ : state) {
    benchmark::DoNotOptimize(fpca_fit(coef, psi));
  }
}
BENCHMARK(BM_FpcaFit);

void BM_Manova(benchmark::State& state) {
  const Matrix x = gaussian(75, 18, 2);
  const auto labels = balanced(3, 25);
  for (auto _ : state) {
    benchmark::DoNotOptimize(manova(x, labels));
  }
}
BENCHMARK(BM_Manova);

void BM_SpatialKruskal(benchmark::State& state) {
  const Matrix x = gaussian(75, static_cast<Eigen::Index>(state.range(0)), 3);
  const auto labels = balanced(3, 25);
  for (auto _ : state) {
    benchmark::DoNotOptimize(kruskal_multivariate(x, labels));
  }
}
BENCHMARK(BM_SpatialKruskal)->Arg(3)->Arg(18);

void BM_SpatialMood(benchmark::State& state) {
  const Matrix x = gaussian(75, 18, 4);
  const auto labels = balanced(3, 25);
  for (auto _ : state) {
    benchmark::DoNotOptimize(mood_multivariate(x, labels));
  }
}
BENCHMARK(BM_SpatialMood);

void BM_RunCell(benchmark::State& state) {
  sim::CellSpec cell;
  cell.scenario.mean = sim::MeanModel::m2;
  cell.scenario.sigma = 0.2;
  cell.method = sim::Method::parse("pc-3");
  cell.reps = 50;
  for (auto _ : state) {
    benchmark::DoNotOptimize(sim::run_cell(cell, 20200101, static_cast<int>(state.range(0))));
  }
  state.SetItemsProcessed(state.iterations() * cell.reps);
}
BENCHMARK(BM_RunCell)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
