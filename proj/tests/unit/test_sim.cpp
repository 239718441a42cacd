#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "fdhomog/basis.hpp"
#include "fdhomog/errors.hpp"
#include "fdhomog/sim.hpp"

namespace fdh::sim {
namespace {

Scenario scenario(MeanModel mean, ErrorFamily family, double sigma, int n) {
  Scenario s;
  s.mean = mean;
  s.family = family;
  s.sigma = sigma;
  s.group_size = n;
  return s;
}

CellSpec cell(MeanModel mean, ErrorFamily family, double sigma, int n, const std::string& method, int reps) {
  return CellSpec{scenario(mean, family, sigma, n), Method::parse(method), reps};
}

TEST(MeanFunction, Examples) {
  EXPECT_NEAR(mean_function(MeanModel::m2, 2, 0.125), 0.1, 1e-15);
  for (double t : {0.0, 0.1, 0.33, 0.7, 1.0}) {
    EXPECT_EQ(mean_function(MeanModel::m1, 1, t), mean_function(MeanModel::m2, 2, t));
    EXPECT_EQ(mean_function(MeanModel::m1, 3, t), mean_function(MeanModel::m1, 1, t));
    EXPECT_NEAR(mean_function(MeanModel::m3, 2, t), 0.5 * mean_function(MeanModel::m2, 2, t), 1e-15);
  }
  EXPECT_EQ(mean_function(MeanModel::m3, 3, 0.0), 0.0);
}

TEST(Method, ParseAndName) {
  EXPECT_EQ(Method::parse("basis-coef").kind, Method::Kind::basis_coef);
  EXPECT_EQ(Method::parse("pc-5").q, 5);
  EXPECT_EQ(Method::parse("pc-8").name(), "pc-8");
  EXPECT_THROW((void)Method::parse("pc-"), ValidationError);
  EXPECT_THROW((void)Method::parse("pc-0"), ValidationError);
  EXPECT_THROW((void)Method::parse("pca"), ValidationError);
}

TEST(WienerKl, EigenvalueFormula) {
  EXPECT_NEAR(WienerKl::eigenvalue(0.1, 1), 0.04 / (std::numbers::pi * std::numbers::pi), 1e-18);
  EXPECT_NEAR(WienerKl::eigenvalue(0.1, 1), 4.0528e-3, 1e-7);
  EXPECT_NEAR(WienerKl::eigenfunction(1, 1.0), std::numbers::sqrt2, 1e-15);
}

TEST(WienerKl, PathsStartAtZero) {
  const auto grid = uniform_grid(51);
  PhiloxEngine rng(3, 0);
  for (int k = 0; k < 100; ++k) {
    EXPECT_EQ(wiener_kl_sample(0.3, 20, grid, rng)(0), 0.0);
  }
}

TEST(WienerKl, TerminalVarianceMatchesTruncatedValue) {
  const auto grid = uniform_grid(51);
  const double sigma = 0.2;
  const WienerKl process(sigma, 20, grid);
  double analytic = 0.0;
  for (int k = 1; k <= 20; ++k) {
    const double s = std::sin((k - 0.5) * std::numbers::pi);
    analytic += sigma * sigma * 2.0 / ((k - 0.5) * (k - 0.5) * std::numbers::pi * std::numbers::pi) * s * s;
  }
  EXPECT_NEAR(process.variance()(50), analytic, 1e-15);
  PhiloxEngine rng(11, 0);
  const int draws = 20000;
  double sum = 0.0;
  double sq = 0.0;
  for (int k = 0; k < draws; ++k) {
    const double x = process.sample(rng)(50);
    sum += x;
    sq += x * x;
  }
  const double mean = sum / draws;
  const double var = (sq - draws * mean * mean) / (draws - 1);
  const double se = analytic * std::sqrt(2.0 / (draws - 1));
  EXPECT_NEAR(var, analytic, 3.0 * se);
}

TEST(Lognormal, CenteredAndRightSkewed) {
  const auto grid = uniform_grid(51);
  const WienerKl process(0.4, 20, grid);
  PhiloxEngine rng(12, 0);
  const int draws = 20000;
  std::vector<double> mid(draws);
  std::vector<double> end(draws);
  for (int k = 0; k < draws; ++k) {
    const Vector eta = process.sample_lognormal(rng);
    EXPECT_EQ(eta(0), 0.0);
    mid[static_cast<std::size_t>(k)] = eta(25);
    end[static_cast<std::size_t>(k)] = eta(50);
  }
  const auto moments = [](const std::vector<double>& x) {
    double m = 0.0;
    for (double v : x) {
      m += v / static_cast<double>(x.size());
    }
    double m2 = 0.0;
    double m3 = 0.0;
    for (double v : x) {
      m2 += (v - m) * (v - m) / static_cast<double>(x.size());
      m3 += (v - m) * (v - m) * (v - m) / static_cast<double>(x.size());
    }
    return std::array<double, 3>{m, m2, m3 / std::pow(m2, 1.5)};
  };
  const auto a = moments(mid);
  EXPECT_LT(std::abs(a[0]), 3.0 * std::sqrt(a[1] / draws));
  EXPECT_GT(moments(end)[2], 0.0);
}

TEST(GenerateReplicate, ShapesAndLabels) {
  PhiloxEngine rng(1, 0);
  const Replicate r = generate_replicate(scenario(MeanModel::m2, ErrorFamily::gaussian, 0.1, 15), rng);
  EXPECT_EQ(r.curves.curves(), 45);
  EXPECT_EQ(r.curves.grid.size(), 51u);
  EXPECT_EQ(r.coefficients.dimension(), 18);
  EXPECT_EQ(r.coefficients.labels.sizes(), (std::vector<int>{15, 15, 15}));
  r.curves.validate();
  r.coefficients.validate();
}

TEST(GenerateReplicate, NearNoiselessRecoversProjectedMeans) {
  const Scenario sc = scenario(MeanModel::m2, ErrorFamily::gaussian, 1e-8, 10);
  PhiloxEngine rng(2, 0);
  const Replicate r = generate_replicate(sc, rng);
  const auto basis = make_basis(3, 18);
  const auto grid = uniform_grid(51);
  const Matrix b = eval_basis(basis, grid);
  for (int g = 0; g < 3; ++g) {
    Vector mean_coef = Vector::Zero(18);
    Vector mu(51);
    for (int s = 0; s < 51; ++s) {
      mu(s) = mean_function(sc.mean, g + 1, grid[static_cast<std::size_t>(s)]);
    }
    for (int i = 0; i < 10; ++i) {
      mean_coef += r.coefficients.coefficients.row(g * 10 + i).transpose() / 10.0;
    }
    const Vector fitted = b * mean_coef;
    const Vector projection = b * b.colPivHouseholderQr().solve(mu);
    EXPECT_LT((fitted - projection).cwiseAbs().maxCoeff(), 1e-6);
    EXPECT_LE((fitted - mu).cwiseAbs().maxCoeff(), 0.0112 * (g + 1) + 1e-6);
  }
}

TEST(GenerateReplicate, StreamsGiveDifferentData) {
  const Scenario sc = scenario(MeanModel::m1, ErrorFamily::gaussian, 0.1, 5);
  PhiloxEngine a(7, stream_id(0, 0));
  PhiloxEngine b(7, stream_id(0, 1));
  PhiloxEngine c(7, stream_id(0, 0));
  const Matrix va = generate_replicate(sc, a).curves.values;
  EXPECT_NE(va, generate_replicate(sc, b).curves.values);
  EXPECT_EQ(va, generate_replicate(sc, c).curves.values);
}

TEST(RunCell, DeterministicAndWorkerIndependent) {
  const CellSpec c = cell(MeanModel::m2, ErrorFamily::gaussian, 0.4, 15, "pc-3", 60);
  const StudyResult one = run_cell(c, 99, 1);
  const StudyResult again = run_cell(c, 99, 1);
  const StudyResult eight = run_cell(c, 99, 8);
  EXPECT_EQ(one.accepted, again.accepted);
  EXPECT_EQ(one.accepted, eight.accepted);
  EXPECT_EQ(one.completed, 60);
  EXPECT_EQ(one.excluded, 0);
  EXPECT_GE(one.acceptance(), 0.0);
  EXPECT_LE(one.acceptance(), 1.0);
}

TEST(RunCell, StrongSignalAlwaysRejected) {
  for (const char* method : {"basis-coef", "pc-3", "pc-5", "pc-8"}) {
    const StudyResult r = run_cell(cell(MeanModel::m2, ErrorFamily::gaussian, 0.02, 25, method, 50), 5);
    EXPECT_LE(r.acceptance(), 0.01) << method;
  }
  const StudyResult np = run_cell(cell(MeanModel::m2, ErrorFamily::lognormal, 0.02, 25, "pc-8", 50), 5);
  EXPECT_LE(np.acceptance(), 0.01);
}

TEST(RunCell, RejectsImpossibleConfigurations) {
  EXPECT_THROW((void)run_cell(cell(MeanModel::m1, ErrorFamily::gaussian, 0.1, 15, "pc-3", 0), 1), InvalidArgumentError);
  EXPECT_THROW((void)run_cell(cell(MeanModel::m1, ErrorFamily::gaussian, 0.1, 15, "pc-19", 5), 1),
               InvalidArgumentError);
}

TEST(RunCell, SmallSampleFailuresAreExcluded) {
  // n = 6 curves in 18 dimensions: MANOVA refuses every replicate.
  const StudyResult r = run_cell(cell(MeanModel::m1, ErrorFamily::gaussian, 0.1, 2, "basis-coef", 10), 1);
  EXPECT_EQ(r.excluded, 10);
  EXPECT_EQ(r.completed, 0);
  EXPECT_EQ(r.acceptance(), 0.0);
}

TEST(RunStudy, MethodsShareScenarioStreams) {
  const std::vector<CellSpec> cells = {cell(MeanModel::m2, ErrorFamily::gaussian, 0.2, 15, "basis-coef", 20),
                                       cell(MeanModel::m3, ErrorFamily::gaussian, 0.2, 15, "pc-3", 20),
                                       cell(MeanModel::m2, ErrorFamily::gaussian, 0.2, 15, "pc-3", 20)};
  const auto results = run_study(cells, 77, 2);
  ASSERT_EQ(results.size(), 3u);
  EXPECT_EQ(results[0].accepted, run_cell(cells[0], 77, 1, 0).accepted);
  EXPECT_EQ(results[1].accepted, run_cell(cells[1], 77, 1, 1).accepted);
  EXPECT_EQ(results[2].accepted, run_cell(cells[2], 77, 1, 0).accepted);
}

TEST(RunStudy, SingleCellGivesSingleRow) {
  const std::vector<CellSpec> cells = {cell(MeanModel::m1, ErrorFamily::gaussian, 0.05, 15, "basis-coef", 10)};
  const auto results = run_study(cells, 1, 1);
  const std::string csv = study_csv(results);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 2);
  EXPECT_THROW((void)run_study(std::vector<CellSpec>{}, 1, 1), InvalidArgumentError);
}

TEST(RunStudy, IdenticalAcrossWorkerCounts) {
  std::vector<CellSpec> cells;
  for (const char* method : {"basis-coef", "pc-3"}) {
    cells.push_back(cell(MeanModel::m2, ErrorFamily::gaussian, 0.4, 15, method, 40));
    cells.push_back(cell(MeanModel::m1, ErrorFamily::lognormal, 0.2, 15, method, 40));
  }
  const auto one = run_study(cells, 2024, 1);
  const auto many = run_study(cells, 2024, 8);
  EXPECT_EQ(study_csv(one), study_csv(many));
  EXPECT_EQ(study_markdown(one), study_markdown(many));
}

TEST(Study, LevelControlUnderNull) {
  std::vector<CellSpec> cells;
  for (ErrorFamily family : {ErrorFamily::gaussian, ErrorFamily::lognormal}) {
    for (const auto& c : published_design(family, 300)) {
      if (c.scenario.mean == MeanModel::m1 && c.scenario.group_size == 25) {
        cells.push_back(c);
      }
    }
  }
  ASSERT_EQ(cells.size(), 40u);
  for (const auto& r : run_study(cells, 20200101, 8)) {
    EXPECT_GE(r.acceptance(), 0.9) << to_string(r.cell.scenario.family) << " sigma=" << r.cell.scenario.sigma << " "
                                   << r.cell.method.name();
    EXPECT_EQ(r.excluded, 0);
  }
}

TEST(Study, PowerOrderingAcrossSigmaAndModels) {
  std::vector<CellSpec> cells;
  const std::vector<double> sigmas = {0.02, 0.05, 0.1, 0.2, 0.4};
  for (MeanModel mean : {MeanModel::m2, MeanModel::m3}) {
    for (double s : sigmas) {
      cells.push_back(cell(mean, ErrorFamily::gaussian, s, 15, "basis-coef", 200));
    }
  }
  const auto results = run_study(cells, 31, 8);
  for (std::size_t k = 1; k < sigmas.size(); ++k) {
    EXPECT_LE(results[k - 1].acceptance(), results[k].acceptance() + 0.02) << "M2 sigma " << sigmas[k];
  }
  for (std::size_t k = 2; k < sigmas.size(); ++k) {
    EXPECT_GE(results[5 + k].acceptance() + 0.02, results[k].acceptance()) << "M3 vs M2 sigma " << sigmas[k];
  }
}

TEST(Config, ReadsAnyColumnOrderAndOverride) {
  std::istringstream in(
      "# study\n"
      "method sigma n_i mean_model error_family alpha reps\n"
      "pc-3 0.1 15 M2 gaussian 0.05 100\n"
      "basis-coef 0.4 25 M1 lognormal 0.01 50\n");
  const auto cells = read_study_config(in, "cfg");
  ASSERT_EQ(cells.size(), 2u);
  EXPECT_EQ(cells[0].method.q, 3);
  EXPECT_EQ(cells[0].reps, 100);
  EXPECT_EQ(cells[1].scenario.family, ErrorFamily::lognormal);
  EXPECT_EQ(cells[1].scenario.alpha, 0.01);
  std::istringstream again("mean_model,error_family,sigma,n_i,method,reps,alpha\nM1,gaussian,0.1,15,pc-5,1000,0.05\n");
  EXPECT_EQ(read_study_config(again, "cfg", 7).front().reps, 7);
}

TEST(Config, UnknownColumnIsNamed) {
  std::istringstream in("mean_model,error_family,sigma,n_i,method,reps,alpha,colour\nM1,gaussian,0.1,15,pc-5,10,0.05,red\n");
  try {
    (void)read_study_config(in, "bad.cfg");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("colour"), std::string::npos);
  }
  std::istringstream missing("mean_model,error_family,sigma,n_i,method,alpha\nM1,gaussian,0.1,15,pc-5,0.05\n");
  try {
    (void)read_study_config(missing, "bad.cfg");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("reps"), std::string::npos);
  }
}

TEST(Config, BadValuesReportLine) {
  std::istringstream in("mean_model,error_family,sigma,n_i,method,reps,alpha\nM1,gaussian,0.1,15,pc-5,10,0.05\nM4,gaussian,0.1,15,pc-5,10,0.05\n");
  try {
    (void)read_study_config(in, "bad.cfg");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("bad.cfg"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find('3'), std::string::npos);
  }
}

TEST(Config, PublishedDesignRoundTrips) {
  const auto cells = published_design(ErrorFamily::gaussian, 300);
  EXPECT_EQ(cells.size(), 180u);
  std::istringstream in(write_study_config(cells));
  const auto back = read_study_config(in, "roundtrip");
  ASSERT_EQ(back.size(), cells.size());
  for (std::size_t k = 0; k < cells.size(); ++k) {
    EXPECT_EQ(back[k].scenario, cells[k].scenario);
    EXPECT_EQ(back[k].method, cells[k].method);
    EXPECT_EQ(back[k].reps, cells[k].reps);
  }
}

TEST(Output, MarkdownLayout) {
  std::vector<StudyResult> results;
  for (double s : {0.02, 0.4}) {
    StudyResult r;
    r.cell = cell(MeanModel::m1, ErrorFamily::gaussian, s, 25, "basis-coef", 300);
    r.accepted = 286;
    r.completed = 300;
    results.push_back(r);
  }
  StudyResult extra;
  extra.cell = cell(MeanModel::m1, ErrorFamily::gaussian, 0.3, 25, "pc-3", 300);
  extra.completed = 300;
  extra.accepted = 270;
  results.push_back(extra);
  const std::string md = study_markdown(results);
  EXPECT_NE(md.find("| M1 | 25 | Basis coef. | 0.953 | | 0.953 |"), std::string::npos) << md;
  EXPECT_NE(md.find("sigma=0.30"), std::string::npos);
  EXPECT_NE(md.find("0.900*"), std::string::npos);
  EXPECT_EQ(md.find("lognormal"), std::string::npos);
}

}  // namespace
}  // namespace fdh::sim
