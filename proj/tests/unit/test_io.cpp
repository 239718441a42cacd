#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "fdhomog/basis.hpp"
#include "fdhomog/errors.hpp"
#include "fdhomog/io.hpp"
#include "fdhomog/report.hpp"

namespace fdh {
namespace {

CurveSet sample_curves() {
  CurveSet c;
  c.grid = uniform_grid(7);
  std::mt19937_64 gen(1);
  std::normal_distribution<double> z;
  c.values.resize(4, 7);
  for (Eigen::Index i = 0; i < 4; ++i) {
    for (Eigen::Index j = 0; j < 7; ++j) {
      c.values(i, j) = z(gen) / 3.0;
    }
  }
  c.ids = {"r1", "r2", "s1", "s2"};
  const std::vector<std::string> groups = {"R", "R", "S", "S"};
  c.labels = GroupLabels::from_names(groups);
  return c;
}

TEST(LongCsv, RoundTripsExactly) {
  const CurveSet c = sample_curves();
  std::istringstream in(write_long_csv(c));
  const CurveSet back = read_long_csv(in, "long.csv");
  EXPECT_EQ(back.grid, c.grid);
  EXPECT_EQ(back.values, c.values);
  EXPECT_EQ(back.ids, c.ids);
  EXPECT_EQ(back.labels.names, c.labels.names);
  EXPECT_EQ(back.labels.index, c.labels.index);
}

TEST(WideCsv, RoundTripsExactly) {
  const CurveSet c = sample_curves();
  std::istringstream in(write_wide_csv(c));
  const CurveSet back = read_wide_csv(in, "wide.csv");
  EXPECT_EQ(back.grid, c.grid);
  EXPECT_EQ(back.values, c.values);
  EXPECT_EQ(back.ids, c.ids);
}

TEST(LongCsv, MismatchedGridsRejected) {
  std::istringstream in("curve_id,group,t,value\na,1,0,1\na,1,1,2\nb,1,0,1\nb,1,0.5,2\n");
  EXPECT_THROW((void)read_long_csv(in, "x.csv"), ParseError);
}

TEST(LongCsv, MissingColumnNamed) {
  std::istringstream in("curve_id,group,time,value\na,1,0,1\n");
  try {
    (void)read_long_csv(in, "x.csv");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("'t'"), std::string::npos) << e.what();
  }
}

TEST(LongCsv, NonNumericReportsLine) {
  std::istringstream in("curve_id,group,t,value\na,1,0,1\na,1,1,oops\n");
  try {
    (void)read_long_csv(in, "x.csv");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
}

TEST(RawCsv, ParsesOptionalReset) {
  std::istringstream with("curve_id,group,v,value,v_reset\na,G1,0,0,2\na,G1,1,1,2\na,G1,2,0,2\n");
  const RawCurveFile f = read_raw_csv(with, "raw.csv");
  ASSERT_EQ(f.curves.size(), 1u);
  EXPECT_TRUE(f.has_terminal_column);
  EXPECT_EQ(f.curves[0].terminal(), 2.0);
  std::istringstream without("curve_id,group,v,value\na,G1,0,0\na,G1,1.5,1\n");
  const RawCurveFile g = read_raw_csv(without, "raw.csv");
  EXPECT_FALSE(g.has_terminal_column);
  EXPECT_EQ(g.curves[0].terminal(), 1.5);
}

TEST(RawCsv, NonMonotoneNamesCurve) {
  std::istringstream in("curve_id,group,v,value\nok,G,0,0\nok,G,1,1\nbad7,G,0,0\nbad7,G,0.5,1\nbad7,G,0.4,1\n");
  try {
    (void)read_raw_csv(in, "raw.csv");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("bad7"), std::string::npos);
    EXPECT_EQ(e.line(), 6u);
  }
}

TEST(Coefficients, RoundTrip) {
  CoefficientSet c{Matrix::Random(5, 6), {"a", "b", "c", "d", "e"}, GroupLabels::from_indices({0, 1, 0, 1, 2}),
                   std::nullopt};
  std::istringstream in(write_coefficients_csv(c));
  const CoefficientSet back = read_coefficients_csv(in, "coef.csv");
  EXPECT_EQ(back.coefficients, c.coefficients);
  EXPECT_EQ(back.ids, c.ids);
  EXPECT_EQ(back.labels.index, c.labels.index);
}

TEST(Scores, RoundTripThroughLabeledReader) {
  const Matrix scores = Matrix::Random(4, 2);
  const auto labels = GroupLabels::from_indices({0, 0, 1, 1});
  std::istringstream in(write_scores_csv({"w", "x", "y", "z"}, labels, scores));
  const LabeledMatrix back = read_labeled_csv(in, "scores.csv");
  EXPECT_EQ(back.values, scores);
  EXPECT_EQ(back.columns, (std::vector<std::string>{"pc1", "pc2"}));
}

TEST(GroupMatrix, RoundTripWithNaDiagonal) {
  Matrix t(3, 3);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  t << nan, 0.01, 0.2, 0.01, nan, 1.0 / 3.0, 0.2, 1.0 / 3.0, nan;
  const std::vector<std::string> names = {"A", "B", "C"};
  std::istringstream in(write_group_matrix_csv(t, names));
  std::vector<std::string> back_names;
  const Matrix back = read_group_matrix_csv(in, "pairs.csv", &back_names);
  EXPECT_EQ(back_names, names);
  for (Eigen::Index i = 0; i < 3; ++i) {
    for (Eigen::Index j = 0; j < 3; ++j) {
      if (i == j) {
        EXPECT_TRUE(std::isnan(back(i, j)));
      } else {
        EXPECT_EQ(back(i, j), t(i, j));
      }
    }
  }
}

TEST(Reports, CsvRoundTrip) {
  TestReport a;
  a.method = "manova";
  a.statistic = "pillai";
  a.value = 0.123456789012345;
  a.df1 = 36;
  a.df2 = 52;
  a.p_value = 1.0 / 7.0;
  a.reference = "F";
  TestReport b;
  b.method = "np-mood";
  b.statistic = "Q";
  b.value = 5516.5;
  b.df1 = 40;
  b.p_value = 0.0;
  b.reference = "chi2";
  TestReport c = b;
  c.available = false;
  c.value = std::numeric_limits<double>::quiet_NaN();
  c.p_value = std::numeric_limits<double>::quiet_NaN();
  const std::vector<TestReport> reports = {a, b, c};
  const auto back = reports_from_csv(reports_to_csv(reports));
  ASSERT_EQ(back.size(), 3u);
  EXPECT_EQ(back[0].value, a.value);
  EXPECT_EQ(back[0].p_value, a.p_value);
  EXPECT_EQ(back[0].df2, a.df2);
  EXPECT_FALSE(back[1].df2.has_value());
  EXPECT_FALSE(back[2].available);
  EXPECT_TRUE(std::isnan(back[2].value));
  EXPECT_EQ(reports_to_csv(back), reports_to_csv(reports));
}

TEST(Reports, MarkdownShowsSmallPValues) {
  TestReport r;
  r.method = "np-mood";
  r.statistic = "Q";
  r.value = 5516.5;
  r.df1 = 40;
  r.p_value = 1e-9;
  const std::vector<TestReport> reports = {r};
  const std::string md = reports_to_markdown(reports);
  EXPECT_NE(md.find("<0.001"), std::string::npos);
  EXPECT_NE(md.find("40"), std::string::npos);
}

TEST(Numbers, FormatParseRoundTrip) {
  for (double x : {0.1, 1.0 / 3.0, 1e-300, 123456789.125, -2.5e-7}) {
    EXPECT_EQ(parse_number(format_number(x)), x);
  }
  EXPECT_EQ(format_number(std::numeric_limits<double>::quiet_NaN()), "NA");
  EXPECT_TRUE(std::isinf(parse_number(format_number(std::numeric_limits<double>::infinity()))));
  EXPECT_THROW((void)parse_number("1.5x"), ValidationError);
}

TEST(Variance, CsvAndMarkdown) {
  FpcaModel model;
  model.eigenvalues = Eigen::Vector3d(3.0, 0.75, 0.25);
  const std::string csv = write_variance_csv(model);
  EXPECT_NE(csv.find("component,eigenvalue,proportion,cumulative"), std::string::npos);
  EXPECT_NE(csv.find("1,3,0.75,0.75"), std::string::npos) << csv;
  const std::string md = write_variance_markdown(model);
  EXPECT_NE(md.find("75.000, 18.750, 6.250"), std::string::npos) << md;
}

}  // namespace
}  // namespace fdh
