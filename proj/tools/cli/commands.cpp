#include "commands.hpp"

#include <fmt/format.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "fdhomog/basis.hpp"
#include "fdhomog/errors.hpp"
#include "fdhomog/fpca.hpp"
#include "fdhomog/io.hpp"
#include "fdhomog/nptest.hpp"
#include "fdhomog/paramtest.hpp"
#include "fdhomog/report.hpp"
#include "fdhomog/sim.hpp"
#include "fdhomog/smooth.hpp"

namespace fdh::cli {

namespace fs = std::filesystem;

InputFormat parse_format(const std::string& text) {
  if (text == "long") {
    return InputFormat::long_csv;
  }
  if (text == "wide") {
    return InputFormat::wide;
  }
  if (text == "raw") {
    return InputFormat::raw;
  }
  if (text == "coef") {
    return InputFormat::coef;
  }
  throw ValidationError("unknown input format '" + text + "' (expected long, wide, raw or coef)");
}

Route parse_route(const std::string& text) {
  if (text == "manova") {
    return Route::manova;
  }
  if (text == "pc-anova") {
    return Route::pc_anova;
  }
  if (text == "np-mood") {
    return Route::np_mood;
  }
  if (text == "np-kw") {
    return Route::np_kw;
  }
  if (text == "pairwise-wilcoxon") {
    return Route::pairwise_wilcoxon;
  }
  throw ValidationError("unknown route '" + text +
                        "' (expected manova, pc-anova, np-mood, np-kw or pairwise-wilcoxon)");
}

std::string to_string(Route route) {
  switch (route) {
    case Route::manova:
      return "manova";
    case Route::pc_anova:
      return "pc-anova";
    case Route::np_mood:
      return "np-mood";
    case Route::np_kw:
      return "np-kw";
    case Route::pairwise_wilcoxon:
      return "pairwise-wilcoxon";
  }
  return "?";
}

void PipelineConfig::validate() const {
  if (input.empty()) {
    throw InvalidArgumentError("--input is required");
  }
  if (q && var_threshold) {
    throw InvalidArgumentError("--q and --var-threshold are mutually exclusive");
  }
  if (q && *q < 1) {
    throw InvalidArgumentError("--q must be at least 1");
  }
  if (var_threshold && !(*var_threshold > 0.0 && *var_threshold <= 1.0)) {
    throw InvalidArgumentError("--var-threshold must lie in (0, 1]");
  }
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw InvalidArgumentError("--alpha must lie in (0, 1)");
  }
  if (lambda < 0.0) {
    throw InvalidArgumentError("--lambda must be nonnegative");
  }
  if (loocv && lambda > 0.0) {
    throw InvalidArgumentError("--lambda and --loocv are mutually exclusive");
  }
  if (format == InputFormat::coef && (loocv || lambda > 0.0)) {
    throw InvalidArgumentError("smoothing options do not apply to --format coef");
  }
  if (grid_points < 2) {
    throw InvalidArgumentError("--grid-points must be at least 2");
  }
  if (permutations != 0 && permutations < 99) {
    throw InvalidArgumentError("--permutations must be 0 (chi-squared reference) or at least 99");
  }
  if ((route == Route::manova) && (q || var_threshold)) {
    throw InvalidArgumentError("--q/--var-threshold do not apply to the manova route; use pc-anova");
  }
}

namespace {

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw InvalidArgumentError("cannot open input file '" + path + "'");
  }
  return in;
}

std::string output_path(const std::string& dir, const std::string& name) {
  fs::create_directories(dir);
  return (fs::path(dir) / name).string();
}

CurveSet register_raw(const std::string& path, int grid_points, std::ostream& log) {
  std::ifstream in = open_input(path);
  const RawCurveFile raw = read_raw_csv(in, path);
  if (!raw.has_terminal_column) {
    log << "note: no v_reset column; each curve is registered on [0, max v]\n";
  }
  return register_domain(raw.curves, uniform_grid(grid_points));
}

/// Coefficients (and the basis they live in) for the configured input.
struct Prepared {
  CoefficientSet coeffs;
  BSplineBasis basis;
  std::optional<CurveSet> curves;
};

Prepared prepare(const PipelineConfig& config, std::ostream& log) {
  if (config.format == InputFormat::coef) {
    std::ifstream in = open_input(config.input);
    CoefficientSet coeffs = read_coefficients_csv(in, config.input);
    const int dim = static_cast<int>(coeffs.dimension());
    if (dim != config.basis_dimension) {
      log << fmt::format("note: basis dimension taken from the coefficient file ({})\n", dim);
    }
    BSplineBasis basis = make_basis(config.degree, dim);
    coeffs.basis = basis;
    return {std::move(coeffs), std::move(basis), std::nullopt};
  }

  CurveSet curves;
  if (config.format == InputFormat::raw) {
    curves = register_raw(config.input, config.grid_points, log);
  } else {
    std::ifstream in = open_input(config.input);
    curves = config.format == InputFormat::wide ? read_wide_csv(in, config.input) : read_long_csv(in, config.input);
  }
  BSplineBasis basis = make_basis(config.degree, config.basis_dimension);

  double lambda = config.lambda;
  if (config.loocv) {
    const LoocvResult cv = select_lambda_loocv(curves, basis, default_lambda_grid(), config.penalty_order);
    lambda = cv.lambda;
    std::string table = "lambda,score\n";
    for (std::size_t k = 0; k < cv.lambdas.size(); ++k) {
      table += format_number(cv.lambdas[k]) + "," + format_number(cv.scores[k]) + "\n";
    }
    write_text_file(output_path(config.out, "loocv.csv"), table);
    log << "LOOCV selected lambda = " << format_number(lambda) << "\n";
  }
  CoefficientSet coeffs = lambda > 0.0 ? fit_pspline(curves, basis, lambda, config.penalty_order)
                                       : fit_least_squares(curves, basis);
  write_text_file(output_path(config.out, "coefficients.csv"), write_coefficients_csv(coeffs));
  return {std::move(coeffs), std::move(basis), std::move(curves)};
}

/// Fits FPCA, writes its tables and returns the first q scores.
Matrix principal_scores(const Prepared& prep, const PipelineConfig& config, std::optional<int> q_override,
                        std::ostream& log, std::string& markdown) {
  const FpcaModel model = fpca_fit(prep.coeffs, gram_matrix(prep.basis));
  int q = 0;
  if (q_override) {
    q = *q_override;
  } else if (config.q) {
    q = *config.q;
  } else {
    q = components_for_variance(model, config.var_threshold.value_or(0.99));
  }
  if (q > model.components()) {
    throw RangeError(fmt::format("requested {} principal components but only {} have positive variance", q,
                                 model.components()));
  }
  log << fmt::format("FPCA: {} components retained, using q = {}\n", model.components(), q);

  write_text_file(output_path(config.out, "variance.csv"), write_variance_csv(model));
  write_text_file(output_path(config.out, "eigenfunctions.csv"),
                  write_eigenfunctions_csv(model, uniform_grid(101, prep.basis.domain())));
  const Matrix scores = model.scores.leftCols(q);
  write_text_file(output_path(config.out, "scores.csv"), write_scores_csv(prep.coeffs.ids, prep.coeffs.labels, scores));
  markdown += "\n## Functional principal components\n\n" + write_variance_markdown(model) +
              fmt::format("\nComponents used: {}\n", q);
  return scores;
}

std::vector<TestReport> pairwise_reports(const PairwiseTable& table, const GroupLabels& labels, double alpha) {
  std::vector<TestReport> out;
  const auto m = static_cast<Eigen::Index>(labels.names.size());
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = i + 1; j < m; ++j) {
      TestReport r;
      r.method = "wilcoxon-bh " + labels.names[static_cast<std::size_t>(i)] + " vs " +
                 labels.names[static_cast<std::size_t>(j)];
      r.statistic = "W";
      r.value = table.rank_sum(i, j);
      r.df1 = std::numeric_limits<double>::quiet_NaN();
      r.p_value = table.adjusted_p(i, j);
      r.alpha = alpha;
      r.reference = "normal";
      r.auxiliary = {{"raw_p", table.raw_p(i, j)}};
      out.push_back(std::move(r));
    }
  }
  return out;
}

}  // namespace

std::string cmd_register(const RegisterConfig& config, std::ostream& log) {
  if (config.input.empty()) {
    throw InvalidArgumentError("--input is required");
  }
  if (config.grid_points < 2) {
    throw InvalidArgumentError("--grid-points must be at least 2");
  }
  const CurveSet curves = register_raw(config.input, config.grid_points, log);
  const std::string path = output_path(config.out, "registered.csv");
  write_text_file(path, write_long_csv(curves));
  log << fmt::format("registered {} curves onto {} points of [0, 1]\n", curves.curves(), curves.grid.size());
  return path;
}

std::vector<std::string> cmd_test(const PipelineConfig& config, std::ostream& log) {
  config.validate();
  const Prepared prep = prepare(config, log);
  const std::span<const int> labels = prep.coeffs.labels.index;
  log << fmt::format("{} curves in {} groups, basis dimension {}\n", prep.coeffs.curves(),
                     prep.coeffs.labels.groups(), prep.coeffs.dimension());

  std::vector<TestReport> reports;
  std::string extra_markdown;
  switch (config.route) {
    case Route::manova: {
      const ManovaResult result = manova(prep.coeffs.coefficients, labels, config.alpha);
      reports = result.reports();
      break;
    }
    case Route::pc_anova: {
      const Matrix scores = principal_scores(prep, config, std::nullopt, log, extra_markdown);
      const BonferroniBattery battery = bonferroni_battery(scores, labels, config.alpha);
      reports = battery.components;
      for (std::size_t k = 0; k < reports.size(); ++k) {
        reports[k].auxiliary.emplace_back("bonferroni_p", battery.adjusted_p[k]);
      }
      extra_markdown += fmt::format("\nBonferroni level per component: {}; any component rejects: {}\n",
                                    format_number(battery.per_test_alpha), battery.reject ? "yes" : "no");
      break;
    }
    case Route::np_mood:
    case Route::np_kw: {
      const bool use_scores = config.q.has_value() || config.var_threshold.has_value();
      const Matrix data = use_scores ? principal_scores(prep, config, std::nullopt, log, extra_markdown)
                                     : prep.coeffs.coefficients;
      SpatialTestOptions options;
      options.alpha = config.alpha;
      options.seed = config.seed;
      if (config.permutations > 0) {
        options.reference = PValueReference::permutation;
        options.permutations = config.permutations;
      }
      reports.push_back(config.route == Route::np_mood ? mood_multivariate(data, labels, options)
                                                       : kruskal_multivariate(data, labels, options));
      break;
    }
    case Route::pairwise_wilcoxon: {
      const Matrix scores = principal_scores(prep, config, 1, log, extra_markdown);
      const Vector pc1 = scores.col(0);
      const PairwiseTable table = wilcoxon_pairwise_bh(std::span<const double>(pc1.data(), pc1.size()), labels);
      write_text_file(output_path(config.out, "pairwise_raw_p.csv"),
                      write_group_matrix_csv(table.raw_p, prep.coeffs.labels.names));
      write_text_file(output_path(config.out, "pairwise_adjusted_p.csv"),
                      write_group_matrix_csv(table.adjusted_p, prep.coeffs.labels.names));
      reports = pairwise_reports(table, prep.coeffs.labels, config.alpha);
      break;
    }
  }

  const std::string csv_path = output_path(config.out, "report.csv");
  const std::string md_path = output_path(config.out, "report.md");
  write_text_file(csv_path, reports_to_csv(reports));
  std::string markdown = fmt::format("# Homogeneity test: {}\n\n", to_string(config.route));
  markdown += reports_to_markdown(reports) + extra_markdown;
  write_text_file(md_path, markdown);
  for (const auto& r : reports) {
    log << fmt::format("{} {} = {} (p = {}){}\n", r.method, r.statistic, format_number(r.value),
                       format_number(r.p_value), r.reject() ? " reject" : "");
  }
  return {csv_path, md_path};
}

std::vector<std::string> cmd_simulate(const SimulateConfig& config, std::ostream& log) {
  if (config.config.empty()) {
    throw InvalidArgumentError("--config is required");
  }
  if (config.workers < 1) {
    throw InvalidArgumentError("--workers must be at least 1");
  }
  if (config.reps && *config.reps < 1) {
    throw InvalidArgumentError("--reps must be at least 1");
  }
  std::optional<int> reps = config.reps;
  if (config.full) {
    reps = 1000;
  }
  std::ifstream in = open_input(config.config);
  const std::vector<sim::CellSpec> cells = sim::read_study_config(in, config.config, reps);
  log << fmt::format("running {} cells with {} worker(s), seed {}\n", cells.size(), config.workers, config.seed);
  const std::vector<sim::StudyResult> results = sim::run_study(cells, config.seed, config.workers);

  int excluded = 0;
  for (const auto& r : results) {
    excluded += r.excluded;
  }
  if (excluded > 0) {
    log << fmt::format("warning: {} replicates failed and were excluded\n", excluded);
  }
  const std::string csv_path = output_path(config.out, "study.csv");
  const std::string md_path = output_path(config.out, "study.md");
  write_text_file(csv_path, sim::study_csv(results));
  write_text_file(md_path, sim::study_markdown(results));
  return {csv_path, md_path};
}

int guarded(const std::function<void()>& body, std::ostream& err) {
  try {
    body();
    return exit_ok;
  } catch (const Error& e) {
    err << (e.kind() == Error::Kind::validation ? "input error: " : "computation error: ") << e.what() << "\n";
    return e.kind() == Error::Kind::validation ? exit_validation : exit_computation;
  } catch (const fs::filesystem_error& e) {
    err << "input error: " << e.what() << "\n";
    return exit_validation;
  }
}

}  // namespace fdh::cli
