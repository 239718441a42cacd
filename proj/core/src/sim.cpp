#include "fdhomog/sim.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <random>
#include <set>
#include <thread>
#include <tuple>

#include "fdhomog/errors.hpp"
#include "fdhomog/fpca.hpp"
#include "fdhomog/nptest.hpp"
#include "fdhomog/paramtest.hpp"
#include "fdhomog/report.hpp"
#include "fdhomog/table.hpp"

namespace fdh::sim {

std::string Method::name() const {
  return kind == Kind::basis_coef ? std::string("basis-coef") : fmt::format("pc-{}", q);
}

Method Method::parse(const std::string& text) {
  if (text == "basis-coef") {
    return {Kind::basis_coef, 0};
  }
  if (text.rfind("pc-", 0) == 0) {
    try {
      std::size_t used = 0;
      const int q = std::stoi(text.substr(3), &used);
      if (used == text.size() - 3 && q >= 1) {
        return {Kind::pc, q};
      }
    } catch (const std::exception&) {
    }
  }
  throw ValidationError("unknown method '" + text + "' (expected basis-coef or pc-<q>)");
}

bool Scenario::extrapolated() const {
  static constexpr double sigmas[] = {0.02, 0.05, 0.10, 0.20, 0.40};
  const bool sigma_known = std::any_of(std::begin(sigmas), std::end(sigmas),
                                       [this](double s) { return std::abs(s - sigma) < 1e-12; });
  const bool size_known = group_size == 15 || group_size == 25 || group_size == 35;
  return !sigma_known || !size_known || groups != 3 || grid_points != 51 || kl_terms != 20 ||
         basis_dimension != 18 || degree != 3;
}

std::string to_string(MeanModel model) {
  switch (model) {
    case MeanModel::m1:
      return "M1";
    case MeanModel::m2:
      return "M2";
    case MeanModel::m3:
      return "M3";
  }
  return "?";
}

std::string to_string(ErrorFamily family) {
  return family == ErrorFamily::gaussian ? "gaussian" : "lognormal";
}

MeanModel parse_mean_model(const std::string& text) {
  if (text == "M1" || text == "m1") {
    return MeanModel::m1;
  }
  if (text == "M2" || text == "m2") {
    return MeanModel::m2;
  }
  if (text == "M3" || text == "m3") {
    return MeanModel::m3;
  }
  throw ValidationError("unknown mean model '" + text + "' (expected M1, M2 or M3)");
}

ErrorFamily parse_error_family(const std::string& text) {
  if (text == "gaussian") {
    return ErrorFamily::gaussian;
  }
  if (text == "lognormal") {
    return ErrorFamily::lognormal;
  }
  throw ValidationError("unknown error family '" + text + "' (expected gaussian or lognormal)");
}

double mean_function(MeanModel model, int group, double t) {
  const double shape = std::abs(std::sin(4.0 * std::numbers::pi * t));
  switch (model) {
    case MeanModel::m1:
      return 0.1 * shape;
    case MeanModel::m2:
      return 0.05 * group * shape;
    case MeanModel::m3:
      return 0.025 * group * shape;
  }
  return 0.0;
}

double WienerKl::eigenvalue(double sigma, int k) {
  const double freq = (k - 0.5) * std::numbers::pi;
  return sigma * sigma / (freq * freq);
}

double WienerKl::eigenfunction(int k, double t) {
  return std::numbers::sqrt2 * std::sin((k - 0.5) * std::numbers::pi * t);
}

WienerKl::WienerKl(double sigma, int terms, std::span<const double> grid) {
  if (!(sigma > 0.0)) {
    throw InvalidArgumentError("error dispersion sigma must be positive");
  }
  if (terms < 1) {
    throw InvalidArgumentError("Karhunen-Loeve truncation needs at least one term");
  }
  const auto m = static_cast<Eigen::Index>(grid.size());
  loadings_.resize(m, terms);
  for (Eigen::Index s = 0; s < m; ++s) {
    for (int k = 1; k <= terms; ++k) {
      loadings_(s, k - 1) = std::sqrt(eigenvalue(sigma, k)) * eigenfunction(k, grid[s]);
    }
  }
  variance_ = loadings_.rowwise().squaredNorm();
  offset_ = (0.5 * variance_.array()).exp().matrix();
}

Vector WienerKl::sample(PhiloxEngine& rng) const {
  std::normal_distribution<double> normal;
  Vector xi(loadings_.cols());
  for (Eigen::Index k = 0; k < xi.size(); ++k) {
    xi(k) = normal(rng);
  }
  return loadings_ * xi;
}

Vector WienerKl::sample_lognormal(PhiloxEngine& rng) const {
  return (sample(rng).array().exp() - offset_.array()).matrix();
}

Vector wiener_kl_sample(double sigma, int terms, std::span<const double> grid, PhiloxEngine& rng) {
  return WienerKl(sigma, terms, grid).sample(rng);
}

Vector lognormal_error_sample(double sigma, int terms, std::span<const double> grid, PhiloxEngine& rng) {
  return WienerKl(sigma, terms, grid).sample_lognormal(rng);
}

namespace {

/// Everything about a scenario that does not change between replicates.
struct CellContext {
  explicit CellContext(const Scenario& sc)
      : scenario(sc),
        grid(uniform_grid(sc.grid_points)),
        basis(make_basis(sc.degree, sc.basis_dimension)),
        smoother(basis, grid),
        psi(gram_matrix(basis)),
        errors(sc.sigma, sc.kl_terms, grid) {
    if (sc.groups < 2 || sc.group_size < 1) {
      throw InvalidArgumentError("scenario needs at least two groups of at least one curve");
    }
    means.resize(sc.groups, sc.grid_points);
    for (int g = 0; g < sc.groups; ++g) {
      for (int s = 0; s < sc.grid_points; ++s) {
        means(g, s) = mean_function(sc.mean, g + 1, grid[s]);
      }
    }
    std::vector<int> index;
    for (int g = 0; g < sc.groups; ++g) {
      index.insert(index.end(), static_cast<std::size_t>(sc.group_size), g);
    }
    labels = GroupLabels::from_indices(std::move(index));
  }

  [[nodiscard]] Matrix simulate(PhiloxEngine& rng) const {
    const int n = scenario.groups * scenario.group_size;
    Matrix values(n, scenario.grid_points);
    for (int r = 0; r < n; ++r) {
      const Vector error = scenario.family == ErrorFamily::gaussian ? errors.sample(rng) : errors.sample_lognormal(rng);
      values.row(r) = means.row(labels.index[r]) + error.transpose();
    }
    return values;
  }

  Scenario scenario;
  std::vector<double> grid;
  BSplineBasis basis;
  BasisSmoother smoother;
  Matrix psi;
  WienerKl errors;
  Matrix means;
  GroupLabels labels;
};

std::vector<std::string> curve_ids(const GroupLabels& labels) {
  std::vector<int> counter(labels.names.size(), 0);
  std::vector<std::string> ids;
  for (int g : labels.index) {
    ids.push_back(fmt::format("g{}_{}", g + 1, ++counter[g]));
  }
  return ids;
}

/// True when the replicate's test does not reject at the scenario level.
bool accepts(const CellContext& ctx, const Method& method, const Matrix& coefficients) {
  const Scenario& sc = ctx.scenario;
  const std::span<const int> labels = ctx.labels.index;
  Matrix data;
  if (method.kind == Method::Kind::basis_coef) {
    data = coefficients;
  } else {
    const CoefficientSet coeffs{coefficients, {}, ctx.labels, std::nullopt};
    const FpcaModel model = fpca_fit(coeffs, ctx.psi);
    if (model.components() < method.q) {
      throw RangeError(fmt::format("FPCA retained {} components, {} requested", model.components(), method.q));
    }
    data = model.scores.leftCols(method.q);
  }

  if (sc.family == ErrorFamily::gaussian) {
    if (method.kind == Method::Kind::basis_coef) {
      return !manova(data, labels, sc.alpha).headline().reject();
    }
    return !bonferroni_battery(data, labels, sc.alpha).reject;
  }
  SpatialTestOptions options;
  options.alpha = sc.alpha;
  return !kruskal_multivariate(data, labels, options).reject();
}

enum class Outcome : std::uint8_t { accepted, rejected, excluded };

}  // namespace

Replicate generate_replicate(const Scenario& scenario, PhiloxEngine& rng) {
  const CellContext ctx(scenario);
  Replicate out;
  out.curves.grid = ctx.grid;
  out.curves.values = ctx.simulate(rng);
  out.curves.labels = ctx.labels;
  out.curves.ids = curve_ids(ctx.labels);
  out.coefficients = CoefficientSet{ctx.smoother.fit(out.curves.values), out.curves.ids, ctx.labels, ctx.basis};
  return out;
}

StudyResult run_cell(const CellSpec& cell, std::uint64_t seed, int workers, std::uint32_t cell_index) {
  if (cell.reps < 1) {
    throw InvalidArgumentError("a simulation cell needs at least one replicate");
  }
  if (cell.method.kind == Method::Kind::pc && cell.method.q > cell.scenario.basis_dimension) {
    throw InvalidArgumentError(fmt::format("method {} asks for more components than basis functions ({})",
                                           cell.method.name(), cell.scenario.basis_dimension));
  }
  const CellContext ctx(cell.scenario);
  std::vector<Outcome> outcomes(static_cast<std::size_t>(cell.reps), Outcome::excluded);

  const auto work = [&](int first, int stride) {
    for (int r = first; r < cell.reps; r += stride) {
      PhiloxEngine rng(seed, stream_id(cell_index, static_cast<std::uint32_t>(r)));
      try {
        const Matrix values = ctx.simulate(rng);
        const Matrix coefficients = ctx.smoother.fit(values);
        outcomes[static_cast<std::size_t>(r)] =
            accepts(ctx, cell.method, coefficients) ? Outcome::accepted : Outcome::rejected;
      } catch (const Error&) {
        outcomes[static_cast<std::size_t>(r)] = Outcome::excluded;
      }
    }
  };

  const int threads = std::clamp(workers, 1, cell.reps);
  if (threads == 1) {
    work(0, 1);
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(static_cast<std::size_t>(threads));
    for (int w = 0; w < threads; ++w) {
      pool.emplace_back(work, w, threads);
    }
  }

  StudyResult result;
  result.cell = cell;
  result.seed = seed;
  for (Outcome o : outcomes) {
    switch (o) {
      case Outcome::accepted:
        ++result.accepted;
        ++result.completed;
        break;
      case Outcome::rejected:
        ++result.completed;
        break;
      case Outcome::excluded:
        ++result.excluded;
        break;
    }
  }
  return result;
}

std::vector<StudyResult> run_study(std::span<const CellSpec> cells, std::uint64_t seed, int workers) {
  if (cells.empty()) {
    throw InvalidArgumentError("study configuration has no cells");
  }
  std::vector<Scenario> scenarios;
  std::vector<StudyResult> results;
  results.reserve(cells.size());
  for (std::size_t c = 0; c < cells.size(); ++c) {
    auto it = std::find(scenarios.begin(), scenarios.end(), cells[c].scenario);
    if (it == scenarios.end()) {
      scenarios.push_back(cells[c].scenario);
      it = scenarios.end() - 1;
    }
    const auto index = static_cast<std::uint32_t>(std::distance(scenarios.begin(), it));
    try {
      results.push_back(run_cell(cells[c], seed, workers, index));
    } catch (const Error& e) {
      throw ComputationError(fmt::format("cell {} ({} {} sigma={} n_i={} {}): {}", c + 1,
                                         to_string(cells[c].scenario.mean), to_string(cells[c].scenario.family),
                                         cells[c].scenario.sigma, cells[c].scenario.group_size,
                                         cells[c].method.name(), e.what()));
    }
  }
  return results;
}

std::vector<CellSpec> read_study_config(std::istream& in, const std::string& source, std::optional<int> reps_override) {
  const CsvTable table = read_delimited(in, source);
  static const std::vector<std::string> required = {"mean_model", "error_family", "sigma", "n_i",
                                                    "method",     "reps",         "alpha"};
  for (const auto& name : table.header) {
    if (std::find(required.begin(), required.end(), name) == required.end()) {
      throw ParseError(source, table.header_line,
                       "unknown column '" + name + "' (expected mean_model, error_family, sigma, n_i, method, reps, alpha)");
    }
  }
  std::map<std::string, std::size_t> col;
  for (const auto& name : required) {
    col[name] = table.require_column(name);
  }

  std::vector<CellSpec> cells;
  for (const auto& row : table.rows) {
    const auto field = [&](const char* name) -> const std::string& { return row.fields[col.at(name)]; };
    const auto number = [&](const char* name) {
      try {
        return parse_number(field(name));
      } catch (const ValidationError&) {
        throw ParseError(source, row.line, std::string("column '") + name + "' is not numeric: '" + field(name) + "'");
      }
    };
    try {
      CellSpec cell;
      cell.scenario.mean = parse_mean_model(field("mean_model"));
      cell.scenario.family = parse_error_family(field("error_family"));
      cell.scenario.sigma = number("sigma");
      cell.scenario.group_size = static_cast<int>(number("n_i"));
      cell.scenario.alpha = number("alpha");
      cell.method = Method::parse(field("method"));
      cell.reps = reps_override ? *reps_override : static_cast<int>(number("reps"));
      if (!(cell.scenario.sigma > 0.0) || cell.scenario.group_size < 2 || cell.reps < 1 ||
          !(cell.scenario.alpha > 0.0 && cell.scenario.alpha < 1.0)) {
        throw ValidationError("sigma must be positive, n_i at least 2, reps at least 1 and alpha in (0, 1)");
      }
      cells.push_back(cell);
    } catch (const ParseError&) {
      throw;
    } catch (const ValidationError& e) {
      throw ParseError(source, row.line, e.what());
    }
  }
  if (cells.empty()) {
    throw ParseError(source, 0, "configuration lists no cells");
  }
  return cells;
}

std::string write_study_config(std::span<const CellSpec> cells) {
  std::string out = "mean_model,error_family,sigma,n_i,method,reps,alpha\n";
  for (const auto& c : cells) {
    out += fmt::format("{},{},{},{},{},{},{}\n", to_string(c.scenario.mean), to_string(c.scenario.family),
                       format_number(c.scenario.sigma), c.scenario.group_size, c.method.name(), c.reps,
                       format_number(c.scenario.alpha));
  }
  return out;
}

std::vector<CellSpec> published_design(ErrorFamily family, int reps) {
  std::vector<CellSpec> cells;
  for (MeanModel mean : {MeanModel::m1, MeanModel::m2, MeanModel::m3}) {
    for (int n : {15, 25, 35}) {
      for (const Method& method : {Method{Method::Kind::basis_coef, 0}, Method{Method::Kind::pc, 3},
                                   Method{Method::Kind::pc, 5}, Method{Method::Kind::pc, 8}}) {
        for (double sigma : {0.02, 0.05, 0.10, 0.20, 0.40}) {
          CellSpec cell;
          cell.scenario.mean = mean;
          cell.scenario.family = family;
          cell.scenario.sigma = sigma;
          cell.scenario.group_size = n;
          cell.method = method;
          cell.reps = reps;
          cells.push_back(cell);
        }
      }
    }
  }
  return cells;
}

std::string study_csv(std::span<const StudyResult> results) {
  std::string out =
      "mean_model,error_family,n_i,method,sigma,reps,alpha,accepted,completed,excluded,acceptance,seed,extrapolated\n";
  for (const auto& r : results) {
    const Scenario& sc = r.cell.scenario;
    out += fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{}\n", to_string(sc.mean), to_string(sc.family),
                       sc.group_size, r.cell.method.name(), format_number(sc.sigma), r.cell.reps,
                       format_number(sc.alpha), r.accepted, r.completed, r.excluded, format_number(r.acceptance()),
                       r.seed, sc.extrapolated() ? 1 : 0);
  }
  return out;
}

namespace {

int method_rank(const Method& m) {
  return m.kind == Method::Kind::basis_coef ? -1 : m.q;
}

std::string method_label(const Method& m) {
  return m.kind == Method::Kind::basis_coef ? std::string("Basis coef.") : fmt::format("{} p.c.'s", m.q);
}

}  // namespace

std::string study_markdown(std::span<const StudyResult> results) {
  using RowKey = std::tuple<int, int, int>;  // mean model, n_i, method rank
  std::string out;
  for (ErrorFamily family : {ErrorFamily::gaussian, ErrorFamily::lognormal}) {
    std::set<double> sigmas;
    std::map<RowKey, std::map<double, const StudyResult*>> rows;
    std::map<RowKey, Method> methods;
    std::set<double> alphas;
    for (const auto& r : results) {
      const Scenario& sc = r.cell.scenario;
      if (sc.family != family) {
        continue;
      }
      sigmas.insert(sc.sigma);
      alphas.insert(sc.alpha);
      const RowKey key{static_cast<int>(sc.mean), sc.group_size, method_rank(r.cell.method)};
      rows[key][sc.sigma] = &r;
      methods.emplace(key, r.cell.method);
    }
    if (rows.empty()) {
      continue;
    }
    if (!out.empty()) {
      out += "\n";
    }
    std::string levels;
    for (double a : alphas) {
      levels += (levels.empty() ? "" : ", ") + fmt::format("{:g}", a);
    }
    out += fmt::format("Observed acceptance proportions, {} errors (significance level {})\n\n", to_string(family), levels);
    out += "| Mean | n_i | Method |";
    for (double s : sigmas) {
      out += fmt::format(" sigma={:.2f} |", s);
    }
    out += "\n|---|---|---|";
    for (std::size_t k = 0; k < sigmas.size(); ++k) {
      out += "---|";
    }
    out += "\n";
    bool any_extrapolated = false;
    bool any_excluded = false;
    for (const auto& [key, cells] : rows) {
      out += fmt::format("| {} | {} | {} |", to_string(static_cast<MeanModel>(std::get<0>(key))), std::get<1>(key),
                         method_label(methods.at(key)));
      for (double s : sigmas) {
        const auto it = cells.find(s);
        if (it == cells.end()) {
          out += " |";
          continue;
        }
        const StudyResult& r = *it->second;
        std::string mark;
        if (r.cell.scenario.extrapolated()) {
          mark += "*";
          any_extrapolated = true;
        }
        if (r.excluded > 0) {
          mark += "!";
          any_excluded = true;
        }
        out += fmt::format(" {:.3f}{} |", r.acceptance(), mark);
      }
      out += "\n";
    }
    if (any_extrapolated) {
      out += "\n\\* scenario outside the published simulation design\n";
    }
    if (any_excluded) {
      out += "\n! some replicates failed and were excluded (see CSV)\n";
    }
  }
  return out;
}

}  // namespace fdh::sim
