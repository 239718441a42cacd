#include "fdhomog/io.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include "fdhomog/errors.hpp"
#include "fdhomog/report.hpp"
#include "fdhomog/table.hpp"

namespace fdh {

namespace {

double number_at(const CsvTable& table, const CsvTable::Row& row, std::size_t col) {
  try {
    return parse_number(row.fields[col]);
  } catch (const ValidationError&) {
    throw ParseError(table.source, row.line,
                     "column '" + table.header[col] + "' is not numeric: '" + row.fields[col] + "'");
  }
}

struct CurveAccumulator {
  std::vector<std::string> order;
  std::map<std::string, std::string> group;
  std::map<std::string, std::vector<std::pair<double, double>>> points;

  void add(const CsvTable& table, const CsvTable::Row& row, const std::string& id, const std::string& g,
           double t, double value) {
    auto [it, inserted] = group.try_emplace(id, g);
    if (inserted) {
      order.push_back(id);
    } else if (it->second != g) {
      throw ParseError(table.source, row.line, "curve " + id + " appears with two group labels");
    }
    points[id].emplace_back(t, value);
  }
};

CurveSet assemble(const CurveAccumulator& acc, const std::string& source) {
  if (acc.order.empty()) {
    throw ParseError(source, 0, "no curves found");
  }
  CurveSet out;
  std::vector<std::string> groups;
  for (std::size_t r = 0; r < acc.order.size(); ++r) {
    auto pts = acc.points.at(acc.order[r]);
    std::sort(pts.begin(), pts.end());
    std::vector<double> grid;
    for (const auto& [t, v] : pts) {
      grid.push_back(t);
    }
    if (r == 0) {
      out.grid = grid;
      out.values.resize(static_cast<Eigen::Index>(acc.order.size()), static_cast<Eigen::Index>(grid.size()));
    } else if (grid != out.grid) {
      throw ParseError(source, 0, "curve " + acc.order[r] + " is not observed on the same grid as curve " + acc.order[0]);
    }
    for (std::size_t s = 0; s < pts.size(); ++s) {
      out.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(s)) = pts[s].second;
    }
    out.ids.push_back(acc.order[r]);
    groups.push_back(acc.group.at(acc.order[r]));
  }
  out.labels = GroupLabels::from_names(groups);
  out.validate();
  return out;
}

}  // namespace

CurveSet read_long_csv(std::istream& in, const std::string& source) {
  const CsvTable table = read_csv(in, source);
  const std::size_t id = table.require_column("curve_id");
  const std::size_t group = table.require_column("group");
  const std::size_t t = table.require_column("t");
  const std::size_t value = table.require_column("value");
  CurveAccumulator acc;
  for (const auto& row : table.rows) {
    acc.add(table, row, row.fields[id], row.fields[group], number_at(table, row, t), number_at(table, row, value));
  }
  return assemble(acc, source);
}

std::string write_long_csv(const CurveSet& curves) {
  std::string out = "curve_id,group,t,value\n";
  for (Eigen::Index r = 0; r < curves.curves(); ++r) {
    const auto& group = curves.labels.names[curves.labels.index[r]];
    for (std::size_t s = 0; s < curves.grid.size(); ++s) {
      out += fmt::format("{},{},{},{}\n", curves.ids[r], group, format_number(curves.grid[s]),
                         format_number(curves.values(r, static_cast<Eigen::Index>(s))));
    }
  }
  return out;
}

CurveSet read_wide_csv(std::istream& in, const std::string& source) {
  const CsvTable table = read_csv(in, source);
  if (table.header.size() < 4 || table.header[0] != "curve_id" || table.header[1] != "group") {
    throw ParseError(source, table.header_line,
                     "wide format needs columns curve_id,group followed by at least two grid values");
  }
  CurveSet out;
  for (std::size_t c = 2; c < table.header.size(); ++c) {
    try {
      out.grid.push_back(parse_number(table.header[c]));
    } catch (const ValidationError&) {
      throw ParseError(source, table.header_line, "grid column name '" + table.header[c] + "' is not numeric");
    }
  }
  out.values.resize(static_cast<Eigen::Index>(table.rows.size()), static_cast<Eigen::Index>(out.grid.size()));
  std::vector<std::string> groups;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    out.ids.push_back(row.fields[0]);
    groups.push_back(row.fields[1]);
    for (std::size_t c = 2; c < row.fields.size(); ++c) {
      out.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c - 2)) = number_at(table, row, c);
    }
  }
  out.labels = GroupLabels::from_names(groups);
  out.validate();
  return out;
}

std::string write_wide_csv(const CurveSet& curves) {
  std::string out = "curve_id,group";
  for (double t : curves.grid) {
    out += "," + format_number(t);
  }
  out += "\n";
  for (Eigen::Index r = 0; r < curves.curves(); ++r) {
    out += curves.ids[r] + "," + curves.labels.names[curves.labels.index[r]];
    for (Eigen::Index s = 0; s < curves.values.cols(); ++s) {
      out += "," + format_number(curves.values(r, s));
    }
    out += "\n";
  }
  return out;
}

RawCurveFile read_raw_csv(std::istream& in, const std::string& source) {
  const CsvTable table = read_csv(in, source);
  const std::size_t id = table.require_column("curve_id");
  const std::size_t group = table.require_column("group");
  const std::size_t v = table.require_column("v");
  const std::size_t value = table.require_column("value");
  const auto terminal = table.column("v_reset");

  RawCurveFile out;
  out.has_terminal_column = terminal.has_value();
  std::map<std::string, std::size_t> index;
  for (const auto& row : table.rows) {
    const std::string& cid = row.fields[id];
    auto it = index.find(cid);
    if (it == index.end()) {
      it = index.emplace(cid, out.curves.size()).first;
      out.curves.push_back(RawCurve{cid, row.fields[group], {}, {}, std::nullopt});
    } else if (it->second + 1 != out.curves.size()) {
      throw ParseError(source, row.line, "rows of curve " + cid + " are not contiguous");
    }
    RawCurve& curve = out.curves[it->second];
    if (curve.group != row.fields[group]) {
      throw ParseError(source, row.line, "curve " + cid + " appears with two group labels");
    }
    const double x = number_at(table, row, v);
    if (!curve.v.empty() && !(x > curve.v.back())) {
      throw ParseError(source, row.line, "curve " + cid + ": v is not strictly increasing");
    }
    curve.v.push_back(x);
    curve.y.push_back(number_at(table, row, value));
    if (terminal) {
      const double vr = number_at(table, row, *terminal);
      if (curve.v_reset && *curve.v_reset != vr) {
        throw ParseError(source, row.line, "curve " + cid + " has inconsistent v_reset values");
      }
      curve.v_reset = vr;
    }
  }
  if (out.curves.empty()) {
    throw ParseError(source, 0, "no curves found");
  }
  return out;
}

LabeledMatrix read_labeled_csv(std::istream& in, const std::string& source) {
  const CsvTable table = read_csv(in, source);
  if (table.header.size() < 3 || table.header[0] != "curve_id" || table.header[1] != "group") {
    throw ParseError(source, table.header_line, "expected columns curve_id,group followed by values");
  }
  LabeledMatrix out;
  out.columns.assign(table.header.begin() + 2, table.header.end());
  out.values.resize(static_cast<Eigen::Index>(table.rows.size()), static_cast<Eigen::Index>(out.columns.size()));
  std::vector<std::string> groups;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    out.ids.push_back(row.fields[0]);
    groups.push_back(row.fields[1]);
    for (std::size_t c = 2; c < row.fields.size(); ++c) {
      out.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c - 2)) = number_at(table, row, c);
    }
  }
  out.labels = GroupLabels::from_names(groups);
  return out;
}

std::string write_labeled_csv(const LabeledMatrix& table) {
  std::string out = "curve_id,group";
  for (const auto& c : table.columns) {
    out += "," + c;
  }
  out += "\n";
  for (Eigen::Index r = 0; r < table.values.rows(); ++r) {
    out += table.ids[r] + "," + table.labels.names[table.labels.index[r]];
    for (Eigen::Index c = 0; c < table.values.cols(); ++c) {
      out += "," + format_number(table.values(r, c));
    }
    out += "\n";
  }
  return out;
}

namespace {

std::vector<std::string> numbered(const char* prefix, Eigen::Index count) {
  std::vector<std::string> out;
  for (Eigen::Index k = 1; k <= count; ++k) {
    out.push_back(fmt::format("{}{}", prefix, k));
  }
  return out;
}

}  // namespace

std::string write_coefficients_csv(const CoefficientSet& coeffs) {
  return write_labeled_csv({coeffs.ids, coeffs.labels, coeffs.coefficients, numbered("a", coeffs.dimension())});
}

CoefficientSet read_coefficients_csv(std::istream& in, const std::string& source) {
  LabeledMatrix table = read_labeled_csv(in, source);
  CoefficientSet out{std::move(table.values), std::move(table.ids), std::move(table.labels), std::nullopt};
  out.validate();
  return out;
}

std::string write_scores_csv(const std::vector<std::string>& ids, const GroupLabels& labels, const Matrix& scores) {
  return write_labeled_csv({ids, labels, scores, numbered("pc", scores.cols())});
}

std::string write_eigenfunctions_csv(const FpcaModel& model, std::span<const double> grid) {
  const Matrix values = eigenfunction_values(model, grid);
  std::string out = "t";
  for (const auto& name : numbered("f", values.cols())) {
    out += "," + name;
  }
  out += "\n";
  for (std::size_t s = 0; s < grid.size(); ++s) {
    out += format_number(grid[s]);
    for (Eigen::Index k = 0; k < values.cols(); ++k) {
      out += "," + format_number(values(static_cast<Eigen::Index>(s), k));
    }
    out += "\n";
  }
  return out;
}

std::string write_variance_csv(const FpcaModel& model) {
  const ExplainedVariance ev = explained_variance(model);
  std::string out = "component,eigenvalue,proportion,cumulative\n";
  for (std::size_t k = 0; k < ev.proportion.size(); ++k) {
    out += fmt::format("{},{},{},{}\n", k + 1, format_number(model.eigenvalues(static_cast<Eigen::Index>(k))),
                       format_number(ev.proportion[k]), format_number(ev.cumulative[k]));
  }
  return out;
}

std::string write_variance_markdown(const FpcaModel& model, int shown) {
  const ExplainedVariance ev = explained_variance(model);
  std::string out = "| Component | Eigenvalue | Variance (%) | Cumulative (%) |\n|---|---|---|---|\n";
  const auto count = std::min<std::size_t>(static_cast<std::size_t>(std::max(shown, 0)), ev.proportion.size());
  for (std::size_t k = 0; k < count; ++k) {
    out += fmt::format("| {} | {:.6g} | {:.3f} | {:.3f} |\n", k + 1, model.eigenvalues(static_cast<Eigen::Index>(k)),
                       100.0 * ev.proportion[k], 100.0 * ev.cumulative[k]);
  }
  out += "\nPercentages of variance explained: " + format_variance_percentages(model, shown) + "\n";
  return out;
}

std::string write_group_matrix_csv(const Matrix& table, const std::vector<std::string>& names) {
  std::string out = "group";
  for (const auto& n : names) {
    out += "," + n;
  }
  out += "\n";
  for (Eigen::Index i = 0; i < table.rows(); ++i) {
    out += names[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < table.cols(); ++j) {
      out += "," + format_number(table(i, j));
    }
    out += "\n";
  }
  return out;
}

Matrix read_group_matrix_csv(std::istream& in, const std::string& source, std::vector<std::string>* names) {
  const CsvTable table = read_csv(in, source);
  const auto m = static_cast<Eigen::Index>(table.header.size()) - 1;
  if (m < 1 || static_cast<Eigen::Index>(table.rows.size()) != m) {
    throw ParseError(source, 0, "expected a square group matrix");
  }
  Matrix out(m, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) {
      out(i, j) = number_at(table, table.rows[i], static_cast<std::size_t>(j + 1));
    }
  }
  if (names) {
    names->assign(table.header.begin() + 1, table.header.end());
  }
  return out;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ValidationError("cannot open " + path);
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw ValidationError("cannot write " + path);
  }
  out << text;
  if (!out) {
    throw ValidationError("failed writing " + path);
  }
}

}  // namespace fdh
