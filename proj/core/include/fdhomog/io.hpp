#pragma once

#include <istream>
#include <string>
#include <vector>

#include "fdhomog/basis.hpp"
#include "fdhomog/fpca.hpp"
#include "fdhomog/nptest.hpp"
#include "fdhomog/smooth.hpp"

namespace fdh {

/// Rows of numbers keyed by curve id and group label, e.g. basis coefficients
/// (columns a1..ap) or PC scores (pc1..pcq).
struct LabeledMatrix {
  std::vector<std::string> ids;
  GroupLabels labels;
  Matrix values;
  std::vector<std::string> columns;
};

/// Long format: curve_id,group,t,value. All curves must share one grid.
[[nodiscard]] CurveSet read_long_csv(std::istream& in, const std::string& source);
[[nodiscard]] std::string write_long_csv(const CurveSet& curves);

/// Wide format: curve_id,group,<t1>,<t2>,... with grid values as column names.
[[nodiscard]] CurveSet read_wide_csv(std::istream& in, const std::string& source);
[[nodiscard]] std::string write_wide_csv(const CurveSet& curves);

struct RawCurveFile {
  std::vector<RawCurve> curves;
  bool has_terminal_column = false;
};

/// Raw format: curve_id,group,v,value[,v_reset]. Rows of one curve must be
/// contiguous with strictly increasing v.
[[nodiscard]] RawCurveFile read_raw_csv(std::istream& in, const std::string& source);

[[nodiscard]] LabeledMatrix read_labeled_csv(std::istream& in, const std::string& source);
[[nodiscard]] std::string write_labeled_csv(const LabeledMatrix& table);

/// curve_id,group,a1..ap
[[nodiscard]] std::string write_coefficients_csv(const CoefficientSet& coeffs);
[[nodiscard]] CoefficientSet read_coefficients_csv(std::istream& in, const std::string& source);

/// curve_id,group,pc1..pcq
[[nodiscard]] std::string write_scores_csv(const std::vector<std::string>& ids, const GroupLabels& labels,
                                           const Matrix& scores);

/// t,f1..fr evaluated on the grid.
[[nodiscard]] std::string write_eigenfunctions_csv(const FpcaModel& model, std::span<const double> grid);

/// component,eigenvalue,proportion,cumulative
[[nodiscard]] std::string write_variance_csv(const FpcaModel& model);
[[nodiscard]] std::string write_variance_markdown(const FpcaModel& model, int shown = 4);

/// Square matrix with group names as header and first column; NA on the diagonal.
[[nodiscard]] std::string write_group_matrix_csv(const Matrix& table, const std::vector<std::string>& names);
[[nodiscard]] Matrix read_group_matrix_csv(std::istream& in, const std::string& source,
                                           std::vector<std::string>* names = nullptr);

[[nodiscard]] std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace fdh
