#pragma once

#include <cstddef>
#include <istream>
#include <optional>
#include <string>
#include <vector>

namespace fdh {

/// Header plus data rows of a delimited text file. Blank lines and lines whose
/// first non-space character is '#' are skipped.
struct CsvTable {
  struct Row {
    std::vector<std::string> fields;
    std::size_t line = 0;  ///< 1-based source line
  };

  std::string source;
  std::vector<std::string> header;
  std::size_t header_line = 0;
  std::vector<Row> rows;

  [[nodiscard]] std::optional<std::size_t> column(const std::string& name) const;
  /// Throws ParseError naming the missing column.
  [[nodiscard]] std::size_t require_column(const std::string& name) const;
};

/// Comma separated; fields are trimmed. Every row must have as many fields as
/// the header.
[[nodiscard]] CsvTable read_csv(std::istream& in, const std::string& source);

/// Fields separated by commas, tabs, semicolons or runs of spaces.
[[nodiscard]] CsvTable read_delimited(std::istream& in, const std::string& source);

[[nodiscard]] CsvTable read_csv_file(const std::string& path);

}  // namespace fdh
