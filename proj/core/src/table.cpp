#include "fdhomog/table.hpp"

#include <algorithm>
#include <fstream>

#include "fdhomog/errors.hpp"

namespace fdh {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) {
    return {};
  }
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

bool skippable(const std::string& line) {
  const std::string t = trim(line);
  return t.empty() || t.front() == '#';
}

std::vector<std::string> split_commas(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    out.push_back(trim(line.substr(start, pos == std::string::npos ? std::string::npos : pos - start)));
    if (pos == std::string::npos) {
      break;
    }
    start = pos + 1;
  }
  return out;
}

std::vector<std::string> split_any(const std::string& line) {
  if (line.find_first_of(",;\t") != std::string::npos) {
    std::string normalized = line;
    std::replace_if(normalized.begin(), normalized.end(), [](char c) { return c == ';' || c == '\t'; }, ',');
    return split_commas(normalized);
  }
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (true) {
    const auto start = line.find_first_not_of(" \r", pos);
    if (start == std::string::npos) {
      break;
    }
    const auto end = line.find_first_of(" \r", start);
    out.push_back(line.substr(start, end == std::string::npos ? std::string::npos : end - start));
    if (end == std::string::npos) {
      break;
    }
    pos = end;
  }
  return out;
}

template <class Split>
CsvTable read_with(std::istream& in, const std::string& source, Split split) {
  CsvTable table;
  table.source = source;
  std::string line;
  std::size_t number = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++number;
    if (skippable(line)) {
      continue;
    }
    auto fields = split(line);
    if (!have_header) {
      table.header = std::move(fields);
      table.header_line = number;
      have_header = true;
      continue;
    }
    if (fields.size() != table.header.size()) {
      throw ParseError(source, number,
                       "expected " + std::to_string(table.header.size()) + " fields, found " +
                           std::to_string(fields.size()));
    }
    table.rows.push_back({std::move(fields), number});
  }
  if (!have_header) {
    throw ParseError(source, 0, "file is empty (no header row)");
  }
  return table;
}

}  // namespace

std::optional<std::size_t> CsvTable::column(const std::string& name) const {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) {
    return std::nullopt;
  }
  return static_cast<std::size_t>(std::distance(header.begin(), it));
}

std::size_t CsvTable::require_column(const std::string& name) const {
  if (auto c = column(name)) {
    return *c;
  }
  throw ParseError(source, header_line, "missing required column '" + name + "'");
}

CsvTable read_csv(std::istream& in, const std::string& source) {
  return read_with(in, source, split_commas);
}

CsvTable read_delimited(std::istream& in, const std::string& source) {
  return read_with(in, source, split_any);
}

CsvTable read_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw ValidationError("cannot open " + path);
  }
  return read_csv(in, path);
}

}  // namespace fdh
