#include "ppdre/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "ppdre/metrics.hpp"

namespace ppdre {

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

bool parse_double(const std::string& field, double& out) {
  const std::string t = trim(field);
  if (t.empty()) return false;
  const char* first = t.data();
  const char* last = t.data() + t.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc{} && ptr == last;
}

}  // namespace

Index CsvTable::column_index(const std::string& name) const {
  for (std::size_t i = 0; i < columns.size(); ++i)
    if (columns[i] == name) return static_cast<Index>(i);
  std::string known;
  for (const auto& c : columns) known += (known.empty() ? "" : ", ") + c;
  throw Error("csv: no column named '" + name + "' (columns: " + known + ")");
}

CsvTable read_csv_numeric(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("csv: cannot open '" + path + "'");

  std::string line;
  if (!std::getline(in, line)) throw Error("csv: '" + path + "' is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();

  CsvTable table;
  for (const std::string& name : split_line(line)) table.columns.push_back(trim(name));
  const std::size_t width = table.columns.size();
  require(width >= 1, "csv: header row of '" + path + "' is empty");

  std::vector<double> data;
  std::vector<Index> bad_lines;
  Index rows = 0;
  Index line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    const auto fields = split_line(line);
    bool ok = fields.size() == width;
    std::vector<double> row(width);
    if (ok) {
      for (std::size_t j = 0; j < width; ++j) {
        double v = 0;
        if (!parse_double(fields[j], v) || !std::isfinite(v)) {
          ok = false;
          break;
        }
        row[j] = v;
      }
    }
    if (!ok) {
      bad_lines.push_back(line_no);
      continue;
    }
    data.insert(data.end(), row.begin(), row.end());
    ++rows;
  }
  if (!bad_lines.empty()) {
    std::string msg = "csv: '" + path + "' has rows with missing or non-finite values "
                      "(line";
    msg += bad_lines.size() > 1 ? "s " : " ";
    for (std::size_t i = 0; i < bad_lines.size() && i < 20; ++i)
      msg += (i ? ", " : "") + std::to_string(bad_lines[i]);
    if (bad_lines.size() > 20) msg += ", ...";
    msg += ")";
    throw Error(msg);
  }

  table.values.resize(rows, static_cast<Index>(width));
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < static_cast<Index>(width); ++j)
      table.values(i, j) = data[static_cast<std::size_t>(i) * width +
                                static_cast<std::size_t>(j)];
  return table;
}

XYData split_xy(const CsvTable& table, const std::string& target) {
  const Index target_col = table.column_index(target);
  XYData out;
  out.y = table.values.col(target_col);
  out.x.resize(table.values.rows(), table.values.cols() - 1);
  Index col = 0;
  for (Index j = 0; j < table.values.cols(); ++j) {
    if (j == target_col) continue;
    out.x.col(col) = table.values.col(j);
    out.feature_names.push_back(table.columns[static_cast<std::size_t>(j)]);
    ++col;
  }
  return out;
}

void write_column_csv(const std::string& path, const std::string& header,
                      const Vector& values) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("csv: cannot open '" + path + "' for writing");
  out << header << '\n';
  for (Index i = 0; i < values.size(); ++i) out << format_double(values(i)) << '\n';
  if (!out) throw Error("csv: write failed for '" + path + "'");
}

}  // namespace ppdre
