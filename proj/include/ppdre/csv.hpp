#pragma once

#include <string>
#include <vector>

#include "ppdre/common.hpp"

namespace ppdre {

/// A parsed numeric CSV: header names plus a dense value matrix.
struct CsvTable {
  std::vector<std::string> columns;
  Matrix values;

  Index column_index(const std::string& name) const;  // throws when absent
};

/// Read a numeric CSV with a header row. Parsing is locale-independent;
/// rows containing unparsable or non-finite values are rejected and the
/// error lists their 1-based line numbers.
CsvTable read_csv_numeric(const std::string& path);

struct XYData {
  Matrix x;
  Vector y;
  std::vector<std::string> feature_names;
};

/// Split a table into features and the named target column.
XYData split_xy(const CsvTable& table, const std::string& target);

/// Write a single-column CSV (used by the eval subcommand).
void write_column_csv(const std::string& path, const std::string& header,
                      const Vector& values);

}  // namespace ppdre
