#pragma once

#include <string>
#include <vector>

namespace spinorbit {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  int column(const std::string& name) const;  // -1 when absent
};

/// Numeric CSV with a single header line. Throws Io / Config errors with the
/// offending line number.
CsvTable read_csv(const std::string& path);
void write_csv(const std::string& path, const CsvTable& table);

/// 17 significant digits, lowercase scientific; parses back bit-exactly.
std::string format_double(double value);

}  // namespace spinorbit
