#include "spinorbit/csv.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "spinorbit/errors.hpp"

namespace spinorbit {

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) {
    const auto b = cell.find_first_not_of(" \t\r");
    const auto e = cell.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? std::string{} : cell.substr(b, e - b + 1));
  }
  return out;
}

}  // namespace

int CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return static_cast<int>(i);
  return -1;
}

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path);
  CsvTable table;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    if (table.header.empty()) {
      table.header = split(line);
      continue;
    }
    const auto cells = split(line);
    if (cells.size() != table.header.size())
      throw Error(ErrorKind::Config, path + ":" + std::to_string(lineno) + ": expected " +
                                         std::to_string(table.header.size()) + " columns");
    std::vector<double> row;
    row.reserve(cells.size());
    for (const auto& c : cells) {
      try {
        std::size_t used = 0;
        row.push_back(std::stod(c, &used));
        if (used != c.size()) throw std::invalid_argument(c);
      } catch (const std::exception&) {
        throw Error(ErrorKind::Config,
                    path + ":" + std::to_string(lineno) + ": not a number '" + c + "'");
      }
    }
    table.rows.push_back(std::move(row));
  }
  if (table.header.empty()) throw Error(ErrorKind::Config, path + ": empty file");
  return table;
}

std::string format_double(double value) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.16e", value);
  return buf;
}

void write_csv(const std::string& path, const CsvTable& table) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path);
  for (std::size_t i = 0; i < table.header.size(); ++i)
    out << (i ? "," : "") << table.header[i];
  out << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << format_double(row[i]);
    out << '\n';
  }
  if (!out) throw Error(ErrorKind::Io, "write failed for " + path);
}

}  // namespace spinorbit
