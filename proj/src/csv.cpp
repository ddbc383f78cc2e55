#include "v2sim/csv.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace v2sim {

namespace {

std::vector<std::string> splitCommas(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

void Table::validate() const {
  if (columns.empty()) throw std::invalid_argument("table has no columns");
  for (const auto& [key, value] : meta) {
    if (key.empty() || key.find_first_of("=\n") != std::string::npos ||
        value.find('\n') != std::string::npos) {
      throw std::invalid_argument("metadata key '" + key + "' cannot be written");
    }
  }
  for (const auto& row : rows) {
    if (row.size() != columns.size()) throw std::invalid_argument("row length differs from header");
  }
}

Table spectrumTable(const Spectrum& spectrum, const std::string& intensityName) {
  spectrum.validate();
  Table t;
  t.meta = spectrum.meta;
  t.columns = {axisName(spectrum.axisKind), intensityName};
  t.rows.reserve(spectrum.size());
  for (std::size_t i = 0; i < spectrum.size(); ++i) {
    t.rows.push_back({spectrum.axis[i], spectrum.intensity[i]});
  }
  return t;
}

std::string formatFixed(double value, int precision) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[512];
  std::snprintf(buf, sizeof buf, "%.*f", precision, value);
  std::string s = buf;
  // avoid a platform-dependent "-0.000"
  if (s.front() == '-' && s.find_first_not_of("-0.") == std::string::npos) s.erase(0, 1);
  return s;
}

void writeCsv(std::ostream& os, const Table& table, int precision) {
  table.validate();
  if (precision < 0 || precision > 17) throw std::invalid_argument("precision must lie in [0, 17]");
  for (const auto& [key, value] : table.meta) os << "# " << key << '=' << value << '\n';
  for (std::size_t c = 0; c < table.columns.size(); ++c) {
    os << (c ? "," : "") << table.columns[c];
  }
  os << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) os << (c ? "," : "") << formatFixed(row[c], precision);
    os << '\n';
  }
}

void writeCsvFile(const std::string& path, const Table& table, int precision) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open '" + path + "' for writing");
  writeCsv(os, table, precision);
  if (!os) throw std::runtime_error("failed writing '" + path + "'");
}

Table readCsv(std::istream& is) {
  Table t;
  std::string line;
  std::size_t lineNo = 0;
  while (std::getline(is, line)) {
    ++lineNo;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    if (line[0] == '#') {
      const std::string body = trim(line.substr(1));
      const auto eq = body.find('=');
      if (eq != std::string::npos) t.meta[trim(body.substr(0, eq))] = trim(body.substr(eq + 1));
      continue;
    }
    const auto cells = splitCommas(line);
    if (t.columns.empty()) {
      for (const auto& c : cells) t.columns.push_back(trim(c));
      continue;
    }
    if (cells.size() != t.columns.size()) {
      throw std::invalid_argument("line " + std::to_string(lineNo) + ": expected " +
                                  std::to_string(t.columns.size()) + " fields");
    }
    std::vector<double> row;
    for (const auto& c : cells) {
      const std::string cell = trim(c);
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(cell, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used == 0 || used != cell.size()) {
        throw std::invalid_argument("line " + std::to_string(lineNo) + ": '" + cell +
                                    "' is not a number");
      }
      row.push_back(v);
    }
    t.rows.push_back(std::move(row));
  }
  if (t.columns.empty()) throw std::invalid_argument("CSV has no header row");
  return t;
}

Table readCsvFile(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::invalid_argument("cannot open '" + path + "'");
  return readCsv(is);
}

}  // namespace v2sim
