#pragma once

#include "v2sim/spectrum.hpp"

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace v2sim {

/// Column-oriented numeric table with metadata written as `# key=value` lines.
struct Table {
  std::map<std::string, std::string> meta;  ///< emitted in sorted key order
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  void validate() const;
};

/// Two-column table (axis, intensity) carrying the spectrum metadata.
Table spectrumTable(const Spectrum& spectrum, const std::string& intensityName = "intensity");

/// Fixed-point formatting with the given number of decimals; NaN prints as "nan".
std::string formatFixed(double value, int precision);

void writeCsv(std::ostream& os, const Table& table, int precision);
void writeCsvFile(const std::string& path, const Table& table, int precision);

/// Reads a numeric CSV: `#` lines become metadata, the first other line is the
/// header. Throws std::invalid_argument on malformed rows.
Table readCsv(std::istream& is);
Table readCsvFile(const std::string& path);

}  // namespace v2sim
