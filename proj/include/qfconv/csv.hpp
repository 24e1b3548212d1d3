#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "qfconv/fitting.hpp"

namespace qfconv {

/// 9 significant digits, locale-independent ('.' decimal).
std::string format_number(double v);

using CsvCell = std::variant<double, std::int64_t, std::string>;

/// Single header row, comma separated, fixed column order.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header);

  void add_row(std::vector<CsvCell> row);
  const std::vector<std::string>& header() const noexcept { return header_; }
  std::size_t rows() const noexcept { return rows_.size(); }

  void write(std::ostream& os) const;
  std::string str() const;
  void save(const std::filesystem::path& path) const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<CsvCell>> rows_;
};

/// Reads x, y and an optional sigma column (first three columns; header row
/// required). Throws ValidationError naming the line on malformed input.
Dataset parse_dataset_csv(std::string_view text);
Dataset read_dataset_csv(const std::filesystem::path& path);

CsvTable dataset_table(const Dataset& data);

}  // namespace qfconv
