#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace paota {

/// Rectangular numeric table with a header row.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header, int significant_digits = 9);

  void add_row(std::vector<double> row);

  const std::vector<std::string>& header() const { return header_; }
  const std::vector<std::vector<double>>& rows() const { return rows_; }
  std::size_t num_rows() const { return rows_.size(); }
  std::size_t num_cols() const { return header_.size(); }
  int significant_digits() const { return digits_; }

  /// Index of a named column; throws InvalidArgument if absent.
  std::size_t column_index(const std::string& name) const;
  std::vector<double> column(const std::string& name) const;

  /// Newline-terminated CSV text, numbers in %.{digits}g.
  std::string to_string() const;
  void write(const std::filesystem::path& path) const;

  /// Throws IoError on unreadable files, ragged rows or non-numeric cells.
  static CsvTable parse(const std::string& text);
  static CsvTable read(const std::filesystem::path& path);

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<double>> rows_;
  int digits_;
};

}  // namespace paota
