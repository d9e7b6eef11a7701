#include "paota/csv.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "paota/error.hpp"

namespace paota {
namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) {
    const auto first = cell.find_first_not_of(" \t");
    const auto last = cell.find_last_not_of(" \t\r");
    cells.push_back(first == std::string::npos ? std::string() : cell.substr(first, last - first + 1));
  }
  if (!line.empty() && line.back() == ',') {
    cells.emplace_back();
  }
  return cells;
}

double parse_number(const std::string& cell, std::size_t line_no) {
  double value = 0.0;
  const char* begin = cell.data();
  const char* end = begin + cell.size();
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (cell.empty() || ec != std::errc() || ptr != end) {
    throw IoError("csv line " + std::to_string(line_no) + ": '" + cell + "' is not a number");
  }
  return value;
}

}  // namespace

CsvTable::CsvTable(std::vector<std::string> header, int significant_digits)
    : header_(std::move(header)), digits_(significant_digits) {
  if (header_.empty()) {
    throw InvalidArgument("CsvTable: header must not be empty");
  }
}

void CsvTable::add_row(std::vector<double> row) {
  if (row.size() != header_.size()) {
    throw DimensionMismatch("CsvTable: row has " + std::to_string(row.size()) +
                            " cells, header has " + std::to_string(header_.size()));
  }
  rows_.push_back(std::move(row));
}

std::size_t CsvTable::column_index(const std::string& name) const {
  for (std::size_t i = 0; i < header_.size(); ++i) {
    if (header_[i] == name) {
      return i;
    }
  }
  throw InvalidArgument("CsvTable: no column named '" + name + "'");
}

std::vector<double> CsvTable::column(const std::string& name) const {
  const std::size_t idx = column_index(name);
  std::vector<double> out;
  out.reserve(rows_.size());
  for (const auto& row : rows_) {
    out.push_back(row[idx]);
  }
  return out;
}

std::string CsvTable::to_string() const {
  std::string out;
  for (std::size_t i = 0; i < header_.size(); ++i) {
    out += (i ? "," : "") + header_[i];
  }
  out += '\n';
  char buf[64];
  for (const auto& row : rows_) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%.*g", digits_, row[i]);
      if (i) {
        out += ',';
      }
      out += buf;
    }
    out += '\n';
  }
  return out;
}

void CsvTable::write(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw IoError("cannot open '" + path.string() + "' for writing");
  }
  out << to_string();
  if (!out) {
    throw IoError("failed writing '" + path.string() + "'");
  }
}

CsvTable CsvTable::parse(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  while (header.empty() && std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") != std::string::npos) {
      header = split(line);
    }
  }
  if (header.empty()) {
    throw IoError("csv: missing header row");
  }
  CsvTable table(header);
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) {
      continue;
    }
    const auto cells = split(line);
    if (cells.size() != header.size()) {
      throw IoError("csv line " + std::to_string(line_no) + ": expected " +
                    std::to_string(header.size()) + " cells, found " +
                    std::to_string(cells.size()));
    }
    std::vector<double> row;
    row.reserve(cells.size());
    for (const auto& cell : cells) {
      row.push_back(parse_number(cell, line_no));
    }
    table.rows_.push_back(std::move(row));
  }
  return table;
}

CsvTable CsvTable::read(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open '" + path.string() + "'");
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse(buffer.str());
}

}  // namespace paota
