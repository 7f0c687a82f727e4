#include "slateglm/harness/csv.hpp"

#include <array>
#include <charconv>
#include <fstream>
#include <sstream>

namespace slateglm::harness {

std::string format_number(double v) {
  std::array<char, 32> buf{};
  const auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  if (ec != std::errc()) throw std::runtime_error("format_number: conversion failed");
  return std::string(buf.data(), end);
}

double parse_number(const std::string& cell, const std::string& column) {
  double v = 0.0;
  const auto [p, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (ec != std::errc() || p != cell.data() + cell.size() || cell.empty()) {
    throw SchemaError("column '" + column + "': not a number: '" + cell + "'");
  }
  return v;
}

std::size_t CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < columns.size(); ++i)
    if (columns[i] == name) return i;
  throw SchemaError("missing column '" + name + "'");
}

namespace {

std::vector<std::string> split_row(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot read '" + path.string() + "'");
  CsvTable table;
  std::string line;
  if (!std::getline(in, table.schema) || table.schema.rfind("# ", 0) != 0) {
    throw SchemaError(path.string() + ": missing schema comment line");
  }
  if (!std::getline(in, line)) throw SchemaError(path.string() + ": missing header");
  table.columns = split_row(line);
  std::size_t lineno = 2;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto row = split_row(line);
    if (row.size() != table.columns.size()) {
      throw SchemaError(path.string() + ": line " + std::to_string(lineno) + " has " + std::to_string(row.size()) +
                        " cells, header has " + std::to_string(table.columns.size()));
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

void write_csv(const std::filesystem::path& path, const std::string& schema, const std::vector<std::string>& columns,
               const std::vector<std::vector<std::string>>& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  auto put = [&out](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out << ',';
      out << cells[i];
    }
    out << '\n';
  };
  out << schema << '\n';
  put(columns);
  for (const auto& r : rows) put(r);
  if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
}

}  // namespace slateglm::harness
