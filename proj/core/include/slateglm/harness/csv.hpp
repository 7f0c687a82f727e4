#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace slateglm::harness {

inline constexpr const char* kRoundsSchema = "# slateglm rounds v1";
inline constexpr const char* kTimingSchema = "# slateglm timing v1";
inline constexpr const char* kAggregateSchema = "# slateglm aggregate v1";
inline constexpr const char* kPlotSchema = "# slateglm plot v1";
inline constexpr const char* kBenchSchema = "# slateglm bench v1";

class SchemaError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Shortest decimal that parses back to the same double.
std::string format_number(double v);

struct CsvTable {
  std::string schema;  ///< the leading comment line
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  /// Index of a column; throws SchemaError naming it when absent.
  std::size_t column(const std::string& name) const;
};

/// Reads a versioned CSV (comment line, header, rows). Throws SchemaError on ragged rows.
CsvTable read_csv(const std::filesystem::path& path);

/// Writes `schema`, the header and rows, each line ending in '\n'.
void write_csv(const std::filesystem::path& path, const std::string& schema, const std::vector<std::string>& columns,
               const std::vector<std::vector<std::string>>& rows);

double parse_number(const std::string& cell, const std::string& column);

}  // namespace slateglm::harness
