#pragma once

/// @file report.hpp
/// @brief CSV tables, flat JSON summaries and SVG snapshots.

#include <cstdint>
#include <filesystem>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "triodflow/curve_mesh.hpp"

namespace triodflow {

/// Shortest decimal text that parses back to exactly the same double.
std::string format_double(double value);

/// One CSV cell; std::monostate is written as an empty field.
using CsvCell = std::variant<std::monostate, double, std::int64_t, std::string>;

class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header);

  /// Throws std::invalid_argument if the row width differs from the header.
  void add_row(std::vector<CsvCell> row);

  const std::vector<std::string>& header() const noexcept { return header_; }
  const std::vector<std::vector<CsvCell>>& rows() const noexcept { return rows_; }

  std::string to_string() const;
  void write(const std::filesystem::path& path) const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<CsvCell>> rows_;
};

/// Flat summary document; keys are expected to start with "params." or "result.".
using Summary = nlohmann::ordered_json;

void write_summary(const std::filesystem::path& path, const Summary& summary);

/// Polylines of the three curves in a viewBox covering [-1.2, 1.2]^2, y pointing up.
std::string render_svg(const TriodState& triod);
void write_svg(const std::filesystem::path& path, const TriodState& triod);

void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace triodflow
