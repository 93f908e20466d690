#include "triodflow/report.hpp"

#include <array>
#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace triodflow {

std::string format_double(double value) {
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  return std::string(buf.data(), res.ptr);
}

CsvTable::CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

void CsvTable::add_row(std::vector<CsvCell> row) {
  if (row.size() != header_.size()) throw std::invalid_argument("CSV row width does not match the header");
  rows_.push_back(std::move(row));
}

namespace {

std::string cell_text(const CsvCell& cell) {
  struct Visitor {
    std::string operator()(std::monostate) const { return {}; }
    std::string operator()(double v) const { return format_double(v); }
    std::string operator()(std::int64_t v) const { return std::to_string(v); }
    std::string operator()(const std::string& s) const { return s; }
  };
  return std::visit(Visitor{}, cell);
}

void join(std::ostringstream& out, const std::vector<std::string>& fields) {
  for (std::size_t k = 0; k < fields.size(); ++k) {
    if (k) out << ',';
    out << fields[k];
  }
  out << '\n';
}

}  // namespace

std::string CsvTable::to_string() const {
  std::ostringstream out;
  join(out, header_);
  for (const auto& row : rows_) {
    std::vector<std::string> fields;
    fields.reserve(row.size());
    for (const auto& c : row) fields.push_back(cell_text(c));
    join(out, fields);
  }
  return out.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

void CsvTable::write(const std::filesystem::path& path) const { write_text(path, to_string()); }

void write_summary(const std::filesystem::path& path, const Summary& summary) {
  write_text(path, summary.dump(2) + "\n");
}

std::string render_svg(const TriodState& triod) {
  static constexpr std::array<const char*, 3> kColors{"#d62728", "#2ca02c", "#1f77b4"};
  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"-1.2 -1.2 2.4 2.4\" width=\"480\" height=\"480\">\n";
  out << "<rect x=\"-1.2\" y=\"-1.2\" width=\"2.4\" height=\"2.4\" fill=\"white\"/>\n";
  for (std::size_t i = 0; i < 3; ++i) {
    out << "<polyline fill=\"none\" stroke=\"" << kColors[i] << "\" stroke-width=\"0.01\" points=\"";
    const auto& nodes = triod.curves[i].nodes;
    for (std::size_t j = 0; j < nodes.size(); ++j) {
      if (j) out << ' ';
      // SVG y grows downwards.
      out << format_double(nodes[j].x) << ',' << format_double(-nodes[j].y);
    }
    out << "\"/>\n";
  }
  out << "</svg>\n";
  return out.str();
}

void write_svg(const std::filesystem::path& path, const TriodState& triod) { write_text(path, render_svg(triod)); }

}  // namespace triodflow
