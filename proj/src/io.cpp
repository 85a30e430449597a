#include "madm/io.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "madm/error.hpp"

namespace madm {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

std::ofstream open_output(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + path.string() + "'");
  return out;
}

void write_header(std::ofstream& out, const std::vector<std::string>& header) {
  for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
  out << '\n';
}

}  // namespace

void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows) {
  auto out = open_output(path);
  write_header(out, header);
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << format_double(row[i]);
    out << '\n';
  }
}

void write_csv_cells(const std::filesystem::path& path, const std::vector<std::string>& header,
                     const std::vector<std::vector<std::string>>& rows) {
  auto out = open_output(path);
  write_header(out, header);
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << row[i];
    out << '\n';
  }
}

void write_samples_csv(const std::filesystem::path& path, const Matrix& samples) {
  auto out = open_output(path);
  for (Index i = 0; i < samples.rows(); ++i) out << (i ? "," : "") << 'x' << i;
  out << '\n';
  for (Index j = 0; j < samples.cols(); ++j) {
    for (Index i = 0; i < samples.rows(); ++i) out << (i ? "," : "") << format_double(samples(i, j));
    out << '\n';
  }
}

Matrix read_samples_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read '" + path.string() + "'");
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("'" + path.string() + "' is empty");
  const auto dim = static_cast<Index>(std::count(line.begin(), line.end(), ',') + 1);
  std::vector<double> values;
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    Index cols = 0;
    while (std::getline(ss, cell, ',')) {
      try {
        values.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw ConfigError("'" + path.string() + "': bad number '" + cell + "'");
      }
      ++cols;
    }
    if (cols != dim) throw ConfigError("'" + path.string() + "': ragged row " + std::to_string(rows + 2));
    ++rows;
  }
  Matrix out(dim, static_cast<Index>(rows));
  for (std::size_t j = 0; j < rows; ++j)
    for (Index i = 0; i < dim; ++i) out(i, static_cast<Index>(j)) = values[j * static_cast<std::size_t>(dim) + static_cast<std::size_t>(i)];
  return out;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  auto out = open_output(path);
  out << text;
}

}  // namespace madm
