#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "madm/linalg.hpp"

namespace madm {

// 17 significant digits, so doubles round-trip exactly.
std::string format_double(double v);

// Rows of numbers under a fixed header; one line per row.
void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows);
// Same with preformatted string cells.
void write_csv_cells(const std::filesystem::path& path, const std::vector<std::string>& header,
                     const std::vector<std::vector<std::string>>& rows);

// One sample per row with columns x0, x1, ...
void write_samples_csv(const std::filesystem::path& path, const Matrix& samples);
// Reads a file written by write_samples_csv.
Matrix read_samples_csv(const std::filesystem::path& path);

void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace madm
