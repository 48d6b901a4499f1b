#pragma once

#include "dicnet/diffcore/tensor.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>

namespace dicnet {

/// Shortest decimal text that parses back to the same double.
std::string format_double(double x);
/// Strict parse of a whole token; throws IoError naming `context`.
double parse_double(std::string_view token, std::string_view context);

/// Text matrix: one row per line, entries separated by single spaces.
void write_matrix(std::ostream& out, const Matrix& m);
void write_matrix_file(const std::filesystem::path& path, const Matrix& m);
/// Reads every non-empty line as a row. All rows must have equal length.
Matrix read_matrix_file(const std::filesystem::path& path);

}  // namespace dicnet
