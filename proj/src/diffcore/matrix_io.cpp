#include "dicnet/diffcore/matrix_io.hpp"

#include "dicnet/core/error.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <vector>

namespace dicnet {

std::string format_double(double x) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  if (ec != std::errc{}) throw IoError("io", "cannot format value");
  return std::string(buf, end);
}

double parse_double(std::string_view token, std::string_view context) {
  double value = 0.0;
  const char* first = token.data();
  const char* last = token.data() + token.size();
  if (!token.empty() && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last || token.empty()) {
    throw IoError("io", std::string(context) + ": malformed number '" +
                            std::string(token) + "'");
  }
  return value;
}

void write_matrix(std::ostream& out, const Matrix& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j > 0) out << ' ';
      out << format_double(m(i, j));
    }
    out << '\n';
  }
}

void write_matrix_file(const std::filesystem::path& path, const Matrix& m) {
  std::ofstream out(path);
  if (!out) throw IoError("io", "cannot write " + path.string());
  write_matrix(out, m);
  if (!out) throw IoError("io", "write failed for " + path.string());
}

Matrix read_matrix_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("io", "cannot open " + path.string());
  std::vector<double> values;
  Eigen::Index rows = 0;
  Eigen::Index cols = -1;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream fields(line);
    std::string token;
    Eigen::Index count = 0;
    while (fields >> token) {
      values.push_back(parse_double(
          token, path.filename().string() + " line " + std::to_string(line_no)));
      ++count;
    }
    if (cols >= 0 && count != cols) {
      throw ShapeError("io", path.filename().string() + " line " +
                                 std::to_string(line_no) + " has " +
                                 std::to_string(count) + " columns, expected " +
                                 std::to_string(cols));
    }
    cols = count;
    ++rows;
  }
  if (rows == 0) return Matrix(0, 0);
  Matrix m(rows, cols);
  std::copy(values.begin(), values.end(), m.data());
  return m;
}

}  // namespace dicnet
