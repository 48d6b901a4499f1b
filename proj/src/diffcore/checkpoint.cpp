#include "dicnet/diffcore/checkpoint.hpp"

#include "dicnet/core/error.hpp"
#include "dicnet/diffcore/matrix_io.hpp"

#include <fstream>
#include <sstream>

namespace dicnet {

namespace {
constexpr std::string_view kMagic = "dicnet-checkpoint 1";
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  if (ckpt.header.find('\n') != std::string::npos) {
    throw ValidationError("diffcore", "checkpoint header must be a single line");
  }
  std::ofstream out(path);
  if (!out) throw IoError("diffcore", "cannot write checkpoint " + path.string());
  out << kMagic << '\n' << "header " << ckpt.header << '\n';
  for (const auto& [name, value] : ckpt.params) {
    out << "param " << name << ' ' << value.rows() << ' ' << value.cols() << '\n';
    write_matrix(out, value);
  }
  if (!out) throw IoError("diffcore", "write failed for " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("diffcore", "cannot open checkpoint " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != kMagic) {
    throw IoError("diffcore", path.string() + " is not a version 1 checkpoint");
  }
  Checkpoint ckpt;
  if (!std::getline(in, line) || line.rfind("header", 0) != 0) {
    throw IoError("diffcore", path.string() + ": missing header line");
  }
  ckpt.header = line.size() > 7 ? line.substr(7) : std::string();

  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream head(line);
    std::string keyword, name;
    Eigen::Index rows = -1, cols = -1;
    head >> keyword >> name >> rows >> cols;
    if (keyword != "param" || name.empty() || rows < 0 || cols < 0) {
      throw IoError("diffcore", path.string() + ": malformed record '" + line + "'");
    }
    Matrix value(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
      if (!std::getline(in, line)) {
        throw IoError("diffcore", path.string() + ": truncated parameter '" + name + "'");
      }
      std::istringstream fields(line);
      std::string token;
      Eigen::Index j = 0;
      while (fields >> token) {
        if (j >= cols) break;
        value(i, j++) = parse_double(token, "checkpoint parameter " + name);
      }
      if (j != cols || (fields >> token)) {
        throw ShapeError("diffcore", "checkpoint parameter '" + name + "' row " +
                                         std::to_string(i) + " does not have " +
                                         std::to_string(cols) + " values");
      }
    }
    ckpt.params.add(name, std::move(value));
  }
  return ckpt;
}

}  // namespace dicnet
