#include "dicnet/data/io.hpp"

#include "dicnet/core/error.hpp"
#include "dicnet/diffcore/matrix_io.hpp"

#include <json.hpp>

#include <fstream>
#include <set>

namespace dicnet {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

constexpr std::string_view kModule = "data";
constexpr const char* kManifestName = "manifest.json";
constexpr const char* kFormat = "dicnet-dataset";
constexpr int kVersion = 1;

const std::set<std::string>& known_fields() {
  static const std::set<std::string> fields = {
      "format", "version", "n", "l", "c", "view_dims", "views", "labels",
      "view_mask", "label_mask", "split", "corruption", "seed", "origin",
      "view_names", "label_names"};
  return fields;
}

template <typename T>
T field(const json& j, const char* key) {
  if (!j.contains(key)) throw IoError(kModule, std::string("manifest lacks field '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw IoError(kModule, std::string("manifest field '") + key + "' is malformed: " + e.what());
  }
}

Matrix read_checked(const fs::path& dir, const std::string& file, Eigen::Index rows,
                    Eigen::Index cols, const std::string& what) {
  const fs::path path = dir / file;
  if (!fs::exists(path)) throw IoError(kModule, what + " file " + path.string() + " is missing");
  Matrix m = read_matrix_file(path);
  if (m.rows() == 0 && rows > 0) m.resize(0, cols);
  if (m.rows() != rows || m.cols() != cols) {
    throw ShapeError(kModule, what + " (" + file + ") has shape " +
                                  to_string(shape_of(m)) + ", manifest declares " +
                                  to_string({rows, cols}));
  }
  return m;
}

std::vector<std::size_t> read_indices(const fs::path& path, std::size_t n) {
  std::ifstream in(path);
  if (!in) throw IoError(kModule, "index file " + path.string() + " is missing");
  std::vector<std::size_t> out;
  long long idx = 0;
  while (in >> idx) {
    if (idx < 0 || static_cast<std::size_t>(idx) >= n) {
      throw ValidationError(kModule, path.filename().string() + ": index " +
                                         std::to_string(idx) + " out of range");
    }
    out.push_back(static_cast<std::size_t>(idx));
  }
  if (!in.eof()) throw IoError(kModule, path.filename().string() + ": malformed index");
  return out;
}

void write_indices(const fs::path& path, const std::vector<std::size_t>& indices) {
  std::ofstream out(path);
  if (!out) throw IoError(kModule, "cannot write " + path.string());
  for (std::size_t i : indices) out << i << '\n';
}

json mask_spec_json(const MaskSpec& s) {
  return {{"p", s.view_missing_rate}, {"q", s.label_missing_rate},
          {"m", s.train_fraction}, {"seed", s.seed}};
}

}  // namespace

LoadedDataset load_dataset(const fs::path& manifest_or_dir) {
  const fs::path manifest_path =
      fs::is_directory(manifest_or_dir) ? manifest_or_dir / kManifestName : manifest_or_dir;
  const fs::path dir = manifest_path.parent_path();
  std::ifstream in(manifest_path);
  if (!in) throw IoError(kModule, "cannot open manifest " + manifest_path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw IoError(kModule, "manifest " + manifest_path.string() + " is not valid JSON: " + e.what());
  }
  if (!j.is_object()) throw IoError(kModule, "manifest must be a JSON object");

  LoadedDataset out;
  for (const auto& [key, value] : j.items()) {
    if (!known_fields().count(key)) out.warnings.push_back("unknown manifest field '" + key + "' ignored");
  }
  if (field<std::string>(j, "format") != kFormat) {
    throw IoError(kModule, "manifest format is not '" + std::string(kFormat) + "'");
  }
  if (field<int>(j, "version") != kVersion) {
    throw IoError(kModule, "unsupported manifest version");
  }

  DatasetManifest& m = out.manifest;
  m.n = field<std::size_t>(j, "n");
  m.l = field<std::size_t>(j, "l");
  m.c = field<std::size_t>(j, "c");
  m.view_dims = field<std::vector<std::size_t>>(j, "view_dims");
  m.view_files = field<std::vector<std::string>>(j, "views");
  m.labels_file = field<std::string>(j, "labels");
  m.view_mask_file = field<std::string>(j, "view_mask");
  m.label_mask_file = field<std::string>(j, "label_mask");
  if (m.view_dims.size() != m.l || m.view_files.size() != m.l) {
    throw ValidationError(kModule, "manifest lists " + std::to_string(m.view_files.size()) +
                                       " view files and " + std::to_string(m.view_dims.size()) +
                                       " dims for l = " + std::to_string(m.l));
  }

  const auto n = static_cast<Eigen::Index>(m.n);
  std::vector<Matrix> views;
  for (std::size_t v = 0; v < m.l; ++v) {
    views.push_back(read_checked(dir, m.view_files[v], n,
                                 static_cast<Eigen::Index>(m.view_dims[v]),
                                 "view " + std::to_string(v)));
  }
  const auto c = static_cast<Eigen::Index>(m.c);
  Matrix labels = read_checked(dir, m.labels_file, n, c, "labels");
  Matrix view_mask = read_checked(dir, m.view_mask_file, n, static_cast<Eigen::Index>(m.l), "view mask");
  Matrix label_mask = read_checked(dir, m.label_mask_file, n, c, "label mask");
  out.data = MultiViewDataset(std::move(views), std::move(labels), std::move(view_mask),
                              std::move(label_mask));
  if (j.contains("view_names")) out.data.view_names = field<std::vector<std::string>>(j, "view_names");
  if (j.contains("label_names")) out.data.label_names = field<std::vector<std::string>>(j, "label_names");

  if (j.contains("split")) {
    const json& s = j.at("split");
    m.train_index_file = field<std::string>(s, "train");
    m.test_index_file = field<std::string>(s, "test");
    Split split{read_indices(dir / *m.train_index_file, m.n),
                read_indices(dir / *m.test_index_file, m.n)};
    std::vector<bool> seen(m.n, false);
    for (const auto* part : {&split.train, &split.test}) {
      for (std::size_t i : *part) {
        if (seen[i]) throw ValidationError(kModule, "split lists sample " + std::to_string(i) + " twice");
        seen[i] = true;
      }
    }
    if (split.train.size() + split.test.size() != m.n) {
      throw ValidationError(kModule, "split does not cover every sample");
    }
    out.split = std::move(split);
  }
  if (j.contains("corruption")) {
    const json& s = j.at("corruption");
    MaskSpec spec;
    spec.view_missing_rate = field<double>(s, "p");
    spec.label_missing_rate = field<double>(s, "q");
    spec.train_fraction = field<double>(s, "m");
    spec.seed = field<std::uint64_t>(s, "seed");
    spec.validate();
    m.corruption = spec;
  }
  if (j.contains("seed")) m.seed = field<std::uint64_t>(j, "seed");
  if (j.contains("origin")) m.origin_json = j.at("origin").dump();
  return out;
}

DatasetManifest save_dataset(const MultiViewDataset& ds, const fs::path& directory,
                             const SaveOptions& options) {
  std::error_code ec;
  fs::create_directories(directory, ec);
  if (ec) throw IoError(kModule, "cannot create " + directory.string() + ": " + ec.message());

  DatasetManifest m;
  m.n = ds.num_samples();
  m.l = ds.num_views();
  m.c = ds.num_labels();
  m.view_dims = ds.view_dims();
  for (std::size_t v = 0; v < m.l; ++v) {
    m.view_files.push_back("view_" + std::to_string(v) + ".txt");
    write_matrix_file(directory / m.view_files.back(), ds.view(v));
  }
  write_matrix_file(directory / m.labels_file, ds.labels());
  write_matrix_file(directory / m.view_mask_file, ds.view_mask());
  write_matrix_file(directory / m.label_mask_file, ds.label_mask());

  json j = {{"format", kFormat},          {"version", kVersion},
            {"n", m.n},                   {"l", m.l},
            {"c", m.c},                   {"view_dims", m.view_dims},
            {"views", m.view_files},      {"labels", m.labels_file},
            {"view_mask", m.view_mask_file}, {"label_mask", m.label_mask_file}};
  if (!ds.view_names.empty()) j["view_names"] = ds.view_names;
  if (!ds.label_names.empty()) j["label_names"] = ds.label_names;
  if (options.split) {
    m.train_index_file = "train_idx.txt";
    m.test_index_file = "test_idx.txt";
    write_indices(directory / *m.train_index_file, options.split->train);
    write_indices(directory / *m.test_index_file, options.split->test);
    j["split"] = {{"train", *m.train_index_file}, {"test", *m.test_index_file}};
  }
  if (options.corruption) {
    m.corruption = options.corruption;
    j["corruption"] = mask_spec_json(*options.corruption);
  }
  if (options.seed) {
    m.seed = options.seed;
    j["seed"] = *options.seed;
  }
  if (options.origin_json) {
    m.origin_json = options.origin_json;
    j["origin"] = json::parse(*options.origin_json);
  }
  std::ofstream out(directory / kManifestName);
  if (!out) throw IoError(kModule, "cannot write manifest in " + directory.string());
  out << j.dump(2) << '\n';
  return m;
}

}  // namespace dicnet
