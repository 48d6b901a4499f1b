#pragma once

#include "dicnet/data/dataset.hpp"
#include "dicnet/data/masks.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace dicnet {

/// Description of a dataset directory. Serialized as `manifest.json`; the
/// grammar is documented in docs/formats.md.
struct DatasetManifest {
  std::size_t n = 0;
  std::size_t l = 0;
  std::size_t c = 0;
  std::vector<std::size_t> view_dims;
  std::vector<std::string> view_files;
  std::string labels_file = "labels.txt";
  std::string view_mask_file = "view_mask.txt";
  std::string label_mask_file = "label_mask.txt";
  std::optional<std::string> train_index_file;
  std::optional<std::string> test_index_file;
  std::optional<MaskSpec> corruption;
  std::optional<std::uint64_t> seed;
  /// Free-form provenance (e.g. synthesis parameters); stored verbatim.
  std::optional<std::string> origin_json;
};

struct LoadedDataset {
  MultiViewDataset data;
  DatasetManifest manifest;
  std::optional<Split> split;
  /// Non-fatal findings, e.g. unknown manifest fields.
  std::vector<std::string> warnings;
};

/// Accepts either the manifest path or the directory holding manifest.json.
LoadedDataset load_dataset(const std::filesystem::path& manifest_or_dir);

struct SaveOptions {
  std::optional<Split> split;
  std::optional<MaskSpec> corruption;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> origin_json;
};

/// Writes matrices and manifest.json into `directory` (created if needed).
DatasetManifest save_dataset(const MultiViewDataset& ds,
                             const std::filesystem::path& directory,
                             const SaveOptions& options = {});

}  // namespace dicnet
