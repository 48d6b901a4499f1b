#pragma once

#include "dicnet/diffcore/tensor.hpp"

#include <filesystem>
#include <string>

namespace dicnet {

/// A parameter container as stored on disk. `header` is an opaque one-line
/// string (the model stores its configuration there as JSON).
struct Checkpoint {
  std::string header;
  ParamStore params;
};

/// Format (text, version 1):
///
///   dicnet-checkpoint 1
///   header <one line of text, may be empty>
///   param <name> <rows> <cols>
///   <rows lines of <cols> space separated values>
///   ...
///
/// Values use the shortest round-trip decimal form, so save/load is exact.
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace dicnet
