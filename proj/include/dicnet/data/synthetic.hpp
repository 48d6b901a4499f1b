#pragma once

#include "dicnet/data/dataset.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace dicnet {

struct SynthSpec {
  std::size_t n = 500;
  std::size_t l = 3;
  std::size_t c = 10;
  std::vector<std::size_t> dims{40, 40, 40};
  std::size_t latent_dim = 8;
  double noise = 0.5;
  std::uint64_t seed = 0;
  /// Every view uses the first view's projection.
  bool shared_projection = false;

  void validate() const;
  std::string to_json() const;
};

/// Latent-factor data: U ~ N(0, 1) of shape n x latent_dim, each view
/// X(v) = U A(v) + noise * E with A(v) ~ N(0, 1 / latent_dim), and label j is
/// 1 where sigmoid(U w_j / sqrt(latent_dim) + b_j) >= 0.5. A label map is
/// redrawn (up to 100 times) until its positive rate lies in [0.1, 0.9].
/// Masks start all ones.
MultiViewDataset generate_synthetic(const SynthSpec& spec);

}  // namespace dicnet
