#include "dicnet/data/synthetic.hpp"

#include "dicnet/core/error.hpp"
#include "dicnet/core/rng.hpp"

#include <json.hpp>

#include <cmath>

namespace dicnet {

namespace {

constexpr std::string_view kModule = "data";
constexpr int kMaxLabelRetries = 100;

Matrix normal_matrix(Rng& rng, std::size_t rows, std::size_t cols, double stddev) {
  Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index k = 0; k < m.size(); ++k) m.data()[k] = stddev * rng.normal();
  return m;
}

}  // namespace

void SynthSpec::validate() const {
  if (n < 1 || l < 1 || c < 1 || latent_dim < 1) {
    throw ValidationError(kModule, "synthesis counts n, l, c, latent_dim must be >= 1");
  }
  if (dims.size() != l) {
    throw ValidationError(kModule, "synthesis needs " + std::to_string(l) +
                                       " view dims, got " + std::to_string(dims.size()));
  }
  for (std::size_t d : dims) {
    if (d < 1) throw ValidationError(kModule, "view dims must be >= 1");
  }
  if (shared_projection) {
    for (std::size_t d : dims) {
      if (d != dims.front()) {
        throw ValidationError(kModule, "shared projection requires equal view dims");
      }
    }
  }
  if (!(noise >= 0.0) || !std::isfinite(noise)) {
    throw ValidationError(kModule, "noise must be finite and >= 0");
  }
}

std::string SynthSpec::to_json() const {
  nlohmann::json j = {{"generator", "synthetic"}, {"n", n},
                      {"l", l},                   {"c", c},
                      {"dims", dims},             {"latent_dim", latent_dim},
                      {"noise", noise},           {"seed", seed},
                      {"shared_projection", shared_projection}};
  return j.dump();
}

MultiViewDataset generate_synthetic(const SynthSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  const Matrix latent = normal_matrix(rng, spec.n, spec.latent_dim, 1.0);
  const double proj_scale = 1.0 / std::sqrt(static_cast<double>(spec.latent_dim));

  std::vector<Matrix> views;
  Matrix shared;
  for (std::size_t v = 0; v < spec.l; ++v) {
    Matrix projection;
    if (spec.shared_projection && v > 0) {
      projection = shared;
    } else {
      projection = normal_matrix(rng, spec.latent_dim, spec.dims[v], proj_scale);
      if (v == 0) shared = projection;
    }
    Matrix x = latent * projection;
    if (spec.noise > 0.0) x += normal_matrix(rng, spec.n, spec.dims[v], spec.noise);
    views.push_back(std::move(x));
  }

  Matrix labels(static_cast<Eigen::Index>(spec.n), static_cast<Eigen::Index>(spec.c));
  for (std::size_t j = 0; j < spec.c; ++j) {
    bool accepted = false;
    for (int attempt = 0; attempt < kMaxLabelRetries && !accepted; ++attempt) {
      const Matrix w = normal_matrix(rng, spec.latent_dim, 1, proj_scale);
      const double bias = rng.normal();
      const Matrix logits = (latent * w).array() + bias;
      std::size_t positives = 0;
      for (Eigen::Index i = 0; i < logits.rows(); ++i) {
        const double p = 1.0 / (1.0 + std::exp(-logits(i, 0)));
        const double y = p >= 0.5 ? 1.0 : 0.0;
        labels(i, static_cast<Eigen::Index>(j)) = y;
        positives += y == 1.0 ? 1 : 0;
      }
      const double rate = static_cast<double>(positives) / static_cast<double>(spec.n);
      accepted = rate >= 0.1 && rate <= 0.9;
    }
    if (!accepted) {
      throw ValidationError(kModule, "label " + std::to_string(j) +
                                         " could not reach a positive rate in [0.1, 0.9] after " +
                                         std::to_string(kMaxLabelRetries) + " draws");
    }
  }
  return MultiViewDataset::complete(std::move(views), std::move(labels));
}

}  // namespace dicnet
