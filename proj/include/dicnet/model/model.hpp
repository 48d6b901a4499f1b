#pragma once

#include "dicnet/diffcore/checkpoint.hpp"
#include "dicnet/diffcore/graph.hpp"
#include "dicnet/diffcore/tensor.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace dicnet {

enum class InitScheme {
  kKaimingUniform,  // U(-b, b), b = sqrt(6 / fan_in) before ReLU, sqrt(3 / fan_in) otherwise
  kZeros,
};

std::string to_string(InitScheme scheme);
InitScheme init_scheme_from_string(const std::string& name);

struct ModelConfig {
  std::vector<std::size_t> view_dims;                // m_v per view
  std::vector<std::size_t> hidden_widths{512, 512};  // encoder hidden layers; decoder mirrors
  std::size_t repr_dim = 128;                        // d
  std::size_t num_labels = 0;                        // c
  InitScheme init = InitScheme::kKaimingUniform;
  std::uint64_t seed = 0;

  std::size_t num_views() const { return view_dims.size(); }
  void validate() const;
  std::string to_json() const;
  static ModelConfig from_json(const std::string& text);
};

/// Per-view encoder and decoder MLPs plus the shared sigmoid classifier.
///
/// Parameter names:
///   encoder.<v>.<k>.weight / .bias   layer k of the encoder of view v
///   decoder.<v>.<k>.weight / .bias
///   classifier.weight / classifier.bias
/// Weights are (fan_in x fan_out) and multiply row batches from the right.
class DICNetModel {
 public:
  DICNetModel() = default;
  explicit DICNetModel(ModelConfig config);  // initialise from config.seed
  DICNetModel(ModelConfig config, ParamStore params);

  const ModelConfig& config() const { return config_; }
  const ParamStore& params() const { return params_; }
  ParamStore& params() { return params_; }

  void save(const std::filesystem::path& path) const;
  static DICNetModel load(const std::filesystem::path& path);

 private:
  ModelConfig config_;
  ParamStore params_;
};

inline DICNetModel init_model(const ModelConfig& config) { return DICNetModel(config); }

/// A model's parameters bound into one graph.
class BoundModel {
 public:
  BoundModel(Graph& graph, const ModelConfig& config, const ParamStore& params);

  Graph& graph() const { return *graph_; }
  const ModelConfig& config() const { return *config_; }

  /// Z(v) = E(v)(X(v)): hidden ReLU layers, linear d-dimensional output.
  Var encode(std::size_t view, Var x) const;
  /// X^(v) = D(v)(Z(v)): mirror of the encoder with a linear output.
  Var decode(std::size_t view, Var z) const;
  /// P = sigmoid(H W + b).
  Var classify(Var h) const;

 private:
  struct Layer {
    Var weight;
    Var bias;
  };
  Var run(const std::vector<Layer>& layers, Var x) const;

  Graph* graph_;
  const ModelConfig* config_;
  std::vector<std::vector<Layer>> encoders_;
  std::vector<std::vector<Layer>> decoders_;
  Layer classifier_;
};

/// h_i = sum_v z_i(v) W[i, v] / sum_v W[i, v]: the mean over available views.
Var fuse(std::span<const Var> z, const Matrix& view_mask);

// Eager helpers that evaluate a throwaway graph.
Matrix encode(const DICNetModel& model, std::size_t view, const Matrix& x);
Matrix decode(const DICNetModel& model, std::size_t view, const Matrix& z);
Matrix fuse(std::span<const Matrix> z, const Matrix& view_mask);
Matrix classify(const DICNetModel& model, const Matrix& h);

}  // namespace dicnet
