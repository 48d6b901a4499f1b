#pragma once

#include "dicnet/diffcore/tensor.hpp"

#include <cstdint>
#include <map>
#include <string>

namespace dicnet {

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  void validate() const;
};

/// Moment accumulators for every parameter plus the step counter. Moments are
/// created lazily on the first step with the parameter's shape.
class AdamState {
 public:
  AdamState() = default;
  explicit AdamState(AdamConfig config);

  const AdamConfig& config() const { return config_; }
  std::uint64_t step() const { return step_; }
  const Matrix& first_moment(const std::string& name) const;
  const Matrix& second_moment(const std::string& name) const;

 private:
  friend void adam_step(ParamStore&, const GradientMap&, AdamState&);

  AdamConfig config_;
  std::uint64_t step_ = 0;
  std::map<std::string, Matrix> m_;
  std::map<std::string, Matrix> v_;
};

/// One bias-corrected Adam update of every parameter in `params`. Every
/// parameter must have a gradient of identical shape.
void adam_step(ParamStore& params, const GradientMap& grads, AdamState& state);

}  // namespace dicnet
