#include "dicnet/diffcore/adam.hpp"

#include "dicnet/core/error.hpp"

#include <cmath>

namespace dicnet {

void AdamConfig::validate() const {
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
    throw ValidationError("diffcore", "learning rate must be finite and >= 0");
  }
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
    throw ValidationError("diffcore", "Adam betas must lie in [0, 1)");
  }
  if (!(epsilon > 0.0)) throw ValidationError("diffcore", "Adam epsilon must be > 0");
}

AdamState::AdamState(AdamConfig config) : config_(config) { config_.validate(); }

const Matrix& AdamState::first_moment(const std::string& name) const {
  auto it = m_.find(name);
  if (it == m_.end()) throw ValidationError("diffcore", "no moment for '" + name + "'");
  return it->second;
}

const Matrix& AdamState::second_moment(const std::string& name) const {
  auto it = v_.find(name);
  if (it == v_.end()) throw ValidationError("diffcore", "no moment for '" + name + "'");
  return it->second;
}

void adam_step(ParamStore& params, const GradientMap& grads, AdamState& state) {
  for (const auto& [name, value] : params) {
    auto it = grads.find(name);
    if (it == grads.end()) {
      throw ValidationError("diffcore", "missing gradient for parameter '" + name + "'");
    }
    if (shape_of(it->second) != shape_of(value)) {
      throw ShapeError("diffcore", "gradient for '" + name + "' has shape " +
                                       to_string(shape_of(it->second)) +
                                       ", parameter has " + to_string(shape_of(value)));
    }
  }

  const AdamConfig& c = state.config_;
  ++state.step_;
  const double t = static_cast<double>(state.step_);
  const double bias1 = 1.0 - std::pow(c.beta1, t);
  const double bias2 = 1.0 - std::pow(c.beta2, t);

  for (const auto& [name, value] : params) {
    const Matrix& g = grads.at(name);
    auto [mit, m_new] = state.m_.try_emplace(name, Matrix::Zero(g.rows(), g.cols()));
    auto [vit, v_new] = state.v_.try_emplace(name, Matrix::Zero(g.rows(), g.cols()));
    Matrix& m = mit->second;
    Matrix& v = vit->second;
    m = c.beta1 * m + (1.0 - c.beta1) * g;
    v = c.beta2 * v + (1.0 - c.beta2) * g.cwiseProduct(g);
    Matrix& p = params.mutable_at(name);
    p.array() -= c.learning_rate * (m.array() / bias1) /
                 ((v.array() / bias2).sqrt() + c.epsilon);
  }
}

}  // namespace dicnet
