#pragma once

#include "dicnet/diffcore/graph.hpp"
#include "dicnet/diffcore/tensor.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace dicnet {

/// Builds a scalar loss from the given parameter values inside `graph`.
/// Parameters must be bound with graph.parameter(name, params.at(name)).
using LossBuilder = std::function<Var(Graph& graph, const ParamStore& params)>;

struct GradCheckOptions {
  double step = 1e-5;
  double tolerance = 1e-4;
  /// Coordinates sampled per parameter (all of them when the parameter is
  /// smaller).
  std::size_t coordinates = 20;
  /// Denominator floor of the relative error |a - f| / max(|a|, |f|, floor),
  /// so gradients that are numerically zero are compared absolutely.
  double floor = 1e-6;
  std::uint64_t seed = 0;
};

struct ParamCheck {
  std::string name;
  std::size_t coordinates_checked = 0;
  double max_relative_error = 0.0;
  bool passed = false;
};

struct GradCheckReport {
  std::vector<ParamCheck> params;
  double tolerance = 0.0;

  bool all_passed() const;
  double max_relative_error() const;
};

/// Compares reverse-mode gradients with central differences.
GradCheckReport finite_diff_check(const LossBuilder& build, const ParamStore& params,
                                  const GradCheckOptions& options = {});

}  // namespace dicnet
