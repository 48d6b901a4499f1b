#include "dicnet/diffcore/gradcheck.hpp"

#include "dicnet/core/error.hpp"
#include "dicnet/core/rng.hpp"

#include <algorithm>
#include <cmath>

namespace dicnet {

namespace {

double evaluate(const LossBuilder& build, const ParamStore& params,
                const std::string& name, Eigen::Index coord) {
  Graph graph;
  Var loss = build(graph, params);
  double value = 0.0;
  try {
    value = graph.forward(loss)(0, 0);
  } catch (const NumericError&) {
    value = std::nan("");
  }
  if (!std::isfinite(value)) {
    throw NumericError("diffcore", "loss is non-finite after perturbing '" + name +
                                       "' coordinate " + std::to_string(coord));
  }
  return value;
}

}  // namespace

bool GradCheckReport::all_passed() const {
  return std::all_of(params.begin(), params.end(),
                     [](const ParamCheck& p) { return p.passed; });
}

double GradCheckReport::max_relative_error() const {
  double worst = 0.0;
  for (const ParamCheck& p : params) worst = std::max(worst, p.max_relative_error);
  return worst;
}

GradCheckReport finite_diff_check(const LossBuilder& build, const ParamStore& params,
                                  const GradCheckOptions& options) {
  if (!(options.step > 0.0)) {
    throw ValidationError("diffcore", "finite-difference step must be > 0");
  }
  if (options.tolerance < 0.0) {
    throw ValidationError("diffcore", "tolerance must be >= 0");
  }

  Graph graph;
  Var loss = build(graph, params);
  graph.forward(loss);
  graph.backward(loss);
  const GradientMap analytic = graph.parameter_gradients();

  GradCheckReport report;
  report.tolerance = options.tolerance;
  Rng rng(options.seed);
  ParamStore probe = params;

  for (const auto& [name, value] : params) {
    auto it = analytic.find(name);
    if (it == analytic.end()) {
      throw ValidationError("diffcore", "loss builder did not bind parameter '" + name + "'");
    }
    const auto count = static_cast<std::size_t>(value.size());
    std::vector<std::size_t> coords = rng.permutation(count);
    coords.resize(std::min(count, options.coordinates));

    ParamCheck check;
    check.name = name;
    for (std::size_t flat : coords) {
      const auto idx = static_cast<Eigen::Index>(flat);
      Matrix& p = probe.mutable_at(name);
      const double original = p.data()[idx];
      p.data()[idx] = original + options.step;
      const double plus = evaluate(build, probe, name, idx);
      probe.mutable_at(name).data()[idx] = original - options.step;
      const double minus = evaluate(build, probe, name, idx);
      probe.mutable_at(name).data()[idx] = original;

      const double numeric = (plus - minus) / (2.0 * options.step);
      const double exact = it->second.data()[idx];
      const double denom =
          std::max({std::abs(numeric), std::abs(exact), options.floor});
      check.max_relative_error =
          std::max(check.max_relative_error, std::abs(numeric - exact) / denom);
      ++check.coordinates_checked;
    }
    check.passed = check.max_relative_error < options.tolerance;
    report.params.push_back(std::move(check));
  }
  return report;
}

}  // namespace dicnet
