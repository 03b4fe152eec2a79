#include "liodmd/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "liodmd/errors.hpp"

namespace liodmd {

Eigen::VectorXd TimeGrid::times() const {
  Eigen::VectorXd t(count);
  for (Eigen::Index k = 0; k < count; ++k) t[k] = time(k);
  return t;
}

void TimeGrid::validate() const {
  if (count < 2) {
    throw InputError("time grid needs at least 2 samples, got " + std::to_string(count));
  }
  if (!(dt > 0.0) || !std::isfinite(dt)) {
    throw InputError("time grid step must be positive and finite");
  }
}

bool TimeGrid::matches(const TimeGrid& other) const {
  return count == other.count && std::abs(dt - other.dt) <= 1e-12 * std::max(dt, other.dt);
}

QuadratureMethod parse_quadrature_method(const std::string& name) {
  if (name == "trapezoid") return QuadratureMethod::Trapezoid;
  if (name == "simpson") return QuadratureMethod::Simpson;
  throw InputError("unknown quadrature method '" + name + "' (expected trapezoid or simpson)");
}

std::string to_string(QuadratureMethod method) {
  return method == QuadratureMethod::Simpson ? "simpson" : "trapezoid";
}

QuadratureRule make_rule(const TimeGrid& grid, int order, QuadratureMethod method) {
  grid.validate();
  if (order < 1) throw InputError("quadrature order must be >= 1");

  QuadratureRule rule;
  rule.grid = grid;
  rule.order = order;
  rule.method = method;

  const Eigen::Index n = grid.count;
  const double dt = grid.dt;
  Eigen::VectorXd w = Eigen::VectorXd::Zero(n);

  // Number of nodes covered by Simpson panels (odd); the remainder, if any,
  // is a single trapezoid interval at the end.
  Eigen::Index simpson_nodes = 0;
  if (method == QuadratureMethod::Simpson && n >= 3) {
    simpson_nodes = (n % 2 == 1) ? n : n - 1;
  }
  rule.mixed = method == QuadratureMethod::Simpson && simpson_nodes != n;

  if (simpson_nodes >= 3) {
    for (Eigen::Index k = 0; k + 2 < simpson_nodes; k += 2) {
      w[k] += dt / 3.0;
      w[k + 1] += 4.0 * dt / 3.0;
      w[k + 2] += dt / 3.0;
    }
    for (Eigen::Index k = simpson_nodes - 1; k + 1 < n; ++k) {
      w[k] += 0.5 * dt;
      w[k + 1] += 0.5 * dt;
    }
  } else {
    w.setConstant(dt);
    w[0] = w[n - 1] = 0.5 * dt;
  }
  rule.base_weights = w;

  const double horizon = grid.horizon();
  double factorial = 1.0;
  for (int j = 2; j < order; ++j) factorial *= j;
  rule.order_weights.resize(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    // t_{n-1} is exactly the horizon, so the last factor is an exact zero.
    const double lag = (k == n - 1) ? 0.0 : horizon - grid.time(k);
    rule.order_weights[k] = w[k] * std::pow(lag, order - 1) / factorial;
  }
  return rule;
}

double integrate(const QuadratureRule& rule, const Eigen::Ref<const Eigen::VectorXd>& samples) {
  if (samples.size() != rule.grid.count) {
    throw InputError("integrate: expected " + std::to_string(rule.grid.count) +
                     " samples, got " + std::to_string(samples.size()));
  }
  return rule.order_weights.dot(samples);
}

}  // namespace liodmd
