#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "liodmd/errors.hpp"
#include "liodmd/quadrature.hpp"

using namespace liodmd;
using Eigen::VectorXd;

namespace {

VectorXd sample(const TimeGrid& grid, double (*h)(double)) {
  return grid.times().unaryExpr(h);
}

// int_0^T int_0^tau h(s) ds dtau with the inner integral accumulated by the
// trapezoid rule and the outer one by the trapezoid rule again.
double nested(const TimeGrid& grid, const VectorXd& h) {
  VectorXd inner = VectorXd::Zero(grid.count);
  for (Eigen::Index k = 1; k < grid.count; ++k) inner[k] = inner[k - 1] + 0.5 * grid.dt * (h[k - 1] + h[k]);
  return integrate(make_rule(grid, 1), inner);
}

}  // namespace

TEST_CASE("trapezoid weights") {
  const TimeGrid grid{0.5, 3};
  const auto r1 = make_rule(grid, 1);
  CHECK(r1.base_weights.isApprox(VectorXd::Map(std::array{0.25, 0.5, 0.25}.data(), 3)));
  CHECK(r1.order_weights == r1.base_weights);
  const auto r2 = make_rule(grid, 2);
  CHECK(r2.order_weights[0] == doctest::Approx(0.25));
  CHECK(r2.order_weights[1] == doctest::Approx(0.25));
  CHECK(r2.order_weights[2] == 0.0);
}

TEST_CASE("rule invariants") {
  for (auto method : {QuadratureMethod::Trapezoid, QuadratureMethod::Simpson}) {
    for (Eigen::Index count : {2, 3, 4, 11, 12}) {
      const TimeGrid grid{0.37, count};
      for (int order : {1, 2, 3}) {
        const auto r = make_rule(grid, order, method);
        CHECK(r.base_weights.size() == count);
        CHECK(r.order_weights.size() == count);
        CHECK(std::abs(r.base_weights.sum() - grid.horizon()) <= 1e-12 * grid.horizon());
        if (order >= 2) CHECK(r.order_weights[count - 1] == 0.0);
      }
    }
  }
}

TEST_CASE("simpson on an even count is mixed") {
  CHECK_FALSE(make_rule(TimeGrid{0.1, 11}, 1, QuadratureMethod::Simpson).mixed);
  CHECK(make_rule(TimeGrid{0.1, 12}, 1, QuadratureMethod::Simpson).mixed);
  CHECK_FALSE(make_rule(TimeGrid{0.1, 12}, 1, QuadratureMethod::Trapezoid).mixed);
  // Simpson integrates cubics exactly on an odd count.
  const TimeGrid grid{0.25, 9};
  const auto r = make_rule(grid, 1, QuadratureMethod::Simpson);
  CHECK(integrate(r, sample(grid, [](double t) { return t * t * t; })) == doctest::Approx(4.0));
}

TEST_CASE("integration examples") {
  const TimeGrid fine{1e-3, 1001};
  const auto r = make_rule(fine, 2);
  CHECK(std::abs(integrate(r, sample(fine, [](double t) { return t * t; })) - 1.0 / 12.0) < 1e-6);
  CHECK(integrate(r, VectorXd::Zero(fine.count)) == 0.0);
  CHECK(std::abs(integrate(make_rule(TimeGrid{0.1, 11}, 2), VectorXd::Ones(11)) - 0.5) < 1e-9);
  CHECK_THROWS_AS(integrate(r, VectorXd::Ones(5)), InputError);
}

TEST_CASE("invalid grids") {
  CHECK_THROWS_AS(make_rule(TimeGrid{0.1, 1}, 1), InputError);
  CHECK_THROWS_AS(make_rule(TimeGrid{0.0, 5}, 1), InputError);
  CHECK_THROWS_AS(make_rule(TimeGrid{0.1, 5}, 0), InputError);
  CHECK_THROWS_AS(parse_quadrature_method("gauss"), InputError);
  CHECK(parse_quadrature_method("simpson") == QuadratureMethod::Simpson);
}

TEST_CASE("order-2 pairing equals the nested integral") {
  auto h = [](double t) { return std::exp(t) * std::cos(3.0 * t); };
  double previous = 0.0;
  for (Eigen::Index count : {51, 101, 201}) {
    const TimeGrid grid{2.0 / static_cast<double>(count - 1), count};
    const VectorXd hs = sample(grid, h);
    const double diff = std::abs(integrate(make_rule(grid, 2), hs) - nested(grid, hs));
    CHECK(diff < 5.0 * grid.dt * grid.dt);
    if (previous > 0.0) CHECK(previous / diff > 3.5);
    previous = diff;
  }
}

TEST_CASE("trapezoid converges at second order") {
  const double exact = std::exp(1.0) - 2.0;  // int_0^1 (1 - t) e^t dt
  auto err = [&](Eigen::Index count) {
    const TimeGrid grid{1.0 / static_cast<double>(count - 1), count};
    return std::abs(integrate(make_rule(grid, 2), sample(grid, [](double t) { return std::exp(t); })) -
                    exact);
  };
  CHECK(err(21) / err(41) >= 3.5);
  CHECK(err(41) / err(81) >= 3.5);
}

TEST_CASE("integrate is linear") {
  const TimeGrid grid{0.05, 41};
  const auto r = make_rule(grid, 2, QuadratureMethod::Simpson);
  const VectorXd h1 = sample(grid, [](double t) { return std::sin(t); });
  const VectorXd h2 = sample(grid, [](double t) { return t * t - 1.0; });
  const double a = 2.5, b = -0.75;
  const double lhs = integrate(r, a * h1 + b * h2);
  const double rhs = a * integrate(r, h1) + b * integrate(r, h2);
  CHECK(std::abs(lhs - rhs) <= 1e-14 * (std::abs(lhs) + 1.0));
}
