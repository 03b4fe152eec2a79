#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "liodmd/bench.hpp"
#include "liodmd/errors.hpp"

using namespace liodmd;
using namespace liodmd::bench;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

VectorXd scalar(double v) { return VectorXd::Constant(1, v); }

double energy(const SystemSpec& s, const VectorXd& x, const VectorXd& v) {
  return 0.5 * v.squaredNorm() + s.potential_energy(x);
}

}  // namespace

TEST_CASE("oscillator matches the analytic solution") {
  const auto osc = SystemSpec::oscillator(2.0, 1);
  const Trajectory tr = simulate(osc, scalar(1.0), scalar(0.0), TimeGrid{0.5, 11});
  CHECK(std::abs(tr.samples(2, 0) - std::cos(std::sqrt(2.0))) < 1e-8);
  CHECK(std::abs(tr.samples(2, 0) - 0.1559437) < 1e-7);
  REQUIRE(tr.initial_velocity);
  CHECK((*tr.initial_velocity)[0] == 0.0);

  const Trajectory rest = simulate(SystemSpec::oscillator(2.0, 2), VectorXd::Zero(2), VectorXd::Zero(2),
                                   TimeGrid{0.1, 50});
  CHECK(rest.samples.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("energy is conserved") {
  const auto osc = SystemSpec::oscillator(2.0, 2);
  const VectorXd x0 = VectorXd::Map(std::array{0.7, -0.2}.data(), 2);
  const VectorXd v0 = VectorXd::Map(std::array{0.1, 0.5}.data(), 2);
  const double e0 = energy(osc, x0, v0);
  const auto [x, v] = rk4_integrate(osc, x0, v0, 10.0, 1e-3);
  CHECK(std::abs(energy(osc, x, v) - e0) <= 1e-8 * e0);

  const auto chain = SystemSpec::chain(10, 1.0);
  const VectorXd c0 = bent_profile(10, 1.0, 0.05);
  const double ec = energy(chain, c0, VectorXd::Zero(10));
  const auto [cx, cv] = rk4_integrate(chain, c0, VectorXd::Zero(10), 10.0, 1e-3);
  CHECK(std::abs(energy(chain, cx, cv) - ec) <= 1e-8 * ec);
}

TEST_CASE("RK4 is fourth order") {
  const auto osc = SystemSpec::oscillator(2.0, 1);
  const double exact = std::cos(std::sqrt(2.0) * 2.0);
  auto err = [&](double h) { return std::abs(rk4_integrate(osc, scalar(1.0), scalar(0.0), 2.0, h).first[0] - exact); };
  CHECK(err(0.1) / err(0.025) >= 200.0);
}

TEST_CASE("chain dynamics") {
  const auto chain = SystemSpec::chain(3, 2.0);
  const VectorXd x = VectorXd::Map(std::array{1.0, 3.0, 4.0}.data(), 3);
  const VectorXd a = chain.acceleration(x);
  CHECK(a[0] == doctest::Approx(2.0 * ((3.0 - 1.0) - (1.0 - 0.0))));
  CHECK(a[1] == doctest::Approx(2.0 * ((4.0 - 3.0) - (3.0 - 1.0))));
  CHECK(a[2] == doctest::Approx(2.0 * (0.0 - (4.0 - 3.0))));

  // The bent profile is the static deflection under a tip load F: adding
  // F to the last acceleration gives equilibrium.
  const VectorXd bent = bent_profile(5, 2.0, 0.1);
  VectorXd acc = SystemSpec::chain(5, 2.0).acceleration(bent);
  acc[4] += 0.1;
  CHECK(acc.cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("custom systems and errors") {
  const auto pend = SystemSpec::custom(1, [](const VectorXd& x) { return VectorXd(-x.array().sin()); });
  const Trajectory tr = simulate(pend, scalar(0.1), scalar(0.0), TimeGrid{0.1, 20});
  CHECK(tr.samples.allFinite());
  CHECK_THROWS_AS(SystemSpec::oscillator(-1.0, 1).validate(), InputError);
  CHECK_THROWS_AS(SystemSpec::chain(0, 1.0).validate(), InputError);
  CHECK_THROWS_AS(simulate(SystemSpec::oscillator(2.0, 2), scalar(1.0), scalar(0.0), TimeGrid{0.1, 5}),
                  InputError);

  const auto blowup = SystemSpec::custom(1, [](const VectorXd& x) { return VectorXd(x.array().cube()); });
  try {
    simulate(blowup, scalar(10.0), scalar(0.0), TimeGrid{0.1, 100});
    FAIL("expected divergence");
  } catch (const DivergenceError& e) {
    CHECK(e.blowup_time() > 0.0);
    CHECK(e.blowup_time() < 10.0);
  }
}

TEST_CASE("rms relative error") {
  Trajectory truth;
  truth.grid = TimeGrid{0.1, 10};
  truth.samples = MatrixXd::Ones(10, 1);
  CHECK(rms_relative_error(truth, truth.samples) == 0.0);
  CHECK(rms_relative_error(truth, MatrixXd::Constant(10, 1, 1.1)) == doctest::Approx(0.1));

  MatrixXd a(4, 2), b(4, 2);
  a << 1, -2, 3, 0.5, 0, 1, -1, 2;
  b << 1.1, -2, 2.5, 0.4, 0.2, 1, -1, 2.3;
  CHECK(rms_relative_error(MatrixXd(2 * a), MatrixXd(2 * b)) == doctest::Approx(rms_relative_error(a, b)));
  CHECK_THROWS_AS(rms_relative_error(a, MatrixXd::Zero(3, 2)), FormatError);
  CHECK_THROWS_AS(rms_relative_error(MatrixXd::Zero(4, 2), b), InputError);
}

TEST_CASE("percentile") {
  CHECK(percentile({3.0, 1.0, 2.0}, 50.0) == 2.0);
  CHECK(percentile({1.0, 2.0, 3.0, 4.0}, 50.0) == 2.5);
  CHECK(percentile({1.0, 2.0}, 100.0) == 2.0);
  CHECK_THROWS_AS(percentile({}, 50.0), InputError);
}

TEST_CASE("experiment 1, noiseless linear kernel on a fine grid") {
  Experiment1Config config;
  config.trials = 20;
  config.noise_sigma = 0.0;
  config.kernel = KernelFamily::LinearDot;
  config.train_dt = 0.01;
  const auto report = experiment1(config);
  REQUIRE(report.trials.size() == 20);
  CHECK(report.summary.median < 1e-2);
}

TEST_CASE("experiment 1 defaults are finite and reproducible") {
  Experiment1Config config;
  config.trials = 10;
  const auto a = experiment1(config);
  const auto b = experiment1(config);
  for (const auto& t : a.trials) CHECK(std::isfinite(t.rms));
  CHECK(a.summary_json() == b.summary_json());
  CHECK(a.trials_csv() == b.trials_csv());
  config.seed = 2;
  CHECK(experiment1(config).trials_csv() != a.trials_csv());
}

TEST_CASE("experiment 2 on a two-mass chain") {
  Experiment2Config config;
  config.masses = 2;
  const auto report = experiment2(config);
  CHECK(report.segments == 271);
  CHECK(report.rms < 5e-2);
  CHECK(report.initial_error <= 1e-6);
  CHECK(report.snapshots_csv().rfind("t,node,truth,estimate\n", 0) == 0);
}
