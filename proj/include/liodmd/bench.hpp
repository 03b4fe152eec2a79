#ifndef LIODMD_BENCH_HPP
#define LIODMD_BENCH_HPP

// Ground-truth simulators, the relative RMS error metric and desk-scale
// replications of the oscillator and structural experiments.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "liodmd/kernels.hpp"
#include "liodmd/signals.hpp"
#include "liodmd/sodmd.hpp"

namespace liodmd::bench {

enum class SystemKind { LinearOscillator, MassSpringChain, Custom };

using AccelerationField = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

/// Undamped second-order system x'' = f(x).
struct SystemSpec {
  SystemKind kind = SystemKind::LinearOscillator;
  double stiffness = 2.0;  // x'' = -k x, or spring constant of the chain
  Eigen::Index dim = 1;    // chain: number of unit masses
  AccelerationField field;  // Custom only

  static SystemSpec oscillator(double stiffness, Eigen::Index dim);
  /// Unit masses joined by springs, the first one tied to a fixed wall and
  /// the last one free.
  static SystemSpec chain(Eigen::Index masses, double stiffness);
  static SystemSpec custom(Eigen::Index dim, AccelerationField field);

  void validate() const;
  Eigen::VectorXd acceleration(const Eigen::VectorXd& x) const;
  double potential_energy(const Eigen::VectorXd& x) const;  // linear kinds only
};

struct SimulateOptions {
  double max_step = 1e-3;  // internal RK4 step is min(dt / 10, max_step)
};

/// Classical RK4 on (x, v) with a fixed step; returns the state at t_end.
/// Throws DivergenceError on a non-finite state.
std::pair<Eigen::VectorXd, Eigen::VectorXd> rk4_integrate(const SystemSpec& system,
                                                          Eigen::VectorXd x, Eigen::VectorXd v,
                                                          double t_end, double step);

Trajectory simulate(const SystemSpec& system, const Eigen::VectorXd& x0, const Eigen::VectorXd& v0,
                    const TimeGrid& grid, const SimulateOptions& options = {});

/// sqrt(mean(((truth - estimate) / max|truth|)^2)) over all entries.
double rms_relative_error(const Trajectory& truth, const Eigen::MatrixXd& estimate);
double rms_relative_error(const Eigen::MatrixXd& truth, const Eigen::MatrixXd& estimate);

/// Linear-interpolated percentile (p in [0, 100]).
double percentile(std::vector<double> values, double p);

// ---------------------------------------------------------------------------
// Experiment 1: sparse, noisy oscillator data, long-horizon prediction.

struct Experiment1Config {
  Eigen::Index trials = 100;
  std::uint64_t seed = 1;
  Eigen::Index dim = 2;          // 1 or 2; trial x0 and v0 uniform in [-1, 1]^dim
  double stiffness = 2.0;
  double train_dt = 0.5;
  double train_horizon = 5.0;
  double train_radius = 0.8;     // training initial conditions at the corners
  double noise_sigma = 0.01;
  double predict_horizon = 10.0;
  double predict_dt = 0.05;
  KernelFamily kernel = KernelFamily::Gaussian;
  std::optional<double> shape;   // unset: family default below
  std::optional<double> ridge;   // unset: default_ridge(G)
  QuadratureMethod quadrature = QuadratureMethod::Trapezoid;

  /// Gaussian width used when `shape` is unset (hand-tuned for this setup).
  static constexpr double kDefaultGaussianWidth = 10.0;
};

struct TrialResult {
  Eigen::Index trial = 0;
  Eigen::VectorXd x0;
  Eigen::VectorXd v0;
  double rms = 0.0;
  double imaginary_residual = 0.0;
};

struct ErrorSummary {
  double median = 0.0;
  double mean = 0.0;
  double p95 = 0.0;
  double max = 0.0;
};

struct Experiment1Report {
  Experiment1Config config;
  double shape = 0.0;
  double ridge = 0.0;
  Eigen::VectorXcd eigenvalues;
  FitDiagnostics diagnostics;
  std::vector<TrialResult> trials;
  ErrorSummary summary;

  std::string trials_csv() const;
  std::string summary_json() const;
};

/// Training set of the experiment: four trajectories from the corners of
/// [-r, r]^2, noise added with the configured seed.
Dataset experiment1_training(const Experiment1Config& config);

Experiment1Report experiment1(const Experiment1Config& config);

// ---------------------------------------------------------------------------
// Experiment 2: one long trajectory of a high-dimensional linear structure,
// segmented into short training windows.

struct Experiment2Config {
  Eigen::Index masses = 50;
  double stiffness = 1.0;
  double tip_load = 0.02;   // static tip force that bends the initial profile
  double dt = 0.1;
  Eigen::Index snapshots = 301;
  Eigen::Index window = 31;
  Eigen::Index stride = 1;
  double noise_sigma = 0.0;
  std::uint64_t seed = 1;
  KernelFamily kernel = KernelFamily::LinearDot;
  std::optional<double> shape;
  std::optional<double> ridge;
  QuadratureMethod quadrature = QuadratureMethod::Trapezoid;
  double reconstruct_fraction = 1.0 / 3.0;
};

struct Experiment2Report {
  Experiment2Config config;
  Eigen::Index segments = 0;
  double rms = 0.0;
  double initial_error = 0.0;  // relative max error of the t = 0 reconstruction
  double imaginary_residual = 0.0;
  Eigen::VectorXcd eigenvalues;
  FitDiagnostics diagnostics;
  Eigen::VectorXd times;
  Eigen::MatrixXd truth;     // reconstruction window of the source trajectory
  Eigen::MatrixXd estimate;

  /// Long-format rows `t,node,truth,estimate`.
  std::string snapshots_csv() const;
  std::string summary_json() const;
};

/// Static deflection of the chain under a tip force: node i sits at i F / k.
Eigen::VectorXd bent_profile(Eigen::Index masses, double stiffness, double tip_load);

Experiment2Report experiment2(const Experiment2Config& config);

}  // namespace liodmd::bench

#endif  // LIODMD_BENCH_HPP
