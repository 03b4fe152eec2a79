#include "liodmd/bench.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include <json.hpp>

#include "liodmd/errors.hpp"

namespace liodmd::bench {

// ---------------------------------------------------------------------------
// Systems

SystemSpec SystemSpec::oscillator(double stiffness, Eigen::Index dim) {
  SystemSpec s;
  s.kind = SystemKind::LinearOscillator;
  s.stiffness = stiffness;
  s.dim = dim;
  return s;
}

SystemSpec SystemSpec::chain(Eigen::Index masses, double stiffness) {
  SystemSpec s;
  s.kind = SystemKind::MassSpringChain;
  s.stiffness = stiffness;
  s.dim = masses;
  return s;
}

SystemSpec SystemSpec::custom(Eigen::Index dim, AccelerationField field) {
  SystemSpec s;
  s.kind = SystemKind::Custom;
  s.dim = dim;
  s.field = std::move(field);
  return s;
}

void SystemSpec::validate() const {
  if (dim < 1) throw InputError("system dimension must be >= 1");
  if (kind != SystemKind::Custom && !(stiffness > 0.0)) {
    throw InputError("stiffness must be positive");
  }
  if (kind == SystemKind::Custom && !field) throw InputError("custom system needs a field");
}

Eigen::VectorXd SystemSpec::acceleration(const Eigen::VectorXd& x) const {
  switch (kind) {
    case SystemKind::LinearOscillator:
      return -stiffness * x;
    case SystemKind::MassSpringChain: {
      const Eigen::Index n = x.size();
      Eigen::VectorXd a(n);
      for (Eigen::Index i = 0; i < n; ++i) {
        const double left = i == 0 ? 0.0 : x[i - 1];
        const double stretch_left = x[i] - left;
        const double stretch_right = i + 1 < n ? x[i + 1] - x[i] : 0.0;
        a[i] = stiffness * (stretch_right - stretch_left);
      }
      return a;
    }
    case SystemKind::Custom:
      return field(x);
  }
  return Eigen::VectorXd::Zero(x.size());
}

double SystemSpec::potential_energy(const Eigen::VectorXd& x) const {
  switch (kind) {
    case SystemKind::LinearOscillator:
      return 0.5 * stiffness * x.squaredNorm();
    case SystemKind::MassSpringChain: {
      double e = 0.5 * stiffness * x[0] * x[0];
      for (Eigen::Index i = 1; i < x.size(); ++i) {
        e += 0.5 * stiffness * (x[i] - x[i - 1]) * (x[i] - x[i - 1]);
      }
      return e;
    }
    case SystemKind::Custom:
      break;
  }
  throw InputError("potential energy is only defined for the built-in linear systems");
}

// ---------------------------------------------------------------------------
// Integration

namespace {

void rk4_step(const SystemSpec& system, Eigen::VectorXd& x, Eigen::VectorXd& v, double h) {
  const Eigen::VectorXd k1x = v;
  const Eigen::VectorXd k1v = system.acceleration(x);
  const Eigen::VectorXd k2x = v + 0.5 * h * k1v;
  const Eigen::VectorXd k2v = system.acceleration(x + 0.5 * h * k1x);
  const Eigen::VectorXd k3x = v + 0.5 * h * k2v;
  const Eigen::VectorXd k3v = system.acceleration(x + 0.5 * h * k2x);
  const Eigen::VectorXd k4x = v + h * k3v;
  const Eigen::VectorXd k4v = system.acceleration(x + h * k3x);
  x += (h / 6.0) * (k1x + 2.0 * k2x + 2.0 * k3x + k4x);
  v += (h / 6.0) * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
}

void check_state(const Eigen::VectorXd& x, const Eigen::VectorXd& v, double t) {
  if (!x.allFinite() || !v.allFinite()) {
    std::ostringstream msg;
    msg << "integration diverged: non-finite state at t = " << t;
    throw DivergenceError(msg.str(), t);
  }
}

void check_initial(const SystemSpec& system, const Eigen::VectorXd& x0, const Eigen::VectorXd& v0) {
  system.validate();
  if (x0.size() != system.dim || v0.size() != system.dim) {
    throw InputError("initial condition dimension does not match the system (" +
                     std::to_string(system.dim) + ")");
  }
}

}  // namespace

std::pair<Eigen::VectorXd, Eigen::VectorXd> rk4_integrate(const SystemSpec& system,
                                                          Eigen::VectorXd x, Eigen::VectorXd v,
                                                          double t_end, double step) {
  check_initial(system, x, v);
  if (!(step > 0.0) || !(t_end >= 0.0)) throw InputError("rk4_integrate: bad step or horizon");
  const auto steps = static_cast<long long>(std::ceil(t_end / step - 1e-9));
  const double h = steps > 0 ? t_end / static_cast<double>(steps) : 0.0;
  for (long long s = 0; s < steps; ++s) {
    rk4_step(system, x, v, h);
    check_state(x, v, h * static_cast<double>(s + 1));
  }
  return {x, v};
}

Trajectory simulate(const SystemSpec& system, const Eigen::VectorXd& x0, const Eigen::VectorXd& v0,
                    const TimeGrid& grid, const SimulateOptions& options) {
  check_initial(system, x0, v0);
  grid.validate();
  if (!(options.max_step > 0.0)) throw InputError("simulate: max_step must be positive");

  const auto substeps = std::max<long long>(
      10, static_cast<long long>(std::ceil(grid.dt / options.max_step - 1e-9)));
  const double h = grid.dt / static_cast<double>(substeps);

  Trajectory tr;
  tr.grid = grid;
  tr.samples.resize(grid.count, system.dim);
  tr.initial_velocity = v0;
  Eigen::VectorXd x = x0;
  Eigen::VectorXd v = v0;
  tr.samples.row(0) = x.transpose();
  for (Eigen::Index k = 1; k < grid.count; ++k) {
    for (long long s = 0; s < substeps; ++s) rk4_step(system, x, v, h);
    check_state(x, v, grid.time(k));
    tr.samples.row(k) = x.transpose();
  }
  return tr;
}

// ---------------------------------------------------------------------------
// Metrics

double rms_relative_error(const Eigen::MatrixXd& truth, const Eigen::MatrixXd& estimate) {
  if (truth.rows() != estimate.rows() || truth.cols() != estimate.cols()) {
    throw FormatError("rms_relative_error: shape mismatch (" + std::to_string(truth.rows()) + "x" +
                      std::to_string(truth.cols()) + " vs " + std::to_string(estimate.rows()) +
                      "x" + std::to_string(estimate.cols()) + ")");
  }
  if (truth.size() == 0) throw InputError("rms_relative_error: empty signals");
  const double scale = truth.cwiseAbs().maxCoeff();
  if (!(scale > 0.0)) throw InputError("rms_relative_error: truth is identically zero");
  return std::sqrt(((truth - estimate) / scale).squaredNorm() / static_cast<double>(truth.size()));
}

double rms_relative_error(const Trajectory& truth, const Eigen::MatrixXd& estimate) {
  return rms_relative_error(truth.samples, estimate);
}

double percentile(std::vector<double> values, double p) {
  if (values.empty()) throw InputError("percentile of an empty set");
  std::sort(values.begin(), values.end());
  const double pos = std::clamp(p, 0.0, 100.0) / 100.0 * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

namespace {

ErrorSummary summarize(const std::vector<double>& errors) {
  ErrorSummary s;
  if (errors.empty()) return s;
  s.median = percentile(errors, 50.0);
  s.p95 = percentile(errors, 95.0);
  s.max = *std::max_element(errors.begin(), errors.end());
  double sum = 0.0;
  for (double e : errors) sum += e;
  s.mean = sum / static_cast<double>(errors.size());
  return s;
}

nlohmann::ordered_json eigen_json(const Eigen::VectorXcd& values) {
  auto arr = nlohmann::ordered_json::array();
  for (Eigen::Index k = 0; k < values.size(); ++k) arr.push_back({values[k].real(), values[k].imag()});
  return arr;
}

nlohmann::ordered_json diagnostics_json(const FitDiagnostics& d) {
  return {{"ridge", d.ridge},
          {"gram_condition", d.gram_condition},
          {"gram_rank", d.gram_rank},
          {"pseudo_inverse", d.pseudo_inverse},
          {"dropped_modes", d.dropped_modes},
          {"hermitian_modes", d.hermitian_modes},
          {"projection_error", d.projection_error}};
}

std::mt19937_64 trial_engine(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  return std::mt19937_64(seq);
}

double resolve_shape(KernelFamily family, const std::optional<double>& shape,
                     const Dataset& training, double gaussian_default) {
  if (shape) return *shape;
  if (family == KernelFamily::Gaussian && gaussian_default > 0.0) return gaussian_default;
  return default_shape(family, stacked_samples(training));
}

}  // namespace

// ---------------------------------------------------------------------------
// Experiment 1

Dataset experiment1_training(const Experiment1Config& config) {
  if (config.dim != 1 && config.dim != 2) {
    throw InputError("experiment1 supports state dimension 1 or 2");
  }
  const double r = config.train_radius;
  const auto system = SystemSpec::oscillator(config.stiffness, config.dim);
  const auto steps = static_cast<Eigen::Index>(std::llround(config.train_horizon / config.train_dt));
  const TimeGrid grid{config.train_dt, steps + 1};

  // dim 1: corners of the (x0, v0) square. dim 2: corner positions, each
  // with its velocity rotated a quarter turn.
  const double corners[4][2] = {{r, r}, {r, -r}, {-r, r}, {-r, -r}};
  Dataset ds;
  for (int c = 0; c < 4; ++c) {
    Eigen::VectorXd x0(config.dim), v0(config.dim);
    if (config.dim == 1) {
      x0 << corners[c][0];
      v0 << corners[c][1];
    } else {
      x0 << corners[c][0], corners[c][1];
      v0 << -corners[c][1], corners[c][0];
    }
    Trajectory tr = simulate(system, x0, v0, grid);
    tr.label = "train" + std::to_string(c);
    ds.trajectories.push_back(std::move(tr));
  }
  return add_noise(ds, config.noise_sigma, config.seed);
}

Experiment1Report experiment1(const Experiment1Config& config) {
  if (config.trials < 1) throw InputError("experiment1 needs at least one trial");
  Experiment1Report report;
  report.config = config;

  const Dataset training = experiment1_training(config);
  report.shape = resolve_shape(config.kernel, config.shape, training,
                               Experiment1Config::kDefaultGaussianWidth);
  const KernelSpec kernel{config.kernel, report.shape, config.dim};
  FitOptions options;
  options.quadrature = config.quadrature;
  options.ridge = config.ridge.value_or(-1.0);
  const SodmdModel model = fit(training, kernel, options);
  report.ridge = model.ridge;
  report.eigenvalues = model.eigenvalues;
  report.diagnostics = model.diagnostics;

  const auto system = SystemSpec::oscillator(config.stiffness, config.dim);
  const auto steps =
      static_cast<Eigen::Index>(std::llround(config.predict_horizon / config.predict_dt));
  const TimeGrid grid{config.predict_dt, steps + 1};
  const Eigen::VectorXd times = grid.times();

  report.trials.resize(static_cast<std::size_t>(config.trials));
#if defined(_OPENMP)
#pragma omp parallel for schedule(dynamic)
#endif
  for (Eigen::Index t = 0; t < config.trials; ++t) {
    auto engine = trial_engine(config.seed, static_cast<std::uint64_t>(t));
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    TrialResult result;
    result.trial = t;
    result.x0.resize(config.dim);
    result.v0.resize(config.dim);
    for (Eigen::Index c = 0; c < config.dim; ++c) result.x0[c] = unit(engine);
    for (Eigen::Index c = 0; c < config.dim; ++c) result.v0[c] = unit(engine);

    const Trajectory truth = simulate(system, result.x0, result.v0, grid);
    const Reconstruction rec = reconstruct(model, {result.x0, result.v0, times});
    result.rms = rms_relative_error(truth, rec.states);
    result.imaginary_residual = rec.imaginary_residual;
    report.trials[static_cast<std::size_t>(t)] = std::move(result);
  }

  std::vector<double> errors;
  errors.reserve(report.trials.size());
  for (const auto& r : report.trials) errors.push_back(r.rms);
  report.summary = summarize(errors);
  return report;
}

std::string Experiment1Report::trials_csv() const {
  std::ostringstream out;
  out << "trial";
  for (Eigen::Index c = 1; c <= config.dim; ++c) out << ",x0_" << c;
  for (Eigen::Index c = 1; c <= config.dim; ++c) out << ",v0_" << c;
  out << ",rms_relative_error,imaginary_residual\n";
  for (const auto& r : trials) {
    out << r.trial;
    for (Eigen::Index c = 0; c < r.x0.size(); ++c) out << ',' << format_real(r.x0[c]);
    for (Eigen::Index c = 0; c < r.v0.size(); ++c) out << ',' << format_real(r.v0[c]);
    out << ',' << format_real(r.rms) << ',' << format_real(r.imaginary_residual) << '\n';
  }
  return out.str();
}

std::string Experiment1Report::summary_json() const {
  nlohmann::ordered_json j;
  j["experiment"] = "oscillator";
  j["trials"] = config.trials;
  j["seed"] = config.seed;
  j["dim"] = config.dim;
  j["kernel"] = to_string(config.kernel);
  j["shape"] = shape;
  j["ridge"] = ridge;
  j["quadrature"] = to_string(config.quadrature);
  j["train_dt"] = config.train_dt;
  j["noise_sigma"] = config.noise_sigma;
  j["median"] = summary.median;
  j["mean"] = summary.mean;
  j["p95"] = summary.p95;
  j["max"] = summary.max;
  j["eigenvalues"] = eigen_json(eigenvalues);
  j["diagnostics"] = diagnostics_json(diagnostics);
  return j.dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// Experiment 2

Eigen::VectorXd bent_profile(Eigen::Index masses, double stiffness, double tip_load) {
  if (masses < 1 || !(stiffness > 0.0)) throw InputError("bent_profile: bad chain parameters");
  Eigen::VectorXd x(masses);
  for (Eigen::Index i = 0; i < masses; ++i) x[i] = static_cast<double>(i + 1) * tip_load / stiffness;
  return x;
}

Experiment2Report experiment2(const Experiment2Config& config) {
  Experiment2Report report;
  report.config = config;

  const auto system = SystemSpec::chain(config.masses, config.stiffness);
  const Eigen::VectorXd x0 = bent_profile(config.masses, config.stiffness, config.tip_load);
  const Eigen::VectorXd v0 = Eigen::VectorXd::Zero(config.masses);
  const TimeGrid grid{config.dt, config.snapshots};
  Trajectory source = simulate(system, x0, v0, grid);
  source.label = "chain";
  source = add_noise(source, config.noise_sigma, config.seed);

  Trajectory measured = source;
  measured.initial_velocity.reset();
  const Dataset segments = with_initial_velocities(segment(measured, config.window, config.stride));
  report.segments = segments.size();

  const double shape = resolve_shape(config.kernel, config.shape, segments, 0.0);
  const KernelSpec kernel{config.kernel, shape, config.masses};
  FitOptions options;
  options.quadrature = config.quadrature;
  options.ridge = config.ridge.value_or(-1.0);
  const SodmdModel model = fit(segments, kernel, options);
  report.eigenvalues = model.eigenvalues;
  report.diagnostics = model.diagnostics;

  const auto rows = static_cast<Eigen::Index>(
      std::floor(static_cast<double>(config.snapshots - 1) * config.reconstruct_fraction + 1e-9)) + 1;
  report.times = grid.times().head(rows);
  report.truth = source.samples.topRows(rows);
  const Reconstruction rec = reconstruct(model, {x0, v0, report.times});
  report.estimate = rec.states;
  report.imaginary_residual = rec.imaginary_residual;
  report.rms = rms_relative_error(report.truth, report.estimate);
  report.initial_error =
      (report.estimate.row(0).transpose() - x0).cwiseAbs().maxCoeff() / x0.cwiseAbs().maxCoeff();
  return report;
}

std::string Experiment2Report::snapshots_csv() const {
  std::ostringstream out;
  out << "t,node,truth,estimate\n";
  for (Eigen::Index s = 0; s < times.size(); ++s) {
    for (Eigen::Index node = 0; node < truth.cols(); ++node) {
      out << format_real(times[s]) << ',' << node + 1 << ',' << format_real(truth(s, node)) << ','
          << format_real(estimate(s, node)) << '\n';
    }
  }
  return out.str();
}

std::string Experiment2Report::summary_json() const {
  nlohmann::ordered_json j;
  j["experiment"] = "chain";
  j["masses"] = config.masses;
  j["snapshots"] = config.snapshots;
  j["window"] = config.window;
  j["stride"] = config.stride;
  j["segments"] = segments;
  j["kernel"] = to_string(config.kernel);
  j["rms_relative_error"] = rms;
  j["initial_error"] = initial_error;
  j["imaginary_residual"] = imaginary_residual;
  j["eigenvalues"] = eigen_json(eigenvalues);
  j["diagnostics"] = diagnostics_json(diagnostics);
  return j.dump(2) + "\n";
}

}  // namespace liodmd::bench
