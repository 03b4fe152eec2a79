#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "liodmd/bench.hpp"
#include "liodmd/errors.hpp"
#include "liodmd/model_file.hpp"
#include "liodmd/signals.hpp"
#include "liodmd/sodmd.hpp"

namespace liodmd::cli {

namespace fs = std::filesystem;

namespace {

// "1,0,-2.5" -> vector. Negative leading entries need the `--x0=-1,0` form.
Eigen::VectorXd parse_vector(const std::string& text, const std::string& flag) {
  std::vector<double> values;
  std::stringstream in(text);
  std::string cell;
  while (std::getline(in, cell, ',')) {
    try {
      std::size_t used = 0;
      values.push_back(std::stod(cell, &used));
      if (used != cell.size()) throw std::invalid_argument(cell);
    } catch (const std::exception&) {
      throw InputError(flag + ": '" + cell + "' is not a number");
    }
  }
  if (values.empty()) throw InputError(flag + ": empty vector");
  return Eigen::Map<Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

std::string format_complex(Complex z) {
  std::ostringstream s;
  s << format_real(z.real()) << (z.imag() < 0.0 ? " - " : " + ") << format_real(std::abs(z.imag()))
    << "i";
  return s.str();
}

void write_trajectory(const Trajectory& tr, const std::string& out_path, std::ostream& out) {
  if (out_path.empty() || out_path == "-") {
    write_csv(tr, out);
  } else {
    save_csv(tr, out_path);
  }
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw FormatError("cannot write " + path.string());
  f << text;
}

// -- simulate ---------------------------------------------------------------

struct SimulateArgs {
  std::string system = "linosc";
  double k = 2.0;
  std::optional<Eigen::Index> n;
  std::string x0;
  std::string v0;
  double tip_load = 0.02;
  double dt = 0.0;
  Eigen::Index steps = 0;
  double max_step = 1e-3;
  std::string out;
};

int simulate_cmd(const SimulateArgs& a, std::ostream& out) {
  bench::SystemSpec system;
  Eigen::VectorXd x0;
  if (a.system == "linosc") {
    if (a.x0.empty()) throw InputError("--x0 is required for --system linosc");
    x0 = parse_vector(a.x0, "--x0");
    if (a.n && *a.n != x0.size()) throw InputError("--n does not match the length of --x0");
    system = bench::SystemSpec::oscillator(a.k, x0.size());
  } else {
    const Eigen::Index masses = a.n.value_or(a.x0.empty() ? 50 : 0);
    x0 = a.x0.empty() ? bench::bent_profile(masses, a.k, a.tip_load) : parse_vector(a.x0, "--x0");
    if (a.n && *a.n != x0.size()) throw InputError("--n does not match the length of --x0");
    system = bench::SystemSpec::chain(x0.size(), a.k);
  }
  const Eigen::VectorXd v0 =
      a.v0.empty() ? Eigen::VectorXd::Zero(x0.size()) : parse_vector(a.v0, "--v0");
  if (v0.size() != x0.size()) throw InputError("--v0 and --x0 differ in length");

  const Trajectory tr = bench::simulate(system, x0, v0, TimeGrid{a.dt, a.steps + 1}, {a.max_step});
  write_trajectory(tr, a.out, out);
  return kSuccess;
}

// -- fit --------------------------------------------------------------------

struct FitArgs {
  std::string data;
  std::string kernel = "gaussian";
  std::optional<double> shape;
  std::optional<double> ridge;
  std::string quad = "trapezoid";
  std::string out;
};

int fit_cmd(const FitArgs& a, std::ostream& out) {
  const Dataset dataset = with_initial_velocities(load_dataset(a.data));
  dataset.validate();

  KernelSpec kernel;
  kernel.family = parse_kernel_family(a.kernel);
  kernel.dim = dataset.dim();
  std::string shape_note = "(given)";
  if (a.shape) {
    kernel.shape = *a.shape;
  } else {
    kernel.shape = default_shape(kernel.family, stacked_samples(dataset));
    shape_note = kernel.family == KernelFamily::Gaussian      ? "(median heuristic)"
                 : kernel.family == KernelFamily::ExponentialDot ? "(mean |x.y| heuristic)"
                                                                 : "(unused)";
  }

  FitOptions options;
  options.quadrature = parse_quadrature_method(a.quad);
  options.ridge = a.ridge.value_or(-1.0);
  const SodmdModel model = fit(dataset, kernel, options);
  save_model(model, a.out);

  const auto& d = model.diagnostics;
  out << "trajectories: " << dataset.size() << "  dim: " << dataset.dim()
      << "  samples: " << dataset.grid().count << "  dt: " << format_real(dataset.grid().dt) << "\n";
  out << "kernel: " << to_string(kernel.family) << "  shape: " << format_real(kernel.shape) << " "
      << shape_note << "\n";
  out << "ridge: " << format_real(d.ridge) << "  gram condition: " << format_real(d.gram_condition)
      << "  gram rank: " << d.gram_rank << "  pseudo-inverse: " << (d.pseudo_inverse ? "yes" : "no")
      << "\n";
  out << "modes: " << model.mode_count() << "  dropped: " << d.dropped_modes
      << "  hermitian-normalized: " << d.hermitian_modes
      << "  projection error: " << format_real(d.projection_error) << "\n";
  out << "eigenvalues:\n";
  for (Eigen::Index m = 0; m < model.mode_count(); ++m) {
    out << "  " << format_complex(model.eigenvalues[m]) << "\n";
  }
  return kSuccess;
}

// -- reconstruct ------------------------------------------------------------

struct ReconstructArgs {
  std::string model;
  std::string x0;
  std::string v0;
  double t_end = 0.0;
  double dt = 0.0;
  std::string out;
};

int reconstruct_cmd(const ReconstructArgs& a, std::ostream& out, std::ostream& err) {
  const SodmdModel model = load_model(a.model);
  ReconstructionRequest req;
  req.x0 = parse_vector(a.x0, "--x0");
  req.v0 = a.v0.empty() ? Eigen::VectorXd::Zero(req.x0.size()) : parse_vector(a.v0, "--v0");
  if (req.x0.size() != model.dim() || req.v0.size() != model.dim()) {
    throw InputError("--x0/--v0 must have length " + std::to_string(model.dim()) +
                     " to match the model");
  }
  const auto steps = static_cast<Eigen::Index>(std::floor(a.t_end / a.dt + 1e-9));
  const TimeGrid grid{a.dt, steps + 1};
  req.times = grid.times();
  const Reconstruction rec = reconstruct(model, req);

  Trajectory tr;
  tr.grid = grid;
  tr.samples = rec.states;
  tr.initial_velocity = req.v0;
  write_trajectory(tr, a.out, out);

  // Diagnostics go to stderr when the trajectory itself is on stdout.
  std::ostream& diag = (a.out.empty() || a.out == "-") ? err : out;
  diag << "imaginary residual: " << format_real(rec.imaginary_residual) << "\n";
  if (rec.conditioning_warning) {
    diag << "warning: imaginary residual above " << format_real(kImaginaryWarning)
         << "; the fit may be ill-conditioned\n";
  }
  if (grid.horizon() > model.horizon() * (1.0 + 1e-12)) {
    diag << "note: extrapolating beyond the training horizon " << format_real(model.horizon())
         << "\n";
  }
  return kSuccess;
}

// -- segment / noise / evaluate ---------------------------------------------

struct SegmentArgs {
  std::string in;
  Eigen::Index window = 0;
  Eigen::Index stride = 1;
  std::string out_dir;
};

int segment_cmd(const SegmentArgs& a, std::ostream& out) {
  const Trajectory tr = load_csv(a.in);
  const Dataset segments = segment(tr, a.window, a.stride);
  fs::create_directories(a.out_dir);
  for (const auto& s : segments.trajectories) save_csv(s, fs::path(a.out_dir) / (s.label + ".csv"));
  out << "segments: " << segments.size() << "\n";
  return kSuccess;
}

struct NoiseArgs {
  std::string in;
  double sigma = 0.0;
  std::uint64_t seed = 0;
  std::string out;
};

int noise_cmd(const NoiseArgs& a) {
  if (fs::is_directory(a.in)) {
    const Dataset noisy = add_noise(load_dataset(a.in), a.sigma, a.seed);
    fs::create_directories(a.out);
    for (const auto& tr : noisy.trajectories) save_csv(tr, fs::path(a.out) / (tr.label + ".csv"));
  } else {
    save_csv(add_noise(load_csv(a.in), a.sigma, a.seed), a.out);
  }
  return kSuccess;
}

struct EvaluateArgs {
  std::string truth;
  std::string estimate;
  std::string out;
};

int evaluate_cmd(const EvaluateArgs& a, std::ostream& out) {
  const Trajectory truth = load_csv(a.truth);
  const Trajectory estimate = load_csv(a.estimate);
  if (!truth.grid.matches(estimate.grid) || truth.samples.cols() != estimate.samples.cols()) {
    throw FormatError("evaluate: '" + a.truth + "' and '" + a.estimate +
                      "' differ in time grid or dimension");
  }
  const double rms = bench::rms_relative_error(truth, estimate.samples);
  if (!a.out.empty()) {
    const double scale = truth.samples.cwiseAbs().maxCoeff();
    Trajectory signal;
    signal.grid = truth.grid;
    signal.samples = truth.samples - estimate.samples;
    if (scale > 0.0) signal.samples /= scale;
    save_csv(signal, a.out);
  }
  out << format_real(rms) << "\n";
  return kSuccess;
}

// -- experiment -------------------------------------------------------------

struct ExperimentArgs {
  int id = 1;
  std::optional<Eigen::Index> trials;
  std::optional<std::uint64_t> seed;
  std::optional<double> noise;
  std::string out_dir;
};

int experiment_cmd(const ExperimentArgs& a, std::ostream& out) {
  std::string summary;
  std::string table;
  std::string table_name;
  if (a.id == 1) {
    bench::Experiment1Config config;
    if (a.trials) config.trials = *a.trials;
    if (a.seed) config.seed = *a.seed;
    if (a.noise) config.noise_sigma = *a.noise;
    const auto report = bench::experiment1(config);
    summary = report.summary_json();
    table = report.trials_csv();
    table_name = "trials.csv";
  } else {
    bench::Experiment2Config config;
    if (a.seed) config.seed = *a.seed;
    if (a.noise) config.noise_sigma = *a.noise;
    const auto report = bench::experiment2(config);
    summary = report.summary_json();
    table = report.snapshots_csv();
    table_name = "snapshots.csv";
  }
  if (!a.out_dir.empty()) {
    fs::create_directories(a.out_dir);
    write_text(fs::path(a.out_dir) / "summary.json", summary);
    write_text(fs::path(a.out_dir) / table_name, table);
  }
  out << summary;
  return kSuccess;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Second-order Liouville DMD with occupation kernels", "liodmd"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for all commands");

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Integrate a reference system and write a trajectory CSV");
  simulate->add_option("--system", sim.system, "linosc (x'' = -k x) or chain (fixed-free spring chain)")
      ->check(CLI::IsMember({"linosc", "chain"}))
      ->capture_default_str();
  simulate->add_option("--k", sim.k, "Stiffness")->check(CLI::PositiveNumber)->capture_default_str();
  simulate->add_option("--n", sim.n, "State dimension (chain: number of masses)")
      ->check(CLI::PositiveNumber);
  simulate->add_option("--x0", sim.x0, "Initial position, comma separated; chain default is a bent profile");
  simulate->add_option("--v0", sim.v0, "Initial velocity, comma separated (default 0)");
  simulate->add_option("--tip-load", sim.tip_load, "Chain: tip force of the default bent profile")
      ->capture_default_str();
  simulate->add_option("--dt", sim.dt, "Sampling interval")->required()->check(CLI::PositiveNumber);
  simulate->add_option("--steps", sim.steps, "Number of intervals; the CSV has steps + 1 rows")
      ->required()
      ->check(CLI::PositiveNumber);
  simulate->add_option("--max-step", sim.max_step, "Largest internal RK4 step")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  simulate->add_option("--out", sim.out, "Output CSV (default stdout)");

  FitArgs fa;
  auto* fitc = app.add_subcommand("fit", "Fit a model to a directory or file of trajectories");
  fitc->add_option("--data", fa.data, "Directory of CSV files, one CSV file, or a traj_id file")
      ->required();
  fitc->add_option("--kernel", fa.kernel, "gaussian, linear or exponential")
      ->check(CLI::IsMember({"gaussian", "linear", "exponential"}))
      ->capture_default_str();
  fitc->add_option("--shape", fa.shape, "Kernel shape parameter (default: data heuristic)")
      ->check(CLI::PositiveNumber);
  fitc->add_option("--ridge", fa.ridge, "Gram ridge (default 1e-8 trace(G) / M)")
      ->check(CLI::NonNegativeNumber);
  fitc->add_option("--quad", fa.quad, "trapezoid or simpson")
      ->check(CLI::IsMember({"trapezoid", "simpson"}))
      ->capture_default_str();
  fitc->add_option("--out", fa.out, "Model JSON")->required();

  ReconstructArgs ra;
  auto* rec = app.add_subcommand("reconstruct", "Predict a trajectory from a new initial condition");
  rec->add_option("--model", ra.model, "Model JSON written by fit")->required();
  rec->add_option("--x0", ra.x0, "Initial position, comma separated")->required();
  rec->add_option("--v0", ra.v0, "Initial velocity, comma separated (default 0)");
  rec->add_option("--t-end", ra.t_end, "Final time")->required()->check(CLI::PositiveNumber);
  rec->add_option("--dt", ra.dt, "Output sampling interval")->required()->check(CLI::PositiveNumber);
  rec->add_option("--out", ra.out, "Output CSV (default stdout)");

  SegmentArgs sa;
  auto* seg = app.add_subcommand("segment", "Split one trajectory into overlapping windows");
  seg->add_option("--in", sa.in, "Input CSV")->required();
  seg->add_option("--window", sa.window, "Samples per segment")->required()->check(CLI::Range(2, 1 << 30));
  seg->add_option("--stride", sa.stride, "Offset between segment starts")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  seg->add_option("--out-dir", sa.out_dir, "Directory for the segment CSVs")->required();

  NoiseArgs na;
  auto* noise = app.add_subcommand("noise", "Add Gaussian measurement noise");
  noise->add_option("--in", na.in, "Input CSV or directory")->required();
  noise->add_option("--sigma", na.sigma, "Standard deviation")->required()->check(CLI::NonNegativeNumber);
  noise->add_option("--seed", na.seed, "Random seed")->required();
  noise->add_option("--out", na.out, "Output CSV or directory")->required();

  EvaluateArgs ea;
  auto* eval = app.add_subcommand("evaluate", "RMS of the relative error signal between two CSVs");
  eval->add_option("truth", ea.truth, "Reference trajectory CSV")->required();
  eval->add_option("estimate", ea.estimate, "Estimated trajectory CSV")->required();
  eval->add_option("--out", ea.out, "Write the relative error signal to this CSV");

  ExperimentArgs xa;
  auto* exp = app.add_subcommand("experiment", "Run a benchmark experiment and write its report");
  exp->add_option("--id", xa.id, "1: noisy oscillator, 2: segmented spring chain")
      ->check(CLI::IsMember({1, 2}))
      ->capture_default_str();
  exp->add_option("--trials", xa.trials, "Experiment 1 trial count")->check(CLI::PositiveNumber);
  exp->add_option("--seed", xa.seed, "Random seed");
  exp->add_option("--noise", xa.noise, "Noise standard deviation")->check(CLI::NonNegativeNumber);
  exp->add_option("--out-dir", xa.out_dir, "Directory for summary.json and the data table");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kSuccess : kUsage;
  }

  try {
    if (simulate->parsed()) return simulate_cmd(sim, out);
    if (fitc->parsed()) return fit_cmd(fa, out);
    if (rec->parsed()) return reconstruct_cmd(ra, out, err);
    if (seg->parsed()) return segment_cmd(sa, out);
    if (noise->parsed()) return noise_cmd(na);
    if (eval->parsed()) return evaluate_cmd(ea, out);
    if (exp->parsed()) return experiment_cmd(xa, out);
  } catch (const InputError& e) {
    err << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const StateError& e) {
    err << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const FormatError& e) {
    err << "format error: " << e.what() << "\n";
    return kFormat;
  } catch (const DegenerateDataError& e) {
    err << "degenerate data: " << e.what() << "\n";
    return kDegenerate;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kDegenerate;
  } catch (const fs::filesystem_error& e) {
    err << "format error: " << e.what() << "\n";
    return kFormat;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kFailure;
  }
  return kUsage;
}

}  // namespace liodmd::cli
