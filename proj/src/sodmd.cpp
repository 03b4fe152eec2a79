#include "liodmd/sodmd.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "liodmd/errors.hpp"

namespace liodmd {

namespace {

void check_rule(const QuadratureRule& rule) {
  if (rule.order != 2) {
    throw InputError("second-order occupation kernels need an order-2 quadrature rule, got order " +
                     std::to_string(rule.order));
  }
}

void check_dataset(const KernelSpec& kernel, const QuadratureRule& rule, const Dataset& dataset) {
  check_rule(rule);
  dataset.validate();
  kernel.validate();
  if (kernel.dim != dataset.dim()) {
    throw InputError("kernel dimension " + std::to_string(kernel.dim) +
                     " does not match state dimension " + std::to_string(dataset.dim()));
  }
  if (!dataset.grid().matches(rule.grid)) {
    throw InputError("quadrature grid does not match the dataset time grid");
  }
}

// Contracts each length-`count` block of `values` against the weights.
Eigen::VectorXd block_contract(const Eigen::Ref<const Eigen::VectorXd>& values,
                               const Eigen::VectorXd& w) {
  const Eigen::Index count = w.size();
  const Eigen::Index blocks = values.size() / count;
  return Eigen::Map<const Eigen::MatrixXd>(values.data(), count, blocks).transpose() * w;
}

}  // namespace

double occupation_eval(const KernelSpec& kernel, const QuadratureRule& rule,
                       const Trajectory& gamma, const Eigen::Ref<const Eigen::VectorXd>& point) {
  check_rule(rule);
  if (!gamma.grid.matches(rule.grid)) {
    throw InputError("occupation_eval: trajectory grid does not match the quadrature grid");
  }
  if (point.size() != kernel.dim || gamma.dim() != kernel.dim) {
    throw InputError("occupation_eval: dimension mismatch");
  }
  const Eigen::VectorXd k = kernel_matrix(kernel, gamma.samples, point.transpose());
  return rule.order_weights.dot(k);
}

Eigen::MatrixXd gram(const KernelSpec& kernel, const QuadratureRule& rule, const Dataset& dataset) {
  check_dataset(kernel, rule, dataset);
  const Eigen::Index m = dataset.size();
  const Eigen::Index count = rule.grid.count;
  const Eigen::VectorXd& w = rule.order_weights;
  const Eigen::MatrixXd all = stacked_samples(dataset);

  Eigen::MatrixXd g(m, m);
#if defined(_OPENMP)
#pragma omp parallel for schedule(dynamic)
#endif
  for (Eigen::Index i = 0; i < m; ++i) {
    const auto& gi = dataset.trajectories[static_cast<std::size_t>(i)].samples;
    // Upper triangle only: blocks j >= i.
    const Eigen::MatrixXd k = kernel_matrix(kernel, gi, all.bottomRows((m - i) * count));
    const Eigen::VectorXd row = k.transpose() * w;
    const Eigen::VectorXd upper = block_contract(row, w);
    for (Eigen::Index j = i; j < m; ++j) g(i, j) = upper[j - i];
  }
  g.triangularView<Eigen::StrictlyLower>() = g.transpose().triangularView<Eigen::StrictlyLower>();
  return g;
}

Eigen::MatrixXd interaction(const KernelSpec& kernel, const QuadratureRule& rule,
                            const Dataset& dataset) {
  check_dataset(kernel, rule, dataset);
  for (const auto& tr : dataset.trajectories) {
    if (!tr.initial_velocity) {
      throw StateError("trajectory '" + tr.label +
                       "' has no initial velocity; estimate initial velocities before "
                       "assembling the interaction matrix");
    }
  }
  const Eigen::Index m = dataset.size();
  const Eigen::Index count = rule.grid.count;
  const double horizon = rule.grid.horizon();
  const Eigen::VectorXd& w = rule.order_weights;
  const Eigen::MatrixXd all = stacked_samples(dataset);

  Eigen::MatrixXd a(m, m);
#if defined(_OPENMP)
#pragma omp parallel for schedule(dynamic)
#endif
  for (Eigen::Index i = 0; i < m; ++i) {
    const auto& tr = dataset.trajectories[static_cast<std::size_t>(i)];
    const Eigen::VectorXd start = tr.samples.row(0).transpose();
    const Eigen::VectorXd end = tr.samples.row(count - 1).transpose();
    // K(gamma_i(T), .) - K(gamma_i(0), .) - T grad2 K(., gamma_i(0)) . gamma_i'(0)
    const Eigen::VectorXd k_end = kernel_matrix(kernel, all, end.transpose());
    const Eigen::VectorXd k_start = kernel_matrix(kernel, all, start.transpose());
    const Eigen::VectorXd k_vel = grad2_directional(kernel, all, start, *tr.initial_velocity);
    const Eigen::VectorXd adjoint = k_end - k_start - horizon * k_vel;
    a.row(i) = block_contract(adjoint, w).transpose();
  }
  return a;
}

Eigen::MatrixXd identity_pairings(const QuadratureRule& rule, const Dataset& dataset) {
  check_rule(rule);
  dataset.validate();
  Eigen::MatrixXd v(dataset.dim(), dataset.size());
  for (Eigen::Index j = 0; j < dataset.size(); ++j) {
    v.col(j) = dataset.trajectories[static_cast<std::size_t>(j)].samples.transpose() *
               rule.order_weights;
  }
  return v;
}

double default_ridge(const Eigen::MatrixXd& gram_matrix) {
  return 1e-8 * gram_matrix.trace() / static_cast<double>(gram_matrix.rows());
}

FiniteRank finite_rank(const Eigen::MatrixXd& gram_matrix, const Eigen::MatrixXd& interaction_matrix,
                       double ridge) {
  const Eigen::Index m = gram_matrix.rows();
  if (m < 1 || gram_matrix.cols() != m || interaction_matrix.rows() != m ||
      interaction_matrix.cols() != m) {
    throw InputError("finite_rank: Gram and interaction matrices must be square and of equal size");
  }
  if (!gram_matrix.allFinite() || !interaction_matrix.allFinite()) {
    throw NumericalError("finite_rank: non-finite matrix entries");
  }
  FiniteRank out;
  out.ridge = ridge < 0.0 ? default_ridge(gram_matrix) : ridge;

  // Duplicated trajectories (or ones whose occupation kernel vanishes) make
  // the data degenerate no matter how much regularization is added. Parallel
  // kernels alone are not enough: in a low-dimensional native space distinct
  // trajectories can have them, so the interaction rows must agree as well.
  const Eigen::VectorXd diag = gram_matrix.diagonal();
  const double max_diag = diag.maxCoeff();
  const double a_scale = interaction_matrix.cwiseAbs().maxCoeff();
  auto same = [](const auto& x, const auto& y, double scale) {
    return (x - y).cwiseAbs().maxCoeff() <= 1e-8 * scale;
  };
  std::vector<std::string> offenders;
  for (Eigen::Index i = 0; i < m; ++i) {
    if (!(diag[i] > 1e-14 * max_diag)) {
      offenders.push_back("trajectory " + std::to_string(i) + " has a vanishing occupation kernel");
      continue;
    }
    for (Eigen::Index j = i + 1; j < m; ++j) {
      if (!(diag[j] > 1e-14 * max_diag)) continue;
      const double cosine = gram_matrix(i, j) / std::sqrt(diag[i] * diag[j]);
      if (cosine > 1.0 - 1e-10 && std::abs(diag[i] - diag[j]) <= 1e-8 * max_diag &&
          same(interaction_matrix.row(i), interaction_matrix.row(j), a_scale) &&
          same(interaction_matrix.col(i), interaction_matrix.col(j), a_scale)) {
        offenders.push_back("trajectories " + std::to_string(i) + " and " + std::to_string(j) +
                            " are near-duplicates");
      }
    }
  }
  if (!offenders.empty()) {
    std::ostringstream msg;
    msg << "degenerate training data (singular Gram matrix): ";
    for (std::size_t k = 0; k < offenders.size(); ++k) msg << (k ? "; " : "") << offenders[k];
    throw DegenerateDataError(msg.str());
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram_matrix);
  if (eig.info() != Eigen::Success) throw NumericalError("finite_rank: Gram eigensolver failed");
  const Eigen::VectorXd& lambda = eig.eigenvalues();
  const double top = lambda.cwiseAbs().maxCoeff();
  const double bottom = lambda.minCoeff() + out.ridge;
  out.condition = bottom > 0.0 ? (top + out.ridge) / bottom : std::numeric_limits<double>::infinity();

  // Directions of G at roundoff level carry no information; the ridge would
  // only amplify whatever A holds there.
  std::vector<Eigen::Index> keep;
  for (Eigen::Index k = 0; k < m; ++k) {
    if (lambda[k] > kRankTolerance * top) keep.push_back(k);
  }
  out.rank = static_cast<Eigen::Index>(keep.size());
  out.truncated = out.rank < m;
  out.basis.resize(m, out.rank);
  Eigen::VectorXd inverse(out.rank);
  for (Eigen::Index r = 0; r < out.rank; ++r) {
    const Eigen::Index k = keep[static_cast<std::size_t>(r)];
    out.basis.col(r) = eig.eigenvectors().col(k);
    inverse[r] = 1.0 / (lambda[k] + out.ridge);
  }
  out.matrix = out.basis * (inverse.asDiagonal() * (out.basis.transpose() * interaction_matrix));
  if (!out.matrix.allFinite()) throw NumericalError("finite_rank: solve produced non-finite values");
  return out;
}

EigenDecomposition eigendecompose(const Eigen::MatrixXd& matrix) {
  if (matrix.rows() != matrix.cols()) throw InputError("eigendecompose: matrix must be square");
  if (!matrix.allFinite()) throw InputError("eigendecompose: non-finite entries");
  Eigen::EigenSolver<Eigen::MatrixXd> solver(matrix, true);
  if (solver.info() != Eigen::Success) {
    throw NumericalError("eigendecompose: QR iteration did not converge");
  }
  const Eigen::VectorXcd values = solver.eigenvalues();
  const Eigen::MatrixXcd vectors = solver.eigenvectors();

  std::vector<Eigen::Index> order(static_cast<std::size_t>(values.size()));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    const double ma = std::abs(values[a]);
    const double mb = std::abs(values[b]);
    if (ma != mb) return ma > mb;
    return values[a].imag() > values[b].imag();
  });

  EigenDecomposition out;
  out.values.resize(values.size());
  out.vectors.resize(vectors.rows(), vectors.cols());
  for (Eigen::Index k = 0; k < values.size(); ++k) {
    const Eigen::Index src = order[static_cast<std::size_t>(k)];
    out.values[k] = values[src];
    const double norm = vectors.col(src).norm();
    out.vectors.col(k) = norm > 0.0 ? Eigen::VectorXcd(vectors.col(src) / norm)
                                    : Eigen::VectorXcd(vectors.col(src));
  }
  if (!out.values.allFinite() || !out.vectors.allFinite()) {
    throw NumericalError("eigendecompose: non-finite eigenpairs");
  }
  return out;
}

SodmdModel fit(const Dataset& input, const KernelSpec& kernel, const FitOptions& options) {
  if (input.trajectories.empty()) throw InputError("fit needs at least one trajectory");
  const Dataset dataset = with_initial_velocities(input);
  const QuadratureRule rule = make_rule(dataset.grid(), 2, options.quadrature);

  const Eigen::MatrixXd g = gram(kernel, rule, dataset);
  const Eigen::MatrixXd a = interaction(kernel, rule, dataset);
  const FiniteRank representation = finite_rank(g, a, options.ridge);
  // X maps into the kept range of G, so its spectrum off the null space is
  // that of the compressed operator Q^T X Q.
  const Eigen::MatrixXd& basis = representation.basis;
  EigenDecomposition spectrum = eigendecompose(basis.transpose() * representation.matrix * basis);
  spectrum.vectors = basis.cast<Complex>() * spectrum.vectors;

  const Eigen::Index m = dataset.size();
  const double g_norm = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(g, Eigen::EigenvaluesOnly)
                            .eigenvalues()
                            .cwiseAbs()
                            .maxCoeff();

  // Normalized coefficient rows nu^T / sqrt(nu^T G nu), unconjugated. An
  // eigenvector that is isotropic for the bilinear form (nu^T G nu ~ 0 while
  // nu^H G nu is not) is scaled by the Hermitian norm instead; the scale of a
  // row cancels against its mode. Eigenvectors in the null space of G carry
  // no eigenfunction and are dropped.
  std::vector<Eigen::Index> kept;
  std::vector<Eigen::RowVectorXcd> rows;
  Eigen::Index hermitian = 0;
  const Eigen::MatrixXcd g_complex = g.cast<Complex>();
  for (Eigen::Index k = 0; k < spectrum.values.size(); ++k) {
    const Eigen::VectorXcd nu = spectrum.vectors.col(k);
    const Eigen::VectorXcd g_nu = g_complex * nu;
    const double h = nu.dot(g_nu).real();
    if (h < kDropTolerance * g_norm) continue;
    Complex q = nu.transpose() * g_nu;
    if (std::abs(q) < kIsotropicTolerance * h) {
      q = h;
      ++hermitian;
    }
    kept.push_back(k);
    rows.push_back(nu.transpose() / std::sqrt(q));
  }
  if (kept.empty()) {
    throw DegenerateDataError("fit: every eigenvector lies in the null space of the Gram matrix");
  }

  SodmdModel model;
  model.kernel = kernel;
  model.rule = rule;
  model.ridge = representation.ridge;
  const auto kept_count = static_cast<Eigen::Index>(kept.size());
  model.eigenvalues.resize(kept_count);
  model.coeffs.resize(kept_count, m);
  for (Eigen::Index r = 0; r < kept_count; ++r) {
    model.eigenvalues[r] = spectrum.values[kept[static_cast<std::size_t>(r)]];
    model.coeffs.row(r) = rows[static_cast<std::size_t>(r)];
  }

  // xi (W G) = V, solved in the least-squares sense through (W G)^T xi^T = V^T.
  const Eigen::MatrixXcd v = identity_pairings(rule, dataset).cast<Complex>();
  const Eigen::MatrixXcd wg = model.coeffs * g_complex;
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXcd> cod(wg.transpose());
  model.modes = cod.solve(v.transpose()).transpose();
  if (!model.modes.allFinite()) throw NumericalError("fit: non-finite Liouville modes");

  model.training_samples.reserve(static_cast<std::size_t>(m));
  model.training_iv.resize(m, dataset.dim());
  for (Eigen::Index i = 0; i < m; ++i) {
    const auto& tr = dataset.trajectories[static_cast<std::size_t>(i)];
    model.training_samples.push_back(tr.samples);
    model.training_iv.row(i) = tr.initial_velocity->transpose();
  }

  auto& diag = model.diagnostics;
  diag.ridge = representation.ridge;
  diag.gram_condition = representation.condition;
  diag.gram_rank = representation.rank;
  diag.pseudo_inverse = representation.truncated;
  diag.dropped_modes = spectrum.values.size() - kept_count;
  diag.hermitian_modes = hermitian;
  const double v_norm = v.norm();
  diag.projection_error = v_norm > 0.0 ? (model.modes * wg - v).norm() / v_norm : 0.0;
  return model;
}

EigenfunctionValues eigenfunctions_at(const SodmdModel& model,
                                      const Eigen::Ref<const Eigen::VectorXd>& x0,
                                      const Eigen::Ref<const Eigen::VectorXd>& v0) {
  const Eigen::Index n = model.kernel.dim;
  if (x0.size() != n || v0.size() != n) {
    throw InputError("initial condition has dimension " + std::to_string(x0.size()) + "/" +
                     std::to_string(v0.size()) + ", model dimension is " + std::to_string(n));
  }
  const Eigen::Index m = model.training_count();
  const Eigen::VectorXd& w = model.rule.order_weights;
  Eigen::VectorXd occupation(m);
  Eigen::VectorXd derivative(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const auto& samples = model.training_samples[static_cast<std::size_t>(i)];
    occupation[i] = w.dot(kernel_matrix(model.kernel, samples, x0.transpose()).col(0));
    derivative[i] = w.dot(grad1_directional(model.kernel, x0, samples, v0));
  }
  EigenfunctionValues out;
  out.phi0 = model.coeffs * occupation.cast<Complex>();
  out.dphi0 = model.coeffs * derivative.cast<Complex>();
  return out;
}

std::pair<Complex, Complex> eigenfunction_at(const SodmdModel& model, Eigen::Index m,
                                             const Eigen::Ref<const Eigen::VectorXd>& x0,
                                             const Eigen::Ref<const Eigen::VectorXd>& v0) {
  if (m < 0 || m >= model.mode_count()) {
    throw InputError("eigenfunction index " + std::to_string(m) + " out of range (" +
                     std::to_string(model.mode_count()) + " modes)");
  }
  const EigenfunctionValues all = eigenfunctions_at(model, x0, v0);
  return {all.phi0[m], all.dphi0[m]};
}

Eigen::MatrixXcd modal_trajectory(const Eigen::MatrixXcd& modes, const Eigen::VectorXcd& roots,
                                  const Eigen::VectorXcd& phi0, const Eigen::VectorXcd& dphi0,
                                  const Eigen::Ref<const Eigen::VectorXd>& times,
                                  double zero_tolerance) {
  const Eigen::Index k = roots.size();
  if (modes.cols() != k || phi0.size() != k || dphi0.size() != k) {
    throw InputError("modal_trajectory: inconsistent mode counts");
  }
  Eigen::MatrixXcd out(times.size(), modes.rows());
  Eigen::VectorXcd weights(k);
  for (Eigen::Index s = 0; s < times.size(); ++s) {
    const double t = times[s];
    for (Eigen::Index m = 0; m < k; ++m) {
      const Complex r = roots[m];
      if (std::norm(r) < zero_tolerance) {
        weights[m] = phi0[m] + dphi0[m] * t;
      } else {
        const Complex ratio = dphi0[m] / r;
        weights[m] = 0.5 * (phi0[m] + ratio) * std::exp(r * t) +
                     0.5 * (phi0[m] - ratio) * std::exp(-r * t);
      }
    }
    out.row(s) = (modes * weights).transpose();
  }
  return out;
}

Reconstruction reconstruct(const SodmdModel& model, const ReconstructionRequest& request) {
  if (!request.x0.allFinite() || !request.v0.allFinite() || !request.times.allFinite()) {
    throw InputError("reconstruct: non-finite request entries");
  }
  if ((request.times.array() < 0.0).any()) throw InputError("reconstruct: negative time requested");
  const EigenfunctionValues values = eigenfunctions_at(model, request.x0, request.v0);
  const Eigen::VectorXcd roots = model.eigenvalues.array().sqrt();
  const Eigen::MatrixXcd full =
      modal_trajectory(model.modes, roots, values.phi0, values.dphi0, request.times);

  Reconstruction out;
  out.states = full.real();
  const double scale = out.states.size() ? out.states.cwiseAbs().maxCoeff() : 0.0;
  const double imag = full.size() ? full.imag().cwiseAbs().maxCoeff() : 0.0;
  out.imaginary_residual = scale > 0.0 ? imag / scale : imag;
  out.conditioning_warning = out.imaginary_residual > kImaginaryWarning;
  return out;
}

}  // namespace liodmd
