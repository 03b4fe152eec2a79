#ifndef LIODMD_SODMD_HPP
#define LIODMD_SODMD_HPP

// Second-order Liouville DMD with occupation kernels.
//
// Each training trajectory gamma_i contributes a second-order occupation
// kernel Gamma_i, whose pairings with kernel sections are (T - t)-weighted
// time integrals. From the Gram matrix G of these kernels and the interaction
// matrix A (pairings of the adjoint action with Gamma_j, which need only the
// endpoints, one initial velocity and kernel gradients) the operator is
// represented on span{Gamma_i} by G^{-1} A. Its eigenvectors give normalized
// eigenfunctions, the identity observable is expanded over them (the modes),
// and trajectories from new initial conditions follow in closed form:
//
//   x(t) = Re sum_m xi_m [ phi_m cosh(sqrt(l_m) t) + dphi_m sinh(sqrt(l_m) t) / sqrt(l_m) ].

#include <complex>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "liodmd/kernels.hpp"
#include "liodmd/quadrature.hpp"
#include "liodmd/signals.hpp"

namespace liodmd {

using Complex = std::complex<double>;

// ---------------------------------------------------------------------------
// Inner-product evaluation

/// Gamma_i[theta](t) for theta(t) = point: sum_k w_k K(point, gamma_i(t_k)).
double occupation_eval(const KernelSpec& kernel, const QuadratureRule& rule,
                       const Trajectory& gamma, const Eigen::Ref<const Eigen::VectorXd>& point);

/// Symmetric M x M matrix of occupation-kernel inner products.
Eigen::MatrixXd gram(const KernelSpec& kernel, const QuadratureRule& rule, const Dataset& dataset);

/// A(i, j) = <B* Gamma_i, Gamma_j>. Every trajectory needs an initial velocity.
Eigen::MatrixXd interaction(const KernelSpec& kernel, const QuadratureRule& rule,
                            const Dataset& dataset);

/// n x M matrix V(k, j) = <(psi_id)_k, Gamma_j> = sum_t w_t gamma_j(t)_k.
Eigen::MatrixXd identity_pairings(const QuadratureRule& rule, const Dataset& dataset);

// ---------------------------------------------------------------------------
// Finite-rank representation and spectrum

struct FiniteRank {
  Eigen::MatrixXd matrix;   // X = Q (L + ridge)^-1 Q^T A
  Eigen::MatrixXd basis;    // Q: orthonormal eigenvectors of G above the rank tolerance
  double ridge = 0.0;
  double condition = 0.0;   // of G + ridge I (2-norm)
  Eigen::Index rank = 0;    // columns of Q
  bool truncated = false;   // rank < M: pseudo-inverse on the range of G
};

/// Eigenvalues of G at or below this fraction of the largest are treated as
/// zero.
constexpr double kRankTolerance = 1e-12;

/// Ridge used when none is given: 1e-8 * trace(G) / M.
double default_ridge(const Eigen::MatrixXd& gram_matrix);

/// Solves (G + ridge I) X = A on the numerical range of G. A negative ridge
/// selects default_ridge(G). When G has full numerical rank this is the
/// plain regularized solve; otherwise (a kernel whose native space has
/// dimension below M, e.g. the linear kernel) the null directions are
/// dropped, which is the minimum-norm solution for ridge = 0.
///
/// Duplicated trajectories (identical Gram and interaction rows up to 1e-8)
/// raise DegenerateDataError naming them, whatever the ridge.
FiniteRank finite_rank(const Eigen::MatrixXd& gram_matrix, const Eigen::MatrixXd& interaction_matrix,
                       double ridge = -1.0);

struct EigenDecomposition {
  Eigen::VectorXcd values;
  Eigen::MatrixXcd vectors;  // unit-norm columns
};

/// General real eigendecomposition, sorted by descending |lambda| and then
/// descending imaginary part.
EigenDecomposition eigendecompose(const Eigen::MatrixXd& matrix);

// ---------------------------------------------------------------------------
// Model

struct FitOptions {
  QuadratureMethod quadrature = QuadratureMethod::Trapezoid;
  double ridge = -1.0;  // < 0: default_ridge
};

struct FitDiagnostics {
  double ridge = 0.0;
  double gram_condition = 0.0;
  Eigen::Index gram_rank = 0;
  bool pseudo_inverse = false;
  Eigen::Index dropped_modes = 0;
  Eigen::Index hermitian_modes = 0;  // normalized by nu^H G nu (isotropic nu)
  double projection_error = 0.0;  // |xi W G - V| / |V| (Frobenius)
};

struct SodmdModel {
  KernelSpec kernel;
  QuadratureRule rule;                           // order 2
  std::vector<Eigen::MatrixXd> training_samples;  // M of count x n
  Eigen::MatrixXd training_iv;                   // M x n
  Eigen::VectorXcd eigenvalues;                  // K retained
  Eigen::MatrixXcd coeffs;                       // K x M, row m = nu_m^T / sqrt(nu_m^T G nu_m)
  Eigen::MatrixXcd modes;                        // n x K
  double ridge = 0.0;
  FitDiagnostics diagnostics;

  Eigen::Index dim() const { return modes.rows(); }
  Eigen::Index mode_count() const { return eigenvalues.size(); }
  Eigen::Index training_count() const { return static_cast<Eigen::Index>(training_samples.size()); }
  double horizon() const { return rule.grid.horizon(); }
};

/// Runs gram -> interaction -> finite_rank -> eigendecompose and builds the
/// normalized eigenfunction coefficients and modes. Missing initial
/// velocities are estimated.
SodmdModel fit(const Dataset& dataset, const KernelSpec& kernel, const FitOptions& options = {});

/// Unit eigenvectors with nu^H G nu below this fraction of |G| are not
/// retained as modes.
constexpr double kDropTolerance = 1e-13;
/// |nu^T G nu| below this fraction of nu^H G nu counts as isotropic.
constexpr double kIsotropicTolerance = 1e-6;

struct EigenfunctionValues {
  Eigen::VectorXcd phi0;   // phi_m[theta](0)
  Eigen::VectorXcd dphi0;  // grad phi_m[theta](0) . theta'(0)
};

/// All retained eigenfunctions at once for a signal starting at x0 with
/// velocity v0.
EigenfunctionValues eigenfunctions_at(const SodmdModel& model,
                                      const Eigen::Ref<const Eigen::VectorXd>& x0,
                                      const Eigen::Ref<const Eigen::VectorXd>& v0);

std::pair<Complex, Complex> eigenfunction_at(const SodmdModel& model, Eigen::Index m,
                                             const Eigen::Ref<const Eigen::VectorXd>& x0,
                                             const Eigen::Ref<const Eigen::VectorXd>& v0);

struct ReconstructionRequest {
  Eigen::VectorXd x0;
  Eigen::VectorXd v0;
  Eigen::VectorXd times;
};

struct Reconstruction {
  Eigen::MatrixXd states;        // len(times) x n
  double imaginary_residual = 0.0;  // max_t |Im x(t)|_inf / |Re x|_inf
  bool conditioning_warning = false;
};

constexpr double kZeroEigenvalue = 1e-10;
constexpr double kImaginaryWarning = 1e-3;

/// Complex modal sum for explicit square roots of the eigenvalues; each
/// root's sign is immaterial. Rows are times, columns state coordinates.
Eigen::MatrixXcd modal_trajectory(const Eigen::MatrixXcd& modes, const Eigen::VectorXcd& roots,
                                  const Eigen::VectorXcd& phi0, const Eigen::VectorXcd& dphi0,
                                  const Eigen::Ref<const Eigen::VectorXd>& times,
                                  double zero_tolerance = kZeroEigenvalue);

Reconstruction reconstruct(const SodmdModel& model, const ReconstructionRequest& request);

}  // namespace liodmd

#endif  // LIODMD_SODMD_HPP
