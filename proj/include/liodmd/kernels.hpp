#ifndef LIODMD_KERNELS_HPP
#define LIODMD_KERNELS_HPP

// Scalar kernels K(x, y) on R^n and their gradients.
//
//   Gaussian        K(x, y) = exp(-|x - y|^2 / mu)
//   LinearDot       K(x, y) = x . y
//   ExponentialDot  K(x, y) = exp(x . y / mu)
//
// Point-wise functions accept any Eigen vector expression. The batched
// variants take one point per row and are what the assembly routines use.

#include <cmath>
#include <optional>
#include <string>
#include <string_view>

#include <Eigen/Dense>

#include "liodmd/errors.hpp"

namespace liodmd {

enum class KernelFamily { Gaussian, LinearDot, ExponentialDot };

std::string to_string(KernelFamily family);
KernelFamily parse_kernel_family(std::string_view name);

struct KernelSpec {
  KernelFamily family = KernelFamily::Gaussian;
  double shape = 1.0;  // ignored for LinearDot
  Eigen::Index dim = 1;

  /// Throws InputError unless dim >= 1 and shape > 0 where it matters.
  void validate() const;
};

namespace detail {

template <typename DX, typename DY>
void check_pair(const KernelSpec& spec, const Eigen::MatrixBase<DX>& x,
                const Eigen::MatrixBase<DY>& y) {
  if (x.size() != spec.dim || y.size() != spec.dim) {
    throw InputError("kernel argument dimension mismatch: expected " +
                     std::to_string(spec.dim) + ", got " +
                     std::to_string(x.size()) + " and " +
                     std::to_string(y.size()));
  }
}

}  // namespace detail

template <typename DX, typename DY>
typename DX::Scalar eval(const KernelSpec& spec, const Eigen::MatrixBase<DX>& x,
                         const Eigen::MatrixBase<DY>& y) {
  using Scalar = typename DX::Scalar;
  detail::check_pair(spec, x, y);
  const Scalar mu = static_cast<Scalar>(spec.shape);
  switch (spec.family) {
    case KernelFamily::Gaussian:
      return std::exp(-(x.derived() - y.derived()).squaredNorm() / mu);
    case KernelFamily::LinearDot:
      return x.dot(y);
    case KernelFamily::ExponentialDot:
      return std::exp(x.dot(y) / mu);
  }
  return Scalar(0);
}

/// Gradient of K with respect to its second argument, evaluated at (x, y).
template <typename DX, typename DY>
Eigen::Matrix<typename DX::Scalar, Eigen::Dynamic, 1> grad2(
    const KernelSpec& spec, const Eigen::MatrixBase<DX>& x,
    const Eigen::MatrixBase<DY>& y) {
  using Scalar = typename DX::Scalar;
  using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  detail::check_pair(spec, x, y);
  const Scalar mu = static_cast<Scalar>(spec.shape);
  switch (spec.family) {
    case KernelFamily::Gaussian: {
      const Vec diff = x.derived() - y.derived();
      return (Scalar(2) / mu) * std::exp(-diff.squaredNorm() / mu) * diff;
    }
    case KernelFamily::LinearDot:
      return x.derived();
    case KernelFamily::ExponentialDot:
      return (std::exp(x.dot(y) / mu) / mu) * x.derived();
  }
  return Vec::Zero(x.size());
}

/// Gradient of K with respect to its first argument. Equal to grad2(y, x).
template <typename DX, typename DY>
Eigen::Matrix<typename DX::Scalar, Eigen::Dynamic, 1> grad1(
    const KernelSpec& spec, const Eigen::MatrixBase<DX>& x,
    const Eigen::MatrixBase<DY>& y) {
  return grad2(spec, y, x);
}

/// Kernel matrix [K(X_r, Y_s)] for points stored as rows of X and Y.
template <typename DX, typename DY>
Eigen::Matrix<typename DX::Scalar, Eigen::Dynamic, Eigen::Dynamic>
kernel_matrix(const KernelSpec& spec, const Eigen::MatrixBase<DX>& X,
              const Eigen::MatrixBase<DY>& Y) {
  using Scalar = typename DX::Scalar;
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  if (X.cols() != spec.dim || Y.cols() != spec.dim) {
    throw InputError("kernel_matrix: point dimension mismatch");
  }
  const Scalar mu = static_cast<Scalar>(spec.shape);
  Mat gram = X * Y.transpose();
  switch (spec.family) {
    case KernelFamily::Gaussian: {
      const auto xx = X.rowwise().squaredNorm();
      const auto yy = Y.rowwise().squaredNorm();
      gram = (-(xx.replicate(1, Y.rows()) + yy.transpose().replicate(X.rows(), 1) -
                Scalar(2) * gram)
                   .cwiseMax(Scalar(0)) /
              mu)
                 .array()
                 .exp()
                 .matrix();
      break;
    }
    case KernelFamily::LinearDot:
      break;
    case KernelFamily::ExponentialDot:
      gram = (gram / mu).array().exp().matrix();
      break;
  }
  return gram;
}

/// Row r holds grad2 K(X_r, y) . v, the directional derivative of K in its
/// second argument along v.
template <typename DX, typename DY, typename DV>
Eigen::Matrix<typename DX::Scalar, Eigen::Dynamic, 1> grad2_directional(
    const KernelSpec& spec, const Eigen::MatrixBase<DX>& X,
    const Eigen::MatrixBase<DY>& y, const Eigen::MatrixBase<DV>& v) {
  using Scalar = typename DX::Scalar;
  using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  if (X.cols() != spec.dim || y.size() != spec.dim || v.size() != spec.dim) {
    throw InputError("grad2_directional: dimension mismatch");
  }
  const Scalar mu = static_cast<Scalar>(spec.shape);
  const Vec xv = X * v;
  switch (spec.family) {
    case KernelFamily::Gaussian: {
      const Vec k = kernel_matrix(spec, X, y.transpose());
      const Scalar yv = y.dot(v);
      return ((Scalar(2) / mu) * (xv.array() - yv) * k.array()).matrix();
    }
    case KernelFamily::LinearDot:
      return xv;
    case KernelFamily::ExponentialDot: {
      const Vec k = kernel_matrix(spec, X, y.transpose());
      return (xv.array() * k.array() / mu).matrix();
    }
  }
  return Vec::Zero(X.rows());
}

/// Row r holds grad1 K(x, Y_r) . v.
template <typename DX, typename DY, typename DV>
Eigen::Matrix<typename DY::Scalar, Eigen::Dynamic, 1> grad1_directional(
    const KernelSpec& spec, const Eigen::MatrixBase<DX>& x,
    const Eigen::MatrixBase<DY>& Y, const Eigen::MatrixBase<DV>& v) {
  return grad2_directional(spec, Y, x, v);
}

/// Data-driven shape defaults for the families that have one. Points are
/// rows of `samples`. Gaussian: twice the median pairwise squared distance.
/// ExponentialDot: mean |x . y| over distinct pairs. LinearDot: 1.
double default_shape(KernelFamily family, const Eigen::MatrixXd& samples);

}  // namespace liodmd

#endif  // LIODMD_KERNELS_HPP
