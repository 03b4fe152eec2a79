#include "liodmd/kernels.hpp"

#include <algorithm>
#include <vector>

namespace liodmd {

namespace {

// Pairwise statistics are quadratic in the number of points; beyond this
// many points a deterministic strided subset is used.
constexpr Eigen::Index kMaxHeuristicPoints = 2000;

Eigen::MatrixXd strided_subset(const Eigen::MatrixXd& samples) {
  if (samples.rows() <= kMaxHeuristicPoints) return samples;
  const Eigen::Index stride =
      (samples.rows() + kMaxHeuristicPoints - 1) / kMaxHeuristicPoints;
  const Eigen::Index kept = (samples.rows() + stride - 1) / stride;
  Eigen::MatrixXd out(kept, samples.cols());
  for (Eigen::Index r = 0; r < kept; ++r) out.row(r) = samples.row(r * stride);
  return out;
}

}  // namespace

std::string to_string(KernelFamily family) {
  switch (family) {
    case KernelFamily::Gaussian:
      return "gaussian";
    case KernelFamily::LinearDot:
      return "linear";
    case KernelFamily::ExponentialDot:
      return "exponential";
  }
  return "unknown";
}

KernelFamily parse_kernel_family(std::string_view name) {
  if (name == "gaussian") return KernelFamily::Gaussian;
  if (name == "linear") return KernelFamily::LinearDot;
  if (name == "exponential") return KernelFamily::ExponentialDot;
  throw InputError("unknown kernel family '" + std::string(name) +
                   "' (expected gaussian, linear or exponential)");
}

void KernelSpec::validate() const {
  if (dim < 1) throw InputError("kernel dimension must be positive");
  if (family != KernelFamily::LinearDot && !(shape > 0.0 && std::isfinite(shape))) {
    throw InputError("kernel shape parameter must be positive and finite for " +
                     to_string(family));
  }
}

double default_shape(KernelFamily family, const Eigen::MatrixXd& samples) {
  if (family == KernelFamily::LinearDot) return 1.0;
  const Eigen::MatrixXd pts = strided_subset(samples);
  const Eigen::Index n = pts.rows();
  if (n < 2) throw InputError("default_shape needs at least two sample points");

  std::vector<double> values;
  values.reserve(static_cast<std::size_t>(n * (n - 1) / 2));
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      if (family == KernelFamily::Gaussian) {
        values.push_back((pts.row(i) - pts.row(j)).squaredNorm());
      } else {
        values.push_back(std::abs(pts.row(i).dot(pts.row(j))));
      }
    }
  }

  double shape = 0.0;
  if (family == KernelFamily::Gaussian) {
    // lower median for even counts
    auto mid = values.begin() + static_cast<std::ptrdiff_t>((values.size() - 1) / 2);
    std::nth_element(values.begin(), mid, values.end());
    shape = 2.0 * *mid;
  } else {
    double sum = 0.0;
    for (double v : values) sum += v;
    shape = sum / static_cast<double>(values.size());
  }
  if (!(shape > 0.0)) {
    throw DegenerateDataError("default shape heuristic degenerate (all sample points coincide); "
                     "pass an explicit shape");
  }
  return shape;
}

}  // namespace liodmd
