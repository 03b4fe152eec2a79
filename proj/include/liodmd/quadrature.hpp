#ifndef LIODMD_QUADRATURE_HPP
#define LIODMD_QUADRATURE_HPP

#include <string>

#include <Eigen/Dense>

namespace liodmd {

/// Uniform grid t_k = k * dt, k = 0 .. count-1, always starting at zero.
struct TimeGrid {
  double dt = 1.0;
  Eigen::Index count = 2;

  double horizon() const { return dt * static_cast<double>(count - 1); }
  double time(Eigen::Index k) const { return dt * static_cast<double>(k); }
  Eigen::VectorXd times() const;

  /// Throws InputError unless dt > 0 (finite) and count >= 2.
  void validate() const;

  /// Same count and dt to within 1e-12 relative.
  bool matches(const TimeGrid& other) const;
};

enum class QuadratureMethod { Trapezoid, Simpson };

/// Node weights for the order-m pairing
///   h -> 1/(m-1)! * int_0^T (T - t)^(m-1) h(t) dt,
/// obtained by scaling plain composite weights pointwise by the Cauchy
/// factor (T - t_k)^(m-1) / (m-1)!.
struct QuadratureRule {
  TimeGrid grid;
  int order = 1;
  QuadratureMethod method = QuadratureMethod::Trapezoid;
  bool mixed = false;  // Simpson with a trapezoid panel on the last interval
  Eigen::VectorXd base_weights;
  Eigen::VectorXd order_weights;
};

QuadratureMethod parse_quadrature_method(const std::string& name);
std::string to_string(QuadratureMethod method);

QuadratureRule make_rule(const TimeGrid& grid, int order,
                         QuadratureMethod method = QuadratureMethod::Trapezoid);

/// sum_k order_weights[k] * samples[k]
double integrate(const QuadratureRule& rule, const Eigen::Ref<const Eigen::VectorXd>& samples);

}  // namespace liodmd

#endif  // LIODMD_QUADRATURE_HPP
