#ifndef LIODMD_SIGNALS_HPP
#define LIODMD_SIGNALS_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "liodmd/quadrature.hpp"

namespace liodmd {

/// A uniformly sampled signal gamma: [0, T] -> R^n. Row k of `samples` is
/// gamma(t_k).
struct Trajectory {
  TimeGrid grid;
  Eigen::MatrixXd samples;
  std::optional<Eigen::VectorXd> initial_velocity;
  std::string label;

  Eigen::Index dim() const { return samples.cols(); }
  void validate() const;
};

/// Trajectories sharing one time grid and one state dimension.
struct Dataset {
  std::vector<Trajectory> trajectories;

  Eigen::Index size() const { return static_cast<Eigen::Index>(trajectories.size()); }
  Eigen::Index dim() const;
  const TimeGrid& grid() const;

  /// Throws InputError if empty and FormatError if heterogeneous.
  void validate() const;
};

// CSV layout: header `t,x1,...,xn`, optional `#iv: v1,...,vn`, then one row
// per sample. Multi-trajectory files prepend a `traj_id` column and carry
// velocities as `#iv: <id>,v1,...,vn`.

Trajectory load_csv(const std::filesystem::path& path);
void save_csv(const Trajectory& trajectory, const std::filesystem::path& path);
Trajectory parse_csv(std::istream& in, const std::string& source = "<stream>");
void write_csv(const Trajectory& trajectory, std::ostream& out);

/// Loads a directory of trajectory files (sorted by file name), a single
/// trajectory file, or a `traj_id` multi-trajectory file.
Dataset load_dataset(const std::filesystem::path& path);
void save_dataset_csv(const Dataset& dataset, const std::filesystem::path& path);

/// Decimal text that reads back to the identical double.
std::string format_real(double value);

Dataset segment(const Trajectory& trajectory, Eigen::Index window, Eigen::Index stride);

/// Adds independent N(0, sigma^2) draws to every sample and every present
/// initial-velocity entry. Deterministic in `seed`.
Dataset add_noise(const Dataset& dataset, double sigma, std::uint64_t seed);
Trajectory add_noise(const Trajectory& trajectory, double sigma, std::uint64_t seed);

/// gamma'(0) from the one-sided difference (-3 g0 + 4 g1 - g2) / (2 dt), or
/// (g1 - g0) / dt on a two-sample grid. A stored velocity wins.
Eigen::VectorXd estimate_initial_velocity(const Trajectory& trajectory);

/// All samples of all trajectories, trajectory-major, one point per row.
Eigen::MatrixXd stacked_samples(const Dataset& dataset);

/// Copy of `dataset` with every missing initial velocity estimated.
Dataset with_initial_velocities(Dataset dataset);

}  // namespace liodmd

#endif  // LIODMD_SIGNALS_HPP
