#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "liodmd/errors.hpp"
#include "liodmd/signals.hpp"
#include "temp_dir.hpp"

using namespace liodmd;
using Eigen::MatrixXd;
using Eigen::VectorXd;
namespace fs = std::filesystem;

namespace {

Trajectory from_function(const TimeGrid& grid, Eigen::Index n, double (*f)(double)) {
  Trajectory tr;
  tr.grid = grid;
  tr.samples.resize(grid.count, n);
  for (Eigen::Index k = 0; k < grid.count; ++k) tr.samples.row(k).setConstant(f(grid.time(k)));
  return tr;
}

Trajectory parse(const std::string& text) {
  std::istringstream in(text);
  return parse_csv(in, "mem");
}

std::string format_error_of(const std::string& text) {
  try {
    parse(text);
  } catch (const FormatError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("csv round trip") {
  Trajectory tr;
  tr.grid = TimeGrid{0.1, 3};
  tr.samples.resize(3, 2);
  tr.samples << 1.0 / 3.0, -2.0, 1e-300, 4.5, -0.0, 7.0;
  tr.initial_velocity = VectorXd::Constant(2, M_PI);
  std::ostringstream out;
  write_csv(tr, out);
  const Trajectory back = parse(out.str());
  CHECK(back.samples == tr.samples);
  CHECK(back.grid.matches(tr.grid));
  REQUIRE(back.initial_velocity);
  CHECK(*back.initial_velocity == *tr.initial_velocity);

  TempDir dir;
  save_csv(tr, dir.path / "a.csv");
  const Trajectory loaded = load_csv(dir.path / "a.csv");
  CHECK(loaded.samples == tr.samples);
  CHECK(loaded.label == "a");
}

TEST_CASE("csv errors carry line numbers") {
  CHECK(format_error_of("t,x1\n0,1\n0.5,2\n1.1,3\n").find("mem:3: non-uniform") != std::string::npos);
  CHECK(format_error_of("t,x1\n0,1\n0.5,2,3\n").find("mem:3: ragged") != std::string::npos);
  CHECK(format_error_of("t,x1\n0,1\n0.5,abc\n").find("mem:3: non-numeric") != std::string::npos);
  CHECK(format_error_of("t,x1\n#iv: 1,2\n0,1\n0.5,2\n").find("mem:2:") != std::string::npos);
  CHECK_FALSE(format_error_of("t,x1\n0,1\n").empty());
  CHECK_FALSE(format_error_of("").empty());
  CHECK_FALSE(format_error_of("time,x1\n0,1\n1,2\n").empty());
}

TEST_CASE("time origin is shifted to zero") {
  const Trajectory tr = parse("t,x1\n2,1\n2.5,2\n3,4\n");
  CHECK(tr.grid.dt == doctest::Approx(0.5));
  CHECK(tr.grid.count == 3);
  CHECK(tr.samples(2, 0) == 4.0);
}

TEST_CASE("datasets: directory, multi-file and heterogeneity") {
  TempDir dir;
  Dataset ds;
  for (int i = 0; i < 3; ++i) {
    Trajectory tr = from_function(TimeGrid{0.25, 5}, 2, [](double t) { return t * t; });
    tr.samples.array() += i;
    if (i != 1) tr.initial_velocity = VectorXd::Constant(2, i);
    ds.trajectories.push_back(tr);
    save_csv(tr, dir.path / ("t" + std::to_string(i) + ".csv"));
  }
  const Dataset from_dir = load_dataset(dir.path);
  REQUIRE(from_dir.size() == 3);
  CHECK(from_dir.trajectories[2].samples == ds.trajectories[2].samples);

  const fs::path multi = dir.path / "multi.data";
  save_dataset_csv(ds, multi);
  const Dataset from_multi = load_dataset(multi);
  REQUIRE(from_multi.size() == 3);
  for (int i = 0; i < 3; ++i) {
    CHECK(from_multi.trajectories[i].samples == ds.trajectories[i].samples);
    CHECK(from_multi.trajectories[i].initial_velocity.has_value() == (i != 1));
  }

  Trajectory other = from_function(TimeGrid{0.25, 6}, 2, [](double t) { return t; });
  save_csv(other, dir.path / "t9.csv");
  CHECK_THROWS_AS(load_dataset(dir.path), FormatError);
  fs::remove(dir.path / "t9.csv");
  save_csv(from_function(TimeGrid{0.25, 5}, 3, [](double t) { return t; }), dir.path / "t9.csv");
  CHECK_THROWS_AS(load_dataset(dir.path), FormatError);
  CHECK_THROWS_AS(load_dataset(dir.path / "missing"), FormatError);
}

TEST_CASE("segment") {
  const Trajectory src = from_function(TimeGrid{0.1, 301}, 2, [](double t) { return std::sin(t); });
  CHECK(segment(src, 31, 1).size() == 271);

  const Trajectory five = from_function(TimeGrid{0.1, 5}, 1, [](double t) { return t; });
  const Dataset one = segment(five, 5, 1);
  REQUIRE(one.size() == 1);
  CHECK(one.trajectories[0].samples == five.samples);

  const Trajectory ten = from_function(TimeGrid{0.1, 10}, 1, [](double t) { return t; });
  const Dataset three = segment(ten, 4, 3);
  REQUIRE(three.size() == 3);
  for (int s = 0; s < 3; ++s) {
    CHECK(three.trajectories[s].samples(0, 0) == doctest::Approx(0.3 * s));
    CHECK(three.trajectories[s].grid.count == 4);
    CHECK(three.trajectories[s].grid.dt == doctest::Approx(0.1));
  }
  CHECK_THROWS_AS(segment(ten, 11, 1), InputError);
  CHECK_THROWS_AS(segment(ten, 4, 0), InputError);
}

TEST_CASE("non-overlapping segments tile the source") {
  const Trajectory src = from_function(TimeGrid{0.1, 24}, 2, [](double t) { return std::cos(3 * t); });
  const Dataset parts = segment(src, 6, 6);
  REQUIRE(parts.size() == 4);
  MatrixXd joined(24, 2);
  for (int s = 0; s < 4; ++s) joined.middleRows(6 * s, 6) = parts.trajectories[s].samples;
  CHECK(joined == src.samples);
}

TEST_CASE("segment labels sort in order") {
  const Trajectory src = from_function(TimeGrid{0.1, 15}, 1, [](double t) { return t; });
  const Dataset parts = segment(src, 2, 1);
  for (std::size_t s = 1; s < parts.trajectories.size(); ++s) {
    CHECK(parts.trajectories[s - 1].label < parts.trajectories[s].label);
  }
}

TEST_CASE("add_noise") {
  Dataset ds;
  for (int i = 0; i < 10; ++i) {
    ds.trajectories.push_back(from_function(TimeGrid{0.01, 5000}, 2, [](double t) { return t; }));
  }
  const Dataset same = add_noise(ds, 0.0, 4);
  for (int i = 0; i < 10; ++i) CHECK(same.trajectories[i].samples == ds.trajectories[i].samples);

  const Dataset a = add_noise(ds, 0.01, 42);
  const Dataset b = add_noise(ds, 0.01, 42);
  const Dataset c = add_noise(ds, 0.01, 43);
  double sum = 0.0, sq = 0.0;
  Eigen::Index entries = 0;
  for (int i = 0; i < 10; ++i) {
    CHECK(a.trajectories[i].samples == b.trajectories[i].samples);
    CHECK(a.trajectories[i].samples != c.trajectories[i].samples);
    const MatrixXd d = a.trajectories[i].samples - ds.trajectories[i].samples;
    sum += d.sum();
    sq += d.squaredNorm();
    entries += d.size();
  }
  CHECK(entries == 100000);
  const double mean = sum / entries;
  const double sd = std::sqrt(sq / entries - mean * mean);
  CHECK(sd >= 0.0095);
  CHECK(sd <= 0.0105);
  CHECK_THROWS_AS(add_noise(ds, -1.0, 1), InputError);
}

TEST_CASE("initial velocity estimates") {
  const TimeGrid grid{0.1, 11};
  const VectorXd lin = estimate_initial_velocity(from_function(grid, 2, [](double t) { return t; }));
  CHECK(std::abs(lin[0] - 1.0) < 1e-12);
  CHECK(std::abs(lin[1] - 1.0) < 1e-12);
  CHECK(estimate_initial_velocity(from_function(grid, 1, [](double) { return 3.0; }))[0] == 0.0);
  CHECK(std::abs(estimate_initial_velocity(from_function(grid, 1, [](double t) { return t * t; }))[0]) <
        1e-12);
  CHECK(estimate_initial_velocity(from_function(TimeGrid{0.5, 2}, 1, [](double t) { return 2 * t; }))[0] ==
        doctest::Approx(2.0));

  Trajectory stored = from_function(grid, 1, [](double t) { return t; });
  stored.initial_velocity = VectorXd::Constant(1, 7.0);
  CHECK(estimate_initial_velocity(stored)[0] == 7.0);

  auto err = [](double dt) {
    const TimeGrid g{dt, 11};
    return std::abs(estimate_initial_velocity(from_function(g, 1, [](double t) { return std::sin(t); }))[0] -
                    1.0);
  };
  CHECK(err(0.1) / err(0.025) >= 12.0);

  Dataset ds;
  ds.trajectories = {stored, from_function(grid, 1, [](double t) { return t; })};
  const Dataset filled = with_initial_velocities(ds);
  CHECK((*filled.trajectories[0].initial_velocity)[0] == 7.0);
  CHECK((*filled.trajectories[1].initial_velocity)[0] == doctest::Approx(1.0));
}

TEST_CASE("format_real round trips") {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-17, 1e300, 123456789.125}) {
    CHECK(std::stod(format_real(v)) == v);
  }
}
