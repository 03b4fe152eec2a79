#include "liodmd/signals.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <string_view>

#include "liodmd/errors.hpp"

namespace fs = std::filesystem;

namespace liodmd {

void Trajectory::validate() const {
  grid.validate();
  if (samples.rows() != grid.count) {
    throw FormatError("trajectory '" + label + "': " + std::to_string(samples.rows()) +
                      " sample rows for a grid of " + std::to_string(grid.count));
  }
  if (samples.cols() < 1) throw FormatError("trajectory '" + label + "' has no state columns");
  if (!samples.allFinite()) throw FormatError("trajectory '" + label + "' has non-finite samples");
  if (initial_velocity) {
    if (initial_velocity->size() != samples.cols()) {
      throw FormatError("trajectory '" + label + "': initial velocity has length " +
                        std::to_string(initial_velocity->size()) + ", state dimension is " +
                        std::to_string(samples.cols()));
    }
    if (!initial_velocity->allFinite()) {
      throw FormatError("trajectory '" + label + "' has a non-finite initial velocity");
    }
  }
}

Eigen::Index Dataset::dim() const {
  if (trajectories.empty()) throw InputError("empty dataset");
  return trajectories.front().dim();
}

const TimeGrid& Dataset::grid() const {
  if (trajectories.empty()) throw InputError("empty dataset");
  return trajectories.front().grid;
}

void Dataset::validate() const {
  if (trajectories.empty()) throw InputError("dataset contains no trajectories");
  const auto& first = trajectories.front();
  for (const auto& tr : trajectories) {
    tr.validate();
    if (!tr.grid.matches(first.grid)) {
      throw FormatError("dataset is heterogeneous: trajectory '" + tr.label +
                        "' has a different time grid than '" + first.label + "'");
    }
    if (tr.dim() != first.dim()) {
      throw FormatError("dataset is heterogeneous: trajectory '" + tr.label + "' has dimension " +
                        std::to_string(tr.dim()) + ", expected " + std::to_string(first.dim()));
    }
  }
}

// ---------------------------------------------------------------------------
// CSV

std::string format_real(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc()) throw FormatError("cannot format number");
  return std::string(buf, ptr);
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    cells.push_back(trim(line.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return cells;
}

[[noreturn]] void format_fail(const std::string& source, std::size_t line, const std::string& msg) {
  throw FormatError(source + ":" + std::to_string(line) + ": " + msg);
}

double parse_cell(std::string_view cell, const std::string& source, std::size_t line) {
  if (!cell.empty() && cell.front() == '+') cell.remove_prefix(1);
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
  if (ec != std::errc() || ptr != cell.data() + cell.size() || cell.empty()) {
    format_fail(source, line, "non-numeric cell '" + std::string(cell) + "'");
  }
  if (!std::isfinite(value)) format_fail(source, line, "non-finite value");
  return value;
}

struct RawRows {
  std::vector<std::string> header;
  // (line number, cells)
  std::vector<std::pair<std::size_t, std::vector<double>>> rows;
  std::vector<std::pair<std::size_t, std::vector<double>>> velocities;
};

RawRows read_raw(std::istream& in, const std::string& source) {
  RawRows raw;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view view = trim(line);
    if (view.empty()) continue;
    if (raw.header.empty()) {
      for (auto cell : split(view)) raw.header.emplace_back(cell);
      continue;
    }
    if (view.substr(0, 4) == "#iv:") {
      std::vector<double> values;
      for (auto cell : split(view.substr(4))) values.push_back(parse_cell(cell, source, lineno));
      raw.velocities.emplace_back(lineno, std::move(values));
      continue;
    }
    if (view.front() == '#') continue;
    std::vector<double> values;
    const auto cells = split(view);
    if (cells.size() != raw.header.size()) {
      format_fail(source, lineno,
                  "ragged row: " + std::to_string(cells.size()) + " cells, header has " +
                      std::to_string(raw.header.size()));
    }
    for (auto cell : cells) values.push_back(parse_cell(cell, source, lineno));
    raw.rows.emplace_back(lineno, std::move(values));
  }
  if (raw.header.empty()) throw FormatError(source + ": empty file");
  return raw;
}

// Builds a trajectory from rows whose column `time_col` is time and whose
// following columns are the state.
Trajectory assemble(const std::vector<std::pair<std::size_t, std::vector<double>>>& rows,
                    std::size_t time_col, const std::string& source) {
  if (rows.size() < 2) {
    throw FormatError(source + ": a trajectory needs at least 2 samples, found " +
                      std::to_string(rows.size()));
  }
  const std::size_t n = rows.front().second.size() - time_col - 1;
  if (n < 1) throw FormatError(source + ": no state columns");
  const double t0 = rows.front().second[time_col];
  const double t_last = rows.back().second[time_col];
  const auto count = static_cast<Eigen::Index>(rows.size());
  const double dt = (t_last - t0) / static_cast<double>(count - 1);
  if (!(dt > 0.0)) format_fail(source, rows.back().first, "time column is not increasing");

  Trajectory tr;
  tr.grid = TimeGrid{dt, count};
  tr.samples.resize(count, static_cast<Eigen::Index>(n));
  for (Eigen::Index k = 0; k < count; ++k) {
    const auto& [lineno, values] = rows[static_cast<std::size_t>(k)];
    const double expected = t0 + dt * static_cast<double>(k);
    if (std::abs(values[time_col] - expected) > 1e-9 * dt) {
      format_fail(source, lineno,
                  "non-uniform time grid: t = " + format_real(values[time_col]) + ", expected " +
                      format_real(expected));
    }
    for (std::size_t c = 0; c < n; ++c) {
      tr.samples(k, static_cast<Eigen::Index>(c)) = values[time_col + 1 + c];
    }
  }
  tr.label = source;
  return tr;
}

void write_header(std::ostream& out, Eigen::Index n, bool with_id) {
  if (with_id) out << "traj_id,";
  out << 't';
  for (Eigen::Index c = 1; c <= n; ++c) out << ",x" << c;
  out << '\n';
}

void write_rows(const Trajectory& tr, std::ostream& out, const std::string* id) {
  for (Eigen::Index k = 0; k < tr.samples.rows(); ++k) {
    if (id) out << *id << ',';
    out << format_real(tr.grid.time(k));
    for (Eigen::Index c = 0; c < tr.samples.cols(); ++c) out << ',' << format_real(tr.samples(k, c));
    out << '\n';
  }
}

bool is_multi(const RawRows& raw) { return !raw.header.empty() && raw.header.front() == "traj_id"; }

}  // namespace

Trajectory parse_csv(std::istream& in, const std::string& source) {
  RawRows raw = read_raw(in, source);
  if (is_multi(raw)) {
    throw FormatError(source + ": multi-trajectory file; load it as a dataset");
  }
  if (raw.header.front() != "t") {
    throw FormatError(source + ":1: header must start with 't'");
  }
  Trajectory tr = assemble(raw.rows, 0, source);
  if (raw.velocities.size() > 1) {
    format_fail(source, raw.velocities[1].first, "more than one #iv line");
  }
  if (!raw.velocities.empty()) {
    const auto& [lineno, v] = raw.velocities.front();
    if (static_cast<Eigen::Index>(v.size()) != tr.dim()) {
      format_fail(source, lineno, "#iv line has " + std::to_string(v.size()) +
                                      " entries, state dimension is " + std::to_string(tr.dim()));
    }
    tr.initial_velocity = Eigen::Map<const Eigen::VectorXd>(v.data(), tr.dim());
  }
  return tr;
}

Trajectory load_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  Trajectory tr = parse_csv(in, path.string());
  tr.label = path.stem().string();
  return tr;
}

void write_csv(const Trajectory& tr, std::ostream& out) {
  write_header(out, tr.dim(), false);
  if (tr.initial_velocity) {
    out << "#iv: ";
    for (Eigen::Index c = 0; c < tr.initial_velocity->size(); ++c) {
      if (c) out << ',';
      out << format_real((*tr.initial_velocity)[c]);
    }
    out << '\n';
  }
  write_rows(tr, out, nullptr);
}

void save_csv(const Trajectory& tr, const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write " + path.string());
  write_csv(tr, out);
  if (!out) throw FormatError("write failed: " + path.string());
}

Dataset load_dataset(const fs::path& path) {
  Dataset ds;
  if (fs::is_directory(path)) {
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(path)) {
      if (entry.is_regular_file() && entry.path().extension() == ".csv") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) ds.trajectories.push_back(load_csv(f));
    if (ds.trajectories.empty()) throw FormatError("no .csv files in " + path.string());
    ds.validate();
    return ds;
  }

  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  const std::string source = path.string();
  RawRows raw = read_raw(in, source);
  if (!is_multi(raw)) {
    ds.trajectories.push_back(load_csv(path));
    ds.validate();
    return ds;
  }
  if (raw.header.size() < 3 || raw.header[1] != "t") {
    throw FormatError(source + ":1: expected header 'traj_id,t,x1,...'");
  }

  // Group rows by id, keeping first-appearance order.
  std::vector<double> order;
  std::map<double, std::vector<std::pair<std::size_t, std::vector<double>>>> groups;
  for (auto& row : raw.rows) {
    const double id = row.second.front();
    if (!groups.count(id)) order.push_back(id);
    groups[id].push_back(std::move(row));
  }
  for (double id : order) {
    Trajectory tr = assemble(groups[id], 1, source + "[traj_id " + format_real(id) + "]");
    tr.label = format_real(id);
    ds.trajectories.push_back(std::move(tr));
  }
  for (const auto& [lineno, v] : raw.velocities) {
    if (v.empty()) format_fail(source, lineno, "#iv line without traj_id");
    auto it = std::find(order.begin(), order.end(), v.front());
    if (it == order.end()) format_fail(source, lineno, "#iv for unknown traj_id");
    auto& tr = ds.trajectories[static_cast<std::size_t>(it - order.begin())];
    if (static_cast<Eigen::Index>(v.size()) - 1 != tr.dim()) {
      format_fail(source, lineno, "#iv line length does not match state dimension");
    }
    tr.initial_velocity = Eigen::Map<const Eigen::VectorXd>(v.data() + 1, tr.dim());
  }
  ds.validate();
  return ds;
}

void save_dataset_csv(const Dataset& dataset, const fs::path& path) {
  dataset.validate();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write " + path.string());
  write_header(out, dataset.dim(), true);
  for (std::size_t i = 0; i < dataset.trajectories.size(); ++i) {
    const auto& tr = dataset.trajectories[i];
    if (!tr.initial_velocity) continue;
    out << "#iv: " << i;
    for (Eigen::Index c = 0; c < tr.dim(); ++c) out << ',' << format_real((*tr.initial_velocity)[c]);
    out << '\n';
  }
  for (std::size_t i = 0; i < dataset.trajectories.size(); ++i) {
    const std::string id = std::to_string(i);
    write_rows(dataset.trajectories[i], out, &id);
  }
}

// ---------------------------------------------------------------------------
// Transformations

Dataset segment(const Trajectory& trajectory, Eigen::Index window, Eigen::Index stride) {
  trajectory.validate();
  const Eigen::Index count = trajectory.grid.count;
  if (window < 2) throw InputError("segment window must be >= 2");
  if (window > count) {
    throw InputError("segment window " + std::to_string(window) + " exceeds trajectory length " +
                     std::to_string(count));
  }
  if (stride < 1) throw InputError("segment stride must be >= 1");

  Dataset ds;
  const Eigen::Index segments = (count - window) / stride + 1;
  ds.trajectories.reserve(static_cast<std::size_t>(segments));
  const std::size_t digits = std::to_string(segments - 1).size();
  for (Eigen::Index s = 0; s < segments; ++s) {
    Trajectory seg;
    seg.grid = TimeGrid{trajectory.grid.dt, window};
    seg.samples = trajectory.samples.middleRows(s * stride, window);
    std::string index = std::to_string(s);
    index.insert(0, digits - index.size(), '0');
    seg.label = trajectory.label + "_seg" + index;
    ds.trajectories.push_back(std::move(seg));
  }
  return ds;
}

namespace {

void perturb(Trajectory& tr, double sigma, std::mt19937_64& engine) {
  std::normal_distribution<double> noise(0.0, sigma);
  for (Eigen::Index k = 0; k < tr.samples.rows(); ++k) {
    for (Eigen::Index c = 0; c < tr.samples.cols(); ++c) tr.samples(k, c) += noise(engine);
  }
  if (tr.initial_velocity) {
    for (Eigen::Index c = 0; c < tr.initial_velocity->size(); ++c) {
      (*tr.initial_velocity)[c] += noise(engine);
    }
  }
}

std::mt19937_64 noise_engine(std::uint64_t seed) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
  return std::mt19937_64(seq);
}

}  // namespace

Dataset add_noise(const Dataset& dataset, double sigma, std::uint64_t seed) {
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw InputError("noise sigma must be >= 0");
  Dataset out = dataset;
  if (sigma == 0.0) return out;
  auto engine = noise_engine(seed);
  for (auto& tr : out.trajectories) perturb(tr, sigma, engine);
  return out;
}

Trajectory add_noise(const Trajectory& trajectory, double sigma, std::uint64_t seed) {
  Dataset ds{{trajectory}};
  return add_noise(ds, sigma, seed).trajectories.front();
}

Eigen::VectorXd estimate_initial_velocity(const Trajectory& trajectory) {
  if (trajectory.initial_velocity) return *trajectory.initial_velocity;
  const auto& s = trajectory.samples;
  const double dt = trajectory.grid.dt;
  if (s.rows() < 2) throw InputError("initial velocity needs at least 2 samples");
  if (s.rows() == 2) return (s.row(1) - s.row(0)).transpose() / dt;
  return (-3.0 * s.row(0) + 4.0 * s.row(1) - s.row(2)).transpose() / (2.0 * dt);
}

Dataset with_initial_velocities(Dataset dataset) {
  for (auto& tr : dataset.trajectories) {
    if (!tr.initial_velocity) tr.initial_velocity = estimate_initial_velocity(tr);
  }
  return dataset;
}

Eigen::MatrixXd stacked_samples(const Dataset& dataset) {
  Eigen::Index rows = 0;
  for (const auto& tr : dataset.trajectories) rows += tr.samples.rows();
  Eigen::MatrixXd all(rows, dataset.dim());
  Eigen::Index at = 0;
  for (const auto& tr : dataset.trajectories) {
    all.middleRows(at, tr.samples.rows()) = tr.samples;
    at += tr.samples.rows();
  }
  return all;
}

}  // namespace liodmd
