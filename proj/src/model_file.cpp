#include "liodmd/model_file.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "liodmd/errors.hpp"

namespace liodmd {

using Json = nlohmann::ordered_json;

namespace {

Json complex_json(Complex z) { return Json::array({z.real(), z.imag()}); }

Complex complex_from(const Json& j) {
  if (!j.is_array() || j.size() != 2) throw FormatError("model file: expected a [re, im] pair");
  return {j[0].get<double>(), j[1].get<double>()};
}

Json complex_matrix_json(const Eigen::MatrixXcd& m) {
  Json rows = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(complex_json(m(r, c)));
    rows.push_back(std::move(row));
  }
  return rows;
}

Json real_matrix_json(const Eigen::MatrixXd& m) {
  Json rows = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXcd complex_matrix_from(const Json& j, Eigen::Index rows, Eigen::Index cols,
                                     const char* what) {
  if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != rows) {
    throw FormatError(std::string("model file: '") + what + "' has the wrong number of rows");
  }
  Eigen::MatrixXcd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const Json& row = j[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
      throw FormatError(std::string("model file: '") + what + "' has a ragged row");
    }
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = complex_from(row[static_cast<std::size_t>(c)]);
  }
  return m;
}

Eigen::MatrixXd real_matrix_from(const Json& j, Eigen::Index rows, Eigen::Index cols,
                                 const char* what) {
  if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != rows) {
    throw FormatError(std::string("model file: '") + what + "' has the wrong number of rows");
  }
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const Json& row = j[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
      throw FormatError(std::string("model file: '") + what + "' has a ragged row");
    }
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = row[static_cast<std::size_t>(c)].get<double>();
  }
  return m;
}

}  // namespace

std::string model_to_json(const SodmdModel& model) {
  Json j;
  j["format_version"] = kModelFormatVersion;
  j["kernel"] = {{"family", to_string(model.kernel.family)},
                 {"shape", model.kernel.shape},
                 {"dim", model.kernel.dim}};
  j["grid"] = {{"dt", model.rule.grid.dt}, {"count", model.rule.grid.count}};
  j["quadrature"] = to_string(model.rule.method);
  j["ridge"] = model.ridge;

  Json eigenvalues = Json::array();
  for (Eigen::Index k = 0; k < model.eigenvalues.size(); ++k) {
    eigenvalues.push_back(complex_json(model.eigenvalues[k]));
  }
  j["eigenvalues"] = std::move(eigenvalues);
  j["coeffs"] = complex_matrix_json(model.coeffs);
  j["modes"] = complex_matrix_json(model.modes);

  Json samples = Json::array();
  for (const auto& s : model.training_samples) samples.push_back(real_matrix_json(s));
  j["training_samples"] = std::move(samples);
  j["training_iv"] = real_matrix_json(model.training_iv);

  const auto& d = model.diagnostics;
  // JSON has no infinity; an exactly singular Gram is stored as null.
  const Json condition = std::isfinite(d.gram_condition) ? Json(d.gram_condition) : Json(nullptr);
  j["diagnostics"] = {{"ridge", d.ridge},
                      {"gram_condition", condition},
                      {"gram_rank", d.gram_rank},
                      {"pseudo_inverse", d.pseudo_inverse},
                      {"dropped_modes", d.dropped_modes},
                      {"hermitian_modes", d.hermitian_modes},
                      {"projection_error", d.projection_error}};
  return j.dump(1) + "\n";
}

SodmdModel model_from_json(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(std::string("model file is not valid JSON: ") + e.what());
  }
  try {
    if (j.at("format_version").get<int>() != kModelFormatVersion) {
      throw FormatError("unsupported model format_version " + j.at("format_version").dump());
    }
    SodmdModel model;
    const Json& kernel = j.at("kernel");
    model.kernel.family = parse_kernel_family(kernel.at("family").get<std::string>());
    model.kernel.shape = kernel.at("shape").get<double>();
    model.kernel.dim = kernel.at("dim").get<Eigen::Index>();
    model.kernel.validate();

    const TimeGrid grid{j.at("grid").at("dt").get<double>(),
                        j.at("grid").at("count").get<Eigen::Index>()};
    model.rule = make_rule(grid, 2, parse_quadrature_method(j.at("quadrature").get<std::string>()));
    model.ridge = j.at("ridge").get<double>();

    const Json& eig = j.at("eigenvalues");
    const auto k = static_cast<Eigen::Index>(eig.size());
    model.eigenvalues.resize(k);
    for (Eigen::Index r = 0; r < k; ++r) model.eigenvalues[r] = complex_from(eig[static_cast<std::size_t>(r)]);

    const Json& samples = j.at("training_samples");
    const auto m = static_cast<Eigen::Index>(samples.size());
    if (k < 1 || m < 1) throw FormatError("model file: no modes or no training trajectories");
    const Eigen::Index n = model.kernel.dim;
    model.coeffs = complex_matrix_from(j.at("coeffs"), k, m, "coeffs");
    model.modes = complex_matrix_from(j.at("modes"), n, k, "modes");
    for (const auto& s : samples) {
      model.training_samples.push_back(real_matrix_from(s, grid.count, n, "training_samples"));
    }
    model.training_iv = real_matrix_from(j.at("training_iv"), m, n, "training_iv");

    const Json& d = j.at("diagnostics");
    model.diagnostics.ridge = d.at("ridge").get<double>();
    model.diagnostics.gram_condition = d.at("gram_condition").is_null()
                                           ? std::numeric_limits<double>::infinity()
                                           : d.at("gram_condition").get<double>();
    model.diagnostics.gram_rank = d.at("gram_rank").get<Eigen::Index>();
    model.diagnostics.pseudo_inverse = d.at("pseudo_inverse").get<bool>();
    model.diagnostics.dropped_modes = d.at("dropped_modes").get<Eigen::Index>();
    model.diagnostics.hermitian_modes = d.at("hermitian_modes").get<Eigen::Index>();
    model.diagnostics.projection_error = d.at("projection_error").get<double>();
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed model file: ") + e.what());
  } catch (const InputError& e) {
    throw FormatError(std::string("malformed model file: ") + e.what());
  }
}

void save_model(const SodmdModel& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write " + path.string());
  out << model_to_json(model);
  if (!out) throw FormatError("write failed: " + path.string());
}

SodmdModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return model_from_json(buf.str());
}

}  // namespace liodmd
