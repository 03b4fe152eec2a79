#ifndef LIODMD_MODEL_FILE_HPP
#define LIODMD_MODEL_FILE_HPP

// Versioned JSON persistence of a fitted model. The training trajectories
// are part of the model: evaluating eigenfunctions at a new initial
// condition integrates the kernel along them.

#include <filesystem>
#include <string>

#include "liodmd/sodmd.hpp"

namespace liodmd {

constexpr int kModelFormatVersion = 1;

std::string model_to_json(const SodmdModel& model);
SodmdModel model_from_json(const std::string& text);

void save_model(const SodmdModel& model, const std::filesystem::path& path);
SodmdModel load_model(const std::filesystem::path& path);

}  // namespace liodmd

#endif  // LIODMD_MODEL_FILE_HPP
