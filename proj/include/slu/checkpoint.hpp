#pragma once

#include <filesystem>
#include <string>

#include "slu/model.hpp"

namespace slu {

inline constexpr int kCheckpointVersion = 1;

// Self-contained JSON container: configuration, both vocabularies, label
// inventories and every parameter matrix with its shape.
std::string serialize_model(const ToyModel& model);
ToyModel deserialize_model(const std::string& text);

void save_model(const ToyModel& model, const std::filesystem::path& path);
ToyModel load_model(const std::filesystem::path& path);

}  // namespace slu
