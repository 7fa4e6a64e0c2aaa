#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "slu/decode.hpp"
#include "slu/manifest.hpp"
#include "slu/metrics.hpp"
#include "slu/train.hpp"

namespace slu {

// Features for a record: inline samples when present, otherwise its WAV file.
Eigen::MatrixXd utterance_features(const Manifest& manifest, const Utterance& u, const FrontendConfig& frontend);

// "O" first, then the remaining tags in sorted order.
std::vector<std::string> tag_inventory(const Manifest& manifest);
std::vector<std::string> intent_inventory(const Manifest& manifest);

std::vector<TrainingExample> prepare_examples(const ToyModel& model, const Manifest& manifest);

// Everything `slu train-toy` reads from its configuration file. Relative
// paths are resolved against the configuration file's directory.
struct ToyRunConfig {
  ToyModelConfig model;
  TrainConfig train;
  std::filesystem::path asr_vocab;
  std::filesystem::path nlu_vocab;
  std::optional<std::filesystem::path> pretrain_manifest;
  std::filesystem::path checkpoint = "model.json";
};

ToyRunConfig parse_run_config(const nlohmann::json& j, const std::filesystem::path& base_dir);
nlohmann::json run_config_to_json(const ToyRunConfig& c);

struct EvalSummary {
  SlotScoreReport slots_edit;
  double intent_accuracy = 0.0;
  double wer = 0.0;
  std::vector<Utterance> hypotheses;
};

// Two-step decodes every record and scores it against the manifest.
EvalSummary evaluate_model(const ToyModel& model, const Manifest& manifest, const BeamOptions& beam);

}  // namespace slu
