#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "slu/augment.hpp"
#include "slu/model.hpp"

namespace slu {

enum class Stage { kAsrPretrain, kAsrFinetune, kJointFinetune };

Stage parse_stage(const std::string& name);
const char* stage_name(Stage stage);

struct StageConfig {
  Stage stage = Stage::kJointFinetune;
  int epochs = 0;
  double learning_rate = 0.05;
};

struct TrainConfig {
  // Run in order. The ASR stages optimize L_ASR only; the joint stage
  // optimizes L_ASR + L_NLU.
  std::vector<StageConfig> stages;
  std::uint64_t seed = 0;
  double momentum = 0.9;
  // Global gradient norm cap per update; <= 0 disables clipping.
  double clip_norm = 5.0;
  int beam_size = 5;
  // Feature masking applied to each example on every epoch. Off by default.
  MaskSpec spec_augment;
};

struct TrainingExample {
  std::string id;
  ModelInput input;
  ModelTargets targets;
};

struct EpochLog {
  Stage stage;
  int epoch = 0;
  double loss_asr = 0.0;
  double loss_nlu = 0.0;
  double loss_slu = 0.0;
};

using EpochCallback = std::function<void(const EpochLog&)>;

// Online (per-utterance) momentum SGD through the staged schedule. The data
// order is reshuffled every epoch from the seed. ASR_PRETRAIN draws from
// `pretrain` when it is non-empty. Throws NumericError on divergence.
std::vector<EpochLog> train(ToyModel& model, const TrainConfig& config, std::span<const TrainingExample> data,
                            std::span<const TrainingExample> pretrain = {}, const EpochCallback& on_epoch = {});

}  // namespace slu
