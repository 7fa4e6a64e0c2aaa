#include "slu/train.hpp"

#include <cmath>
#include <numeric>
#include <random>

#include "slu/error.hpp"
#include "slu/random.hpp"

namespace slu {

Stage parse_stage(const std::string& name) {
  if (name == "asr_pretrain") return Stage::kAsrPretrain;
  if (name == "asr_finetune") return Stage::kAsrFinetune;
  if (name == "joint_finetune") return Stage::kJointFinetune;
  throw ValidationError("unknown stage '" + name + "' (expected asr_pretrain, asr_finetune or joint_finetune)");
}

const char* stage_name(Stage stage) {
  switch (stage) {
    case Stage::kAsrPretrain: return "asr_pretrain";
    case Stage::kAsrFinetune: return "asr_finetune";
    case Stage::kJointFinetune: return "joint_finetune";
  }
  return "?";
}

namespace {

bool masking_enabled(const MaskSpec& m) { return m.time_masks > 0 || m.freq_masks > 0; }

}  // namespace

std::vector<EpochLog> train(ToyModel& model, const TrainConfig& config, std::span<const TrainingExample> data,
                            std::span<const TrainingExample> pretrain, const EpochCallback& on_epoch) {
  if (config.beam_size < 1) throw ValidationError("beam_size must be at least 1");
  for (std::size_t i = 1; i < config.stages.size(); ++i)
    if (config.stages[i].stage < config.stages[i - 1].stage)
      throw ValidationError("training stages must run in order asr_pretrain, asr_finetune, joint_finetune");

  std::mt19937_64 rng(splitmix64(config.seed));
  std::vector<EpochLog> log;
  for (const auto& stage : config.stages) {
    if (stage.epochs < 0 || !(stage.learning_rate > 0.0))
      throw ValidationError(std::string("invalid epochs or learning rate for stage ") + stage_name(stage.stage));
    const auto examples = stage.stage == Stage::kAsrPretrain && !pretrain.empty() ? pretrain : data;
    const auto selection = stage.stage == Stage::kJointFinetune ? LossSelection::kSlu : LossSelection::kAsr;
    auto velocity = model.params.zeros_like();

    std::vector<std::size_t> order(examples.size());
    std::iota(order.begin(), order.end(), 0);
    for (int epoch = 1; epoch <= stage.epochs; ++epoch) {
      for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[uniform_below(rng, i)]);

      EpochLog entry{stage.stage, epoch};
      for (auto idx : order) {
        const auto& ex = examples[idx];
        BackwardResult r;
        if (masking_enabled(config.spec_augment)) {
          ModelInput masked = ex.input;
          MaskSpec spec = config.spec_augment;
          spec.seed = splitmix64(config.seed ^ static_cast<std::uint64_t>(epoch)) ^ fnv1a64(ex.id);
          spec.max_time_width = std::min<int>(spec.max_time_width, static_cast<int>(masked.features.rows()));
          spec.max_freq_width = std::min<int>(spec.max_freq_width, static_cast<int>(masked.features.cols()));
          masked.features = mask_features(masked.features, spec);
          r = backward(model, masked, ex.targets, selection);
        } else {
          r = backward(model, ex.input, ex.targets, selection);
        }
        if (!std::isfinite(r.loss.slu))
          throw NumericError(std::string("training diverged: non-finite loss in ") + stage_name(stage.stage) +
                             " epoch " + std::to_string(epoch) + " on '" + ex.id + "'");
        entry.loss_asr += r.loss.asr;
        entry.loss_nlu += r.loss.nlu;
        entry.loss_slu += r.loss.slu;

        double scale = 1.0;
        if (config.clip_norm > 0.0) {
          const double norm = std::sqrt(r.grads.squared_norm());
          if (norm > config.clip_norm) scale = config.clip_norm / norm;
        }
        auto& params = model.params.all();
        auto& vel = velocity.all();
        const auto& grads = r.grads.all();
        for (std::size_t k = 0; k < params.size(); ++k) {
          vel[k].value = config.momentum * vel[k].value - stage.learning_rate * scale * grads[k].value;
          params[k].value += vel[k].value;
        }
      }
      if (!model.params.all_finite())
        throw NumericError(std::string("training diverged: non-finite parameters after ") + stage_name(stage.stage) +
                           " epoch " + std::to_string(epoch));
      const double n = examples.empty() ? 1.0 : static_cast<double>(examples.size());
      entry.loss_asr /= n;
      entry.loss_nlu /= n;
      entry.loss_slu /= n;
      log.push_back(entry);
      if (on_epoch) on_epoch(entry);
    }
  }
  return log;
}

}  // namespace slu
