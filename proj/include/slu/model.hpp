#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "slu/crf.hpp"
#include "slu/features.hpp"
#include "slu/tokenizer.hpp"

namespace slu {

enum class SlotHead { kLinear, kCrf };

SlotHead parse_slot_head(const std::string& name);
const char* slot_head_name(SlotHead head);

// Which parameter group a tensor belongs to: the ASR branch, the
// self-attention text encoder standing in for BERT, or the two task heads.
enum class ParamBlock { kAsr, kNluEncoder, kIcHead, kSlHead };

const char* param_block_name(ParamBlock block);

struct Param {
  std::string name;
  ParamBlock block;
  Eigen::MatrixXd value;
};

// Ordered collection of named matrices. Also used for gradients, which
// share names and shapes with the parameters they belong to.
class ModelParams {
 public:
  void add(std::string name, ParamBlock block, Eigen::MatrixXd value);
  bool has(std::string_view name) const;
  Eigen::MatrixXd& at(std::string_view name);
  const Eigen::MatrixXd& at(std::string_view name) const;

  std::vector<Param>& all() { return params_; }
  const std::vector<Param>& all() const { return params_; }

  // Same names and shapes, all zeros.
  ModelParams zeros_like() const;
  double squared_norm(std::optional<ParamBlock> block = std::nullopt) const;
  bool all_finite() const;

 private:
  std::vector<Param> params_;
};

using Gradients = ModelParams;

struct ToyModelConfig {
  int asr_hidden = 32;  // F_a
  int nlu_hidden = 32;  // F_b
  int nlu_max_positions = 64;
  int subsample_stride = 1;
  SlotHead slot_head = SlotHead::kLinear;
  double label_smoothing = 0.1;
  // 2-Stage baseline: block gradient flow from the task heads into the ASR
  // branch at the concatenation point.
  bool stop_gradient_at_asr = false;
  FrontendConfig frontend;
};

// Parameters plus everything needed to interpret them.
struct ToyModel {
  ToyModelConfig config;
  SubwordVocab asr_vocab;
  SubwordVocab nlu_vocab;
  std::vector<std::string> tags;     // canonical BIO tags, "O" included
  std::vector<std::string> intents;
  ModelParams params;

  static ToyModel initialize(const ToyModelConfig& config, SubwordVocab asr_vocab, SubwordVocab nlu_vocab,
                             std::vector<std::string> tags, std::vector<std::string> intents, int feature_dim,
                             std::uint64_t seed);

  int feature_dim() const;
  // Output classes of the ASR decoder: every vocabulary piece plus end-of-sequence.
  int asr_classes() const { return static_cast<int>(asr_vocab.size()) + 1; }
  int asr_eos() const { return static_cast<int>(asr_vocab.size()); }
  int asr_bos() const { return static_cast<int>(asr_vocab.size()) + 1; }
  int tag_id(const std::string& tag) const;
  int intent_id(const std::string& intent) const;
  std::optional<CrfParams> crf() const;
};

// One utterance as the model sees it.
struct ModelInput {
  Eigen::MatrixXd features;  // T x D, before subsampling
  std::vector<int> asr_tokens;
  std::vector<int> nlu_tokens;
  Eigen::MatrixXd asr_alignment;  // M^a, N^a x N
  Eigen::MatrixXd nlu_alignment;  // M^b, N^b x N
};

struct ModelTargets {
  std::vector<int> slot_tags;
  int intent = 0;
};

// Tokenizes the (ground-truth) words with both vocabularies.
ModelInput make_input(const ToyModel& model, Eigen::MatrixXd features, std::span<const std::string> words);
ModelTargets make_targets(const ToyModel& model, std::span<const std::string> slots, const std::string& intent);

struct ForwardResult {
  Eigen::MatrixXd encoder;        // subsampled frames x F_a
  Eigen::MatrixXd ha;             // N^a x F_a
  Eigen::MatrixXd hb;             // N^b x F_b
  Eigen::MatrixXd hcat;           // N x (F_a + F_b)
  Eigen::MatrixXd asr_logits;     // (N^a + 1) x asr_classes, last row predicts end-of-sequence
  Eigen::MatrixXd slot_scores;    // N x tags
  Eigen::MatrixXd intent_logits;  // 1 x intents
};

// Teacher-forced forward pass on ground-truth tokens.
ForwardResult forward(const ToyModel& model, const ModelInput& input);

// Targets for the ASR logits: the input tokens followed by end-of-sequence.
std::vector<int> asr_targets(const ToyModel& model, const ModelInput& input);

// Mean label-smoothed token negative log-likelihood.
double loss_asr(const Eigen::MatrixXd& asr_logits, std::span<const int> targets, double label_smoothing);
// -(log P(S | Hcat) + log P(I | Hcat)). Per-token cross-entropy summed over
// positions, or the CRF sequence likelihood when `crf` is given.
double loss_nlu(const Eigen::MatrixXd& slot_scores, const Eigen::MatrixXd& intent_logits,
                std::span<const int> slot_tags, int intent, const CrfParams* crf = nullptr);
inline double loss_slu(double asr, double nlu) { return asr + nlu; }

struct LossBreakdown {
  double asr = 0.0;
  double nlu = 0.0;
  double slu = 0.0;
};

enum class LossSelection { kAsr, kNlu, kSlu };

LossBreakdown evaluate_loss(const ToyModel& model, const ModelInput& input, const ModelTargets& targets,
                            LossSelection selection = LossSelection::kSlu);

struct BackwardResult {
  LossBreakdown loss;
  Gradients grads;
};

// Exact reverse-mode gradients of the selected loss for every parameter.
BackwardResult backward(const ToyModel& model, const ModelInput& input, const ModelTargets& targets,
                        LossSelection selection = LossSelection::kSlu);

// Strided mean pooling over time; the last window may be short.
Eigen::MatrixXd subsample_features(const Eigen::MatrixXd& features, int stride);

// Interleaved [w1, s1, w2, s2, ...] form used by the serialized-output baseline.
struct SerializedSequence {
  std::vector<std::string> tokens;
};

SerializedSequence serialize_slots(std::span<const std::string> words, std::span<const std::string> slots);
std::pair<std::vector<std::string>, std::vector<std::string>> deserialize_slots(const SerializedSequence& seq);

}  // namespace slu
