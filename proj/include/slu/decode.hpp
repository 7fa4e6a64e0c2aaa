#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

#include "slu/model.hpp"

namespace slu {

struct BeamOptions {
  int beam_size = 5;
  // Longest transcript, in ASR tokens, before end-of-sequence is forced.
  int max_len = 32;
};

struct BeamHypothesis {
  std::vector<int> tokens;  // ASR piece ids, end-of-sequence excluded
  double log_prob = 0.0;    // end-of-sequence included
};

// Finished hypotheses, best first. Each step keeps the beam_size best
// expansions over all live hypotheses; expansions that emit end-of-sequence
// leave the beam. Ties go to the earlier hypothesis, then the lower token id.
std::vector<BeamHypothesis> beam_search(const ToyModel& model, const Eigen::MatrixXd& features,
                                        const BeamOptions& options);

// Argmax at every step until end-of-sequence or max_len.
BeamHypothesis greedy_search(const ToyModel& model, const Eigen::MatrixXd& features, int max_len);

// Teacher-forced log P(tokens, end-of-sequence | features).
double sequence_log_prob(const ToyModel& model, const Eigen::MatrixXd& features, const std::vector<int>& tokens);

struct SemanticPrediction {
  std::vector<std::string> words;
  std::vector<std::string> slots;
  std::string intent;
};

// Second decoding step: slots and intent from the audio plus a fixed
// transcript given as ASR piece ids.
SemanticPrediction predict_semantics(const ToyModel& model, const Eigen::MatrixXd& features,
                                     const std::vector<int>& asr_tokens);

struct DecodeResult {
  std::vector<std::string> asr_tokens;
  std::vector<std::string> words;
  std::vector<std::string> slots;
  std::string intent;
  double asr_log_prob = 0.0;
};

// Transcript first (top-1 of the beam), then intent and slots conditioned on
// that transcript and the same features.
DecodeResult decode_two_step(const ToyModel& model, const Eigen::MatrixXd& features, const BeamOptions& options);

}  // namespace slu
