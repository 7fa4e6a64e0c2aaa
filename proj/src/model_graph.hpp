#pragma once

// Graph-building pieces shared by training and decoding.

#include <span>
#include <string_view>
#include <vector>

#include "slu/autodiff.hpp"
#include "slu/model.hpp"

namespace slu::detail {

struct ParamVars {
  const ModelParams* params = nullptr;
  std::vector<ad::Var> vars;

  ad::Var operator[](std::string_view name) const;
};

// Puts every parameter on the tape, as variables or as constants.
ParamVars bind_params(ad::Tape& tape, const ModelParams& params, bool trainable);

// Fixed sinusoidal position table for positions offset..offset+rows-1.
Eigen::MatrixXd sinusoid(Eigen::Index rows, Eigen::Index dim, Eigen::Index offset = 0);

// Subsampling, projection and tanh over the frames. frames x F_a.
ad::Var encode_audio(const ToyModel& model, const ParamVars& p, ad::Tape& tape, const Eigen::MatrixXd& features);

struct DecoderOut {
  ad::Var hidden;  // rows x F_a
  ad::Var logits;  // rows x asr_classes
};

// Attention decoder; row r consumes input_ids[r] at position first_position + r
// and scores the token that follows it.
DecoderOut run_decoder(const ToyModel& model, const ParamVars& p, ad::Tape& tape, ad::Var encoder,
                       std::span<const int> input_ids, Eigen::Index first_position);

// Embedding plus one self-attention layer. N^b x F_b.
ad::Var encode_text(const ToyModel& model, const ParamVars& p, std::span<const int> nlu_ids);

struct HeadsOut {
  ad::Var hcat;
  ad::Var slot_scores;
  ad::Var intent_logits;
};

HeadsOut run_heads(const ToyModel& model, const ParamVars& p, ad::Tape& tape, ad::Var ha, ad::Var hb,
                   const Eigen::MatrixXd& asr_alignment, const Eigen::MatrixXd& nlu_alignment);

struct FullGraph {
  ad::Var encoder;
  ad::Var ha;
  ad::Var asr_logits;
  bool has_nlu = false;
  ad::Var hb;
  HeadsOut heads;
};

FullGraph build_graph(const ToyModel& model, const ParamVars& p, ad::Tape& tape, const ModelInput& input,
                      bool with_nlu);

ad::Var slot_loss(const ToyModel& model, const ParamVars& p, ad::Var slot_scores, std::span<const int> tags);

}  // namespace slu::detail
