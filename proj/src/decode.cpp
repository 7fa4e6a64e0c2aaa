#include "slu/decode.hpp"

#include <algorithm>
#include <cmath>

#include "model_graph.hpp"
#include "slu/error.hpp"

namespace slu {

namespace {

Eigen::RowVectorXd log_softmax(const Eigen::RowVectorXd& x) {
  const double mx = x.maxCoeff();
  const double lse = mx + std::log((x.array() - mx).exp().sum());
  return x.array() - lse;
}

// Incremental access to the ASR decoder. The decoder state at a position
// depends only on the previous token, the position and the encoder output.
class AsrStepper {
 public:
  AsrStepper(const ToyModel& model, const Eigen::MatrixXd& features)
      : model_(model), params_(detail::bind_params(tape_, model.params, false)) {
    encoder_ = detail::encode_audio(model, params_, tape_, features);
  }

  Eigen::RowVectorXd next_log_probs(int previous, int position) {
    const int ids[] = {previous};
    auto out = detail::run_decoder(model_, params_, tape_, encoder_, ids, position);
    return log_softmax(out.logits.value().row(0));
  }

 private:
  const ToyModel& model_;
  ad::Tape tape_;
  detail::ParamVars params_;
  ad::Var encoder_;
};

}  // namespace

std::vector<BeamHypothesis> beam_search(const ToyModel& model, const Eigen::MatrixXd& features,
                                        const BeamOptions& options) {
  if (options.beam_size < 1) throw ValidationError("beam size must be at least 1");
  if (options.max_len < 0) throw ValidationError("max_len must be non-negative");
  AsrStepper stepper(model, features);
  const int eos = model.asr_eos();
  const int classes = model.asr_classes();

  struct Candidate {
    std::size_t parent;
    int token;
    double score;
  };

  std::vector<BeamHypothesis> live = {{{}, 0.0}};
  std::vector<BeamHypothesis> finished;
  for (int step = 0; !live.empty(); ++step) {
    std::vector<Candidate> candidates;
    for (std::size_t h = 0; h < live.size(); ++h) {
      const int previous = live[h].tokens.empty() ? model.asr_bos() : live[h].tokens.back();
      const auto lp = stepper.next_log_probs(previous, step);
      for (int tok = 0; tok < classes; ++tok) {
        if (step == options.max_len && tok != eos) continue;
        candidates.push_back({h, tok, live[h].log_prob + lp(tok)});
      }
    }
    const auto keep = std::min(candidates.size(), static_cast<std::size_t>(options.beam_size));
    std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(keep), candidates.end(),
                      [](const Candidate& a, const Candidate& b) {
                        if (a.score != b.score) return a.score > b.score;
                        if (a.parent != b.parent) return a.parent < b.parent;
                        return a.token < b.token;
                      });
    std::vector<BeamHypothesis> next;
    for (std::size_t c = 0; c < keep; ++c) {
      const auto& cand = candidates[c];
      BeamHypothesis hyp{live[cand.parent].tokens, cand.score};
      if (cand.token == eos) {
        finished.push_back(std::move(hyp));
      } else {
        hyp.tokens.push_back(cand.token);
        next.push_back(std::move(hyp));
      }
    }
    live = std::move(next);
  }
  if (finished.empty()) throw DecodeError("beam search finished no hypothesis");
  std::stable_sort(finished.begin(), finished.end(),
                   [](const BeamHypothesis& a, const BeamHypothesis& b) { return a.log_prob > b.log_prob; });
  return finished;
}

BeamHypothesis greedy_search(const ToyModel& model, const Eigen::MatrixXd& features, int max_len) {
  AsrStepper stepper(model, features);
  BeamHypothesis hyp;
  for (int step = 0;; ++step) {
    const int previous = hyp.tokens.empty() ? model.asr_bos() : hyp.tokens.back();
    const auto lp = stepper.next_log_probs(previous, step);
    int best = model.asr_eos();
    if (step < max_len)
      for (int tok = 0; tok < model.asr_classes(); ++tok)
        if (lp(tok) > lp(best) || (lp(tok) == lp(best) && tok < best)) best = tok;
    hyp.log_prob += lp(best);
    if (best == model.asr_eos()) return hyp;
    hyp.tokens.push_back(best);
  }
}

double sequence_log_prob(const ToyModel& model, const Eigen::MatrixXd& features, const std::vector<int>& tokens) {
  ad::Tape tape;
  auto p = detail::bind_params(tape, model.params, false);
  auto encoder = detail::encode_audio(model, p, tape, features);
  std::vector<int> inputs = {model.asr_bos()};
  inputs.insert(inputs.end(), tokens.begin(), tokens.end());
  auto dec = detail::run_decoder(model, p, tape, encoder, inputs, 0);
  const auto& logits = dec.logits.value();
  double total = 0.0;
  for (Eigen::Index r = 0; r < logits.rows(); ++r) {
    const int target = static_cast<std::size_t>(r) < tokens.size() ? tokens[static_cast<std::size_t>(r)] : model.asr_eos();
    total += log_softmax(logits.row(r))(target);
  }
  return total;
}

SemanticPrediction predict_semantics(const ToyModel& model, const Eigen::MatrixXd& features,
                                     const std::vector<int>& asr_tokens) {
  std::vector<std::string> pieces;
  for (int id : asr_tokens) pieces.push_back(model.asr_vocab.piece(id));
  const auto segmented = segment_tokens(pieces, model.asr_vocab);

  SemanticPrediction out;
  out.words = detokenize(pieces, model.asr_vocab);
  const auto text = tokenize(out.words, model.nlu_vocab);

  ModelInput input;
  input.features = features;
  input.asr_tokens = asr_tokens;
  for (const auto& t : text.tokens) input.nlu_tokens.push_back(model.nlu_vocab.id(t).value_or(model.nlu_vocab.unk_id()));
  input.asr_alignment = segmented.first_index_matrix;
  input.nlu_alignment = text.first_index_matrix;
  const auto fwd = forward(model, input);

  Eigen::Index intent = 0;
  fwd.intent_logits.row(0).maxCoeff(&intent);
  out.intent = model.intents[static_cast<std::size_t>(intent)];

  if (!out.words.empty()) {
    std::vector<int> path;
    if (auto crf = model.crf()) {
      path = crf_viterbi(fwd.slot_scores, *crf);
    } else {
      for (Eigen::Index r = 0; r < fwd.slot_scores.rows(); ++r) {
        Eigen::Index best = 0;
        fwd.slot_scores.row(r).maxCoeff(&best);
        path.push_back(static_cast<int>(best));
      }
    }
    for (int t : path) out.slots.push_back(model.tags[static_cast<std::size_t>(t)]);
  }
  return out;
}

DecodeResult decode_two_step(const ToyModel& model, const Eigen::MatrixXd& features, const BeamOptions& options) {
  const auto beams = beam_search(model, features, options);
  const auto& best = beams.front();
  auto sem = predict_semantics(model, features, best.tokens);
  DecodeResult r;
  for (int id : best.tokens) r.asr_tokens.push_back(model.asr_vocab.piece(id));
  r.words = std::move(sem.words);
  r.slots = std::move(sem.slots);
  r.intent = std::move(sem.intent);
  r.asr_log_prob = best.log_prob;
  return r;
}

}  // namespace slu
