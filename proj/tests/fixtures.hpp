// Small models and random instances shared by the model tests and the
// acceptance suite.
#pragma once

#include <random>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "slu/model.hpp"

namespace fixture {

inline const std::string kB = "\xE2\x96\x81";

inline slu::SubwordVocab tiny_asr_vocab() {
  return slu::SubwordVocab(slu::VocabKind::kBpeStyle, {"<unk>", kB + "a", kB + "b", kB + "ab", "c", "b", kB + "c"},
                           "<unk>");
}

inline slu::SubwordVocab tiny_nlu_vocab() {
  return slu::SubwordVocab(slu::VocabKind::kWordpieceStyle, {"[UNK]", "a", "b", "##b", "c", "##c", "abc"}, "[UNK]");
}

inline const std::vector<std::string>& tiny_words() {
  static const std::vector<std::string> w = {"a", "b", "ab", "abc", "c", "bc", "cab"};
  return w;
}

inline const std::vector<std::string>& tiny_tags() {
  static const std::vector<std::string> t = {"O", "B-x", "I-x", "B-y"};
  return t;
}

inline slu::ToyModel tiny_model(std::uint64_t seed, slu::SlotHead head = slu::SlotHead::kLinear,
                                bool stop_gradient = false, int feature_dim = 3) {
  slu::ToyModelConfig c;
  c.asr_hidden = 4;
  c.nlu_hidden = 3;
  c.nlu_max_positions = 16;
  c.slot_head = head;
  c.stop_gradient_at_asr = stop_gradient;
  return slu::ToyModel::initialize(c, tiny_asr_vocab(), tiny_nlu_vocab(), tiny_tags(), {"p", "q", "r"}, feature_dim,
                                   seed);
}

struct Instance {
  slu::ModelInput input;
  slu::ModelTargets targets;
};

inline Instance random_instance(const slu::ToyModel& model, std::mt19937_64& g) {
  std::vector<std::string> words(static_cast<std::size_t>(oracle::randint(g, 1, 4)));
  std::vector<std::string> slots;
  for (auto& w : words) {
    w = tiny_words()[static_cast<std::size_t>(oracle::randint(g, 0, static_cast<int>(tiny_words().size()) - 1))];
    slots.push_back(tiny_tags()[static_cast<std::size_t>(oracle::randint(g, 0, 3))]);
  }
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::MatrixXd features(oracle::randint(g, 3, 7), model.feature_dim());
  for (Eigen::Index i = 0; i < features.size(); ++i) features.data()[i] = n(g);
  const std::string intent = model.intents[static_cast<std::size_t>(oracle::randint(g, 0, 2))];
  return {slu::make_input(model, features, words), slu::make_targets(model, slots, intent)};
}

// Randomizes every parameter so zero-initialized biases and CRF scores are
// exercised too.
inline void jitter(slu::ToyModel& model, std::mt19937_64& g, double scale = 0.5) {
  std::normal_distribution<double> n(0.0, scale);
  for (auto& p : model.params.all())
    for (Eigen::Index i = 0; i < p.value.size(); ++i) p.value.data()[i] += n(g);
}

struct BlockCheck {
  slu::ParamBlock block;
  double relative_error = 0.0;
  double analytic_norm = 0.0;
};

// Central differences for every entry of every parameter, compared per block
// as ||analytic - numeric|| / max(||analytic||, ||numeric||).
inline std::vector<BlockCheck> gradient_check(const slu::ToyModel& model, const slu::ModelInput& input,
                                              const slu::ModelTargets& targets, slu::LossSelection sel,
                                              double h = 1e-4) {
  const auto analytic = slu::backward(model, input, targets, sel).grads;
  auto probe = model;
  auto value_of = [&](const slu::LossBreakdown& l) {
    return sel == slu::LossSelection::kAsr ? l.asr : sel == slu::LossSelection::kNlu ? l.nlu : l.slu;
  };
  std::vector<BlockCheck> out;
  for (auto block : {slu::ParamBlock::kAsr, slu::ParamBlock::kNluEncoder, slu::ParamBlock::kIcHead,
                     slu::ParamBlock::kSlHead}) {
    double diff2 = 0, a2 = 0, n2 = 0;
    for (std::size_t k = 0; k < probe.params.all().size(); ++k) {
      auto& p = probe.params.all()[k];
      if (p.block != block) continue;
      const auto& ga = analytic.at(p.name);
      for (Eigen::Index i = 0; i < p.value.size(); ++i) {
        const double keep = p.value.data()[i];
        p.value.data()[i] = keep + h;
        const double up = value_of(slu::evaluate_loss(probe, input, targets, sel));
        p.value.data()[i] = keep - h;
        const double down = value_of(slu::evaluate_loss(probe, input, targets, sel));
        p.value.data()[i] = keep;
        const double num = (up - down) / (2 * h);
        const double a = ga.data()[i];
        diff2 += (a - num) * (a - num);
        a2 += a * a;
        n2 += num * num;
      }
    }
    const double denom = std::max({std::sqrt(a2), std::sqrt(n2), 1e-12});
    out.push_back({block, std::sqrt(diff2) / denom, std::sqrt(a2)});
  }
  return out;
}

}  // namespace fixture
