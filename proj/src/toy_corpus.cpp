#include "slu/toy_corpus.hpp"

#include <array>
#include <cmath>
#include <cstdio>
#include <map>
#include <numbers>
#include <random>

#include "slu/random.hpp"

namespace slu {

namespace {

struct Template {
  const char* intent;
  std::vector<std::string> words;  // "{A}" from-city, "{B}" to-city, "{D}" day, "{L}" airline
  std::vector<std::string> slots;
};

const std::vector<Template>& templates() {
  static const std::vector<Template> t = {
      {"flight", {"show", "flights", "from", "{A}", "to", "{B}"}, {"O", "O", "O", "fromloc", "O", "toloc"}},
      {"flight", {"flights", "to", "{B}", "on", "{D}"}, {"O", "O", "toloc", "O", "depart_date"}},
      {"flight", {"{L}", "flights", "from", "{A}", "to", "{B}"}, {"airline", "O", "O", "fromloc", "O", "toloc"}},
      {"airfare", {"cheapest", "fare", "from", "{A}", "to", "{B}"}, {"O", "O", "O", "fromloc", "O", "toloc"}},
      {"airfare", {"how", "much", "is", "{L}", "fare", "to", "{B}"}, {"O", "O", "O", "airline", "O", "O", "toloc"}},
      {"ground_service", {"ground", "transportation", "in", "{B}"}, {"O", "O", "O", "toloc"}},
      {"ground_service", {"car", "rental", "in", "{B}", "on", "{D}"}, {"O", "O", "O", "toloc", "O", "depart_date"}},
  };
  return t;
}

const std::vector<std::vector<std::string>> kCities = {{"boston"}, {"denver"},  {"dallas"},
                                                       {"atlanta"}, {"seattle"}, {"new", "york"}};
const std::vector<std::string> kDays = {"monday", "friday", "sunday"};
const std::vector<std::string> kAirlines = {"delta", "united"};

const std::vector<std::string>& lexicon() {
  static const std::vector<std::string> words = {
      "show",   "flights", "from",    "to",      "on",     "cheapest", "fare",   "how",    "much",
      "is",     "ground",  "transportation", "in", "car", "rental",   "boston", "denver", "dallas",
      "atlanta", "seattle", "new",    "york",    "monday", "friday",   "sunday", "delta",  "united"};
  return words;
}

const std::vector<std::string> kAsrPieces = {
    "<unk>", "\xE2\x96\x81show", "\xE2\x96\x81" "flight", "s", "\xE2\x96\x81" "from", "\xE2\x96\x81to",
    "\xE2\x96\x81on", "\xE2\x96\x81" "cheap", "est", "\xE2\x96\x81" "fare", "\xE2\x96\x81how", "\xE2\x96\x81much",
    "\xE2\x96\x81is", "\xE2\x96\x81ground", "\xE2\x96\x81trans", "portation", "\xE2\x96\x81in", "\xE2\x96\x81" "car",
    "\xE2\x96\x81rental", "\xE2\x96\x81" "boston", "\xE2\x96\x81" "denver", "\xE2\x96\x81" "dallas",
    "\xE2\x96\x81" "atlanta", "\xE2\x96\x81sea", "ttle", "\xE2\x96\x81new", "\xE2\x96\x81york", "\xE2\x96\x81monday",
    "\xE2\x96\x81" "friday", "\xE2\x96\x81sun", "day", "\xE2\x96\x81" "delta", "\xE2\x96\x81united"};

const std::vector<std::string> kNluPieces = {
    "[UNK]", "show", "flights", "from", "to", "on", "cheap", "##est", "fare", "how", "much", "is", "ground",
    "transport", "##ation", "in", "car", "rent", "##al", "boston", "den", "##ver", "dallas", "at", "##lanta",
    "seattle", "new", "york", "monday", "friday", "sunday", "delta", "united"};

// Band index pairs (of 16 bands over 0-8 kHz) giving every word its own chord.
std::pair<int, int> tone_bands(std::size_t word_index) {
  std::vector<std::pair<int, int>> pairs;
  for (int gap = 3; gap < 16 && pairs.size() <= word_index; ++gap)
    for (int lo = 1; lo + gap < 16 && pairs.size() <= word_index; ++lo) pairs.emplace_back(lo, lo + gap);
  return pairs[word_index];
}

void render_word(std::vector<double>& out, std::size_t word_index, double seconds, std::mt19937_64& rng) {
  const auto [lo, hi] = tone_bands(word_index);
  const double f1 = 250.0 + 500.0 * lo;
  const double f2 = 250.0 + 500.0 * hi;
  const auto n = static_cast<std::size_t>(seconds * kCorpusSampleRate);
  const std::size_t fade = kCorpusSampleRate / 200;
  const double phase = 2.0 * std::numbers::pi * uniform_unit(rng);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / kCorpusSampleRate;
    double env = 1.0;
    if (i < fade) env = static_cast<double>(i) / fade;
    if (n - i < fade) env = static_cast<double>(n - i) / fade;
    out.push_back(env * 0.25 * (std::sin(2.0 * std::numbers::pi * f1 * t + phase) + std::sin(2.0 * std::numbers::pi * f2 * t)));
  }
}

void render_silence(std::vector<double>& out, double seconds, std::mt19937_64& rng) {
  const auto n = static_cast<std::size_t>(seconds * kCorpusSampleRate);
  for (std::size_t i = 0; i < n; ++i) out.push_back(0.002 * (uniform_unit(rng) - 0.5));
}

}  // namespace

ToyCorpus make_toy_corpus(const ToyCorpusOptions& options) {
  std::mt19937_64 rng(splitmix64(options.seed));
  std::map<std::string, std::size_t> word_index;
  for (std::size_t i = 0; i < lexicon().size(); ++i) word_index[lexicon()[i]] = i;

  std::vector<Utterance> records;
  for (int n = 0; n < options.utterances; ++n) {
    const auto& tpl = templates()[uniform_below(rng, templates().size())];
    const auto from = uniform_below(rng, kCities.size());
    auto to = uniform_below(rng, kCities.size() - 1);
    if (to >= from) ++to;  // from != to
    const auto& day = kDays[uniform_below(rng, kDays.size())];
    const auto& airline = kAirlines[uniform_below(rng, kAirlines.size())];

    Utterance u;
    char id[32];
    std::snprintf(id, sizeof id, "toy%04d", n + 1);
    u.id = id;
    u.intent = tpl.intent;
    u.audio_path = "audio/" + u.id + ".wav";
    for (std::size_t k = 0; k < tpl.words.size(); ++k) {
      const auto& w = tpl.words[k];
      const auto& label = tpl.slots[k];
      auto emit = [&u](const std::vector<std::string>& ws, const std::string& lab) {
        for (std::size_t i = 0; i < ws.size(); ++i) {
          u.words.push_back(ws[i]);
          u.slots.push_back(lab == "O" ? "O" : (i == 0 ? "B-" : "I-") + lab);
        }
      };
      if (w == "{A}") {
        emit(kCities[from], label);
      } else if (w == "{B}") {
        emit(kCities[to], label);
      } else if (w == "{D}") {
        emit({day}, label);
      } else if (w == "{L}") {
        emit({airline}, label);
      } else {
        emit({w}, label);
      }
    }

    std::vector<double> samples;
    render_silence(samples, 0.05, rng);
    for (const auto& w : u.words) render_word(samples, word_index.at(w), options.word_seconds, rng);
    render_silence(samples, 0.05, rng);
    u.samples = std::move(samples);
    records.push_back(std::move(u));
  }

  return {make_manifest(std::move(records)), SubwordVocab(VocabKind::kBpeStyle, kAsrPieces, "<unk>"),
          SubwordVocab(VocabKind::kWordpieceStyle, kNluPieces, "[UNK]")};
}

std::vector<std::pair<std::string, AudioClip>> make_toy_noises(int count, std::uint64_t seed, double seconds) {
  static const std::array<const char*, 4> kinds = {"white", "brown", "hum", "chirp"};
  std::vector<std::pair<std::string, AudioClip>> out;
  for (int i = 0; i < count; ++i) {
    std::mt19937_64 rng(splitmix64(seed + static_cast<std::uint64_t>(i)));
    const char* kind = kinds[static_cast<std::size_t>(i) % kinds.size()];
    AudioClip clip;
    const auto n = static_cast<std::size_t>(seconds * kCorpusSampleRate);
    double state = 0.0;
    const double base = 50.0 + 20.0 * static_cast<double>(uniform_below(rng, 10));
    for (std::size_t k = 0; k < n; ++k) {
      const double t = static_cast<double>(k) / kCorpusSampleRate;
      const double white = 2.0 * uniform_unit(rng) - 1.0;
      double x = 0.0;
      switch (static_cast<std::size_t>(i) % kinds.size()) {
        case 0: x = 0.3 * white; break;
        case 1: state = 0.98 * state + 0.05 * white; x = state; break;
        case 2: x = 0.2 * std::sin(2 * std::numbers::pi * base * t) + 0.1 * std::sin(2 * std::numbers::pi * 3 * base * t); break;
        default: x = 0.2 * std::sin(2 * std::numbers::pi * (base + 2000.0 * t) * t); break;
      }
      clip.samples.push_back(x);
    }
    char name[64];
    std::snprintf(name, sizeof name, "%s_%02d.wav", kind, i);
    out.emplace_back(name, std::move(clip));
  }
  return out;
}

ToyRunConfig default_toy_run_config() {
  ToyRunConfig c;
  c.model.asr_hidden = 32;
  c.model.nlu_hidden = 32;
  c.model.subsample_stride = 2;
  c.train.seed = 7;
  c.train.stages = {{Stage::kAsrPretrain, 0, 0.02}, {Stage::kAsrFinetune, 40, 0.02}, {Stage::kJointFinetune, 60, 0.02}};
  c.asr_vocab = "asr.vocab";
  c.nlu_vocab = "nlu.vocab";
  c.checkpoint = "model.json";
  return c;
}

}  // namespace slu
