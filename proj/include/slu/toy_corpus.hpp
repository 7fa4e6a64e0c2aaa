#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "slu/audio.hpp"
#include "slu/manifest.hpp"
#include "slu/pipeline.hpp"
#include "slu/tokenizer.hpp"

namespace slu {

// A small flight-domain corpus with synthetic audio: every word is rendered
// as a fixed pair of tones, so the ASR branch has something learnable.
struct ToyCorpus {
  Manifest manifest;  // records carry inline samples and audio paths audio/<id>.wav
  SubwordVocab asr_vocab;
  SubwordVocab nlu_vocab;
};

struct ToyCorpusOptions {
  int utterances = 50;
  std::uint64_t seed = 3;
  double word_seconds = 0.12;
};

ToyCorpus make_toy_corpus(const ToyCorpusOptions& options = {});

// Synthetic noise clips (colored noise and hums) named by kind and index.
std::vector<std::pair<std::string, AudioClip>> make_toy_noises(int count, std::uint64_t seed, double seconds = 0.5);

// Staged training setup that fits the toy corpus. Vocabulary paths are
// "asr.vocab" and "nlu.vocab", relative to wherever the config is written.
ToyRunConfig default_toy_run_config();

}  // namespace slu
