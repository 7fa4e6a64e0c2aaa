// slu-toy-corpus: writes the synthetic flight-domain corpus used by the
// end-to-end smoke test, with vocabularies, a run config and noise files.

#include <CLI11.hpp>
#include <json.hpp>

#include <iostream>

#include "slu/audio.hpp"
#include "slu/io.hpp"
#include "slu/manifest.hpp"
#include "slu/toy_corpus.hpp"

namespace fs = std::filesystem;

int main(int argc, char** argv) {
  CLI::App app{"Generate the synthetic toy SLU corpus"};
  std::string out;
  slu::ToyCorpusOptions options;
  int train_noises = 8;
  int test_noises = 8;
  app.add_option("--out", out, "Output directory")->required();
  app.add_option("--utterances", options.utterances, "Number of utterances")->capture_default_str();
  app.add_option("--seed", options.seed, "Random seed")->capture_default_str();
  app.add_option("--train-noises", train_noises, "Noise files in noise/train")->capture_default_str();
  app.add_option("--test-noises", test_noises, "Noise files in noise/test")->capture_default_str();
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    const fs::path dir(out);
    fs::create_directories(dir / "audio");
    fs::create_directories(dir / "noise" / "train");
    fs::create_directories(dir / "noise" / "test");

    auto corpus = slu::make_toy_corpus(options);
    for (auto& u : corpus.manifest.records) {
      slu::write_wav(slu::AudioClip{*u.samples, slu::kCorpusSampleRate}, dir / *u.audio_path);
      u.samples.reset();
    }
    slu::atomic_write(dir / "manifest.jsonl", [&](std::ostream& os) { slu::write_manifest(corpus.manifest, os); });
    slu::atomic_write(dir / "asr.vocab", [&](std::ostream& os) { corpus.asr_vocab.write(os); });
    slu::atomic_write(dir / "nlu.vocab", [&](std::ostream& os) { corpus.nlu_vocab.write(os); });
    slu::atomic_write(dir / "config.json", slu::run_config_to_json(slu::default_toy_run_config()).dump(2) + "\n");

    // Different seeds for the two splits so no clip appears in both.
    for (const auto& [name, clip] : slu::make_toy_noises(train_noises, options.seed * 2 + 1))
      slu::write_wav(clip, dir / "noise" / "train" / name);
    for (const auto& [name, clip] : slu::make_toy_noises(test_noises, options.seed * 2 + 2))
      slu::write_wav(clip, dir / "noise" / "test" / name);

    std::cout << nlohmann::json{{"out", out}, {"utterances", corpus.manifest.records.size()}}.dump() << '\n';
  } catch (const std::exception& e) {
    std::cerr << "slu-toy-corpus: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
