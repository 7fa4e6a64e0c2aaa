#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "slu/audio.hpp"
#include "slu/manifest.hpp"

namespace slu {

struct NoiseFile {
  std::string name;  // stable identifier, e.g. "train/babble_01.wav"
  AudioClip clip;
};

enum class NoiseSplit { kTrain, kTest };

NoiseSplit parse_noise_split(const std::string& name);
const char* noise_split_name(NoiseSplit split);

// Train and test noise sets. Construction fails when they share a file.
class NoisePool {
 public:
  NoisePool(std::vector<NoiseFile> train, std::vector<NoiseFile> test);

  // Loads <dir>/train/*.wav and <dir>/test/*.wav in filename order.
  static NoisePool from_directory(const std::filesystem::path& dir);

  const std::vector<NoiseFile>& split(NoiseSplit s) const { return s == NoiseSplit::kTrain ? train_ : test_; }

 private:
  std::vector<NoiseFile> train_;
  std::vector<NoiseFile> test_;
};

inline const std::vector<double> kDefaultSnrLevelsDb = {0.0, 10.0, 20.0, 30.0, 40.0};

struct AugmentSpec {
  std::vector<double> snr_levels_db = kDefaultSnrLevelsDb;
  int noises_per_clip = 5;
  std::uint64_t seed = 17;
  bool random_offset = false;
};

struct AugmentProvenance {
  std::string id;
  std::string source_id;
  std::string noise_file;
  double snr_db = 0.0;
  double gain = 0.0;
  std::size_t offset = 0;
  std::size_t clipped_samples = 0;
};

struct AugmentResult {
  Manifest manifest;  // records carry samples, audio_path unset
  std::vector<AugmentProvenance> provenance;
};

// "{id}#snr{level}" with the level printed in shortest form.
std::string augmented_id(const std::string& source_id, double snr_db);

// Per-record seed derived from (seed, record id) so records can be processed
// in any order or in parallel.
std::uint64_t record_seed(std::uint64_t seed, const std::string& id);

// For each record, draws noises_per_clip distinct noise files from the
// split, pairs the k-th draw with snr_levels_db[k] and mixes. Output size is
// noises_per_clip times the input size. `jobs` > 1 mixes records in parallel
// without changing the result.
AugmentResult augment_corpus(const Manifest& manifest, const NoisePool& pool, const AugmentSpec& spec,
                             NoiseSplit split, int jobs = 1);

struct MaskSpec {
  int time_masks = 0;
  int freq_masks = 0;
  int max_time_width = 0;
  int max_freq_width = 0;
  // Use exactly the max width instead of drawing it from [0, max].
  bool fixed_width = false;
  std::uint64_t seed = 0;
};

// SpecAugment-style masking: contiguous time and feature ranges are set to
// the utterance mean.
Eigen::MatrixXd mask_features(const Eigen::MatrixXd& features, const MaskSpec& spec);

}  // namespace slu
