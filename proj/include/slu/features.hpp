#pragma once

#include <Eigen/Core>

#include "slu/audio.hpp"

namespace slu {

struct FrontendConfig {
  double frame_ms = 25.0;
  double hop_ms = 10.0;
  int num_bands = 16;
  int fft_size = 512;
};

// Log band energies, one row per frame, with per-utterance mean
// normalization of every band. A stand-in for a filterbank front-end.
Eigen::MatrixXd compute_features(const AudioClip& clip, const FrontendConfig& config = {});

}  // namespace slu
