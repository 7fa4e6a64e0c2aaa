#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace slu {

inline constexpr int kCorpusSampleRate = 16000;

struct AudioClip {
  std::vector<double> samples;  // mono, nominally in [-1, 1]
  int sample_rate = kCorpusSampleRate;
};

// 16-bit PCM mono only; amplitudes are scaled by 1/32768. Anything else is a
// FormatError.
AudioClip read_wav(const std::filesystem::path& path);
AudioClip decode_wav(std::span<const std::uint8_t> bytes);
void write_wav(const AudioClip& clip, const std::filesystem::path& path);
std::vector<std::uint8_t> encode_wav(const AudioClip& clip);

double rms(std::span<const double> samples);
inline double rms(const AudioClip& clip) { return rms(clip.samples); }

// 20 log10(rms(signal) / rms(noise)).
double measured_snr_db(std::span<const double> signal, std::span<const double> noise);

// The noise laid out over `length` samples: read from `offset`, wrapping
// around to the start whenever it runs out.
std::vector<double> fit_noise(std::span<const double> noise, std::size_t length, std::size_t offset = 0);

struct MixResult {
  AudioClip mixed;
  double gain = 0.0;
  std::size_t clipped_samples = 0;
};

// clean + g * fitted_noise with g chosen so that the clean-to-scaled-noise
// RMS ratio is snr_db. Samples outside [-1, 1] are hard-clipped and counted.
MixResult mix_at_snr(const AudioClip& clean, const AudioClip& noise, double snr_db, std::size_t noise_offset = 0);

}  // namespace slu
