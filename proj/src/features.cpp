#include "slu/features.hpp"

#include <cmath>
#include <numbers>

#include "slu/error.hpp"

namespace slu {

Eigen::MatrixXd compute_features(const AudioClip& clip, const FrontendConfig& config) {
  if (clip.samples.empty()) throw InputError("cannot compute features of an empty clip");
  const auto frame_len = static_cast<std::size_t>(std::lround(config.frame_ms * clip.sample_rate / 1000.0));
  const auto hop = static_cast<std::size_t>(std::lround(config.hop_ms * clip.sample_rate / 1000.0));
  const auto fft = static_cast<std::size_t>(config.fft_size);
  if (frame_len == 0 || hop == 0 || frame_len > fft || config.num_bands < 1 ||
      static_cast<std::size_t>(config.num_bands) > fft / 2)
    throw ValidationError("invalid front-end configuration");

  const std::size_t n = clip.samples.size();
  const std::size_t frames = n <= frame_len ? 1 : 1 + (n - frame_len) / hop;
  const std::size_t bins = fft / 2;
  const auto bands = static_cast<std::size_t>(config.num_bands);

  std::vector<double> window(frame_len);
  for (std::size_t i = 0; i < frame_len; ++i)
    window[i] = 0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(frame_len - 1 > 0 ? frame_len - 1 : 1));

  // Twiddles for bins 1..bins; the DC bin is skipped.
  std::vector<double> cos_table(bins * frame_len);
  std::vector<double> sin_table(bins * frame_len);
  for (std::size_t k = 0; k < bins; ++k)
    for (std::size_t i = 0; i < frame_len; ++i) {
      const double angle = 2.0 * std::numbers::pi * static_cast<double>((k + 1) * i) / static_cast<double>(fft);
      cos_table[k * frame_len + i] = std::cos(angle);
      sin_table[k * frame_len + i] = std::sin(angle);
    }

  Eigen::MatrixXd out(static_cast<Eigen::Index>(frames), static_cast<Eigen::Index>(bands));
  std::vector<double> frame(frame_len);
  for (std::size_t f = 0; f < frames; ++f) {
    for (std::size_t i = 0; i < frame_len; ++i) {
      const std::size_t at = f * hop + i;
      frame[i] = (at < n ? clip.samples[at] : 0.0) * window[i];
    }
    std::vector<double> energy(bands, 0.0);
    for (std::size_t k = 0; k < bins; ++k) {
      double re = 0.0, im = 0.0;
      const double* c = &cos_table[k * frame_len];
      const double* s = &sin_table[k * frame_len];
      for (std::size_t i = 0; i < frame_len; ++i) {
        re += frame[i] * c[i];
        im += frame[i] * s[i];
      }
      energy[k * bands / bins] += re * re + im * im;
    }
    for (std::size_t b = 0; b < bands; ++b)
      out(static_cast<Eigen::Index>(f), static_cast<Eigen::Index>(b)) = std::log(energy[b] + 1e-10);
  }
  out.rowwise() -= out.colwise().mean();
  return out;
}

}  // namespace slu
