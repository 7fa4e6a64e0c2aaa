#include "slu/audio.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include "slu/error.hpp"
#include "slu/io.hpp"

namespace slu {

namespace {

std::uint32_t read_u32(std::span<const std::uint8_t> b, std::size_t at) {
  return static_cast<std::uint32_t>(b[at]) | static_cast<std::uint32_t>(b[at + 1]) << 8 |
         static_cast<std::uint32_t>(b[at + 2]) << 16 | static_cast<std::uint32_t>(b[at + 3]) << 24;
}

std::uint16_t read_u16(std::span<const std::uint8_t> b, std::size_t at) {
  return static_cast<std::uint16_t>(b[at] | b[at + 1] << 8);
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

bool tag_is(std::span<const std::uint8_t> b, std::size_t at, const char* tag) {
  return std::memcmp(b.data() + at, tag, 4) == 0;
}

}  // namespace

AudioClip decode_wav(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 12 || !tag_is(bytes, 0, "RIFF") || !tag_is(bytes, 8, "WAVE"))
    throw FormatError("not a RIFF/WAVE file");

  bool have_fmt = false;
  AudioClip clip;
  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const std::uint32_t size = read_u32(bytes, pos + 4);
    const std::size_t body = pos + 8;
    if (body + size > bytes.size()) throw FormatError("truncated WAV chunk");
    if (tag_is(bytes, pos, "fmt ")) {
      if (size < 16) throw FormatError("fmt chunk too short");
      const auto format = read_u16(bytes, body);
      const auto channels = read_u16(bytes, body + 2);
      const auto bits = read_u16(bytes, body + 14);
      if (format != 1) throw FormatError("only PCM WAV is supported (format tag " + std::to_string(format) + ")");
      if (channels != 1) throw FormatError("only mono WAV is supported (" + std::to_string(channels) + " channels)");
      if (bits != 16) throw FormatError("only 16-bit WAV is supported (" + std::to_string(bits) + " bits)");
      clip.sample_rate = static_cast<int>(read_u32(bytes, body + 4));
      have_fmt = true;
    } else if (tag_is(bytes, pos, "data")) {
      if (!have_fmt) throw FormatError("data chunk before fmt chunk");
      if (size < 2) throw FormatError("empty data chunk");
      clip.samples.resize(size / 2);
      for (std::size_t i = 0; i < clip.samples.size(); ++i)
        clip.samples[i] = static_cast<std::int16_t>(read_u16(bytes, body + 2 * i)) / 32768.0;
      return clip;
    }
    pos = body + size + (size & 1);
  }
  throw FormatError(have_fmt ? "missing data chunk" : "missing fmt chunk");
}

AudioClip read_wav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  try {
    return decode_wav(bytes);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

std::vector<std::uint8_t> encode_wav(const AudioClip& clip) {
  if (clip.samples.empty()) throw FormatError("cannot write an empty clip");
  const auto data_bytes = static_cast<std::uint32_t>(clip.samples.size() * 2);
  std::vector<std::uint8_t> out;
  out.reserve(44 + data_bytes);
  out.insert(out.end(), {'R', 'I', 'F', 'F'});
  put_u32(out, 36 + data_bytes);
  out.insert(out.end(), {'W', 'A', 'V', 'E', 'f', 'm', 't', ' '});
  put_u32(out, 16);
  put_u16(out, 1);
  put_u16(out, 1);
  put_u32(out, static_cast<std::uint32_t>(clip.sample_rate));
  put_u32(out, static_cast<std::uint32_t>(clip.sample_rate) * 2);
  put_u16(out, 2);
  put_u16(out, 16);
  out.insert(out.end(), {'d', 'a', 't', 'a'});
  put_u32(out, data_bytes);
  for (double x : clip.samples) {
    const double q = std::clamp(std::round(x * 32768.0), -32768.0, 32767.0);
    put_u16(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(q)));
  }
  return out;
}

void write_wav(const AudioClip& clip, const std::filesystem::path& path) {
  const auto bytes = encode_wav(clip);
  atomic_write(path, [&bytes](std::ostream& out) {
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  });
}

double rms(std::span<const double> samples) {
  if (samples.empty()) throw InputError("RMS of an empty signal");
  double sum = 0.0;
  for (double x : samples) sum += x * x;
  return std::sqrt(sum / static_cast<double>(samples.size()));
}

double measured_snr_db(std::span<const double> signal, std::span<const double> noise) {
  return 20.0 * std::log10(rms(signal) / rms(noise));
}

std::vector<double> fit_noise(std::span<const double> noise, std::size_t length, std::size_t offset) {
  if (noise.empty()) throw InputError("empty noise clip");
  std::vector<double> out(length);
  std::size_t src = offset % noise.size();
  for (std::size_t i = 0; i < length; ++i) {
    out[i] = noise[src];
    if (++src == noise.size()) src = 0;
  }
  return out;
}

MixResult mix_at_snr(const AudioClip& clean, const AudioClip& noise, double snr_db, std::size_t noise_offset) {
  if (clean.sample_rate != noise.sample_rate)
    throw InputError("sample rate mismatch: clean " + std::to_string(clean.sample_rate) + " Hz, noise " +
                     std::to_string(noise.sample_rate) + " Hz");
  const double clean_rms = rms(clean);
  if (clean_rms == 0.0) throw InputError("clean signal is silent; SNR is undefined");
  const auto fitted = fit_noise(noise.samples, clean.samples.size(), noise_offset);
  const double noise_rms = rms(fitted);
  if (noise_rms == 0.0) throw InputError("noise signal is silent; SNR is undefined");

  MixResult r;
  r.gain = clean_rms / (noise_rms * std::pow(10.0, snr_db / 20.0));
  r.mixed.sample_rate = clean.sample_rate;
  r.mixed.samples.resize(clean.samples.size());
  for (std::size_t i = 0; i < fitted.size(); ++i) {
    double x = clean.samples[i] + r.gain * fitted[i];
    if (x > 1.0 || x < -1.0) {
      x = std::clamp(x, -1.0, 1.0);
      ++r.clipped_samples;
    }
    r.mixed.samples[i] = x;
  }
  return r;
}

}  // namespace slu
