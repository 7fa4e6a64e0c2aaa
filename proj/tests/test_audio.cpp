#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <numbers>
#include <set>

#include "oracles.hpp"
#include "slu/audio.hpp"
#include "slu/augment.hpp"
#include "slu/error.hpp"
#include "slu/features.hpp"

namespace fs = std::filesystem;

namespace {

std::vector<double> tone(double hz, double seconds, double amp = 0.5) {
  std::vector<double> s(static_cast<std::size_t>(seconds * 16000));
  for (std::size_t i = 0; i < s.size(); ++i) s[i] = amp * std::sin(2 * std::numbers::pi * hz * static_cast<double>(i) / 16000.0);
  return s;
}

std::vector<double> random_signal(std::mt19937_64& g, std::size_t n, double amp) {
  std::uniform_real_distribution<double> u(-amp, amp);
  std::vector<double> s(n);
  for (auto& x : s) x = u(g);
  return s;
}

void put_u16(std::vector<std::uint8_t>& b, std::size_t at, int v) {
  b[at] = static_cast<std::uint8_t>(v & 0xff);
  b[at + 1] = static_cast<std::uint8_t>((v >> 8) & 0xff);
}

fs::path temp_dir(const char* name) {
  auto d = fs::temp_directory_path() / (std::string("slu_test_") + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

}  // namespace

TEST_CASE("wav round trip stays within one quantization step") {
  slu::AudioClip clip{tone(440, 1.0, 0.9)};
  clip.samples[5] = 1.0;
  clip.samples[6] = -1.0;
  const auto bytes = slu::encode_wav(clip);
  const auto back = slu::decode_wav(bytes);
  REQUIRE(back.samples.size() == clip.samples.size());
  CHECK(back.sample_rate == 16000);
  double worst = 0;
  for (std::size_t i = 0; i < clip.samples.size(); ++i) worst = std::max(worst, std::abs(back.samples[i] - clip.samples[i]));
  CHECK(worst <= 1.0 / 32768);

  const auto dir = temp_dir("wav");
  slu::write_wav(clip, dir / "t.wav");
  CHECK(slu::read_wav(dir / "t.wav").samples == back.samples);
  CHECK_THROWS_AS(slu::read_wav(dir / "missing.wav"), slu::InputError);
}

TEST_CASE("wav format errors") {
  const auto good = slu::encode_wav(slu::AudioClip{tone(100, 0.01)});
  auto stereo = good;
  put_u16(stereo, 22, 2);
  CHECK_THROWS_AS(slu::decode_wav(stereo), slu::FormatError);
  auto float_fmt = good;
  put_u16(float_fmt, 20, 3);
  CHECK_THROWS_AS(slu::decode_wav(float_fmt), slu::FormatError);
  auto bits = good;
  put_u16(bits, 34, 8);
  CHECK_THROWS_AS(slu::decode_wav(bits), slu::FormatError);

  std::vector<std::uint8_t> empty_data(good.begin(), good.begin() + 44);
  empty_data[40] = empty_data[41] = empty_data[42] = empty_data[43] = 0;
  CHECK_THROWS_AS(slu::decode_wav(empty_data), slu::FormatError);
  CHECK_THROWS_AS(slu::decode_wav(std::vector<std::uint8_t>{1, 2, 3}), slu::FormatError);
}

TEST_CASE("rms") {
  CHECK(slu::rms(std::vector<double>(100, 0.5)) == doctest::Approx(0.5));
  CHECK(slu::rms(std::vector<double>(10, 0.0)) == 0.0);
  CHECK(slu::rms(tone(100, 1.0, 1.0)) == doctest::Approx(std::sqrt(0.5)).epsilon(1e-3));
  CHECK_THROWS_AS(slu::rms(std::vector<double>{}), slu::InputError);
}

TEST_CASE("mix gain examples") {
  auto g = oracle::rng(3);
  const slu::AudioClip clean{random_signal(g, 4000, 0.3)};
  slu::AudioClip noise{random_signal(g, 4000, 0.1)};
  const double scale = slu::rms(clean) / slu::rms(noise);
  for (auto& x : noise.samples) x *= scale;
  CHECK(slu::mix_at_snr(clean, noise, 0).gain == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(slu::mix_at_snr(clean, noise, 20).gain == doctest::Approx(0.1).epsilon(1e-12));

  const auto m0 = slu::mix_at_snr(clean, noise, 0);
  const auto m40 = slu::mix_at_snr(clean, noise, 40);
  CHECK(m40.gain < m0.gain);
}

TEST_CASE("mix re-measures to the target SNR and is linear") {
  auto g = oracle::rng(4);
  for (int trial = 0; trial < 50; ++trial) {
    const slu::AudioClip clean{random_signal(g, static_cast<std::size_t>(oracle::randint(g, 100, 3000)), 0.5)};
    const slu::AudioClip noise{random_signal(g, static_cast<std::size_t>(oracle::randint(g, 30, 4000)), 0.8)};
    const double snr = 10.0 * oracle::randint(g, 0, 4);
    const std::size_t offset = static_cast<std::size_t>(oracle::randint(g, 0, 50));
    const auto m = slu::mix_at_snr(clean, noise, snr, offset);
    REQUIRE(m.mixed.samples.size() == clean.samples.size());
    const auto fitted = slu::fit_noise(noise.samples, clean.samples.size(), offset);
    std::vector<double> scaled(fitted.size());
    for (std::size_t i = 0; i < fitted.size(); ++i) scaled[i] = m.gain * fitted[i];
    CHECK(std::abs(slu::measured_snr_db(clean.samples, scaled) - snr) < 1e-6);
    std::size_t clipped = 0;
    for (std::size_t i = 0; i < scaled.size(); ++i) {
      const double raw = clean.samples[i] + scaled[i];
      if (std::abs(raw) > 1.0) {
        ++clipped;
        CHECK(std::abs(m.mixed.samples[i]) == 1.0);
      } else {
        CHECK(m.mixed.samples[i] - clean.samples[i] == doctest::Approx(scaled[i]).epsilon(1e-12));
      }
    }
    CHECK(clipped == m.clipped_samples);
  }
}

TEST_CASE("mix errors") {
  const slu::AudioClip clean{tone(200, 0.1)};
  CHECK_THROWS_AS(slu::mix_at_snr(slu::AudioClip{std::vector<double>(100, 0.0)}, clean, 0), slu::InputError);
  CHECK_THROWS_AS(slu::mix_at_snr(clean, slu::AudioClip{std::vector<double>(100, 0.0)}, 0), slu::InputError);
  CHECK_THROWS_AS(slu::mix_at_snr(clean, slu::AudioClip{tone(200, 0.1), 8000}, 0), slu::InputError);
}

TEST_CASE("fit_noise loops and truncates") {
  const std::vector<double> n = {1, 2, 3};
  CHECK(slu::fit_noise(n, 7) == std::vector<double>{1, 2, 3, 1, 2, 3, 1});
  CHECK(slu::fit_noise(n, 2) == std::vector<double>{1, 2});
  CHECK(slu::fit_noise(n, 4, 2) == std::vector<double>{3, 1, 2, 3});
}

namespace {

slu::Manifest small_manifest(int n, std::mt19937_64& g) {
  std::vector<slu::Utterance> recs;
  for (int i = 0; i < n; ++i) {
    slu::Utterance u;
    u.id = "u" + std::to_string(i);
    u.words = {"a"};
    u.slots = {"O"};
    u.intent = "x";
    u.samples = random_signal(g, 800, 0.4);
    recs.push_back(u);
  }
  return slu::make_manifest(std::move(recs));
}

std::vector<slu::NoiseFile> noises(const char* prefix, int n, std::mt19937_64& g) {
  std::vector<slu::NoiseFile> out;
  for (int i = 0; i < n; ++i) out.push_back({std::string(prefix) + std::to_string(i), {random_signal(g, 500, 0.2)}});
  return out;
}

}  // namespace

TEST_CASE("augment_corpus: cardinality, ids, split use, determinism") {
  auto g = oracle::rng(6);
  const auto m = small_manifest(10, g);
  const slu::NoisePool pool(noises("train/", 7, g), noises("test/", 6, g));
  const slu::AugmentSpec spec;
  CHECK(spec.snr_levels_db == std::vector<double>{0, 10, 20, 30, 40});

  const auto a = slu::augment_corpus(m, pool, spec, slu::NoiseSplit::kTrain);
  CHECK(a.manifest.records.size() == 50);
  std::set<std::string> ids;
  for (const auto& r : a.manifest.records) ids.insert(r.id);
  CHECK(ids.size() == 50);
  CHECK(a.manifest.records[0].id == "u0#snr0");
  CHECK(a.manifest.records[4].id == "u0#snr40");
  for (const auto& p : a.provenance) {
    CHECK(p.noise_file.rfind("train/", 0) == 0);
    CHECK(p.id.rfind(p.source_id + "#snr", 0) == 0);
  }
  // Within a record the five noises are distinct.
  for (std::size_t r = 0; r < 10; ++r) {
    std::set<std::string> used;
    for (std::size_t k = 0; k < 5; ++k) used.insert(a.provenance[r * 5 + k].noise_file);
    CHECK(used.size() == 5);
  }

  const auto t = slu::augment_corpus(m, pool, spec, slu::NoiseSplit::kTest);
  for (const auto& p : t.provenance) CHECK(p.noise_file.rfind("test/", 0) == 0);

  const auto again = slu::augment_corpus(m, pool, spec, slu::NoiseSplit::kTrain, 3);
  CHECK(again.manifest == a.manifest);

  auto other = spec;
  other.seed = 99;
  CHECK_FALSE(slu::augment_corpus(m, pool, other, slu::NoiseSplit::kTrain).manifest == a.manifest);
}

TEST_CASE("augment_corpus errors") {
  auto g = oracle::rng(7);
  auto m = small_manifest(2, g);
  CHECK_THROWS_AS(slu::NoisePool(noises("n", 3, g), noises("n", 3, g)), slu::ValidationError);
  const slu::NoisePool small(noises("train/", 4, g), noises("test/", 5, g));
  CHECK_THROWS_AS(slu::augment_corpus(m, small, {}, slu::NoiseSplit::kTrain), slu::ValidationError);

  m.records[1].samples.reset();
  m.records[1].audio_path = "nowhere.wav";
  const slu::NoisePool pool(noises("train/", 5, g), noises("test/", 5, g));
  try {
    slu::augment_corpus(m, pool, {}, slu::NoiseSplit::kTrain);
    FAIL("expected an error");
  } catch (const slu::Error& e) {
    CHECK(std::string(e.what()).find("u1") != std::string::npos);
  }
}

TEST_CASE("noise pool from a directory") {
  const auto dir = temp_dir("noise");
  fs::create_directories(dir / "train");
  fs::create_directories(dir / "test");
  slu::write_wav(slu::AudioClip{tone(300, 0.05)}, dir / "train" / "b.wav");
  slu::write_wav(slu::AudioClip{tone(500, 0.05)}, dir / "train" / "a.wav");
  slu::write_wav(slu::AudioClip{tone(700, 0.05)}, dir / "test" / "a.wav");
  const auto pool = slu::NoisePool::from_directory(dir);
  REQUIRE(pool.split(slu::NoiseSplit::kTrain).size() == 2);
  CHECK(pool.split(slu::NoiseSplit::kTrain)[0].name == "train/a.wav");
  CHECK(pool.split(slu::NoiseSplit::kTest)[0].name == "test/a.wav");

  fs::create_symlink(fs::absolute(dir / "train" / "b.wav"), dir / "test" / "c.wav");
  CHECK_THROWS_AS(slu::NoisePool::from_directory(dir), slu::ValidationError);
}

TEST_CASE("mask_features") {
  Eigen::MatrixXd f = Eigen::MatrixXd::Random(20, 6);
  CHECK(slu::mask_features(f, {}) == f);

  slu::MaskSpec full{1, 0, 20, 0, true, 1};
  const auto all = slu::mask_features(f, full);
  CHECK((all.array() == f.mean()).all());

  slu::MaskSpec spec{2, 1, 5, 2, false, 42};
  const auto a = slu::mask_features(f, spec);
  CHECK(a == slu::mask_features(f, spec));
  CHECK(a.rows() == 20);
  CHECK(a.cols() == 6);
  for (Eigen::Index i = 0; i < f.rows(); ++i)
    for (Eigen::Index j = 0; j < f.cols(); ++j) CHECK((a(i, j) == f(i, j) || a(i, j) == f.mean()));

  slu::MaskSpec too_wide{1, 0, 21, 0, false, 0};
  CHECK_THROWS_AS(slu::mask_features(f, too_wide), slu::ValidationError);
}

TEST_CASE("features") {
  const slu::AudioClip clip{tone(1250, 0.5)};
  const auto f = slu::compute_features(clip);
  CHECK(f.cols() == 16);
  CHECK(f.rows() == 1 + (8000 - 400) / 160);
  CHECK(f.allFinite());
  // Per-band mean normalization.
  CHECK(f.colwise().mean().cwiseAbs().maxCoeff() < 1e-9);
  CHECK_THROWS_AS(slu::compute_features(slu::AudioClip{}), slu::InputError);
}
