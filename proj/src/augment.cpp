#include "slu/augment.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <numeric>
#include <set>
#include <thread>

#include "slu/error.hpp"
#include "slu/random.hpp"

namespace slu {

NoiseSplit parse_noise_split(const std::string& name) {
  if (name == "train") return NoiseSplit::kTrain;
  if (name == "test") return NoiseSplit::kTest;
  throw ValidationError("unknown noise split '" + name + "' (expected train or test)");
}

const char* noise_split_name(NoiseSplit split) { return split == NoiseSplit::kTrain ? "train" : "test"; }

NoisePool::NoisePool(std::vector<NoiseFile> train, std::vector<NoiseFile> test)
    : train_(std::move(train)), test_(std::move(test)) {
  std::set<std::string> names;
  for (const auto& n : train_) names.insert(n.name);
  for (const auto& n : test_)
    if (names.contains(n.name)) throw ValidationError("noise file '" + n.name + "' is in both train and test splits");
}

NoisePool NoisePool::from_directory(const std::filesystem::path& dir) {
  std::map<std::string, std::string> seen;  // canonical path -> split
  auto load = [&dir, &seen](const char* sub) {
    std::vector<std::filesystem::path> paths;
    const auto root = dir / sub;
    if (std::filesystem::is_directory(root))
      for (const auto& e : std::filesystem::directory_iterator(root))
        if (e.is_regular_file() && e.path().extension() == ".wav") paths.push_back(e.path());
    std::sort(paths.begin(), paths.end());
    std::vector<NoiseFile> files;
    for (const auto& p : paths) {
      // Canonical paths catch a test/ entry that links back into train/.
      const auto canonical = std::filesystem::weakly_canonical(p).string();
      if (auto it = seen.find(canonical); it != seen.end() && it->second != sub)
        throw ValidationError("noise file '" + canonical + "' is in both train and test splits");
      seen.emplace(canonical, sub);
      files.push_back({std::string(sub) + "/" + p.filename().string(), read_wav(p)});
    }
    return files;
  };
  auto train = load("train");
  auto test = load("test");
  return NoisePool(std::move(train), std::move(test));
}

std::string augmented_id(const std::string& source_id, double snr_db) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", snr_db);
  return source_id + "#snr" + buf;
}

std::uint64_t record_seed(std::uint64_t seed, const std::string& id) {
  return splitmix64(splitmix64(seed) ^ fnv1a64(id));
}

namespace {

struct RecordOutput {
  std::vector<Utterance> records;
  std::vector<AugmentProvenance> provenance;
};

RecordOutput augment_record(const Manifest& manifest, const Utterance& u, const std::vector<NoiseFile>& noises,
                            const AugmentSpec& spec) {
  AudioClip clean;
  if (u.samples) {
    clean.samples = *u.samples;
  } else if (u.audio_path) {
    try {
      clean = read_wav(manifest.resolve_audio(u));
    } catch (const Error& e) {
      throw InputError("record '" + u.id + "': " + e.what());
    }
  } else {
    throw ValidationError("record '" + u.id + "' has no audio");
  }

  std::mt19937_64 rng(record_seed(spec.seed, u.id));
  // Partial Fisher-Yates: the first noises_per_clip entries are the draw.
  std::vector<std::size_t> order(noises.size());
  std::iota(order.begin(), order.end(), 0);
  for (std::size_t k = 0; k < static_cast<std::size_t>(spec.noises_per_clip); ++k) {
    const auto pick = k + uniform_below(rng, order.size() - k);
    std::swap(order[k], order[pick]);
  }

  RecordOutput out;
  for (std::size_t k = 0; k < static_cast<std::size_t>(spec.noises_per_clip); ++k) {
    const auto& noise = noises[order[k]];
    const double snr = spec.snr_levels_db[k];
    const std::size_t offset = spec.random_offset ? uniform_below(rng, noise.clip.samples.size()) : 0;
    auto mix = mix_at_snr(clean, noise.clip, snr, offset);

    Utterance aug = u;
    aug.id = augmented_id(u.id, snr);
    aug.audio_path.reset();
    aug.samples = std::move(mix.mixed.samples);
    out.records.push_back(std::move(aug));
    out.provenance.push_back({out.records.back().id, u.id, noise.name, snr, mix.gain, offset, mix.clipped_samples});
  }
  return out;
}

}  // namespace

AugmentResult augment_corpus(const Manifest& manifest, const NoisePool& pool, const AugmentSpec& spec,
                             NoiseSplit split, int jobs) {
  if (spec.noises_per_clip < 1) throw ValidationError("noises_per_clip must be positive");
  if (static_cast<std::size_t>(spec.noises_per_clip) != spec.snr_levels_db.size())
    throw ValidationError("noises_per_clip (" + std::to_string(spec.noises_per_clip) + ") must equal the number of SNR levels (" +
                          std::to_string(spec.snr_levels_db.size()) + ")");
  const auto& noises = pool.split(split);
  if (noises.size() < static_cast<std::size_t>(spec.noises_per_clip))
    throw ValidationError(std::string(noise_split_name(split)) + " noise pool has " + std::to_string(noises.size()) +
                          " files, need at least " + std::to_string(spec.noises_per_clip));

  const auto& records = manifest.records;
  std::vector<RecordOutput> outputs(records.size());
  auto run = [&](std::size_t begin, std::size_t step) {
    for (std::size_t i = begin; i < records.size(); i += step)
      outputs[i] = augment_record(manifest, records[i], noises, spec);
  };

  const auto workers = static_cast<std::size_t>(std::max(1, jobs));
  if (workers == 1) {
    run(0, 1);
  } else {
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> threads;
    for (std::size_t w = 0; w < workers; ++w)
      threads.emplace_back([&, w] {
        try {
          run(w, workers);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    for (auto& t : threads) t.join();
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  }

  AugmentResult result;
  std::vector<Utterance> all;
  for (auto& o : outputs) {
    for (auto& r : o.records) all.push_back(std::move(r));
    for (auto& p : o.provenance) result.provenance.push_back(std::move(p));
  }
  result.manifest = make_manifest(std::move(all), manifest.base_dir);
  return result;
}

Eigen::MatrixXd mask_features(const Eigen::MatrixXd& features, const MaskSpec& spec) {
  const auto frames = static_cast<int>(features.rows());
  const auto dims = static_cast<int>(features.cols());
  if (spec.time_masks < 0 || spec.freq_masks < 0) throw ValidationError("mask counts must be non-negative");
  if (spec.max_time_width < 0 || spec.max_time_width > frames)
    throw ValidationError("time mask width " + std::to_string(spec.max_time_width) + " exceeds " +
                          std::to_string(frames) + " frames");
  if (spec.max_freq_width < 0 || spec.max_freq_width > dims)
    throw ValidationError("feature mask width " + std::to_string(spec.max_freq_width) + " exceeds " +
                          std::to_string(dims) + " dimensions");

  Eigen::MatrixXd out = features;
  if (features.size() == 0) return out;
  const double mean = features.mean();
  std::mt19937_64 rng(splitmix64(spec.seed));
  auto draw = [&rng, &spec](int max_width, int extent, int& start, int& width) {
    width = spec.fixed_width ? max_width : static_cast<int>(uniform_below(rng, static_cast<std::uint64_t>(max_width) + 1));
    start = static_cast<int>(uniform_below(rng, static_cast<std::uint64_t>(extent - width) + 1));
  };
  for (int k = 0; k < spec.time_masks; ++k) {
    int start = 0, width = 0;
    draw(spec.max_time_width, frames, start, width);
    out.middleRows(start, width).setConstant(mean);
  }
  for (int k = 0; k < spec.freq_masks; ++k) {
    int start = 0, width = 0;
    draw(spec.max_freq_width, dims, start, width);
    out.middleCols(start, width).setConstant(mean);
  }
  return out;
}

}  // namespace slu
