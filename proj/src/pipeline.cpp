#include "slu/pipeline.hpp"

#include <algorithm>

#include "slu/error.hpp"

namespace slu {

using nlohmann::json;

Eigen::MatrixXd utterance_features(const Manifest& manifest, const Utterance& u, const FrontendConfig& frontend) {
  if (u.samples) return compute_features(AudioClip{*u.samples, 16000}, frontend);
  if (!u.audio_path) throw InputError("record " + u.id + " has neither samples nor an audio path");
  return compute_features(read_wav(manifest.resolve_audio(u)), frontend);
}

std::vector<std::string> tag_inventory(const Manifest& manifest) {
  std::vector<std::string> tags = {kOutsideTag};
  for (const auto& t : manifest.slot_vocabulary)
    if (t != kOutsideTag) tags.push_back(t);
  return tags;
}

std::vector<std::string> intent_inventory(const Manifest& manifest) {
  return {manifest.intent_vocabulary.begin(), manifest.intent_vocabulary.end()};
}

std::vector<TrainingExample> prepare_examples(const ToyModel& model, const Manifest& manifest) {
  std::vector<TrainingExample> out;
  out.reserve(manifest.records.size());
  for (const auto& u : manifest.records) {
    auto features = utterance_features(manifest, u, model.config.frontend);
    out.push_back({u.id, make_input(model, std::move(features), u.words), make_targets(model, u.slots, u.intent)});
  }
  return out;
}

namespace {

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

MaskSpec mask_from_json(const json& j) {
  MaskSpec m;
  m.time_masks = j.value("time_masks", m.time_masks);
  m.freq_masks = j.value("freq_masks", m.freq_masks);
  m.max_time_width = j.value("max_time_width", m.max_time_width);
  m.max_freq_width = j.value("max_freq_width", m.max_freq_width);
  m.fixed_width = j.value("fixed_width", m.fixed_width);
  m.seed = j.value("seed", m.seed);
  return m;
}

}  // namespace

ToyRunConfig parse_run_config(const json& j, const std::filesystem::path& base_dir) {
  ToyRunConfig c;
  try {
    if (!j.is_object()) throw ValidationError("run configuration must be a JSON object");
    const json jm = j.value("model", json::object());
    auto& m = c.model;
    m.asr_hidden = jm.value("asr_hidden", m.asr_hidden);
    m.nlu_hidden = jm.value("nlu_hidden", m.nlu_hidden);
    m.nlu_max_positions = jm.value("nlu_max_positions", m.nlu_max_positions);
    m.subsample_stride = jm.value("subsample_stride", m.subsample_stride);
    m.slot_head = parse_slot_head(jm.value("slot_head", std::string(slot_head_name(m.slot_head))));
    m.label_smoothing = jm.value("label_smoothing", m.label_smoothing);
    m.stop_gradient_at_asr = jm.value("stop_gradient_at_asr", m.stop_gradient_at_asr);
    const json jf = jm.value("frontend", json::object());
    m.frontend.frame_ms = jf.value("frame_ms", m.frontend.frame_ms);
    m.frontend.hop_ms = jf.value("hop_ms", m.frontend.hop_ms);
    m.frontend.num_bands = jf.value("num_bands", m.frontend.num_bands);
    m.frontend.fft_size = jf.value("fft_size", m.frontend.fft_size);

    const json jt = j.value("train", json::object());
    auto& t = c.train;
    t.seed = jt.value("seed", t.seed);
    t.momentum = jt.value("momentum", t.momentum);
    t.clip_norm = jt.value("clip_norm", t.clip_norm);
    t.beam_size = jt.value("beam_size", t.beam_size);
    if (jt.contains("spec_augment")) t.spec_augment = mask_from_json(jt.at("spec_augment"));
    for (const auto& js : jt.value("stages", json::array())) {
      StageConfig s;
      s.stage = parse_stage(js.at("stage").get<std::string>());
      s.epochs = js.value("epochs", s.epochs);
      s.learning_rate = js.value("learning_rate", s.learning_rate);
      if (s.epochs < 0) throw ValidationError("stage epochs must be non-negative");
      if (!(s.learning_rate > 0)) throw ValidationError("stage learning_rate must be positive");
      t.stages.push_back(s);
    }

    c.asr_vocab = resolve(base_dir, j.at("asr_vocab").get<std::string>());
    c.nlu_vocab = resolve(base_dir, j.at("nlu_vocab").get<std::string>());
    if (j.contains("pretrain_manifest") && !j.at("pretrain_manifest").is_null())
      c.pretrain_manifest = resolve(base_dir, j.at("pretrain_manifest").get<std::string>());
    if (j.contains("checkpoint")) c.checkpoint = resolve(base_dir, j.at("checkpoint").get<std::string>());
  } catch (const json::exception& e) {
    throw ValidationError(std::string("bad run configuration: ") + e.what());
  } catch (const ParseError& e) {
    throw ValidationError(std::string("bad run configuration: ") + e.what());
  }
  if (c.model.asr_hidden <= 0 || c.model.nlu_hidden <= 0 || c.model.nlu_max_positions <= 0)
    throw ValidationError("model sizes must be positive");
  if (c.model.subsample_stride < 1) throw ValidationError("subsample_stride must be at least 1");
  if (c.train.beam_size < 1) throw ValidationError("beam_size must be at least 1");
  return c;
}

json run_config_to_json(const ToyRunConfig& c) {
  const auto& m = c.model;
  const auto& t = c.train;
  json stages = json::array();
  for (const auto& s : t.stages)
    stages.push_back({{"stage", stage_name(s.stage)}, {"epochs", s.epochs}, {"learning_rate", s.learning_rate}});
  json j = {
      {"model",
       {{"asr_hidden", m.asr_hidden},
        {"nlu_hidden", m.nlu_hidden},
        {"nlu_max_positions", m.nlu_max_positions},
        {"subsample_stride", m.subsample_stride},
        {"slot_head", slot_head_name(m.slot_head)},
        {"label_smoothing", m.label_smoothing},
        {"stop_gradient_at_asr", m.stop_gradient_at_asr},
        {"frontend",
         {{"frame_ms", m.frontend.frame_ms},
          {"hop_ms", m.frontend.hop_ms},
          {"num_bands", m.frontend.num_bands},
          {"fft_size", m.frontend.fft_size}}}}},
      {"train",
       {{"seed", t.seed},
        {"momentum", t.momentum},
        {"clip_norm", t.clip_norm},
        {"beam_size", t.beam_size},
        {"stages", stages},
        {"spec_augment",
         {{"time_masks", t.spec_augment.time_masks},
          {"freq_masks", t.spec_augment.freq_masks},
          {"max_time_width", t.spec_augment.max_time_width},
          {"max_freq_width", t.spec_augment.max_freq_width},
          {"fixed_width", t.spec_augment.fixed_width},
          {"seed", t.spec_augment.seed}}}}},
      {"asr_vocab", c.asr_vocab.string()},
      {"nlu_vocab", c.nlu_vocab.string()},
      {"checkpoint", c.checkpoint.string()},
  };
  j["pretrain_manifest"] = c.pretrain_manifest ? json(c.pretrain_manifest->string()) : json(nullptr);
  return j;
}

EvalSummary evaluate_model(const ToyModel& model, const Manifest& manifest, const BeamOptions& beam) {
  EvalSummary s;
  std::vector<TaggedSequence> refs;
  std::vector<TaggedSequence> hyps;
  WerCounts wc;
  int intent_hits = 0;
  for (const auto& u : manifest.records) {
    const auto features = utterance_features(manifest, u, model.config.frontend);
    const auto d = decode_two_step(model, features, beam);
    Utterance h;
    h.id = u.id;
    h.words = d.words;
    h.slots = d.slots;
    h.intent = d.intent;
    refs.push_back({u.words, u.slots});
    hyps.push_back({h.words, h.slots});
    wc += wer_counts(u.words, h.words);
    if (h.intent == u.intent) ++intent_hits;
    s.hypotheses.push_back(std::move(h));
  }
  s.slots_edit = slots_edit_f1(refs, hyps);
  if (!manifest.records.empty())
    s.intent_accuracy = static_cast<double>(intent_hits) / static_cast<double>(manifest.records.size());
  s.wer = wc.ref_words > 0 ? wc.rate() : 0.0;
  return s;
}

}  // namespace slu
