// slu: command-line front end for the toolkit.
//
// Exit codes: 0 success, 1 runtime error, 2 usage or validation error.

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "slu/audio.hpp"
#include "slu/augment.hpp"
#include "slu/checkpoint.hpp"
#include "slu/decode.hpp"
#include "slu/error.hpp"
#include "slu/io.hpp"
#include "slu/manifest.hpp"
#include "slu/metrics.hpp"
#include "slu/normalize.hpp"
#include "slu/pipeline.hpp"
#include "slu/tokenizer.hpp"
#include "slu/train.hpp"

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

enum class LogLevel { kError = 0, kWarn = 1, kInfo = 2, kDebug = 3 };

LogLevel log_level() {
  static const LogLevel level = [] {
    const char* env = std::getenv("SLU_LOG");
    if (!env) return LogLevel::kInfo;
    const std::string v = env;
    if (v == "error" || v == "quiet" || v == "0") return LogLevel::kError;
    if (v == "warn" || v == "1") return LogLevel::kWarn;
    if (v == "debug" || v == "3") return LogLevel::kDebug;
    return LogLevel::kInfo;
  }();
  return level;
}

void log(LogLevel level, const std::string& msg) {
  static const char* names[] = {"error", "warn", "info", "debug"};
  if (level <= log_level()) std::cerr << "[slu " << names[static_cast<int>(level)] << "] " << msg << '\n';
}

void log_config(const std::string& command, const json& config) {
  log(LogLevel::kInfo, command + " config " + config.dump());
}

// Runs fn(i) for i in [0, n) on up to `jobs` threads. Results must be
// written to per-index slots so the output does not depend on `jobs`.
template <typename Fn>
void parallel_for(std::size_t n, int jobs, Fn fn) {
  const auto workers = std::min<std::size_t>(static_cast<std::size_t>(std::max(1, jobs)), std::max<std::size_t>(n, 1));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> threads;
  for (std::size_t w = 0; w < workers; ++w)
    threads.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < n; i += workers) fn(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  for (auto& t : threads) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

std::vector<std::string> split_csv(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

std::vector<double> parse_levels(const std::string& s) {
  std::vector<double> out;
  for (const auto& item : split_csv(s)) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != item.size()) throw slu::ValidationError("bad SNR level '" + item + "'");
    out.push_back(v);
  }
  if (out.empty()) throw slu::ValidationError("no SNR levels given");
  return out;
}

// Writes to `path` atomically, or to stdout when path is empty or "-".
void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    std::cout.flush();
  } else {
    slu::atomic_write(path, text);
  }
}

json report_json(const slu::SlotScoreReport& r) {
  json per_label = json::object();
  for (const auto& [label, t] : r.per_label) per_label[label] = {{"tp", t.tp}, {"fp", t.fp}, {"fn", t.fn}};
  return {{"f1", r.f1}, {"precision", r.precision}, {"recall", r.recall}, {"per_label", per_label}};
}

std::string pretty_report(const json& report) {
  std::ostringstream out;
  char buf[160];
  std::snprintf(buf, sizeof buf, "utterances: %d\n", report.at("utterances").get<int>());
  out << buf;
  if (report.contains("wer_counts")) {
    const auto& w = report.at("wer_counts");
    std::snprintf(buf, sizeof buf, "WER: %.2f%%  (S=%d D=%d I=%d N=%d)\n", 100.0 * w.at("rate").get<double>(),
                  w.at("substitutions").get<int>(), w.at("deletions").get<int>(), w.at("insertions").get<int>(),
                  w.at("ref_words").get<int>());
    out << buf;
  }
  for (const char* key : {"slots_edit_f1", "span_f1"}) {
    if (!report.contains(key) || report.at(key).is_null()) continue;
    const auto& r = report.at(key);
    std::snprintf(buf, sizeof buf, "%s: F1 %.2f  P %.2f  R %.2f\n", key, 100.0 * r.at("f1").get<double>(),
                  100.0 * r.at("precision").get<double>(), 100.0 * r.at("recall").get<double>());
    out << buf;
    for (const auto& [label, t] : r.at("per_label").items()) {
      std::snprintf(buf, sizeof buf, "  %-28s tp %5ld  fp %5ld  fn %5ld\n", label.c_str(), t.at("tp").get<long>(),
                    t.at("fp").get<long>(), t.at("fn").get<long>());
      out << buf;
    }
  }
  if (report.contains("intent_f1")) {
    std::snprintf(buf, sizeof buf, "intent F1: %.2f\n", 100.0 * report.at("intent_f1").get<double>());
    out << buf;
  }
  return out.str();
}

json wer_json(const slu::WerCounts& c) {
  return {{"rate", c.rate()},
          {"substitutions", c.substitutions},
          {"deletions", c.deletions},
          {"insertions", c.insertions},
          {"ref_words", c.ref_words}};
}

void check_paired(const slu::Manifest& refs, const slu::Manifest& hyps) {
  if (refs.records.size() != hyps.records.size())
    throw slu::ValidationError("refs have " + std::to_string(refs.records.size()) + " records but hyps have " +
                               std::to_string(hyps.records.size()));
  for (std::size_t i = 0; i < refs.records.size(); ++i)
    if (refs.records[i].id != hyps.records[i].id)
      throw slu::ValidationError("record " + std::to_string(i + 1) + ": ref id '" + refs.records[i].id +
                                 "' does not match hyp id '" + hyps.records[i].id + "'");
}

// ---------------------------------------------------------------------------

struct TokenizeArgs {
  std::string vocab;
  std::string manifest;
  std::string out;
};

int run_tokenize(const TokenizeArgs& a) {
  log_config("tokenize", {{"vocab", a.vocab}, {"manifest", a.manifest}, {"out", a.out}});
  const auto vocab = slu::SubwordVocab::load(a.vocab);
  const auto manifest = slu::parse_manifest(fs::path(a.manifest));
  std::ostringstream out;
  for (const auto& u : manifest.records) {
    const auto t = slu::tokenize(u.words, vocab);
    out << json{{"id", u.id}, {"tokens", t.tokens}, {"first_index", t.first_index}}.dump() << '\n';
  }
  emit(a.out, out.str());
  return 0;
}

struct ScoreArgs {
  std::string refs;
  std::string hyps;
  std::string metrics = "wer,slots-edit-f1,span-f1,intent-f1";
  bool metrics_given = false;
  bool label_only = false;
  bool pretty = false;
  int jobs = 1;
  std::string out;
};

int run_score(const ScoreArgs& a) {
  log_config("score", {{"refs", a.refs},
                       {"hyps", a.hyps},
                       {"metrics", a.metrics},
                       {"label_only", a.label_only},
                       {"pretty", a.pretty},
                       {"jobs", a.jobs},
                       {"out", a.out}});
  const auto metrics = split_csv(a.metrics);
  for (const auto& m : metrics)
    if (m != "wer" && m != "slots-edit-f1" && m != "span-f1" && m != "intent-f1")
      throw slu::ValidationError("unknown metric '" + m + "'");
  auto wants = [&metrics](const char* m) { return std::find(metrics.begin(), metrics.end(), m) != metrics.end(); };

  const auto refs = slu::parse_manifest(fs::path(a.refs));
  const auto hyps = slu::parse_manifest(fs::path(a.hyps));
  check_paired(refs, hyps);
  const std::size_t n = refs.records.size();

  std::vector<slu::TaggedSequence> ref_seq(n), hyp_seq(n);
  std::vector<std::string> ref_intents(n), hyp_intents(n);
  for (std::size_t i = 0; i < n; ++i) {
    ref_seq[i] = {refs.records[i].words, refs.records[i].slots};
    hyp_seq[i] = {hyps.records[i].words, hyps.records[i].slots};
    ref_intents[i] = refs.records[i].intent;
    hyp_intents[i] = hyps.records[i].intent;
  }

  json report = {{"utterances", n}};
  if (wants("wer") || wants("slots-edit-f1")) {
    std::vector<slu::WerCounts> counts(n);
    std::vector<slu::SlotScoreReport> tallies(n);
    const slu::SlotsEditOptions options{!a.label_only};
    parallel_for(n, a.jobs, [&](std::size_t i) {
      counts[i] = slu::wer_counts(ref_seq[i].words, hyp_seq[i].words);
      tallies[i] = slu::slots_edit_tally(ref_seq[i], hyp_seq[i], options);
    });
    if (wants("wer")) {
      slu::WerCounts total;
      for (const auto& c : counts) total += c;
      report["wer"] = total.rate();
      report["wer_counts"] = wer_json(total);
    }
    if (wants("slots-edit-f1")) {
      slu::SlotScoreReport total;
      for (const auto& t : tallies) total.merge(t);
      total.finalize();
      report["slots_edit_f1"] = report_json(total);
    }
  }
  if (wants("span-f1")) {
    bool aligned = true;
    for (std::size_t i = 0; i < n && aligned; ++i) aligned = ref_seq[i].words.size() == hyp_seq[i].words.size();
    // Only an explicit request turns misaligned lengths into an error.
    if (aligned || a.metrics_given) {
      report["span_f1"] = report_json(slu::span_slot_f1(ref_seq, hyp_seq));
    } else {
      log(LogLevel::kWarn, "span F1 skipped: hypothesis lengths differ from the references");
      report["span_f1"] = nullptr;
    }
  }
  if (wants("intent-f1")) report["intent_f1"] = slu::intent_f1(ref_intents, hyp_intents);

  emit(a.out, a.pretty ? pretty_report(report) : report.dump() + "\n");
  return 0;
}

struct WerArgs {
  std::string refs;
  std::string hyps;
  bool text = false;
  bool pretty = false;
  std::string out;
};

std::vector<std::vector<std::string>> read_transcripts(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw slu::InputError("cannot open " + path);
  std::vector<std::vector<std::string>> out;
  std::string line;
  while (std::getline(in, line)) out.push_back(slu::normalize_text(line));
  return out;
}

int run_wer(const WerArgs& a) {
  log_config("wer", {{"refs", a.refs}, {"hyps", a.hyps}, {"text", a.text}, {"pretty", a.pretty}, {"out", a.out}});
  std::vector<std::vector<std::string>> refs, hyps;
  if (a.text) {
    refs = read_transcripts(a.refs);
    hyps = read_transcripts(a.hyps);
    if (refs.size() != hyps.size())
      throw slu::ValidationError("refs have " + std::to_string(refs.size()) + " lines but hyps have " +
                                 std::to_string(hyps.size()));
  } else {
    const auto r = slu::parse_manifest(fs::path(a.refs));
    const auto h = slu::parse_manifest(fs::path(a.hyps));
    check_paired(r, h);
    for (const auto& u : r.records) refs.push_back(u.words);
    for (const auto& u : h.records) hyps.push_back(u.words);
  }
  slu::WerCounts total;
  for (std::size_t i = 0; i < refs.size(); ++i) total += slu::wer_counts(refs[i], hyps[i]);
  json report = wer_json(total);
  report["utterances"] = refs.size();
  if (a.pretty) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "WER: %.2f%%  (S=%d D=%d I=%d N=%d)\n", 100.0 * total.rate(), total.substitutions,
                  total.deletions, total.insertions, total.ref_words);
    emit(a.out, buf);
  } else {
    emit(a.out, report.dump() + "\n");
  }
  return 0;
}

struct AugmentArgs {
  std::string manifest;
  std::string noise_dir;
  std::string split = "train";
  std::string snr = "0,10,20,30,40";
  int noises_per_clip = 0;
  std::uint64_t seed = 17;
  bool random_offset = false;
  int jobs = 1;
  std::string out;
};

std::string wav_name(const std::string& id) {
  std::string name;
  for (char c : id) name += (c == '/' || c == '\\' || c == ' ') ? '_' : c;
  return name + ".wav";
}

int run_augment(const AugmentArgs& a) {
  slu::AugmentSpec spec;
  spec.snr_levels_db = parse_levels(a.snr);
  spec.noises_per_clip = a.noises_per_clip > 0 ? a.noises_per_clip : static_cast<int>(spec.snr_levels_db.size());
  spec.seed = a.seed;
  spec.random_offset = a.random_offset;
  const auto split = slu::parse_noise_split(a.split);
  log_config("augment", {{"manifest", a.manifest},
                         {"noise_dir", a.noise_dir},
                         {"split", a.split},
                         {"snr_levels_db", spec.snr_levels_db},
                         {"noises_per_clip", spec.noises_per_clip},
                         {"seed", spec.seed},
                         {"random_offset", spec.random_offset},
                         {"jobs", a.jobs},
                         {"out", a.out}});

  const auto manifest = slu::parse_manifest(fs::path(a.manifest));
  const auto pool = slu::NoisePool::from_directory(a.noise_dir);
  auto result = slu::augment_corpus(manifest, pool, spec, split, a.jobs);

  const fs::path out_dir(a.out);
  fs::create_directories(out_dir / "audio");
  auto& records = result.manifest.records;
  std::size_t clipped = 0;
  for (const auto& p : result.provenance) clipped += p.clipped_samples;
  parallel_for(records.size(), a.jobs, [&](std::size_t i) {
    auto& u = records[i];
    const auto rel = "audio/" + wav_name(u.id);
    slu::write_wav(slu::AudioClip{*u.samples, slu::kCorpusSampleRate}, out_dir / rel);
    u.samples.reset();
    u.audio_path = rel;
  });
  slu::atomic_write(out_dir / "manifest.jsonl", [&](std::ostream& os) { slu::write_manifest(result.manifest, os); });

  json prov = json::array();
  for (const auto& p : result.provenance)
    prov.push_back({{"id", p.id},
                    {"source_id", p.source_id},
                    {"noise_file", p.noise_file},
                    {"snr_db", p.snr_db},
                    {"gain", p.gain},
                    {"offset", p.offset},
                    {"clipped_samples", p.clipped_samples}});
  slu::atomic_write(out_dir / "provenance.json", prov.dump(2) + "\n");
  if (clipped > 0) log(LogLevel::kWarn, std::to_string(clipped) + " samples were clipped");
  std::cout << json{{"records", records.size()}, {"clipped_samples", clipped}, {"out", a.out}}.dump() << '\n';
  return 0;
}

struct TrainArgs {
  std::string config;
  std::string manifest;
  std::string ckpt;
  std::optional<std::uint64_t> seed;
  bool evaluate = true;
};

slu::Manifest load_manifest_checked(const fs::path& path) {
  auto m = slu::parse_manifest(path);
  for (const auto& c : slu::find_slot_conflicts(m)) {
    std::string labels;
    for (const auto& l : c.labels) labels += (labels.empty() ? "" : ",") + l;
    log(LogLevel::kWarn, path.string() + ": word '" + c.word + "' carries several slot labels: " + labels);
  }
  return m;
}

int run_train(const TrainArgs& a) {
  std::ifstream in(a.config);
  if (!in) throw slu::InputError("cannot open " + a.config);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw slu::ParseError(a.config + ": " + e.what());
  }
  auto config = slu::parse_run_config(j, fs::path(a.config).parent_path());
  if (a.seed) config.train.seed = *a.seed;
  if (!a.ckpt.empty()) config.checkpoint = a.ckpt;
  log_config("train-toy", {{"manifest", a.manifest}, {"evaluate", a.evaluate}, {"run", slu::run_config_to_json(config)}});

  const auto manifest = load_manifest_checked(a.manifest);
  auto model = slu::ToyModel::initialize(config.model, slu::SubwordVocab::load(config.asr_vocab),
                                         slu::SubwordVocab::load(config.nlu_vocab), slu::tag_inventory(manifest),
                                         slu::intent_inventory(manifest), config.model.frontend.num_bands,
                                         config.train.seed);
  const auto data = slu::prepare_examples(model, manifest);
  std::vector<slu::TrainingExample> pretrain;
  if (config.pretrain_manifest) {
    const auto pm = slu::parse_manifest(*config.pretrain_manifest);
    for (const auto& u : pm.records)
      pretrain.push_back({u.id, slu::make_input(model, slu::utterance_features(pm, u, model.config.frontend), u.words),
                          {}});
  }

  const auto start = std::chrono::steady_clock::now();
  const auto logs = slu::train(model, config.train, data, pretrain, [](const slu::EpochLog& e) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "%s epoch %d: L_ASR %.5f L_NLU %.5f L_SLU %.5f", slu::stage_name(e.stage), e.epoch,
                  e.loss_asr, e.loss_nlu, e.loss_slu);
    log(e.epoch % 10 == 0 ? LogLevel::kInfo : LogLevel::kDebug, buf);
  });
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  slu::save_model(model, config.checkpoint);

  json summary = {{"checkpoint", config.checkpoint.string()}, {"epochs", logs.size()}, {"train_seconds", seconds}};
  if (!logs.empty())
    summary["final_loss"] = {{"asr", logs.back().loss_asr}, {"nlu", logs.back().loss_nlu}, {"slu", logs.back().loss_slu}};
  if (a.evaluate) {
    const auto eval = slu::evaluate_model(model, manifest, {config.train.beam_size, 32});
    summary["train_eval"] = {{"slots_edit_f1", eval.slots_edit.f1},
                             {"intent_accuracy", eval.intent_accuracy},
                             {"wer", eval.wer}};
  }
  std::cout << summary.dump() << '\n';
  return 0;
}

struct DecodeArgs {
  std::string ckpt;
  std::string manifest;
  std::string out;
  int beam = 5;
  int max_len = 32;
  int jobs = 1;
};

int run_decode(const DecodeArgs& a) {
  log_config("decode", {{"ckpt", a.ckpt},
                        {"manifest", a.manifest},
                        {"out", a.out},
                        {"beam", a.beam},
                        {"max_len", a.max_len},
                        {"jobs", a.jobs}});
  if (a.beam < 1) throw slu::ValidationError("beam must be at least 1");
  const auto model = slu::load_model(a.ckpt);
  const auto manifest = slu::parse_manifest(fs::path(a.manifest));
  const slu::BeamOptions options{a.beam, a.max_len};
  std::vector<std::string> lines(manifest.records.size());
  parallel_for(manifest.records.size(), a.jobs, [&](std::size_t i) {
    const auto& u = manifest.records[i];
    const auto d = slu::decode_two_step(model, slu::utterance_features(manifest, u, model.config.frontend), options);
    slu::Utterance h;
    h.id = u.id;
    h.words = d.words;
    h.slots = d.slots;
    h.intent = d.intent;
    lines[i] = slu::serialize_record(h);
  });
  std::string text;
  for (const auto& l : lines) text += l + "\n";
  emit(a.out, text);
  return 0;
}

struct ValidateArgs {
  std::vector<std::string> manifests;
  bool check_audio = false;
};

int run_validate(const ValidateArgs& a) {
  log_config("validate", {{"manifests", a.manifests}, {"check_audio", a.check_audio}});
  json out = json::array();
  for (const auto& path : a.manifests) {
    const auto m = load_manifest_checked(path);
    std::size_t with_audio = 0;
    for (const auto& u : m.records) {
      if (!u.audio_path && !u.samples) continue;
      ++with_audio;
      if (a.check_audio && u.audio_path) (void)slu::read_wav(m.resolve_audio(u));
    }
    out.push_back({{"manifest", path},
                   {"records", m.records.size()},
                   {"with_audio", with_audio},
                   {"slot_tags", m.slot_vocabulary},
                   {"intents", m.intent_vocabulary}});
  }
  std::cout << out.dump() << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spoken language understanding toolkit"};
  app.require_subcommand(1);

  TokenizeArgs tok;
  auto* c_tok = app.add_subcommand("tokenize", "Tokenize manifest words with a subword vocabulary");
  c_tok->add_option("--vocab", tok.vocab, "Vocabulary file")->required();
  c_tok->add_option("--manifest", tok.manifest, "JSONL manifest")->required();
  c_tok->add_option("--out", tok.out, "Output JSONL (default stdout)");

  ScoreArgs score;
  auto* c_score = app.add_subcommand("score", "Score hypotheses against references");
  c_score->add_option("--refs", score.refs, "Reference JSONL")->required();
  c_score->add_option("--hyps", score.hyps, "Hypothesis JSONL, paired with refs by position")->required();
  c_score->add_option("--metrics", score.metrics, "Comma-separated: wer,slots-edit-f1,span-f1,intent-f1")
      ->capture_default_str();
  c_score->add_flag("--label-only", score.label_only, "Slots edit F1 without the word-equality requirement");
  c_score->add_flag("--pretty", score.pretty, "Human-readable table instead of JSON");
  c_score->add_option("--jobs", score.jobs, "Worker threads")->check(CLI::PositiveNumber)->capture_default_str();
  c_score->add_option("--out", score.out, "Write the report here instead of stdout");

  WerArgs werargs;
  auto* c_wer = app.add_subcommand("wer", "Corpus word error rate");
  c_wer->add_option("--refs", werargs.refs, "Reference JSONL (or text with --text)")->required();
  c_wer->add_option("--hyps", werargs.hyps, "Hypothesis JSONL (or text with --text)")->required();
  c_wer->add_flag("--text", werargs.text, "Inputs are plain text, one normalized transcript per line");
  c_wer->add_flag("--pretty", werargs.pretty, "Human-readable output");
  c_wer->add_option("--out", werargs.out, "Write the report here instead of stdout");

  AugmentArgs aug;
  auto* c_aug = app.add_subcommand("augment", "Mix noise into every record at several SNR levels");
  c_aug->add_option("--manifest", aug.manifest, "Input JSONL manifest")->required();
  c_aug->add_option("--noise-dir", aug.noise_dir, "Directory with train/ and test/ WAV noise files")->required();
  c_aug->add_option("--split", aug.split, "Noise split: train or test")->capture_default_str();
  c_aug->add_option("--snr", aug.snr, "Comma-separated SNR levels in dB")->capture_default_str();
  c_aug->add_option("--noises-per-clip", aug.noises_per_clip, "Defaults to the number of SNR levels");
  c_aug->add_option("--seed", aug.seed, "Random seed")->capture_default_str();
  c_aug->add_flag("--random-offset", aug.random_offset, "Start each noise at a random sample");
  c_aug->add_option("--jobs", aug.jobs, "Worker threads")->check(CLI::PositiveNumber)->capture_default_str();
  c_aug->add_option("--out", aug.out, "Output directory")->required();

  TrainArgs tr;
  auto* c_train = app.add_subcommand("train-toy", "Train the toy joint ASR+NLU model");
  c_train->add_option("--config", tr.config, "Run configuration JSON")->required();
  c_train->add_option("--manifest", tr.manifest, "Training manifest")->required();
  c_train->add_option("--ckpt", tr.ckpt, "Checkpoint path (overrides the config)");
  c_train->add_option("--seed", tr.seed, "Random seed (overrides the config)");
  bool no_eval = false;
  c_train->add_flag("--no-eval", no_eval, "Skip decoding the training set after training");

  DecodeArgs dec;
  auto* c_dec = app.add_subcommand("decode", "Two-step decode a manifest into hypothesis JSONL");
  c_dec->add_option("--ckpt", dec.ckpt, "Model checkpoint")->required();
  c_dec->add_option("--manifest", dec.manifest, "Manifest with audio")->required();
  c_dec->add_option("--out", dec.out, "Hypothesis JSONL (default stdout)");
  c_dec->add_option("--beam", dec.beam, "Beam size")->capture_default_str();
  c_dec->add_option("--max-len", dec.max_len, "Longest transcript in ASR tokens")->capture_default_str();
  c_dec->add_option("--jobs", dec.jobs, "Worker threads")->check(CLI::PositiveNumber)->capture_default_str();

  ValidateArgs val;
  auto* c_val = app.add_subcommand("validate", "Check manifests");
  c_val->add_option("manifests", val.manifests, "Manifest files")->required();
  c_val->add_flag("--check-audio", val.check_audio, "Also read every referenced WAV file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*c_tok) return run_tokenize(tok);
    if (*c_score) {
      score.metrics_given = c_score->get_option("--metrics")->count() > 0;
      return run_score(score);
    }
    if (*c_wer) return run_wer(werargs);
    if (*c_aug) return run_augment(aug);
    if (*c_train) {
      tr.evaluate = !no_eval;
      return run_train(tr);
    }
    if (*c_dec) return run_decode(dec);
    if (*c_val) return run_validate(val);
  } catch (const slu::ParseError& e) {
    log(LogLevel::kError, e.what());
    return 2;
  } catch (const slu::ValidationError& e) {
    log(LogLevel::kError, e.what());
    return 2;
  } catch (const std::exception& e) {
    log(LogLevel::kError, e.what());
    return 1;
  }
  return 2;
}
