// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails.
//
// usage: acceptance <slu binary> <slu-toy-corpus binary> <scratch dir>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "slu/audio.hpp"
#include "slu/augment.hpp"
#include "slu/crf.hpp"
#include "slu/decode.hpp"
#include "slu/error.hpp"
#include "slu/manifest.hpp"
#include "slu/metrics.hpp"
#include "slu/pipeline.hpp"
#include "slu/tokenizer.hpp"
#include "slu/toy_corpus.hpp"
#include "slu/train.hpp"

namespace fs = std::filesystem;
using Words = std::vector<std::string>;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

// Collects the first few failure messages of a criterion.
class Checker {
 public:
  void expect(bool ok, const std::string& what) {
    if (ok) return;
    ++failures_;
    if (failures_ <= 3) messages_ += (messages_.empty() ? "" : "; ") + what;
  }
  int failures() const { return failures_; }
  Outcome outcome(const std::string& summary) const {
    if (failures_ == 0) return {true, summary};
    return {false, summary + " | " + std::to_string(failures_) + " failure(s): " + messages_};
  }

 private:
  int failures_ = 0;
  std::string messages_;
};

std::string fmt(const char* f, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, x);
  return buf;
}

Words random_words(std::mt19937_64& g, int min_len, int max_len, int alphabet) {
  Words w(static_cast<std::size_t>(oracle::randint(g, min_len, max_len)));
  for (auto& x : w) x = "w" + std::to_string(oracle::randint(g, 0, alphabet - 1));
  return w;
}

// A hypothesis that is the reference with a few random edits, or an
// unrelated sequence.
Words perturb(std::mt19937_64& g, const Words& ref, int alphabet) {
  if (oracle::randint(g, 0, 4) == 0) return random_words(g, 0, 8, alphabet);
  Words h = ref;
  for (int e = oracle::randint(g, 0, 3); e > 0; --e) {
    const int kind = oracle::randint(g, 0, 2);
    if (kind == 0 && !h.empty()) {
      h.erase(h.begin() + oracle::randint(g, 0, static_cast<int>(h.size()) - 1));
    } else if (kind == 1 && h.size() < 8) {
      h.insert(h.begin() + oracle::randint(g, 0, static_cast<int>(h.size())), "w" + std::to_string(oracle::randint(g, 0, alphabet - 1)));
    } else if (!h.empty()) {
      h[static_cast<std::size_t>(oracle::randint(g, 0, static_cast<int>(h.size()) - 1))] =
          "w" + std::to_string(oracle::randint(g, 0, alphabet - 1));
    }
  }
  return h;
}

Words random_tags(std::mt19937_64& g, std::size_t n, int labels) {
  Words t(n);
  for (auto& x : t) {
    const int l = oracle::randint(g, 0, labels);
    if (l == 0 || oracle::randint(g, 0, 2) == 0) {
      x = "O";
    } else {
      const char* prefix[] = {"B-", "I-", ""};
      x = std::string(prefix[oracle::randint(g, 0, 2)]) + "slot" + std::to_string(l);
    }
  }
  return t;
}

bool same_tallies(const slu::SlotScoreReport& r, const std::map<std::string, oracle::Tally>& o) {
  if (r.per_label.size() != o.size()) return false;
  for (const auto& [label, t] : o) {
    auto it = r.per_label.find(label);
    if (it == r.per_label.end()) return false;
    if (it->second.tp != t.tp || it->second.fp != t.fp || it->second.fn != t.fn) return false;
  }
  return true;
}

// 1 --------------------------------------------------------------------------
Outcome metric_oracle() {
  Checker c;
  auto g = oracle::rng(1001);
  const auto start = std::chrono::steady_clock::now();
  long pairs = 0;
  oracle::Tally seen;
  for (int corpus = 0; corpus < 1000; ++corpus) {
    const int labels = oracle::randint(g, 1, 4);
    const int alphabet = oracle::randint(g, 2, 6);
    const bool word_match = corpus % 5 != 4;
    std::vector<slu::TaggedSequence> refs, hyps;
    std::map<std::string, oracle::Tally> expect;
    for (int u = oracle::randint(g, 1, 6); u > 0; --u) {
      slu::TaggedSequence r{random_words(g, 0, 8, alphabet), {}};
      r.slots = random_tags(g, r.words.size(), labels);
      slu::TaggedSequence h{perturb(g, r.words, alphabet), {}};
      h.slots = random_tags(g, h.words.size(), labels);
      // Keep reference tags on matched words some of the time so TPs occur.
      for (std::size_t i = 0; i < std::min(r.words.size(), h.words.size()); ++i)
        if (r.words[i] == h.words[i] && oracle::randint(g, 0, 1) == 0) h.slots[i] = r.slots[i];
      oracle::count_slots(oracle::brute_force_alignment(r.words, h.words), r.slots, h.slots, word_match, expect);
      refs.push_back(r);
      hyps.push_back(h);
      ++pairs;
    }
    const auto got = slu::slots_edit_f1(refs, hyps, {word_match});
    for (const auto& [label, t] : expect) {
      seen.tp += t.tp;
      seen.fp += t.fp;
      seen.fn += t.fn;
    }
    c.expect(same_tallies(got, expect), "corpus " + std::to_string(corpus) + " tallies differ");
    c.expect(got.f1 == oracle::f1_of(expect), "corpus " + std::to_string(corpus) + " f1 differs");
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  c.expect(secs < 30.0, "runtime " + fmt("%.1f", secs) + " s");
  return c.outcome("1000 corpora, " + std::to_string(pairs) + " utterance pairs (TP " + std::to_string(seen.tp) +
                   ", FP " + std::to_string(seen.fp) + ", FN " + std::to_string(seen.fn) + "), exact tallies, " + fmt("%.2f", secs) + " s");
}

// 2 --------------------------------------------------------------------------
Outcome wer_oracle() {
  Checker c;
  auto g = oracle::rng(2002);
  for (int n = 0; n < 10000; ++n) {
    const int alphabet = oracle::randint(g, 1, 6);
    const auto ref = random_words(g, 1, 12, alphabet);
    const auto hyp = oracle::randint(g, 0, 1) ? perturb(g, ref, alphabet) : random_words(g, 0, 12, alphabet);
    const int d = oracle::edit_distance(ref, hyp);
    const auto counts = slu::wer_counts(ref, hyp);
    c.expect(counts.errors() == d, "pair " + std::to_string(n) + " distance");
    c.expect(slu::wer(ref, hyp) == static_cast<double>(d) / static_cast<double>(ref.size()),
             "pair " + std::to_string(n) + " rate");
  }

  // Aggregation over permuted corpora.
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<slu::TaggedSequence> refs, hyps;
    for (int u = 0; u < 12; ++u) {
      slu::TaggedSequence r{random_words(g, 1, 8, 4), {}};
      r.slots = random_tags(g, r.words.size(), 3);
      slu::TaggedSequence h{perturb(g, r.words, 4), {}};
      h.slots = random_tags(g, h.words.size(), 3);
      refs.push_back(r);
      hyps.push_back(h);
    }
    const auto base = slu::slots_edit_f1(refs, hyps);
    slu::WerCounts wc;
    for (std::size_t i = 0; i < refs.size(); ++i) wc += slu::wer_counts(refs[i].words, hyps[i].words);
    std::vector<std::size_t> order(refs.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::shuffle(order.begin(), order.end(), g);
    std::vector<slu::TaggedSequence> r2, h2;
    slu::WerCounts wc2;
    for (auto i : order) {
      r2.push_back(refs[i]);
      h2.push_back(hyps[i]);
      wc2 += slu::wer_counts(refs[i].words, hyps[i].words);
    }
    const auto perm = slu::slots_edit_f1(r2, h2);
    c.expect(perm.per_label == base.per_label && perm.f1 == base.f1, "permutation changed the report");
    c.expect(wc2.rate() == wc.rate(), "permutation changed corpus WER");
  }
  return c.outcome("10000 pairs exact; aggregation permutation-invariant on 50 corpora");
}

// 3 --------------------------------------------------------------------------
slu::SubwordVocab random_vocab(std::mt19937_64& g, bool bpe) {
  const std::string alphabet = "abcde";
  std::vector<std::string> pieces = {bpe ? "<unk>" : "[UNK]"};
  std::set<std::string> seen(pieces.begin(), pieces.end());
  auto add = [&](const std::string& p) {
    if (seen.insert(p).second) pieces.push_back(p);
  };
  for (char ch : alphabet) {
    if (oracle::randint(g, 0, 5) == 0) continue;  // leave some letters uncovered so unk appears
    add(bpe ? "\xE2\x96\x81" + std::string(1, ch) : std::string(1, ch));
    add(bpe ? std::string(1, ch) : "##" + std::string(1, ch));
  }
  for (int k = oracle::randint(g, 0, 15); k > 0; --k) {
    std::string p;
    for (int n = oracle::randint(g, 2, 4); n > 0; --n) p += alphabet[static_cast<std::size_t>(oracle::randint(g, 0, 4))];
    const bool initial = oracle::randint(g, 0, 1) == 0;
    add(bpe ? (initial ? "\xE2\x96\x81" + p : p) : (initial ? p : "##" + p));
  }
  return slu::SubwordVocab(bpe ? slu::VocabKind::kBpeStyle : slu::VocabKind::kWordpieceStyle, pieces, pieces[0]);
}

Outcome alignment_algebra() {
  Checker c;
  auto g = oracle::rng(3003);
  const std::string alphabet = "abcde";
  std::normal_distribution<double> nd(0.0, 1.0);
  for (int n = 0; n < 1000; ++n) {
    const auto va = random_vocab(g, true);
    const auto vb = random_vocab(g, false);
    Words words(static_cast<std::size_t>(oracle::randint(g, 1, 8)));
    for (auto& w : words)
      for (int k = oracle::randint(g, 1, 7); k > 0; --k) w += alphabet[static_cast<std::size_t>(oracle::randint(g, 0, 4))];
    const auto ta = slu::tokenize(words, va);
    const auto tb = slu::tokenize(words, vb);
    const auto nw = static_cast<Eigen::Index>(words.size());
    for (const auto* t : {&ta, &tb}) {
      const auto& m = t->first_index_matrix;
      c.expect((m.transpose() * m) == Eigen::MatrixXd::Identity(nw, nw), "M^T M != I");
      Eigen::MatrixXd h(m.rows(), oracle::randint(g, 1, 5));
      for (Eigen::Index i = 0; i < h.size(); ++i) h.data()[i] = nd(g);
      const auto p = slu::project_to_words(m, h);
      bool gather_ok = p.rows() == nw;
      for (Eigen::Index j = 0; gather_ok && j < nw; ++j)
        gather_ok = p.row(j) == h.row(t->first_index[static_cast<std::size_t>(j)]);
      c.expect(gather_ok, "projection differs from row gather");
    }
    const int fa = oracle::randint(g, 1, 6), fb = oracle::randint(g, 1, 6);
    const Eigen::MatrixXd ha = Eigen::MatrixXd::Random(ta.first_index_matrix.rows(), fa);
    const Eigen::MatrixXd hb = Eigen::MatrixXd::Random(tb.first_index_matrix.rows(), fb);
    const auto cat = slu::concat_hidden(ha, hb, ta.first_index_matrix, tb.first_index_matrix);
    c.expect(cat.rows() == nw && cat.cols() == fa + fb, "concat shape");
  }
  return c.outcome("1000 tokenization pairs: M^T M = I, projection = gather, Hcat is N x (Fa+Fb)");
}

// 4 --------------------------------------------------------------------------
std::vector<double> random_signal(std::mt19937_64& g, std::size_t n, double amp) {
  std::uniform_real_distribution<double> u(-amp, amp);
  std::vector<double> s(n);
  for (auto& x : s) x = u(g);
  return s;
}

Outcome snr_fidelity() {
  Checker c;
  auto g = oracle::rng(4004);
  double worst = 0.0;
  for (int n = 0; n < 100; ++n) {
    const slu::AudioClip clean{random_signal(g, static_cast<std::size_t>(oracle::randint(g, 200, 16000)),
                                             std::uniform_real_distribution<double>(0.01, 0.9)(g))};
    const slu::AudioClip noise{random_signal(g, static_cast<std::size_t>(oracle::randint(g, 50, 20000)),
                                             std::uniform_real_distribution<double>(0.01, 1.0)(g))};
    const double snr = slu::kDefaultSnrLevelsDb[static_cast<std::size_t>(oracle::randint(g, 0, 4))];
    const auto offset = static_cast<std::size_t>(oracle::randint(g, 0, 49));
    const auto mix = slu::mix_at_snr(clean, noise, snr, offset);
    auto scaled = slu::fit_noise(noise.samples, clean.samples.size(), offset);
    for (auto& x : scaled) x *= mix.gain;
    const double err = std::abs(slu::measured_snr_db(clean.samples, scaled) - snr);
    worst = std::max(worst, err);
    c.expect(err < 1e-6, "triple " + std::to_string(n) + " off by " + fmt("%g", err) + " dB");
  }

  // Five-fold cardinality and split disjointness.
  std::vector<slu::NoiseFile> train, test;
  for (int i = 0; i < 8; ++i) train.push_back({"train/n" + std::to_string(i), {random_signal(g, 3000, 0.3)}});
  for (int i = 0; i < 6; ++i) test.push_back({"test/n" + std::to_string(i), {random_signal(g, 3000, 0.3)}});
  const slu::NoisePool pool(train, test);
  std::set<std::string> used_train, used_test;
  for (int size : {1, 10, 23}) {
    std::vector<slu::Utterance> recs;
    for (int i = 0; i < size; ++i) {
      slu::Utterance u;
      u.id = "r" + std::to_string(i);
      u.words = {"a"};
      u.slots = {"O"};
      u.intent = "x";
      u.samples = random_signal(g, 1000, 0.5);
      recs.push_back(u);
    }
    const auto m = slu::make_manifest(recs);
    const auto a = slu::augment_corpus(m, pool, {}, slu::NoiseSplit::kTrain, 2);
    const auto b = slu::augment_corpus(m, pool, {}, slu::NoiseSplit::kTest);
    c.expect(a.manifest.records.size() == static_cast<std::size_t>(5 * size), "train cardinality");
    c.expect(b.manifest.records.size() == static_cast<std::size_t>(5 * size), "test cardinality");
    for (const auto& p : a.provenance) used_train.insert(p.noise_file);
    for (const auto& p : b.provenance) used_test.insert(p.noise_file);
  }
  for (const auto& n : used_train) c.expect(!used_test.contains(n), "noise " + n + " used by both splits");
  bool rejected = false;
  try {
    slu::NoisePool overlap(train, {train[0]});
  } catch (const slu::ValidationError&) {
    rejected = true;
  }
  c.expect(rejected, "overlapping pool accepted");
  return c.outcome("100 triples, worst error " + fmt("%.2e", worst) + " dB; 5x cardinality exact; splits disjoint");
}

// 5 --------------------------------------------------------------------------
Outcome gradient_checks() {
  Checker c;
  auto g = oracle::rng(5005);
  double worst = 0.0;
  for (int n = 0; n < 20; ++n) {
    const auto head = n % 2 == 0 ? slu::SlotHead::kLinear : slu::SlotHead::kCrf;
    auto model = fixture::tiny_model(static_cast<std::uint64_t>(500 + n), head);
    fixture::jitter(model, g, 0.3);
    const auto inst = fixture::random_instance(model, g);
    for (const auto& b : fixture::gradient_check(model, inst.input, inst.targets, slu::LossSelection::kSlu, 1e-4)) {
      worst = std::max(worst, b.relative_error);
      c.expect(b.relative_error < 1e-4, std::string("instance ") + std::to_string(n) + " block " +
                                            slu::param_block_name(b.block) + " rel err " + fmt("%.2e", b.relative_error));
      c.expect(b.analytic_norm > 0, std::string("block ") + slu::param_block_name(b.block) + " has no gradient");
    }

    const auto e2e = slu::backward(model, inst.input, inst.targets, slu::LossSelection::kNlu).grads;
    auto two_stage = model;
    two_stage.config.stop_gradient_at_asr = true;
    const auto staged = slu::backward(two_stage, inst.input, inst.targets, slu::LossSelection::kNlu).grads;
    c.expect(staged.squared_norm(slu::ParamBlock::kAsr) == 0.0, "2-stage dL_NLU/dtheta_ASR is not exactly zero");
    c.expect(e2e.squared_norm(slu::ParamBlock::kAsr) > 0.0, "E2E dL_NLU/dtheta_ASR is zero");
  }
  return c.outcome("20 instances x 4 blocks, worst relative error " + fmt("%.2e", worst) +
                   "; 2-stage ASR gradient exactly 0, E2E > 0");
}

// 6 --------------------------------------------------------------------------
Outcome crf_exactness() {
  Checker c;
  auto g = oracle::rng(6006);
  std::normal_distribution<double> nd(0.0, 1.5);
  int instances = 0;
  for (int k = 1; k <= 5; ++k) {
    for (int n = 1; n <= 6; ++n) {
      for (int rep = 0; rep < 4; ++rep) {
        Eigen::MatrixXd em(n, k), tr(k, k);
        Eigen::RowVectorXd st(k), en(k);
        for (Eigen::Index i = 0; i < em.size(); ++i) em.data()[i] = nd(g);
        for (Eigen::Index i = 0; i < tr.size(); ++i) tr.data()[i] = nd(g);
        for (Eigen::Index i = 0; i < k; ++i) {
          st(i) = nd(g);
          en(i) = nd(g);
        }
        const slu::CrfParams crf{tr, st, en};
        double best = -1e300;
        std::vector<int> best_path;
        std::vector<double> scores;
        double mx = -1e300;
        oracle::for_each_path(n, k, [&](const std::vector<int>& p) {
          const double s = oracle::path_score(em, tr, st, en, p);
          scores.push_back(s);
          mx = std::max(mx, s);
          if (s > best) {
            best = s;
            best_path = p;
          }
        });
        double z = 0;
        for (double s : scores) z += std::exp(s - mx);
        const double logz = mx + std::log(z);
        const double lib_logz = slu::crf_log_partition(em, crf);
        c.expect(std::abs(lib_logz - logz) < 1e-10, "logZ differs");

        double total = 0;
        Eigen::MatrixXd unary = Eigen::MatrixXd::Zero(n, k);
        std::size_t idx = 0;
        oracle::for_each_path(n, k, [&](const std::vector<int>& p) {
          const double prob = std::exp(scores[idx++] - lib_logz);
          total += prob;
          for (int t = 0; t < n; ++t) unary(t, p[static_cast<std::size_t>(t)]) += prob;
        });
        c.expect(std::abs(total - 1.0) < 1e-10, "path probabilities do not sum to one");
        const auto marg = slu::crf_marginals(em, crf);
        c.expect((marg.unary - unary).cwiseAbs().maxCoeff() < 1e-10, "unary marginals differ");
        for (Eigen::Index t = 0; t < n; ++t)
          c.expect(std::abs(marg.unary.row(t).sum() - 1.0) < 1e-10, "marginals do not sum to one");
        c.expect(slu::crf_viterbi(em, crf) == best_path, "Viterbi path differs");
        ++instances;
      }
    }
  }
  return c.outcome(std::to_string(instances) + " instances over K<=5, N<=6: logZ, marginals, Viterbi exact to 1e-10");
}

// 7 --------------------------------------------------------------------------
slu::BeamHypothesis exhaustive_best(const slu::ToyModel& model, const Eigen::MatrixXd& features, int max_len) {
  const int v = static_cast<int>(model.asr_vocab.size());
  slu::BeamHypothesis best{{}, -1e300};
  std::vector<int> seq;
  std::function<void()> walk = [&] {
    const double lp = slu::sequence_log_prob(model, features, seq);
    if (lp > best.log_prob) best = {seq, lp};
    if (static_cast<int>(seq.size()) == max_len) return;
    for (int t = 0; t < v; ++t) {
      seq.push_back(t);
      walk();
      seq.pop_back();
    }
  };
  walk();
  return best;
}

Eigen::MatrixXd random_features(std::mt19937_64& g, Eigen::Index rows, Eigen::Index cols) {
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = n(g);
  return m;
}

Outcome two_step_decoding() {
  Checker c;
  auto g = oracle::rng(7007);
  for (int n = 0; n < 50; ++n) {
    auto model = fixture::tiny_model(static_cast<std::uint64_t>(700 + n));
    fixture::jitter(model, g, 1.0);
    const auto f = random_features(g, oracle::randint(g, 2, 8), 3);
    const auto beam = slu::beam_search(model, f, {1, 8});
    const auto greedy = slu::greedy_search(model, f, 8);
    c.expect(!beam.empty() && beam.front().tokens == greedy.tokens, "beam=1 differs from greedy");
  }

  // Vocabularies of 7 and 3 pieces; width covers every sequence up to the
  // length bound, end-of-sequence counted as a class.
  const auto small = slu::SubwordVocab(slu::VocabKind::kBpeStyle, {"<unk>", fixture::kB + "a", "b"}, "<unk>");
  int searched = 0;
  for (int n = 0; n < 10; ++n) {
    auto model = fixture::tiny_model(static_cast<std::uint64_t>(800 + n));
    int max_len = 3;
    if (n % 2 == 1) {
      slu::ToyModelConfig cfg = model.config;
      model = slu::ToyModel::initialize(cfg, small, fixture::tiny_nlu_vocab(), fixture::tiny_tags(), {"p", "q", "r"}, 3,
                                        static_cast<std::uint64_t>(900 + n));
      max_len = 5;
    }
    fixture::jitter(model, g, 1.5);
    const auto f = random_features(g, 4, 3);
    const int width = static_cast<int>(std::pow(model.asr_classes(), max_len));
    const auto beam = slu::beam_search(model, f, {width, max_len});
    const auto best = exhaustive_best(model, f, max_len);
    c.expect(beam.front().tokens == best.tokens, "wide beam differs from exhaustive argmax");
    c.expect(std::abs(beam.front().log_prob - best.log_prob) < 1e-9, "wide beam score differs");

    // Second step uses the top-1 transcript.
    const auto d = slu::decode_two_step(model, f, {width, max_len});
    const auto sem = slu::predict_semantics(model, f, best.tokens);
    c.expect(d.words == sem.words && d.slots == sem.slots && d.intent == sem.intent, "two-step output differs");
    c.expect(d.slots.size() == d.words.size(), "slot count differs from word count");
    ++searched;
  }
  return c.outcome("beam=1 equals greedy on 50 models; " + std::to_string(searched) +
                   " exhaustive searches (|V|=7,L=3 and |V|=3,L=5) matched");
}

// 8 --------------------------------------------------------------------------
int run(const std::string& cmd) {
  const int rc = std::system(cmd.c_str());
  return rc == -1 ? -1 : WEXITSTATUS(rc);
}

std::string quote(const fs::path& p) { return "'" + p.string() + "'"; }

Outcome end_to_end(const std::string& slu_bin, const std::string& corpus_bin, const fs::path& scratch) {
  Checker c;
  const auto corpus = slu::make_toy_corpus();
  const auto config = slu::default_toy_run_config();
  int epochs = 0;
  for (const auto& s : config.train.stages) epochs += s.epochs;

  const auto start = std::chrono::steady_clock::now();
  auto model = slu::ToyModel::initialize(config.model, corpus.asr_vocab, corpus.nlu_vocab,
                                         slu::tag_inventory(corpus.manifest), slu::intent_inventory(corpus.manifest),
                                         config.model.frontend.num_bands, config.train.seed);
  const auto data = slu::prepare_examples(model, corpus.manifest);
  slu::train(model, config.train, data);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const auto eval = slu::evaluate_model(model, corpus.manifest, {config.train.beam_size, 32});

  c.expect(corpus.manifest.records.size() == 50, "corpus size");
  c.expect(corpus.manifest.intent_vocabulary.size() == 3, "intent count");
  c.expect(corpus.manifest.slot_labels().size() == 4, "slot label count");
  c.expect(epochs <= 500, "more than 500 epochs");
  c.expect(secs < 300.0, "training took " + fmt("%.1f", secs) + " s");
  c.expect(eval.slots_edit.f1 >= 0.95, "slots edit F1 " + fmt("%.4f", eval.slots_edit.f1));
  c.expect(eval.intent_accuracy >= 0.99, "intent accuracy " + fmt("%.4f", eval.intent_accuracy));

  // The same through the command-line tools.
  const fs::path dir = scratch / "e2e";
  fs::remove_all(dir);
  const std::string quiet = " > /dev/null 2>&1";
  c.expect(run(quote(corpus_bin) + " --out " + quote(dir) + quiet) == 0, "slu-toy-corpus failed");
  c.expect(run("SLU_LOG=error " + quote(slu_bin) + " train-toy --no-eval --config " + quote(dir / "config.json") +
               " --manifest " + quote(dir / "manifest.jsonl") + quiet) == 0,
           "slu train-toy failed");
  c.expect(run("SLU_LOG=error " + quote(slu_bin) + " decode --ckpt " + quote(dir / "model.json") + " --manifest " +
               quote(dir / "manifest.jsonl") + " --out " + quote(dir / "hyp.jsonl") + quiet) == 0,
           "slu decode failed");
  c.expect(run("SLU_LOG=error " + quote(slu_bin) + " score --refs " + quote(dir / "manifest.jsonl") + " --hyps " +
               quote(dir / "hyp.jsonl") + " --out " + quote(dir / "report.json") + quiet) == 0,
           "slu score failed");
  double cli_f1 = -1, cli_intent = -1;
  try {
    std::ifstream in(dir / "report.json");
    const auto report = nlohmann::json::parse(in);
    cli_f1 = report.at("slots_edit_f1").at("f1").get<double>();
    cli_intent = report.at("intent_f1").get<double>();
  } catch (const std::exception& e) {
    c.expect(false, std::string("unreadable score report: ") + e.what());
  }
  c.expect(cli_f1 >= 0.95, "CLI slots edit F1 " + fmt("%.4f", cli_f1));
  c.expect(cli_intent >= 0.99, "CLI intent F1 " + fmt("%.4f", cli_intent));

  return c.outcome(std::to_string(epochs) + " epochs in " + fmt("%.1f", secs) + " s; slots edit F1 " +
                   fmt("%.4f", eval.slots_edit.f1) + ", intent acc " + fmt("%.4f", eval.intent_accuracy) + ", WER " +
                   fmt("%.4f", eval.wer) + "; CLI F1 " + fmt("%.4f", cli_f1) + ", intent F1 " + fmt("%.4f", cli_intent));
}

// 9 --------------------------------------------------------------------------
Outcome round_trips(const fs::path& scratch) {
  Checker c;
  auto g = oracle::rng(9009);
  const Words vocab = {"show", "flights", "to", "boston", "caf\xC3\xA9", "\"quoted\"", "back\\slash", "new york",
                       "\xE6\x9D\xB1\xE4\xBA\xAC"};
  for (int n = 0; n < 200; ++n) {
    std::vector<slu::Utterance> recs;
    for (int i = oracle::randint(g, 0, 6); i > 0; --i) {
      slu::Utterance u;
      u.id = "id" + std::to_string(n) + "_" + std::to_string(i) + (i % 3 == 0 ? "#snr10" : "");
      for (int k = oracle::randint(g, 0, 6); k > 0; --k) {
        u.words.push_back(vocab[static_cast<std::size_t>(oracle::randint(g, 0, static_cast<int>(vocab.size()) - 1))]);
        const int t = oracle::randint(g, 0, 3);
        u.slots.push_back(t == 0 ? "O" : (t == 1 ? "B-" : "I-") + std::string("lab") + std::to_string(t));
      }
      u.intent = i % 2 ? "flight" : "flight#airfare";
      if (oracle::randint(g, 0, 1)) u.audio_path = "audio/" + u.id + ".wav";
      recs.push_back(u);
    }
    const auto m = slu::make_manifest(recs);
    std::stringstream ss;
    slu::write_manifest(m, ss);
    const auto back = slu::parse_manifest(ss);
    c.expect(back == m, "manifest round trip differs");
    std::stringstream ss2;
    slu::write_manifest(back, ss2);
    c.expect(ss2.str() == ss.str(), "manifest serialization not stable");

    for (const auto& u : recs) {
      const auto s = slu::serialize_slots(u.words, u.slots);
      const auto [w, t] = slu::deserialize_slots(s);
      c.expect(w == u.words && t == u.slots, "serialized output round trip differs");
    }
  }

  double worst = 0;
  for (int n = 0; n < 50; ++n) {
    slu::AudioClip clip{random_signal(g, static_cast<std::size_t>(oracle::randint(g, 1, 20000)), 1.0)};
    const auto path = scratch / ("rt" + std::to_string(n) + ".wav");
    slu::write_wav(clip, path);
    const auto back = slu::read_wav(path);
    c.expect(back.samples.size() == clip.samples.size(), "WAV length changed");
    for (std::size_t i = 0; i < std::min(back.samples.size(), clip.samples.size()); ++i)
      worst = std::max(worst, std::abs(back.samples[i] - clip.samples[i]));
    fs::remove(path);
  }
  c.expect(worst <= 1.0 / 32768, "WAV error " + fmt("%g", worst));
  return c.outcome("200 manifests, serialized slots, 50 WAV clips (worst error " + fmt("%.2e", worst) + ")");
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 4) {
    std::cerr << "usage: acceptance <slu> <slu-toy-corpus> <scratch dir>\n";
    return 2;
  }
  const fs::path scratch = argv[3];
  fs::create_directories(scratch);

  struct Criterion {
    int id;
    const char* name;
    std::function<Outcome()> fn;
  };
  const std::vector<Criterion> criteria = {
      {1, "metric oracle equivalence", metric_oracle},
      {2, "WER oracle", wer_oracle},
      {3, "alignment-matrix algebra", alignment_algebra},
      {4, "SNR fidelity", snr_fidelity},
      {5, "gradient checks", gradient_checks},
      {6, "CRF exactness", crf_exactness},
      {7, "two-step decoding", two_step_decoding},
      {8, "end-to-end smoke", [&] { return end_to_end(argv[1], argv[2], scratch); }},
      {9, "round-trip properties", [&] { return round_trips(scratch); }},
  };

  int failed = 0;
  for (const auto& cr : criteria) {
    Outcome o;
    try {
      o = cr.fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::printf("%s %d %s: %s\n", o.pass ? "PASS" : "FAIL", cr.id, cr.name, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
