#include "slu/model.hpp"

#include <cmath>
#include <random>

#include "model_graph.hpp"
#include "slu/error.hpp"
#include "slu/manifest.hpp"
#include "slu/random.hpp"

namespace slu {

SlotHead parse_slot_head(const std::string& name) {
  if (name == "linear") return SlotHead::kLinear;
  if (name == "crf") return SlotHead::kCrf;
  throw ValidationError("unknown slot head '" + name + "' (expected linear or crf)");
}

const char* slot_head_name(SlotHead head) { return head == SlotHead::kLinear ? "linear" : "crf"; }

const char* param_block_name(ParamBlock block) {
  switch (block) {
    case ParamBlock::kAsr: return "asr";
    case ParamBlock::kNluEncoder: return "nlu_encoder";
    case ParamBlock::kIcHead: return "ic_head";
    case ParamBlock::kSlHead: return "sl_head";
  }
  return "?";
}

void ModelParams::add(std::string name, ParamBlock block, Eigen::MatrixXd value) {
  if (has(name)) throw std::logic_error("duplicate parameter " + name);
  params_.push_back({std::move(name), block, std::move(value)});
}

bool ModelParams::has(std::string_view name) const {
  for (const auto& p : params_)
    if (p.name == name) return true;
  return false;
}

Eigen::MatrixXd& ModelParams::at(std::string_view name) {
  for (auto& p : params_)
    if (p.name == name) return p.value;
  throw std::out_of_range("no parameter named " + std::string(name));
}

const Eigen::MatrixXd& ModelParams::at(std::string_view name) const {
  return const_cast<ModelParams*>(this)->at(name);
}

ModelParams ModelParams::zeros_like() const {
  ModelParams out;
  for (const auto& p : params_) out.add(p.name, p.block, Eigen::MatrixXd::Zero(p.value.rows(), p.value.cols()));
  return out;
}

double ModelParams::squared_norm(std::optional<ParamBlock> block) const {
  double sum = 0.0;
  for (const auto& p : params_)
    if (!block || p.block == *block) sum += p.value.squaredNorm();
  return sum;
}

bool ModelParams::all_finite() const {
  for (const auto& p : params_)
    if (!p.value.allFinite()) return false;
  return true;
}

namespace {

// Box-Muller over the portable unit draw.
Eigen::MatrixXd gaussian(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols, double stddev) {
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    const double u1 = 1.0 - uniform_unit(rng);
    const double u2 = uniform_unit(rng);
    m.data()[i] = stddev * std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }
  return m;
}

}  // namespace

ToyModel ToyModel::initialize(const ToyModelConfig& config, SubwordVocab asr_vocab, SubwordVocab nlu_vocab,
                              std::vector<std::string> tags, std::vector<std::string> intents, int feature_dim,
                              std::uint64_t seed) {
  if (config.asr_hidden < 1 || config.nlu_hidden < 1 || config.nlu_max_positions < 1 || feature_dim < 1)
    throw ValidationError("model dimensions must be positive");
  if (config.subsample_stride < 1) throw ValidationError("subsample stride must be positive");
  if (tags.empty() || intents.empty()) throw ValidationError("model needs at least one tag and one intent");

  ToyModel m{config, std::move(asr_vocab), std::move(nlu_vocab), std::move(tags), std::move(intents), {}};
  std::mt19937_64 rng(splitmix64(seed));
  const Eigen::Index fa = config.asr_hidden;
  const Eigen::Index fb = config.nlu_hidden;
  const Eigen::Index fc = fa + fb;
  const Eigen::Index va = m.asr_classes();
  const auto vb = static_cast<Eigen::Index>(m.nlu_vocab.size());
  const auto nt = static_cast<Eigen::Index>(m.tags.size());
  const auto ni = static_cast<Eigen::Index>(m.intents.size());
  auto w = [&rng](Eigen::Index in, Eigen::Index out) { return gaussian(rng, in, out, 1.0 / std::sqrt(double(in))); };
  auto zero = [](Eigen::Index r, Eigen::Index c) { return Eigen::MatrixXd::Zero(r, c); };

  auto& p = m.params;
  p.add("asr.enc_w", ParamBlock::kAsr, w(feature_dim, fa));
  p.add("asr.enc_b", ParamBlock::kAsr, zero(1, fa));
  p.add("asr.dec_emb", ParamBlock::kAsr, gaussian(rng, va + 1, fa, 0.5));  // + BOS row
  p.add("asr.att_q", ParamBlock::kAsr, w(fa, fa));
  p.add("asr.dec_in_w", ParamBlock::kAsr, w(fa, fa));
  p.add("asr.dec_ctx_w", ParamBlock::kAsr, w(fa, fa));
  p.add("asr.dec_b", ParamBlock::kAsr, zero(1, fa));
  p.add("asr.out_w", ParamBlock::kAsr, w(fa, va));
  p.add("asr.out_b", ParamBlock::kAsr, zero(1, va));

  p.add("nlu.emb", ParamBlock::kNluEncoder, gaussian(rng, vb, fb, 0.5));
  p.add("nlu.pos", ParamBlock::kNluEncoder, gaussian(rng, config.nlu_max_positions, fb, 0.1));
  p.add("nlu.wq", ParamBlock::kNluEncoder, w(fb, fb));
  p.add("nlu.wk", ParamBlock::kNluEncoder, w(fb, fb));
  p.add("nlu.wv", ParamBlock::kNluEncoder, w(fb, fb));
  p.add("nlu.wo", ParamBlock::kNluEncoder, w(fb, fb));
  p.add("nlu.bo", ParamBlock::kNluEncoder, zero(1, fb));

  p.add("ic.sentinel", ParamBlock::kIcHead, gaussian(rng, 1, fc, 0.1));
  p.add("ic.w", ParamBlock::kIcHead, w(fc, ni));
  p.add("ic.b", ParamBlock::kIcHead, zero(1, ni));

  p.add("sl.w", ParamBlock::kSlHead, w(fc, nt));
  p.add("sl.b", ParamBlock::kSlHead, zero(1, nt));
  if (config.slot_head == SlotHead::kCrf) {
    p.add("sl.crf_trans", ParamBlock::kSlHead, zero(nt, nt));
    p.add("sl.crf_start", ParamBlock::kSlHead, zero(1, nt));
    p.add("sl.crf_end", ParamBlock::kSlHead, zero(1, nt));
  }
  return m;
}

int ToyModel::feature_dim() const { return static_cast<int>(params.at("asr.enc_w").rows()); }

int ToyModel::tag_id(const std::string& tag) const {
  for (std::size_t i = 0; i < tags.size(); ++i)
    if (tags[i] == tag) return static_cast<int>(i);
  throw ValidationError("unknown slot tag '" + tag + "'");
}

int ToyModel::intent_id(const std::string& intent) const {
  for (std::size_t i = 0; i < intents.size(); ++i)
    if (intents[i] == intent) return static_cast<int>(i);
  throw ValidationError("unknown intent '" + intent + "'");
}

std::optional<CrfParams> ToyModel::crf() const {
  if (config.slot_head != SlotHead::kCrf) return std::nullopt;
  return CrfParams{params.at("sl.crf_trans"), params.at("sl.crf_start").row(0), params.at("sl.crf_end").row(0)};
}

namespace {

std::vector<int> piece_ids(const SubwordVocab& vocab, const std::vector<std::string>& tokens) {
  std::vector<int> ids;
  ids.reserve(tokens.size());
  for (const auto& t : tokens) ids.push_back(vocab.id(t).value_or(vocab.unk_id()));
  return ids;
}

}  // namespace

ModelInput make_input(const ToyModel& model, Eigen::MatrixXd features, std::span<const std::string> words) {
  auto a = tokenize(words, model.asr_vocab);
  auto b = tokenize(words, model.nlu_vocab);
  ModelInput in;
  in.features = std::move(features);
  in.asr_tokens = piece_ids(model.asr_vocab, a.tokens);
  in.nlu_tokens = piece_ids(model.nlu_vocab, b.tokens);
  in.asr_alignment = std::move(a.first_index_matrix);
  in.nlu_alignment = std::move(b.first_index_matrix);
  return in;
}

ModelTargets make_targets(const ToyModel& model, std::span<const std::string> slots, const std::string& intent) {
  ModelTargets t;
  for (const auto& s : slots) t.slot_tags.push_back(model.tag_id(canonical_tag(s)));
  t.intent = model.intent_id(intent);
  return t;
}

std::vector<int> asr_targets(const ToyModel& model, const ModelInput& input) {
  auto t = input.asr_tokens;
  t.push_back(model.asr_eos());
  return t;
}

namespace detail {

ad::Var ParamVars::operator[](std::string_view name) const {
  const auto& all = params->all();
  for (std::size_t i = 0; i < all.size(); ++i)
    if (all[i].name == name) return vars[i];
  throw std::out_of_range("no parameter named " + std::string(name));
}

ParamVars bind_params(ad::Tape& tape, const ModelParams& params, bool trainable) {
  ParamVars out;
  out.params = &params;
  for (const auto& p : params.all())
    out.vars.push_back(trainable ? tape.variable(p.value, p.name) : tape.constant(p.value, p.name));
  return out;
}

Eigen::MatrixXd sinusoid(Eigen::Index rows, Eigen::Index dim, Eigen::Index offset) {
  Eigen::MatrixXd pe(rows, dim);
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index i = 0; i < dim; ++i) {
      const double rate = std::pow(10000.0, -static_cast<double>(i - i % 2) / static_cast<double>(dim));
      const double angle = static_cast<double>(r + offset) * rate;
      pe(r, i) = i % 2 == 0 ? std::sin(angle) : std::cos(angle);
    }
  return pe;
}

ad::Var encode_audio(const ToyModel& model, const ParamVars& p, ad::Tape& tape, const Eigen::MatrixXd& features) {
  if (features.cols() != model.feature_dim())
    throw DimensionError("features have " + std::to_string(features.cols()) + " dims, model expects " +
                         std::to_string(model.feature_dim()));
  if (features.rows() == 0) throw DimensionError("empty feature matrix");
  auto x = tape.constant(subsample_features(features, model.config.subsample_stride), "features");
  auto pe = tape.constant(sinusoid(x.rows(), model.config.asr_hidden), "encoder_positions");
  auto h = add(add_row(matmul(x, p["asr.enc_w"]), p["asr.enc_b"]), pe);
  return ad::checked(ad::tanh(h), "asr encoder");
}

DecoderOut run_decoder(const ToyModel& model, const ParamVars& p, ad::Tape& tape, ad::Var encoder,
                       std::span<const int> input_ids, Eigen::Index first_position) {
  const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(model.config.asr_hidden));
  auto pe = tape.constant(sinusoid(static_cast<Eigen::Index>(input_ids.size()), model.config.asr_hidden, first_position),
                          "decoder_positions");
  auto query_in = add(gather_rows(p["asr.dec_emb"], input_ids), pe);
  auto scores = scale(matmul(matmul(query_in, p["asr.att_q"]), transpose(encoder)), inv_sqrt);
  auto context = matmul(softmax_rows(scores), encoder);
  auto hidden = ad::tanh(add_row(add(matmul(query_in, p["asr.dec_in_w"]), matmul(context, p["asr.dec_ctx_w"])),
                                 p["asr.dec_b"]));
  auto logits = add_row(matmul(hidden, p["asr.out_w"]), p["asr.out_b"]);
  return {ad::checked(hidden, "asr decoder hidden"), ad::checked(logits, "asr logits")};
}

ad::Var encode_text(const ToyModel& model, const ParamVars& p, std::span<const int> nlu_ids) {
  const auto n = static_cast<Eigen::Index>(nlu_ids.size());
  if (n > model.config.nlu_max_positions)
    throw DimensionError(std::to_string(n) + " text tokens exceed the " +
                         std::to_string(model.config.nlu_max_positions) + " supported positions");
  const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(model.config.nlu_hidden));
  auto x = add(gather_rows(p["nlu.emb"], nlu_ids), slice_rows(p["nlu.pos"], 0, n));
  auto q = matmul(x, p["nlu.wq"]);
  auto k = matmul(x, p["nlu.wk"]);
  auto v = matmul(x, p["nlu.wv"]);
  auto attn = softmax_rows(scale(matmul(q, transpose(k)), inv_sqrt));
  auto mixed = matmul(matmul(attn, v), p["nlu.wo"]);
  return ad::checked(ad::tanh(add_row(add(x, mixed), p["nlu.bo"])), "text encoder");
}

HeadsOut run_heads(const ToyModel& model, const ParamVars& p, ad::Tape& tape, ad::Var ha, ad::Var hb,
                   const Eigen::MatrixXd& asr_alignment, const Eigen::MatrixXd& nlu_alignment) {
  if (asr_alignment.cols() != nlu_alignment.cols())
    throw AlignmentError("ASR and text tokenizations disagree on word count: " +
                         std::to_string(asr_alignment.cols()) + " vs " + std::to_string(nlu_alignment.cols()));
  if (asr_alignment.rows() != ha.rows() || nlu_alignment.rows() != hb.rows())
    throw DimensionError("alignment matrix rows do not match hidden rows");
  auto ha_in = model.config.stop_gradient_at_asr ? ad::stop_gradient(ha) : ha;
  auto ma_t = tape.constant(asr_alignment.transpose(), "asr_alignment_t");
  auto mb_t = tape.constant(nlu_alignment.transpose(), "nlu_alignment_t");
  auto hcat = ad::checked(concat_cols(matmul(ma_t, ha_in), matmul(mb_t, hb)), "Hcat");
  auto slot_scores = add_row(matmul(hcat, p["sl.w"]), p["sl.b"]);
  auto pooled = mean_rows(concat_rows(p["ic.sentinel"], hcat));
  auto intent_logits = add_row(matmul(pooled, p["ic.w"]), p["ic.b"]);
  return {hcat, slot_scores, intent_logits};
}

FullGraph build_graph(const ToyModel& model, const ParamVars& p, ad::Tape& tape, const ModelInput& input,
                      bool with_nlu) {
  FullGraph g;
  g.encoder = encode_audio(model, p, tape, input.features);
  std::vector<int> dec_in;
  dec_in.reserve(input.asr_tokens.size() + 1);
  dec_in.push_back(model.asr_bos());
  dec_in.insert(dec_in.end(), input.asr_tokens.begin(), input.asr_tokens.end());
  auto dec = run_decoder(model, p, tape, g.encoder, dec_in, 0);
  g.asr_logits = dec.logits;
  g.ha = slice_rows(dec.hidden, 0, static_cast<Eigen::Index>(input.asr_tokens.size()));
  if (with_nlu) {
    g.has_nlu = true;
    g.hb = encode_text(model, p, input.nlu_tokens);
    g.heads = run_heads(model, p, tape, g.ha, g.hb, input.asr_alignment, input.nlu_alignment);
  }
  return g;
}

ad::Var slot_loss(const ToyModel& model, const ParamVars& p, ad::Var slot_scores, std::span<const int> tags) {
  if (static_cast<Eigen::Index>(tags.size()) != slot_scores.rows())
    throw DimensionError("slot scores have " + std::to_string(slot_scores.rows()) + " rows but " +
                         std::to_string(tags.size()) + " tags");
  if (model.config.slot_head == SlotHead::kCrf && !tags.empty())
    return ad::crf_nll(slot_scores, p["sl.crf_trans"], p["sl.crf_start"], p["sl.crf_end"], tags);
  return ad::cross_entropy(slot_scores, tags, 0.0, ad::Reduction::kSum);
}

}  // namespace detail

ForwardResult forward(const ToyModel& model, const ModelInput& input) {
  ad::Tape tape;
  auto p = detail::bind_params(tape, model.params, false);
  auto g = detail::build_graph(model, p, tape, input, true);
  return {g.encoder.value(),    g.ha.value(),          g.hb.value(), g.heads.hcat.value(), g.asr_logits.value(),
          g.heads.slot_scores.value(), g.heads.intent_logits.value()};
}

double loss_asr(const Eigen::MatrixXd& asr_logits, std::span<const int> targets, double label_smoothing) {
  if (static_cast<Eigen::Index>(targets.size()) != asr_logits.rows())
    throw DimensionError("ASR logits have " + std::to_string(asr_logits.rows()) + " rows but " +
                         std::to_string(targets.size()) + " targets");
  ad::Tape tape;
  auto l = tape.constant(asr_logits);
  return ad::cross_entropy(l, targets, label_smoothing, ad::Reduction::kMean).value()(0, 0);
}

double loss_nlu(const Eigen::MatrixXd& slot_scores, const Eigen::MatrixXd& intent_logits,
                std::span<const int> slot_tags, int intent, const CrfParams* crf) {
  if (static_cast<Eigen::Index>(slot_tags.size()) != slot_scores.rows())
    throw DimensionError("slot scores rows differ from the number of tags");
  ad::Tape tape;
  auto s = tape.constant(slot_scores);
  ad::Var slot;
  if (crf && !slot_tags.empty()) {
    slot = ad::crf_nll(s, tape.constant(crf->transitions), tape.constant(crf->start), tape.constant(crf->end),
                       slot_tags);
  } else {
    slot = ad::cross_entropy(s, slot_tags, 0.0, ad::Reduction::kSum);
  }
  const int target[] = {intent};
  auto ic = ad::cross_entropy(tape.constant(intent_logits), target, 0.0, ad::Reduction::kSum);
  return add(slot, ic).value()(0, 0);
}

namespace {

struct LossGraph {
  ad::Var asr;
  ad::Var nlu;
  ad::Var total;
};

LossGraph build_loss(const ToyModel& model, const detail::ParamVars& p, ad::Tape& tape, const ModelInput& input,
                     const ModelTargets& targets, LossSelection selection) {
  const bool with_nlu = selection != LossSelection::kAsr;
  auto g = detail::build_graph(model, p, tape, input, with_nlu);
  LossGraph out;
  out.asr = ad::cross_entropy(g.asr_logits, asr_targets(model, input), model.config.label_smoothing,
                              ad::Reduction::kMean);
  if (with_nlu) {
    if (targets.slot_tags.size() != static_cast<std::size_t>(input.asr_alignment.cols()))
      throw ValidationError("slot targets do not match the word count");
    const int intent[] = {targets.intent};
    auto slot = detail::slot_loss(model, p, g.heads.slot_scores, targets.slot_tags);
    auto ic = ad::cross_entropy(g.heads.intent_logits, intent, 0.0, ad::Reduction::kSum);
    out.nlu = add(slot, ic);
  }
  switch (selection) {
    case LossSelection::kAsr: out.total = out.asr; break;
    case LossSelection::kNlu: out.total = out.nlu; break;
    case LossSelection::kSlu: out.total = add(out.asr, out.nlu); break;
  }
  return out;
}

LossBreakdown breakdown(const LossGraph& g, LossSelection selection) {
  LossBreakdown b;
  b.asr = g.asr.value()(0, 0);
  if (selection != LossSelection::kAsr) b.nlu = g.nlu.value()(0, 0);
  b.slu = g.total.value()(0, 0);
  return b;
}

}  // namespace

LossBreakdown evaluate_loss(const ToyModel& model, const ModelInput& input, const ModelTargets& targets,
                            LossSelection selection) {
  ad::Tape tape;
  auto p = detail::bind_params(tape, model.params, false);
  return breakdown(build_loss(model, p, tape, input, targets, selection), selection);
}

BackwardResult backward(const ToyModel& model, const ModelInput& input, const ModelTargets& targets,
                        LossSelection selection) {
  ad::Tape tape;
  auto p = detail::bind_params(tape, model.params, true);
  auto g = build_loss(model, p, tape, input, targets, selection);
  tape.backward(g.total);
  BackwardResult r{breakdown(g, selection), model.params.zeros_like()};
  auto& grads = r.grads.all();
  for (std::size_t i = 0; i < grads.size(); ++i) grads[i].value = tape.grad(p.vars[i]);
  return r;
}

Eigen::MatrixXd subsample_features(const Eigen::MatrixXd& features, int stride) {
  if (stride <= 0) throw ValidationError("subsample stride must be positive, got " + std::to_string(stride));
  if (stride == 1) return features;
  const Eigen::Index rows = (features.rows() + stride - 1) / stride;
  Eigen::MatrixXd out(rows, features.cols());
  for (Eigen::Index r = 0; r < rows; ++r) {
    const Eigen::Index begin = r * stride;
    const Eigen::Index count = std::min<Eigen::Index>(stride, features.rows() - begin);
    out.row(r) = features.middleRows(begin, count).colwise().mean();
  }
  return out;
}

SerializedSequence serialize_slots(std::span<const std::string> words, std::span<const std::string> slots) {
  if (words.size() != slots.size())
    throw ValidationError("cannot serialize " + std::to_string(words.size()) + " words with " +
                          std::to_string(slots.size()) + " slots");
  SerializedSequence seq;
  seq.tokens.reserve(2 * words.size());
  for (std::size_t i = 0; i < words.size(); ++i) {
    seq.tokens.push_back(words[i]);
    seq.tokens.push_back(slots[i]);
  }
  return seq;
}

std::pair<std::vector<std::string>, std::vector<std::string>> deserialize_slots(const SerializedSequence& seq) {
  if (seq.tokens.size() % 2 != 0)
    throw ValidationError("serialized sequence has odd length " + std::to_string(seq.tokens.size()));
  std::pair<std::vector<std::string>, std::vector<std::string>> out;
  for (std::size_t i = 0; i < seq.tokens.size(); i += 2) {
    out.first.push_back(seq.tokens[i]);
    out.second.push_back(seq.tokens[i + 1]);
  }
  return out;
}

}  // namespace slu
