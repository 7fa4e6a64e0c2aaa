#include "slu/metrics.hpp"

#include <algorithm>

#include "slu/error.hpp"
#include "slu/manifest.hpp"

namespace slu {

const char* edit_op_name(EditOp op) {
  switch (op) {
    case EditOp::kMatch: return "match";
    case EditOp::kSub: return "sub";
    case EditOp::kDel: return "del";
    case EditOp::kIns: return "ins";
  }
  return "?";
}

int AlignmentTrace::cost() const {
  return static_cast<int>(ops.size()) - count(EditOp::kMatch);
}

int AlignmentTrace::count(EditOp op) const {
  return static_cast<int>(std::count_if(ops.begin(), ops.end(), [op](const AlignedPair& p) { return p.op == op; }));
}

AlignmentTrace align(std::span<const std::string> ref, std::span<const std::string> hyp) {
  const std::size_t n = ref.size();
  const std::size_t m = hyp.size();
  std::vector<int> d((n + 1) * (m + 1));
  auto at = [m, &d](std::size_t i, std::size_t j) -> int& { return d[i * (m + 1) + j]; };
  for (std::size_t i = 0; i <= n; ++i) at(i, 0) = static_cast<int>(i);
  for (std::size_t j = 0; j <= m; ++j) at(0, j) = static_cast<int>(j);
  for (std::size_t i = 1; i <= n; ++i)
    for (std::size_t j = 1; j <= m; ++j) {
      const int diag = at(i - 1, j - 1) + (ref[i - 1] == hyp[j - 1] ? 0 : 1);
      at(i, j) = std::min({diag, at(i - 1, j) + 1, at(i, j - 1) + 1});
    }

  AlignmentTrace trace;
  std::size_t i = n;
  std::size_t j = m;
  while (i > 0 || j > 0) {
    const int here = at(i, j);
    if (i > 0 && j > 0 && ref[i - 1] == hyp[j - 1] && here == at(i - 1, j - 1)) {
      trace.ops.push_back({EditOp::kMatch, static_cast<int>(i - 1), static_cast<int>(j - 1)});
      --i, --j;
    } else if (i > 0 && j > 0 && ref[i - 1] != hyp[j - 1] && here == at(i - 1, j - 1) + 1) {
      trace.ops.push_back({EditOp::kSub, static_cast<int>(i - 1), static_cast<int>(j - 1)});
      --i, --j;
    } else if (i > 0 && here == at(i - 1, j) + 1) {
      trace.ops.push_back({EditOp::kDel, static_cast<int>(i - 1), -1});
      --i;
    } else {
      trace.ops.push_back({EditOp::kIns, -1, static_cast<int>(j - 1)});
      --j;
    }
  }
  std::reverse(trace.ops.begin(), trace.ops.end());
  return trace;
}

double WerCounts::rate() const {
  if (ref_words == 0) throw ValidationError("WER is undefined for an empty reference");
  return static_cast<double>(errors()) / ref_words;
}

WerCounts& WerCounts::operator+=(const WerCounts& o) {
  substitutions += o.substitutions;
  deletions += o.deletions;
  insertions += o.insertions;
  ref_words += o.ref_words;
  return *this;
}

WerCounts wer_counts(std::span<const std::string> ref, std::span<const std::string> hyp) {
  const auto trace = align(ref, hyp);
  WerCounts c;
  c.substitutions = trace.count(EditOp::kSub);
  c.deletions = trace.count(EditOp::kDel);
  c.insertions = trace.count(EditOp::kIns);
  c.ref_words = static_cast<int>(ref.size());
  return c;
}

double wer(std::span<const std::string> ref, std::span<const std::string> hyp) {
  return wer_counts(ref, hyp).rate();
}

void SlotScoreReport::merge(const SlotScoreReport& other) {
  for (const auto& [label, t] : other.per_label) {
    auto& mine = per_label[label];
    mine.tp += t.tp;
    mine.fp += t.fp;
    mine.fn += t.fn;
  }
  finalize();
}

SlotTally SlotScoreReport::total() const {
  SlotTally sum;
  for (const auto& [label, t] : per_label) {
    sum.tp += t.tp;
    sum.fp += t.fp;
    sum.fn += t.fn;
  }
  return sum;
}

void SlotScoreReport::finalize() {
  const auto t = total();
  precision = t.tp + t.fp > 0 ? static_cast<double>(t.tp) / static_cast<double>(t.tp + t.fp) : 0.0;
  recall = t.tp + t.fn > 0 ? static_cast<double>(t.tp) / static_cast<double>(t.tp + t.fn) : 0.0;
  const long denom = 2 * t.tp + t.fp + t.fn;
  f1 = denom > 0 ? static_cast<double>(2 * t.tp) / static_cast<double>(denom) : 0.0;
}

namespace {

void check_pair(const TaggedSequence& s, const char* side) {
  if (s.words.size() != s.slots.size())
    throw ValidationError(std::string(side) + " has " + std::to_string(s.words.size()) + " words but " +
                          std::to_string(s.slots.size()) + " slots");
}

bool is_outside(const std::string& label) { return label == kOutsideTag; }

}  // namespace

SlotScoreReport slots_edit_tally(const TaggedSequence& ref, const TaggedSequence& hyp,
                                 const SlotsEditOptions& options) {
  check_pair(ref, "reference");
  check_pair(hyp, "hypothesis");
  SlotScoreReport report;
  auto fn = [&](const std::string& label) {
    if (!is_outside(label)) ++report.per_label[label].fn;
  };
  auto fp = [&](const std::string& label) {
    if (!is_outside(label)) ++report.per_label[label].fp;
  };

  for (const auto& p : align(ref.words, hyp.words).ops) {
    switch (p.op) {
      case EditOp::kMatch:
      case EditOp::kSub: {
        const auto r = tag_label(ref.slots[static_cast<std::size_t>(p.ref)]);
        const auto h = tag_label(hyp.slots[static_cast<std::size_t>(p.hyp)]);
        const bool word_ok = p.op == EditOp::kMatch || !options.require_word_match;
        if (word_ok && r == h && !is_outside(r)) {
          ++report.per_label[r].tp;
        } else {
          fn(r);
          fp(h);
        }
        break;
      }
      case EditOp::kDel:
        fn(tag_label(ref.slots[static_cast<std::size_t>(p.ref)]));
        break;
      case EditOp::kIns:
        fp(tag_label(hyp.slots[static_cast<std::size_t>(p.hyp)]));
        break;
    }
  }
  report.finalize();
  return report;
}

SlotScoreReport slots_edit_f1(std::span<const TaggedSequence> refs, std::span<const TaggedSequence> hyps,
                              const SlotsEditOptions& options) {
  if (refs.size() != hyps.size())
    throw ValidationError("reference and hypothesis corpora differ in size: " + std::to_string(refs.size()) +
                          " vs " + std::to_string(hyps.size()));
  SlotScoreReport total;
  for (std::size_t i = 0; i < refs.size(); ++i) total.merge(slots_edit_tally(refs[i], hyps[i], options));
  total.finalize();
  return total;
}

std::vector<SlotSpan> extract_spans(std::span<const std::string> tags) {
  std::vector<SlotSpan> spans;
  bool open = false;
  for (std::size_t i = 0; i < tags.size(); ++i) {
    const auto& tag = tags[i];
    const int pos = static_cast<int>(i);
    if (is_outside(tag)) {
      open = false;
      continue;
    }
    const auto label = tag_label(tag);
    const bool continues = tag.rfind("I-", 0) == 0 && open && spans.back().label == label;
    if (continues) {
      spans.back().end = pos;
    } else {
      spans.push_back({label, pos, pos});
      open = true;
    }
  }
  return spans;
}

SlotScoreReport span_slot_f1(std::span<const TaggedSequence> refs, std::span<const TaggedSequence> hyps) {
  if (refs.size() != hyps.size())
    throw ValidationError("reference and hypothesis corpora differ in size");
  SlotScoreReport report;
  for (std::size_t i = 0; i < refs.size(); ++i) {
    check_pair(refs[i], "reference");
    check_pair(hyps[i], "hypothesis");
    if (refs[i].words.size() != hyps[i].words.size())
      throw ValidationError("span F1 needs equal-length reference and hypothesis (utterance " +
                            std::to_string(i) + "); use slots edit F1 for ASR output");
    const auto r = extract_spans(refs[i].slots);
    const auto h = extract_spans(hyps[i].slots);
    for (const auto& s : r) {
      if (std::find(h.begin(), h.end(), s) != h.end()) {
        ++report.per_label[s.label].tp;
      } else {
        ++report.per_label[s.label].fn;
      }
    }
    for (const auto& s : h)
      if (std::find(r.begin(), r.end(), s) == r.end()) ++report.per_label[s.label].fp;
  }
  report.finalize();
  return report;
}

double intent_f1(std::span<const std::string> refs, std::span<const std::string> hyps) {
  if (refs.size() != hyps.size())
    throw ValidationError("intent lists differ in length: " + std::to_string(refs.size()) + " vs " +
                          std::to_string(hyps.size()));
  if (refs.empty()) throw ValidationError("intent F1 needs at least one utterance");
  long tp = 0;
  long fp = 0;
  long fn = 0;
  for (std::size_t i = 0; i < refs.size(); ++i) {
    if (refs[i] == hyps[i]) {
      ++tp;
    } else {
      ++fp;  // for the hypothesis label
      ++fn;  // for the reference label
    }
  }
  return static_cast<double>(2 * tp) / static_cast<double>(2 * tp + fp + fn);
}

}  // namespace slu
