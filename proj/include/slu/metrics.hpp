#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

namespace slu {

enum class EditOp { kMatch, kSub, kDel, kIns };

const char* edit_op_name(EditOp op);

struct AlignedPair {
  EditOp op;
  int ref = -1;  // -1 for insertions
  int hyp = -1;  // -1 for deletions

  bool operator==(const AlignedPair&) const = default;
};

struct AlignmentTrace {
  std::vector<AlignedPair> ops;

  int cost() const;
  int count(EditOp op) const;
};

// Minimal unit-cost alignment. Among optimal traces the backtrace prefers
// MATCH > SUB > DEL > INS at every step, starting from the end.
AlignmentTrace align(std::span<const std::string> ref, std::span<const std::string> hyp);

struct WerCounts {
  int substitutions = 0;
  int deletions = 0;
  int insertions = 0;
  int ref_words = 0;

  int errors() const { return substitutions + deletions + insertions; }
  // Throws ValidationError when ref_words == 0.
  double rate() const;
  WerCounts& operator+=(const WerCounts& o);
};

WerCounts wer_counts(std::span<const std::string> ref, std::span<const std::string> hyp);
double wer(std::span<const std::string> ref, std::span<const std::string> hyp);

// Words and their aligned slot tags.
struct TaggedSequence {
  std::vector<std::string> words;
  std::vector<std::string> slots;
};

struct SlotTally {
  long tp = 0;
  long fp = 0;
  long fn = 0;

  bool operator==(const SlotTally&) const = default;
};

struct SlotScoreReport {
  std::map<std::string, SlotTally> per_label;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;

  // Sums tallies and recomputes the scores; order of merging is irrelevant.
  void merge(const SlotScoreReport& other);
  void finalize();
  SlotTally total() const;
};

struct SlotsEditOptions {
  // A MATCH-aligned TP also needs equal words. Off means label equality on
  // any aligned pair (SUB included) is enough.
  bool require_word_match = true;
};

// Tallies for one utterance pair under the alignment of their words.
SlotScoreReport slots_edit_tally(const TaggedSequence& ref, const TaggedSequence& hyp,
                                 const SlotsEditOptions& options = {});

// Corpus-level slots edit F1: tallies summed over utterances, then
// F1 = sum 2TP / sum (2TP + FP + FN) over slot labels.
SlotScoreReport slots_edit_f1(std::span<const TaggedSequence> refs, std::span<const TaggedSequence> hyps,
                              const SlotsEditOptions& options = {});

struct SlotSpan {
  std::string label;
  int start = 0;
  int end = 0;  // inclusive

  auto operator<=>(const SlotSpan&) const = default;
};

// conlleval-style chunking: an I- tag that does not continue the previous
// span opens a new one, bare labels count as B-.
std::vector<SlotSpan> extract_spans(std::span<const std::string> tags);

// Exact-boundary span F1 for equal-length (oracle text) pairs.
SlotScoreReport span_slot_f1(std::span<const TaggedSequence> refs, std::span<const TaggedSequence> hyps);

// Micro-averaged intent F1 (equals accuracy for single-label data).
double intent_f1(std::span<const std::string> refs, std::span<const std::string> hyps);

}  // namespace slu
