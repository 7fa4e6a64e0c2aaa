#pragma once

#include <filesystem>
#include <istream>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <vector>

namespace slu {

inline constexpr const char* kOutsideTag = "O";

// One dataset record: optional audio, the word sequence, its aligned slot
// tags and a single intent label.
struct Utterance {
  std::string id;
  std::optional<std::string> audio_path;
  std::optional<std::vector<double>> samples;
  std::vector<std::string> words;
  std::vector<std::string> slots;
  std::string intent;

  bool operator==(const Utterance&) const = default;
};

struct Manifest {
  std::vector<Utterance> records;
  // Canonical BIO tags seen in the records, including "O".
  std::set<std::string> slot_vocabulary;
  std::set<std::string> intent_vocabulary;
  // Directory that relative audio paths are resolved against. Not serialized.
  std::filesystem::path base_dir;

  bool operator==(const Manifest& other) const {
    return records == other.records && slot_vocabulary == other.slot_vocabulary &&
           intent_vocabulary == other.intent_vocabulary;
  }

  // Slot labels with the B-/I- prefix stripped, "O" excluded.
  std::set<std::string> slot_labels() const;
  std::filesystem::path resolve_audio(const Utterance& u) const;
};

// Promotes bare labels to "B-x"; "O", "B-x" and "I-x" pass through.
std::string canonical_tag(const std::string& tag);
// "B-x" / "I-x" / "x" -> "x"; "O" -> "O".
std::string tag_label(const std::string& tag);

// Throws ValidationError if the record breaks an Utterance invariant.
void validate_utterance(const Utterance& u);

Manifest parse_manifest(std::istream& in, const std::filesystem::path& base_dir = {});
Manifest parse_manifest(const std::filesystem::path& path);
Manifest make_manifest(std::vector<Utterance> records, std::filesystem::path base_dir = {});

void write_manifest(const Manifest& m, std::ostream& out);
std::string serialize_record(const Utterance& u);

// Words that carry more than one slot label across the corpus. These are
// reported, never dropped.
struct SlotConflict {
  std::string word;
  std::set<std::string> labels;
};
std::vector<SlotConflict> find_slot_conflicts(const Manifest& m);

}  // namespace slu
