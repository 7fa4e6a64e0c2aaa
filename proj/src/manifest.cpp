#include "slu/manifest.hpp"

#include <fstream>
#include <map>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

#include "slu/error.hpp"

namespace slu {

using nlohmann::json;

std::string canonical_tag(const std::string& tag) {
  if (tag == kOutsideTag) return tag;
  if (tag.size() > 2 && (tag[0] == 'B' || tag[0] == 'I') && tag[1] == '-') return tag;
  return "B-" + tag;
}

std::string tag_label(const std::string& tag) {
  if (tag.size() > 2 && (tag[0] == 'B' || tag[0] == 'I') && tag[1] == '-') return tag.substr(2);
  return tag;
}

std::set<std::string> Manifest::slot_labels() const {
  std::set<std::string> out;
  for (const auto& t : slot_vocabulary)
    if (t != kOutsideTag) out.insert(tag_label(t));
  return out;
}

std::filesystem::path Manifest::resolve_audio(const Utterance& u) const {
  if (!u.audio_path) throw ValidationError("record '" + u.id + "' has no audio");
  std::filesystem::path p(*u.audio_path);
  return p.is_absolute() ? p : base_dir / p;
}

void validate_utterance(const Utterance& u) {
  if (u.id.empty()) throw ValidationError("record with empty id");
  if (u.words.size() != u.slots.size())
    throw ValidationError("record '" + u.id + "': " + std::to_string(u.words.size()) + " words but " +
                          std::to_string(u.slots.size()) + " slots");
  for (const auto& w : u.words)
    if (w.empty()) throw ValidationError("record '" + u.id + "': empty word");
  for (const auto& s : u.slots)
    if (s.empty() || s == "B-" || s == "I-") throw ValidationError("record '" + u.id + "': empty slot tag");
  if (u.intent.empty()) throw ValidationError("record '" + u.id + "': empty intent");
}

namespace {

std::vector<std::string> string_array(const json& j, const char* field, std::size_t line) {
  if (!j.is_array())
    throw ParseError("line " + std::to_string(line) + ": field '" + field + "' must be an array of strings");
  std::vector<std::string> out;
  out.reserve(j.size());
  for (const auto& e : j) {
    if (!e.is_string())
      throw ParseError("line " + std::to_string(line) + ": field '" + field + "' must be an array of strings");
    out.push_back(e.get<std::string>());
  }
  return out;
}

Utterance parse_record(const std::string& text, std::size_t line) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError("line " + std::to_string(line) + ": " + e.what());
  }
  if (!j.is_object()) throw ParseError("line " + std::to_string(line) + ": expected a JSON object");
  for (const char* field : {"id", "words", "slots", "intent"})
    if (!j.contains(field))
      throw ParseError("line " + std::to_string(line) + ": missing field '" + field + "'");

  Utterance u;
  if (!j["id"].is_string()) throw ParseError("line " + std::to_string(line) + ": field 'id' must be a string");
  if (!j["intent"].is_string())
    throw ParseError("line " + std::to_string(line) + ": field 'intent' must be a string");
  u.id = j["id"].get<std::string>();
  u.intent = j["intent"].get<std::string>();
  u.words = string_array(j["words"], "words", line);
  u.slots = string_array(j["slots"], "slots", line);
  if (j.contains("audio") && !j["audio"].is_null()) {
    if (!j["audio"].is_string())
      throw ParseError("line " + std::to_string(line) + ": field 'audio' must be a string");
    u.audio_path = j["audio"].get<std::string>();
  }
  for (auto& s : u.slots) s = canonical_tag(s);
  return u;
}

}  // namespace

Manifest make_manifest(std::vector<Utterance> records, std::filesystem::path base_dir) {
  Manifest m;
  m.base_dir = std::move(base_dir);
  std::unordered_set<std::string> ids;
  for (auto& u : records) {
    for (auto& s : u.slots) s = canonical_tag(s);
    validate_utterance(u);
    if (!ids.insert(u.id).second) throw ValidationError("duplicate record id '" + u.id + "'");
    m.slot_vocabulary.insert(u.slots.begin(), u.slots.end());
    m.intent_vocabulary.insert(u.intent);
  }
  m.records = std::move(records);
  return m;
}

Manifest parse_manifest(std::istream& in, const std::filesystem::path& base_dir) {
  std::vector<Utterance> records;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    records.push_back(parse_record(text, line));
  }
  return make_manifest(std::move(records), base_dir);
}

Manifest parse_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open manifest " + path.string());
  return parse_manifest(in, path.parent_path());
}

std::string serialize_record(const Utterance& u) {
  json j;
  j["id"] = u.id;
  j["words"] = u.words;
  j["slots"] = u.slots;
  j["intent"] = u.intent;
  if (u.audio_path) j["audio"] = *u.audio_path;
  return j.dump();
}

void write_manifest(const Manifest& m, std::ostream& out) {
  for (const auto& u : m.records) out << serialize_record(u) << '\n';
}

std::vector<SlotConflict> find_slot_conflicts(const Manifest& m) {
  std::map<std::string, std::set<std::string>> seen;
  for (const auto& u : m.records)
    for (std::size_t i = 0; i < u.words.size(); ++i) seen[u.words[i]].insert(tag_label(u.slots[i]));
  std::vector<SlotConflict> out;
  for (auto& [word, labels] : seen)
    if (labels.size() > 1) out.push_back({word, labels});
  return out;
}

}  // namespace slu
