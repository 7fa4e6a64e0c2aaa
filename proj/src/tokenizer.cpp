#include "slu/tokenizer.hpp"

#include <fstream>
#include <sstream>

#include "slu/error.hpp"

namespace slu {

namespace {

bool starts_with(std::string_view s, std::string_view prefix) { return s.substr(0, prefix.size()) == prefix; }

// Byte offsets of UTF-8 character boundaries in `word`, including 0 and size.
std::vector<std::size_t> char_boundaries(std::string_view word) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < word.size(); ++i)
    if ((static_cast<unsigned char>(word[i]) & 0xC0) != 0x80) out.push_back(i);
  out.push_back(word.size());
  return out;
}

std::string trim_line(std::string line) {
  while (!line.empty() && (line.back() == '\r' || line.back() == ' ' || line.back() == '\t')) line.pop_back();
  return line;
}

}  // namespace

SubwordVocab::SubwordVocab(VocabKind kind, std::vector<std::string> pieces, std::string unk)
    : kind_(kind), pieces_(std::move(pieces)), unk_(std::move(unk)) {
  for (std::size_t i = 0; i < pieces_.size(); ++i) {
    const auto& p = pieces_[i];
    if (p.empty()) throw ValidationError("vocabulary contains an empty piece");
    if (kind_ == VocabKind::kWordpieceStyle && p == kWordpieceMarker)
      throw ValidationError("vocabulary contains a bare '##' piece");
    if (!index_.emplace(p, static_cast<int>(i)).second)
      throw ValidationError("vocabulary contains duplicate piece '" + p + "'");
  }
  if (!index_.contains(unk_)) throw ValidationError("unknown piece '" + unk_ + "' missing from vocabulary");
}

SubwordVocab SubwordVocab::parse(std::istream& in) {
  std::string line;
  std::optional<VocabKind> kind;
  std::optional<std::string> unk;
  std::vector<std::string> pieces;
  bool in_header = true;
  while (std::getline(in, line)) {
    line = trim_line(std::move(line));
    if (line.empty()) continue;
    if (in_header && starts_with(line, "#kind:")) {
      auto value = line.substr(6);
      value.erase(0, value.find_first_not_of(' '));
      if (value == "bpe") {
        kind = VocabKind::kBpeStyle;
      } else if (value == "wordpiece") {
        kind = VocabKind::kWordpieceStyle;
      } else {
        throw ParseError("unknown vocabulary kind '" + value + "'");
      }
      continue;
    }
    if (in_header && starts_with(line, "#unk:")) {
      auto value = line.substr(5);
      value.erase(0, value.find_first_not_of(' '));
      unk = value;
      continue;
    }
    in_header = false;
    pieces.push_back(line);
  }
  if (!kind) throw ParseError("vocabulary file lacks a '#kind: bpe|wordpiece' header");
  if (!unk) unk = *kind == VocabKind::kBpeStyle ? "<unk>" : "[UNK]";
  return SubwordVocab(*kind, std::move(pieces), *unk);
}

SubwordVocab SubwordVocab::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open vocabulary " + path.string());
  return parse(in);
}

bool SubwordVocab::contains(std::string_view piece) const { return index_.contains(std::string(piece)); }

std::optional<int> SubwordVocab::id(std::string_view piece) const {
  auto it = index_.find(std::string(piece));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

bool SubwordVocab::is_word_initial(std::string_view piece) const {
  if (piece == unk_) return true;
  if (kind_ == VocabKind::kBpeStyle) return starts_with(piece, kBpeMarker);
  return !starts_with(piece, kWordpieceMarker);
}

std::string_view SubwordVocab::strip_marker(std::string_view piece) const {
  if (kind_ == VocabKind::kBpeStyle && starts_with(piece, kBpeMarker)) return piece.substr(kBpeMarker.size());
  if (kind_ == VocabKind::kWordpieceStyle && starts_with(piece, kWordpieceMarker))
    return piece.substr(kWordpieceMarker.size());
  return piece;
}

void SubwordVocab::write(std::ostream& out) const {
  out << "#kind: " << (kind_ == VocabKind::kBpeStyle ? "bpe" : "wordpiece") << '\n';
  out << "#unk: " << unk_ << '\n';
  for (const auto& p : pieces_) out << p << '\n';
}

namespace {

// Greedy longest-match decomposition of one word; empty result means no cover.
std::vector<std::string> split_word(std::string_view word, const SubwordVocab& vocab) {
  const auto bounds = char_boundaries(word);
  std::vector<std::string> out;
  std::size_t b = 0;  // index into bounds of the current start
  while (bounds[b] < word.size()) {
    const bool initial = b == 0;
    bool found = false;
    for (std::size_t e = bounds.size() - 1; e > b; --e) {
      std::string candidate;
      auto surface = word.substr(bounds[b], bounds[e] - bounds[b]);
      if (vocab.kind() == VocabKind::kBpeStyle) {
        candidate = initial ? std::string(kBpeMarker) + std::string(surface) : std::string(surface);
      } else {
        candidate = initial ? std::string(surface) : std::string(kWordpieceMarker) + std::string(surface);
      }
      if (candidate != vocab.unk() && vocab.contains(candidate)) {
        out.push_back(std::move(candidate));
        b = e;
        found = true;
        break;
      }
    }
    if (!found) return {};
  }
  return out;
}

}  // namespace

TokenizationResult tokenize(std::span<const std::string> words, const SubwordVocab& vocab) {
  TokenizationResult r;
  for (const auto& w : words) {
    if (w.empty()) throw InputError("cannot tokenize an empty word");
    r.first_index.push_back(static_cast<int>(r.tokens.size()));
    auto pieces = split_word(w, vocab);
    if (pieces.empty()) {
      r.tokens.push_back(vocab.unk());
    } else {
      for (auto& p : pieces) r.tokens.push_back(std::move(p));
    }
  }
  r.first_index_matrix = build_first_index_matrix(r);
  return r;
}

TokenizationResult segment_tokens(std::span<const std::string> tokens, const SubwordVocab& vocab) {
  TokenizationResult r;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i == 0 || vocab.is_word_initial(tokens[i])) r.first_index.push_back(static_cast<int>(i));
    r.tokens.push_back(tokens[i]);
  }
  r.first_index_matrix = build_first_index_matrix(r);
  return r;
}

std::vector<std::string> detokenize(std::span<const std::string> tokens, const SubwordVocab& vocab) {
  std::vector<std::string> words;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i == 0 || vocab.is_word_initial(tokens[i])) words.emplace_back();
    words.back() += vocab.strip_marker(tokens[i]);
  }
  return words;
}

BinaryMatrix build_first_index_matrix(const TokenizationResult& result) {
  const auto rows = static_cast<Eigen::Index>(result.tokens.size());
  const auto cols = static_cast<Eigen::Index>(result.first_index.size());
  BinaryMatrix m = BinaryMatrix::Zero(rows, cols);
  int previous = -1;
  for (Eigen::Index j = 0; j < cols; ++j) {
    const int i = result.first_index[static_cast<std::size_t>(j)];
    if (i < 0 || i >= rows) throw std::logic_error("first_index " + std::to_string(i) + " out of range");
    if (i <= previous) throw std::logic_error("first_index is not strictly increasing");
    previous = i;
    m(i, j) = 1.0;
  }
  return m;
}

Eigen::MatrixXd build_pooling_matrix(const TokenizationResult& result, Pooling pooling) {
  if (pooling == Pooling::kFirst) return build_first_index_matrix(result);
  build_first_index_matrix(result);  // range checks
  const auto rows = static_cast<Eigen::Index>(result.tokens.size());
  const auto cols = static_cast<Eigen::Index>(result.first_index.size());
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    const int begin = result.first_index[static_cast<std::size_t>(j)];
    const int end = j + 1 < cols ? result.first_index[static_cast<std::size_t>(j + 1)] : static_cast<int>(rows);
    if (pooling == Pooling::kLast) {
      m(end - 1, j) = 1.0;
    } else {
      for (int i = begin; i < end; ++i) m(i, j) = 1.0 / (end - begin);
    }
  }
  return m;
}

HiddenMatrix project_to_words(const Eigen::MatrixXd& m, const HiddenMatrix& h) {
  if (m.rows() != h.rows())
    throw DimensionError("alignment matrix has " + std::to_string(m.rows()) + " rows but hidden matrix has " +
                         std::to_string(h.rows()));
  return m.transpose() * h;
}

HiddenMatrix concat_hidden(const HiddenMatrix& ha, const HiddenMatrix& hb, const Eigen::MatrixXd& ma,
                           const Eigen::MatrixXd& mb) {
  if (ma.cols() != mb.cols())
    throw AlignmentError("tokenizations disagree on word count: " + std::to_string(ma.cols()) + " vs " +
                         std::to_string(mb.cols()));
  HiddenMatrix out(ma.cols(), ha.cols() + hb.cols());
  out.leftCols(ha.cols()) = project_to_words(ma, ha);
  out.rightCols(hb.cols()) = project_to_words(mb, hb);
  return out;
}

}  // namespace slu
