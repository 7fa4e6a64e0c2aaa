#pragma once

#include <filesystem>
#include <istream>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <Eigen/Core>

namespace slu {

enum class VocabKind {
  kBpeStyle,        // word-initial pieces carry the U+2581 marker
  kWordpieceStyle,  // continuation pieces carry a "##" prefix
};

inline constexpr std::string_view kBpeMarker = "\xE2\x96\x81";
inline constexpr std::string_view kWordpieceMarker = "##";

// Immutable subword inventory. Piece ids follow file order.
class SubwordVocab {
 public:
  SubwordVocab(VocabKind kind, std::vector<std::string> pieces, std::string unk);

  // Reads the "#kind: bpe|wordpiece" header (plus optional "#unk: <piece>")
  // followed by one piece per line.
  static SubwordVocab parse(std::istream& in);
  static SubwordVocab load(const std::filesystem::path& path);

  VocabKind kind() const { return kind_; }
  const std::string& unk() const { return unk_; }
  int unk_id() const { return id(unk_).value(); }
  std::size_t size() const { return pieces_.size(); }
  const std::vector<std::string>& pieces() const { return pieces_; }
  const std::string& piece(int id) const { return pieces_.at(static_cast<std::size_t>(id)); }
  bool contains(std::string_view piece) const;
  std::optional<int> id(std::string_view piece) const;

  // True when the piece begins a word under this vocabulary's convention.
  bool is_word_initial(std::string_view piece) const;
  // The piece's surface text with the boundary marker removed.
  std::string_view strip_marker(std::string_view piece) const;

  void write(std::ostream& out) const;

 private:
  VocabKind kind_;
  std::vector<std::string> pieces_;
  std::string unk_;
  std::unordered_map<std::string, int> index_;
};

using BinaryMatrix = Eigen::MatrixXd;
using HiddenMatrix = Eigen::MatrixXd;

struct TokenizationResult {
  std::vector<std::string> tokens;
  // Token index of each word's first subword.
  std::vector<int> first_index;
  // num_tokens x num_words, M(first_index[j], j) == 1.
  BinaryMatrix first_index_matrix;

  std::size_t num_tokens() const { return tokens.size(); }
  std::size_t num_words() const { return first_index.size(); }
};

// Greedy longest-match-first decomposition. A word with no cover becomes a
// single unk token. Throws InputError on an empty word.
TokenizationResult tokenize(std::span<const std::string> words, const SubwordVocab& vocab);

// Rebuilds word boundaries from an already tokenized sequence (e.g. decoder
// output). A continuation piece at position 0 opens a word.
TokenizationResult segment_tokens(std::span<const std::string> tokens, const SubwordVocab& vocab);

// Merges subword tokens back into words.
std::vector<std::string> detokenize(std::span<const std::string> tokens, const SubwordVocab& vocab);

// How word rows are pooled from subword rows. Everything in the model uses
// kFirst; the others exist for experimentation.
enum class Pooling { kFirst, kLast, kMean };

BinaryMatrix build_first_index_matrix(const TokenizationResult& result);
Eigen::MatrixXd build_pooling_matrix(const TokenizationResult& result, Pooling pooling);

// M^T H: row j of the result is the hidden row of word j's first subword.
HiddenMatrix project_to_words(const Eigen::MatrixXd& m, const HiddenMatrix& h);

// [Ma^T Ha, Mb^T Hb] along the hidden dimension. Throws AlignmentError when
// the two tokenizations disagree on the word count.
HiddenMatrix concat_hidden(const HiddenMatrix& ha, const HiddenMatrix& hb, const Eigen::MatrixXd& ma,
                           const Eigen::MatrixXd& mb);

}  // namespace slu
