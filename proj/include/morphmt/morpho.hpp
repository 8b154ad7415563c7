#pragma once

// Tagged morpheme representation: `surface/TAG` for word-final morphemes and
// `surface/TAG+` for word-internal ones.

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace morphmt {

enum class MorphTag { kPrefix, kStem, kSuffix };

enum class Granularity { kWord, kMorpheme };

std::string_view tag_name(MorphTag tag);
MorphTag parse_tag(std::string_view name);  // throws Error on unknown names

std::string_view granularity_name(Granularity g);
Granularity parse_granularity(std::string_view name);

struct MorphToken {
  std::string surface;
  MorphTag tag = MorphTag::kStem;
  bool continues = false;

  std::string serialize() const;

  friend bool operator==(const MorphToken&, const MorphToken&) = default;
};

/// Parses a single `surface/TAG[+]` token. The last '/' separates the tag, so
/// surfaces may themselves contain '/'.
MorphToken parse_token(std::string_view text, std::size_t index = 0);

struct WordSpan {
  std::size_t start = 0;  // inclusive
  std::size_t end = 0;    // inclusive

  std::size_t size() const { return end - start + 1; }
  friend bool operator==(const WordSpan&, const WordSpan&) = default;
};

class MorphSentence {
 public:
  MorphSentence() = default;
  /// Throws ParseError if the final token is word-internal.
  explicit MorphSentence(std::vector<MorphToken> tokens);

  const std::vector<MorphToken>& tokens() const { return tokens_; }
  std::size_t size() const { return tokens_.size(); }
  bool empty() const { return tokens_.empty(); }
  const MorphToken& operator[](std::size_t i) const { return tokens_[i]; }

  std::string serialize() const;
  std::vector<std::string> token_strings() const;

  friend bool operator==(const MorphSentence&, const MorphSentence&) = default;

 private:
  std::vector<MorphToken> tokens_;
};

MorphSentence parse_segmented_line(std::string_view line);

std::vector<std::string> to_words(const MorphSentence& s);
std::vector<WordSpan> word_spans(const MorphSentence& s);

/// Word view of a token run that may end inside a word: a trailing
/// word-internal run is flushed as its own word.
std::vector<std::string> phrase_to_words(const std::vector<MorphToken>& tokens);

/// Index of the word containing each token (same flush rule as phrase_to_words).
std::vector<std::size_t> token_word_index(const std::vector<MorphToken>& tokens);

/// True iff every word's tag sequence matches (PRE* STM SUF*)+.
bool validate_morphotactics(const MorphSentence& s);
bool validate_word_tags(const std::vector<MorphTag>& tags);

/// Deterministic suffix-stripping stand-in for an unsupervised segmenter.
/// Strips at most one suffix (longest match first) and never leaves an empty stem.
class StubSegmenter {
 public:
  StubSegmenter() = default;
  explicit StubSegmenter(std::vector<std::string> suffixes);

  std::vector<MorphToken> segment(std::string_view word) const;
  MorphSentence segment_line(const std::vector<std::string>& words) const;

  const std::vector<std::string>& suffixes() const { return suffixes_; }

 private:
  std::vector<std::string> suffixes_;
};

std::vector<MorphToken> stub_segment(std::string_view word,
                                     const std::vector<std::string>& suffixes);

/// Tokens of a word-granularity sentence lifted into the tagged form: every
/// word becomes a single word-final STM token.
MorphSentence words_as_sentence(const std::vector<std::string>& words);

/// Phrase-table key of a token at the given granularity.
std::string token_key(const MorphToken& t, Granularity g);
/// Inverse of token_key.
MorphToken token_from_key(std::string_view key, Granularity g);

std::vector<std::string> split_whitespace(std::string_view line);
std::string join(const std::vector<std::string>& parts, std::string_view sep = " ");

}  // namespace morphmt
