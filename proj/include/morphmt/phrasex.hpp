#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "morphmt/align.hpp"
#include "morphmt/morpho.hpp"

namespace morphmt {

/// Token index range [start, end], inclusive.
struct Span {
  std::size_t start = 0;
  std::size_t end = 0;

  std::size_t size() const { return end - start + 1; }
  friend auto operator<=>(const Span&, const Span&) = default;
};

struct PhrasePair {
  TokenSeq source;
  TokenSeq target;
  std::vector<Link> alignment;  // relative to the phrase, sorted
  Span source_span;             // position in the sentence
  Span target_span;

  friend bool operator==(const PhrasePair&, const PhrasePair&) = default;
};

/// All alignment-consistent boxes with both sides of at most `max_len` tokens.
std::vector<PhrasePair> extract_phrases(const TokenSeq& source, const TokenSeq& target,
                                        const AlignmentMatrix& a, std::size_t max_len);

/// Consistent boxes whose sides both start and end on word boundaries and
/// span at most `max_words` words each; token length is unbounded.
std::vector<PhrasePair> extract_phrases_boundary_aware(const MorphSentence& source, const MorphSentence& target,
                                                       const AlignmentMatrix& a, std::size_t max_words);

/// Standard lexical weight of a phrase pair under one internal alignment:
/// product over target tokens of the mean t(target|linked source), or
/// t(target|NULL) for unlinked target tokens.
double lexical_weight(const TokenSeq& source, const TokenSeq& target, const std::vector<Link>& alignment,
                      const LexicalTable& table);

/// Swaps (i,j) -> (j,i) and re-sorts.
std::vector<Link> transpose_links(const std::vector<Link>& links);

struct PhraseKey {
  TokenSeq source;
  TokenSeq target;
  friend auto operator<=>(const PhraseKey&, const PhraseKey&) = default;
};

struct PhraseEntry {
  double phi_fwd = 0.0;  // phi(target | source)
  double phi_bwd = 0.0;  // phi(source | target)
  double lex_fwd = 0.0;  // lex(target | source)
  double lex_bwd = 0.0;  // lex(source | target)
  double penalty = 0.0;
  double count = 0.0;  // joint extraction count
  std::vector<Link> alignment;
  std::vector<double> extra;  // optional merge-origin features
};

inline constexpr double kPhrasePenaltyValue = 2.718281828459045;  // e^1

struct PhraseTableMeta {
  std::size_t max_span = 0;
  bool boundary_aware = false;
};

class PhraseTable {
 public:
  using Map = std::map<PhraseKey, PhraseEntry>;

  PhraseTable() = default;
  explicit PhraseTable(Granularity g, PhraseTableMeta meta = {}) : granularity_(g), meta_(meta) {}

  Granularity granularity() const { return granularity_; }
  const PhraseTableMeta& meta() const { return meta_; }
  std::size_t extra_features() const { return extra_features_; }
  void set_extra_features(std::size_t n) { extra_features_ = n; }

  const Map& entries() const { return entries_; }
  Map& mutable_entries() { return entries_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

  const PhraseEntry* find(const PhraseKey& key) const;
  PhraseEntry& insert(PhraseKey key, PhraseEntry entry);

  void write(std::ostream& out) const;
  static PhraseTable read(std::istream& in, Granularity g);

 private:
  Granularity granularity_ = Granularity::kWord;
  PhraseTableMeta meta_;
  std::size_t extra_features_ = 0;
  Map entries_;
};

/// ML phrase probabilities from the multiset of extracted pairs plus
/// max-over-alignments lexical weights.
/// `lex_fwd_table` holds t(target|source), `lex_bwd_table` holds t(source|target).
PhraseTable score_phrase_table(const std::vector<PhrasePair>& pairs, const LexicalTable& lex_fwd_table,
                               const LexicalTable& lex_bwd_table, Granularity g, PhraseTableMeta meta = {});

/// Largest |sum - 1| of phi_fwd over each source side and phi_bwd over each target side.
double max_normalization_error(const PhraseTable& table);

/// Extraction over a whole aligned corpus. `boundary_aware` requires
/// morpheme-granularity sentences.
struct ExtractionConfig {
  std::size_t max_len = 7;
  bool boundary_aware = false;
};

std::vector<PhrasePair> extract_corpus(const std::vector<MorphSentence>& sources,
                                       const std::vector<MorphSentence>& targets,
                                       const std::vector<AlignmentMatrix>& alignments, Granularity g,
                                       const ExtractionConfig& config);

}  // namespace morphmt
