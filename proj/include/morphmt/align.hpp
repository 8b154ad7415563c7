#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "morphmt/morpho.hpp"

namespace morphmt {

using TokenSeq = std::vector<std::string>;

struct SentencePair {
  TokenSeq source;
  TokenSeq target;
};

struct ParallelCorpus {
  std::vector<SentencePair> pairs;
  Granularity granularity = Granularity::kWord;
  std::size_t dropped = 0;  // pairs with an empty side, discarded at construction

  ParallelCorpus() = default;
  ParallelCorpus(std::vector<SentencePair> all, Granularity g);

  std::size_t size() const { return pairs.size(); }
  bool empty() const { return pairs.empty(); }
};

inline constexpr std::string_view kNullToken = "NULL";
inline constexpr double kProbabilityFloor = 1e-9;

/// t(target | source), including the NULL source token.
class LexicalTable {
 public:
  double prob(const std::string& source, const std::string& target) const;  // floored
  /// Exact stored value, 0 if absent.
  double stored(const std::string& source, const std::string& target) const;
  bool has_target(const std::string& target) const { return targets_.count(target) > 0; }

  void set(const std::string& source, const std::string& target, double p);
  void normalize();

  const std::unordered_map<std::string, std::unordered_map<std::string, double>>& rows() const {
    return table_;
  }
  std::size_t size() const;

 private:
  std::unordered_map<std::string, std::unordered_map<std::string, double>> table_;
  std::unordered_map<std::string, std::size_t> targets_;
};

using Link = std::pair<std::size_t, std::size_t>;  // (source index, target index)

class AlignmentMatrix {
 public:
  AlignmentMatrix() = default;
  AlignmentMatrix(std::size_t source_len, std::size_t target_len) : src_len_(source_len), tgt_len_(target_len) {}

  void add(std::size_t i, std::size_t j);  // throws Error when out of bounds
  bool contains(std::size_t i, std::size_t j) const;
  std::size_t source_length() const { return src_len_; }
  std::size_t target_length() const { return tgt_len_; }

  /// Sorted, unique.
  std::vector<Link> links() const;
  std::size_t link_count() const { return links_.size(); }
  bool empty() const { return links_.empty(); }

  AlignmentMatrix transposed() const;

  /// Pharaoh `i-j` format, 0-based.
  std::string to_pharaoh() const;
  static AlignmentMatrix from_pharaoh(std::string_view line, std::size_t source_len, std::size_t target_len);

  friend bool operator==(const AlignmentMatrix&, const AlignmentMatrix&) = default;

 private:
  std::size_t src_len_ = 0;
  std::size_t tgt_len_ = 0;
  std::vector<Link> links_;  // sorted
};

/// EM-trained IBM Model 1 table t(target|source). When `init` is given,
/// training continues from it; otherwise t starts uniform over co-occurring
/// targets.
LexicalTable train_model1(const ParallelCorpus& corpus, int iterations, const LexicalTable* init = nullptr);

/// Corpus log-likelihood under Model 1 (uniform alignment prior, NULL included).
double model1_log_likelihood(const ParallelCorpus& corpus, const LexicalTable& table);

AlignmentMatrix viterbi_align(const TokenSeq& source, const TokenSeq& target, const LexicalTable& table);

enum class SymmetrizeHeuristic { kIntersection, kUnion, kGrowDiagFinalAnd };
SymmetrizeHeuristic parse_heuristic(std::string_view name);

/// `rev` is a target->source alignment (its source side is fwd's target side).
AlignmentMatrix symmetrize(const AlignmentMatrix& fwd, const AlignmentMatrix& rev, SymmetrizeHeuristic heuristic);

/// Swaps source and target sides.
ParallelCorpus reversed(const ParallelCorpus& corpus);

/// Relative-frequency lexical table t(target|source) from aligned links;
/// unaligned target tokens count towards t(target|NULL).
LexicalTable lexical_table_from_alignments(const ParallelCorpus& corpus,
                                           const std::vector<AlignmentMatrix>& alignments);

/// `source target probability` lines, sorted.
void write_lexical_table(std::ostream& out, const LexicalTable& table);
LexicalTable read_lexical_table(std::istream& in);

struct AlignmentConfig {
  int iterations = 5;
  SymmetrizeHeuristic heuristic = SymmetrizeHeuristic::kGrowDiagFinalAnd;
};

struct CorpusAlignment {
  LexicalTable fwd_model;  // t(target|source)
  LexicalTable rev_model;  // t(source|target)
  std::vector<AlignmentMatrix> alignments;
};

/// Model 1 in both directions, Viterbi, then symmetrization; one alignment per pair.
CorpusAlignment align_corpus(const ParallelCorpus& corpus, const AlignmentConfig& config);

}  // namespace morphmt
