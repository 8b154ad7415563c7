#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "morphmt/align.hpp"
#include "morphmt/phrasex.hpp"
#include "morphmt/morpho.hpp"

namespace morphmt {

inline constexpr std::size_t kBleuOrder = 4;

/// Clipped n-gram matches and totals for orders 1..4 plus lengths; sums over sentences.
struct BleuStats {
  std::array<double, kBleuOrder> matches{};
  std::array<double, kBleuOrder> totals{};
  double hyp_length = 0.0;
  double ref_length = 0.0;

  BleuStats& operator+=(const BleuStats& o);
  BleuStats& operator-=(const BleuStats& o);
};

struct BleuReport {
  double score = 0.0;
  std::array<double, kBleuOrder> precisions{};
  double brevity_penalty = 0.0;
  double hyp_length = 0.0;
  double ref_length = 0.0;
};

BleuStats sentence_bleu_stats(const std::vector<std::string>& hyp, const std::vector<std::string>& ref);
BleuReport bleu_from_stats(const BleuStats& stats);

BleuReport bleu(const std::vector<std::vector<std::string>>& hyps, const std::vector<std::vector<std::string>>& refs);
/// BLEU over tagged morpheme tokens.
BleuReport m_bleu(const std::vector<MorphSentence>& hyps, const std::vector<MorphSentence>& refs);

/// Add-one smoothed sentence BLEU (orders >= 2), used only to rank single sentences.
double smoothed_sentence_bleu(const std::vector<std::string>& hyp, const std::vector<std::string>& ref);

/// Longest common subsequence over code points divided by the longer length.
double lcsr(std::string_view a, std::string_view b);

struct UsedPhrase {
  Span source;  // source word span
  std::string output;
};

struct ProximityResult {
  std::size_t triples = 0;
  std::size_t exact_matches = 0;
  std::size_t skipped_sentences = 0;
};

struct ProximityTriple {
  std::string source;
  std::string output;
  std::string reference;
  double similarity = 0.0;
  bool exact = false;
};

/// For each used phrase, project its source span through the source->reference
/// alignment and keep the (src, out, ref) triple when lcsr(out, ref) >= threshold.
/// Sentences without an alignment (nullptr entry or size mismatch) are skipped.
ProximityResult proximity_triples(const std::vector<std::vector<std::string>>& sources,
                                  const std::vector<std::vector<UsedPhrase>>& trace,
                                  const std::vector<std::vector<std::string>>& references,
                                  const std::vector<const AlignmentMatrix*>& ref_alignments, double threshold = 0.7,
                                  std::vector<ProximityTriple>* kept = nullptr);

/// Exact two-sided binomial sign test with p = 0.5 (ties excluded upstream).
double sign_test(std::size_t wins_a, std::size_t wins_b);

}  // namespace morphmt
