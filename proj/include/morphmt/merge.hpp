#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "morphmt/align.hpp"
#include "morphmt/morpho.hpp"
#include "morphmt/phrasex.hpp"

namespace morphmt {

/// Word -> morpheme tokens, taken from a corpus in both forms.
class SegmentationLexicon {
 public:
  /// Throws if the surfaces do not reassemble to `word`. First mapping wins.
  void add(const std::string& word, std::vector<MorphToken> tokens);
  const std::vector<MorphToken>* find(const std::string& word) const;
  /// Unknown words become a single STM token.
  std::vector<MorphToken> segment(const std::string& word) const;
  std::size_t size() const { return map_.size(); }

  /// Pairs line k of `words` with line k of `segmented`; word counts must agree.
  static SegmentationLexicon from_corpora(const std::vector<std::vector<std::string>>& words,
                                          const std::vector<MorphSentence>& segmented);

 private:
  std::map<std::string, std::vector<MorphToken>> map_;
};

/// Word table -> morpheme table. Word links expand to all morpheme pairs.
PhraseTable retokenize_pt(const PhraseTable& pt_w, const SegmentationLexicon& lexicon);
/// Separate lexicons for the source and target languages.
PhraseTable retokenize_pt(const PhraseTable& pt_w, const SegmentationLexicon& source_lexicon,
                          const SegmentationLexicon& target_lexicon);

/// Word links induced from morpheme links: a word pair is linked iff any of
/// its morpheme pairs is.
std::vector<Link> induce_word_alignment(const std::vector<MorphToken>& source, const std::vector<MorphToken>& target,
                                        const std::vector<Link>& morpheme_links);

/// Union of two tables with origin indicator features (n_features = 1 or 2).
/// Pairs present in both keep the primary entry.
PhraseTable merge_add_features(const PhraseTable& primary, const PhraseTable& secondary, int n_features);

/// Linear interpolation alpha * a + (1 - alpha) * b of the four scores over the key union.
PhraseTable merge_interpolate(const PhraseTable& a, const PhraseTable& b, double alpha);

struct LexicalModels {
  LexicalTable morph_fwd;  // t(target | source), morpheme tokens
  LexicalTable morph_bwd;  // t(source | target)
  LexicalTable word_fwd;
  LexicalTable word_bwd;
};

/// Count-based merge: phi from summed joint counts over summed marginals,
/// lexical weights interpolated between the morpheme view and the word view.
/// `pt_wm` is `pt_w` retokenized. A view without an entry is estimated from
/// the stored alignment and that view's lexical tables.
PhraseTable merge_our_method(const PhraseTable& pt_m, const PhraseTable& pt_wm, const PhraseTable& pt_w, double alpha,
                             const LexicalModels& lexical);

}  // namespace morphmt
