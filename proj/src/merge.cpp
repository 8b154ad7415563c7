#include "morphmt/merge.hpp"

#include <cmath>
#include <set>

#include "morphmt/error.hpp"

namespace morphmt {

namespace {

std::vector<MorphToken> parse_keys(const TokenSeq& keys) {
  std::vector<MorphToken> out;
  out.reserve(keys.size());
  for (const auto& k : keys) out.push_back(token_from_key(k, Granularity::kMorpheme));
  return out;
}

TokenSeq word_keys(const std::vector<MorphToken>& tokens) { return phrase_to_words(tokens); }

void require_plain(const PhraseTable& t, const char* what) {
  if (t.extra_features() != 0) throw Error(std::string(what) + ": input table already carries extra features");
}

// Retokenized side plus, per word, the index range of its morphemes.
struct Expanded {
  TokenSeq keys;
  std::vector<std::pair<std::size_t, std::size_t>> ranges;
};

Expanded expand(const TokenSeq& words, const SegmentationLexicon& lexicon) {
  Expanded e;
  for (const auto& w : words) {
    const std::size_t start = e.keys.size();
    for (const auto& t : lexicon.segment(w)) e.keys.push_back(t.serialize());
    e.ranges.emplace_back(start, e.keys.size());
  }
  return e;
}

}  // namespace

void SegmentationLexicon::add(const std::string& word, std::vector<MorphToken> tokens) {
  if (tokens.empty()) throw Error("lexicon: empty segmentation for '" + word + "'");
  std::string joined;
  for (const auto& t : tokens) joined += t.surface;
  if (joined != word) throw Error("lexicon: segmentation of '" + word + "' reassembles to '" + joined + "'");
  for (std::size_t i = 0; i < tokens.size(); ++i) tokens[i].continues = i + 1 < tokens.size();
  map_.emplace(word, std::move(tokens));
}

const std::vector<MorphToken>* SegmentationLexicon::find(const std::string& word) const {
  const auto it = map_.find(word);
  return it == map_.end() ? nullptr : &it->second;
}

std::vector<MorphToken> SegmentationLexicon::segment(const std::string& word) const {
  if (const auto* t = find(word)) return *t;
  return {MorphToken{word, MorphTag::kStem, false}};
}

SegmentationLexicon SegmentationLexicon::from_corpora(const std::vector<std::vector<std::string>>& words,
                                                      const std::vector<MorphSentence>& segmented) {
  if (words.size() != segmented.size()) throw Error("lexicon: corpus line counts differ");
  SegmentationLexicon lex;
  for (std::size_t k = 0; k < words.size(); ++k) {
    const auto& toks = segmented[k].tokens();
    const auto spans = word_spans(segmented[k]);
    if (spans.size() != words[k].size())
      throw Error("lexicon: line " + std::to_string(k + 1) + " has mismatched word counts");
    for (std::size_t w = 0; w < spans.size(); ++w)
      lex.add(words[k][w], std::vector<MorphToken>(toks.begin() + static_cast<long>(spans[w].start),
                                                   toks.begin() + static_cast<long>(spans[w].end) + 1));
  }
  return lex;
}

PhraseTable retokenize_pt(const PhraseTable& pt_w, const SegmentationLexicon& lexicon) {
  return retokenize_pt(pt_w, lexicon, lexicon);
}

PhraseTable retokenize_pt(const PhraseTable& pt_w, const SegmentationLexicon& source_lexicon,
                          const SegmentationLexicon& target_lexicon) {
  if (pt_w.granularity() != Granularity::kWord) throw Error("retokenize_pt: input must be a word table");
  PhraseTable out(Granularity::kMorpheme, PhraseTableMeta{pt_w.meta().max_span, false});
  out.set_extra_features(pt_w.extra_features());
  for (const auto& [key, entry] : pt_w.entries()) {
    const Expanded src = expand(key.source, source_lexicon);
    const Expanded tgt = expand(key.target, target_lexicon);
    PhraseEntry e = entry;
    std::set<Link> links;
    for (const auto& [i, j] : entry.alignment)
      for (std::size_t a = src.ranges[i].first; a < src.ranges[i].second; ++a)
        for (std::size_t b = tgt.ranges[j].first; b < tgt.ranges[j].second; ++b) links.emplace(a, b);
    e.alignment.assign(links.begin(), links.end());
    out.insert(PhraseKey{src.keys, tgt.keys}, std::move(e));
  }
  return out;
}

std::vector<Link> induce_word_alignment(const std::vector<MorphToken>& source, const std::vector<MorphToken>& target,
                                        const std::vector<Link>& morpheme_links) {
  const auto sw = token_word_index(source);
  const auto tw = token_word_index(target);
  std::set<Link> links;
  for (const auto& [i, j] : morpheme_links) {
    if (i >= sw.size() || j >= tw.size()) throw Error("induce_word_alignment: link out of range");
    links.emplace(sw[i], tw[j]);
  }
  return {links.begin(), links.end()};
}

PhraseTable merge_add_features(const PhraseTable& primary, const PhraseTable& secondary, int n_features) {
  if (primary.granularity() != secondary.granularity()) throw Error("merge_add_features: granularity mismatch");
  if (n_features != 1 && n_features != 2) throw Error("merge_add_features: n_features must be 1 or 2");
  require_plain(primary, "merge_add_features");
  require_plain(secondary, "merge_add_features");

  const double e1 = std::exp(1.0);
  PhraseTable out(primary.granularity(), primary.meta());
  out.set_extra_features(static_cast<std::size_t>(n_features));
  for (const auto& [key, entry] : primary.entries()) {
    PhraseEntry e = entry;
    const bool both = secondary.find(key) != nullptr;
    if (n_features == 1)
      e.extra = {both ? e1 : std::exp(2.0 / 3.0)};
    else
      e.extra = {e1, both ? e1 : 1.0};
    out.insert(key, std::move(e));
  }
  for (const auto& [key, entry] : secondary.entries()) {
    if (primary.find(key)) continue;
    PhraseEntry e = entry;
    if (n_features == 1)
      e.extra = {std::exp(1.0 / 3.0)};
    else
      e.extra = {1.0, e1};
    out.insert(key, std::move(e));
  }
  return out;
}

PhraseTable merge_interpolate(const PhraseTable& a, const PhraseTable& b, double alpha) {
  if (a.granularity() != b.granularity()) throw Error("merge_interpolate: granularity mismatch");
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw Error("merge_interpolate: alpha must be in [0, 1]");
  require_plain(a, "merge_interpolate");
  require_plain(b, "merge_interpolate");

  std::set<PhraseKey> keys;
  for (const auto& [k, e] : a.entries()) keys.insert(k);
  for (const auto& [k, e] : b.entries()) keys.insert(k);

  PhraseTable out(a.granularity(), a.meta());
  const PhraseEntry zero;
  for (const auto& key : keys) {
    const PhraseEntry* ea = a.find(key);
    const PhraseEntry* eb = b.find(key);
    const PhraseEntry& x = ea ? *ea : zero;
    const PhraseEntry& y = eb ? *eb : zero;
    PhraseEntry e;
    e.phi_fwd = alpha * x.phi_fwd + (1.0 - alpha) * y.phi_fwd;
    e.phi_bwd = alpha * x.phi_bwd + (1.0 - alpha) * y.phi_bwd;
    e.lex_fwd = alpha * x.lex_fwd + (1.0 - alpha) * y.lex_fwd;
    e.lex_bwd = alpha * x.lex_bwd + (1.0 - alpha) * y.lex_bwd;
    e.penalty = kPhrasePenaltyValue;
    e.count = x.count + y.count;
    e.alignment = ea ? ea->alignment : eb->alignment;
    out.insert(key, std::move(e));
  }
  return out;
}

PhraseTable merge_our_method(const PhraseTable& pt_m, const PhraseTable& pt_wm, const PhraseTable& pt_w, double alpha,
                             const LexicalModels& lexical) {
  if (pt_m.granularity() != Granularity::kMorpheme || pt_wm.granularity() != Granularity::kMorpheme)
    throw Error("merge_our_method: pt_m and pt_wm must be morpheme tables");
  if (pt_w.granularity() != Granularity::kWord) throw Error("merge_our_method: pt_w must be a word table");
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw Error("merge_our_method: alpha must be in [0, 1]");
  require_plain(pt_m, "merge_our_method");
  require_plain(pt_wm, "merge_our_method");
  for (const auto* t : {&pt_m, &pt_wm})
    for (const auto& [k, e] : t->entries())
      if (!(e.count > 0.0)) throw Error("merge_our_method: entry without a joint count");

  std::map<PhraseKey, double> joint;
  std::map<TokenSeq, double> src_marginal, tgt_marginal;
  for (const auto* t : {&pt_m, &pt_wm})
    for (const auto& [k, e] : t->entries()) joint[k] += e.count;
  for (const auto& [k, c] : joint) {
    src_marginal[k.source] += c;
    tgt_marginal[k.target] += c;
  }

  PhraseTable out(Granularity::kMorpheme, pt_m.meta());
  for (const auto& [key, count] : joint) {
    const PhraseEntry* em = pt_m.find(key);
    const PhraseEntry* ewm = pt_wm.find(key);
    const std::vector<Link>& links = em ? em->alignment : ewm->alignment;

    double m_fwd, m_bwd;
    if (em) {
      m_fwd = em->lex_fwd;
      m_bwd = em->lex_bwd;
    } else {
      m_fwd = lexical_weight(key.source, key.target, links, lexical.morph_fwd);
      m_bwd = lexical_weight(key.target, key.source, transpose_links(links), lexical.morph_bwd);
    }

    const auto src_tokens = parse_keys(key.source);
    const auto tgt_tokens = parse_keys(key.target);
    const TokenSeq src_words = word_keys(src_tokens);
    const TokenSeq tgt_words = word_keys(tgt_tokens);
    double w_fwd, w_bwd;
    if (const PhraseEntry* ew = pt_w.find(PhraseKey{src_words, tgt_words})) {
      w_fwd = ew->lex_fwd;
      w_bwd = ew->lex_bwd;
    } else {
      const auto word_links = induce_word_alignment(src_tokens, tgt_tokens, links);
      w_fwd = lexical_weight(src_words, tgt_words, word_links, lexical.word_fwd);
      w_bwd = lexical_weight(tgt_words, src_words, transpose_links(word_links), lexical.word_bwd);
    }

    PhraseEntry e;
    e.count = count;
    e.phi_fwd = count / src_marginal[key.source];
    e.phi_bwd = count / tgt_marginal[key.target];
    e.lex_fwd = alpha * m_fwd + (1.0 - alpha) * w_fwd;
    e.lex_bwd = alpha * m_bwd + (1.0 - alpha) * w_bwd;
    e.penalty = kPhrasePenaltyValue;
    e.alignment = links;
    out.insert(key, std::move(e));
  }
  return out;
}

}  // namespace morphmt
