#include "morphmt/phrasex.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>

#include "morphmt/error.hpp"
#include "morphmt/textio.hpp"

namespace morphmt {

namespace {

// Extraction over "units": each unit is a contiguous token range. Classic
// extraction uses one unit per token, boundary-aware extraction one per word.
struct UnitView {
  std::vector<Span> units;
  std::vector<std::size_t> unit_of;  // token -> unit
};

UnitView token_units(std::size_t n) {
  UnitView v;
  v.units.reserve(n);
  v.unit_of.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    v.units.push_back({i, i});
    v.unit_of[i] = i;
  }
  return v;
}

UnitView word_units(const MorphSentence& s) {
  UnitView v;
  v.unit_of.resize(s.size());
  for (const auto& w : word_spans(s)) {
    for (std::size_t i = w.start; i <= w.end; ++i) v.unit_of[i] = v.units.size();
    v.units.push_back({w.start, w.end});
  }
  return v;
}

std::vector<PhrasePair> extract_units(const TokenSeq& source, const TokenSeq& target, const AlignmentMatrix& a,
                                      const UnitView& src_units, const UnitView& tgt_units, std::size_t max_units) {
  if (a.source_length() != source.size() || a.target_length() != target.size())
    throw Error("extract: alignment dimensions do not match the sentence pair");

  std::vector<PhrasePair> out;
  if (max_units == 0 || a.empty()) return out;

  const auto links = a.links();
  std::vector<std::vector<std::size_t>> src_of_tgt(target.size());
  std::vector<std::vector<std::size_t>> tgt_of_src(source.size());
  for (const auto& [i, j] : links) {
    src_of_tgt[j].push_back(i);
    tgt_of_src[i].push_back(j);
  }
  // A target unit is free when none of its tokens is linked.
  std::vector<char> unit_free(tgt_units.units.size(), 1);
  for (const auto& [i, j] : links) unit_free[tgt_units.unit_of[j]] = 0;

  const std::size_t n_src = src_units.units.size();
  const std::size_t n_tgt = tgt_units.units.size();
  for (std::size_t us = 0; us < n_src; ++us) {
    for (std::size_t ue = us; ue < n_src && ue - us + 1 <= max_units; ++ue) {
      const std::size_t s_lo = src_units.units[us].start;
      const std::size_t s_hi = src_units.units[ue].end;

      std::size_t t_min = target.size(), t_max = 0;
      bool any = false;
      for (std::size_t i = s_lo; i <= s_hi; ++i) {
        for (std::size_t j : tgt_of_src[i]) {
          t_min = std::min(t_min, j);
          t_max = std::max(t_max, j);
          any = true;
        }
      }
      if (!any) continue;

      const std::size_t vs = tgt_units.unit_of[t_min];
      const std::size_t ve = tgt_units.unit_of[t_max];
      if (ve - vs + 1 > max_units) continue;

      bool consistent = true;
      for (std::size_t j = tgt_units.units[vs].start; j <= tgt_units.units[ve].end && consistent; ++j)
        for (std::size_t i : src_of_tgt[j])
          if (i < s_lo || i > s_hi) {
            consistent = false;
            break;
          }
      if (!consistent) continue;

      // Grow over free target units on both sides.
      for (std::size_t fs = vs;;) {
        for (std::size_t fe = ve; fe < n_tgt && fe - fs + 1 <= max_units;) {
          PhrasePair p;
          p.source_span = {s_lo, s_hi};
          p.target_span = {tgt_units.units[fs].start, tgt_units.units[fe].end};
          p.source.assign(source.begin() + static_cast<long>(s_lo), source.begin() + static_cast<long>(s_hi) + 1);
          p.target.assign(target.begin() + static_cast<long>(p.target_span.start),
                          target.begin() + static_cast<long>(p.target_span.end) + 1);
          for (const auto& [i, j] : links)
            if (i >= s_lo && i <= s_hi && j >= p.target_span.start && j <= p.target_span.end)
              p.alignment.emplace_back(i - s_lo, j - p.target_span.start);
          out.push_back(std::move(p));
          ++fe;
          if (fe >= n_tgt || !unit_free[fe]) break;
        }
        if (fs == 0 || !unit_free[fs - 1]) break;
        --fs;
        if (ve - fs + 1 > max_units) break;
      }
    }
  }
  return out;
}

}  // namespace

std::vector<PhrasePair> extract_phrases(const TokenSeq& source, const TokenSeq& target, const AlignmentMatrix& a,
                                        std::size_t max_len) {
  return extract_units(source, target, a, token_units(source.size()), token_units(target.size()), max_len);
}

std::vector<PhrasePair> extract_phrases_boundary_aware(const MorphSentence& source, const MorphSentence& target,
                                                       const AlignmentMatrix& a, std::size_t max_words) {
  return extract_units(source.token_strings(), target.token_strings(), a, word_units(source), word_units(target),
                       max_words);
}

double lexical_weight(const TokenSeq& source, const TokenSeq& target, const std::vector<Link>& alignment,
                      const LexicalTable& table) {
  static const std::string kNull(kNullToken);
  std::vector<std::vector<std::size_t>> linked(target.size());
  for (const auto& [i, j] : alignment) linked.at(j).push_back(i);
  double weight = 1.0;
  for (std::size_t j = 0; j < target.size(); ++j) {
    if (linked[j].empty()) {
      weight *= table.prob(kNull, target[j]);
      continue;
    }
    double sum = 0.0;
    for (std::size_t i : linked[j]) sum += table.prob(source.at(i), target[j]);
    weight *= sum / static_cast<double>(linked[j].size());
  }
  return weight;
}

std::vector<Link> transpose_links(const std::vector<Link>& links) {
  std::vector<Link> out;
  out.reserve(links.size());
  for (const auto& [i, j] : links) out.emplace_back(j, i);
  std::sort(out.begin(), out.end());
  return out;
}

const PhraseEntry* PhraseTable::find(const PhraseKey& key) const {
  const auto it = entries_.find(key);
  return it == entries_.end() ? nullptr : &it->second;
}

PhraseEntry& PhraseTable::insert(PhraseKey key, PhraseEntry entry) {
  return entries_.insert_or_assign(std::move(key), std::move(entry)).first->second;
}

void PhraseTable::write(std::ostream& out) const {
  std::string line;
  for (const auto& [key, e] : entries_) {
    line.clear();
    line += join(key.source);
    line += " ||| ";
    line += join(key.target);
    line += " ||| ";
    line += format_double(e.phi_fwd);
    for (double v : {e.phi_bwd, e.lex_fwd, e.lex_bwd, e.penalty}) {
      line += ' ';
      line += format_double(v);
    }
    for (double v : e.extra) {
      line += ' ';
      line += format_double(v);
    }
    line += " ||| ";
    line += format_double(e.count);
    line += " |||";
    for (const auto& [i, j] : e.alignment) {
      line += ' ';
      line += std::to_string(i) + "-" + std::to_string(j);
    }
    out << line << '\n';
  }
}

PhraseTable PhraseTable::read(std::istream& in, Granularity g) {
  PhraseTable table(g);
  std::string line;
  std::size_t line_no = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (split_whitespace(line).empty()) continue;
    const auto fields = split_fields(line, "|||");
    if (fields.size() != 5) throw ParseError("phrase table line needs 5 '|||' fields", line_no);
    PhraseKey key{split_whitespace(fields[0]), split_whitespace(fields[1])};
    if (key.source.empty() || key.target.empty()) throw ParseError("empty phrase side", line_no);
    if (g == Granularity::kMorpheme) {
      for (const auto& t : key.source) parse_token(t, line_no);
      for (const auto& t : key.target) parse_token(t, line_no);
    }
    const auto scores = split_whitespace(fields[2]);
    if (scores.size() < 5) throw ParseError("phrase table line needs at least 5 scores", line_no);
    PhraseEntry e;
    e.phi_fwd = parse_double(scores[0], line_no);
    e.phi_bwd = parse_double(scores[1], line_no);
    e.lex_fwd = parse_double(scores[2], line_no);
    e.lex_bwd = parse_double(scores[3], line_no);
    e.penalty = parse_double(scores[4], line_no);
    for (std::size_t k = 5; k < scores.size(); ++k) e.extra.push_back(parse_double(scores[k], line_no));
    if (first) {
      table.extra_features_ = e.extra.size();
      first = false;
    } else if (e.extra.size() != table.extra_features_) {
      throw ParseError("inconsistent number of extra feature columns", line_no);
    }
    const auto count_field = split_whitespace(fields[3]);
    if (count_field.size() != 1) throw ParseError("phrase table count field must hold one number", line_no);
    e.count = parse_double(count_field[0], line_no);
    const auto links = AlignmentMatrix::from_pharaoh(fields[4], key.source.size(), key.target.size());
    e.alignment = links.links();
    table.entries_.insert_or_assign(std::move(key), std::move(e));
  }
  return table;
}

PhraseTable score_phrase_table(const std::vector<PhrasePair>& pairs, const LexicalTable& lex_fwd_table,
                               const LexicalTable& lex_bwd_table, Granularity g, PhraseTableMeta meta) {
  struct Accum {
    double count = 0.0;
    std::map<std::vector<Link>, double> alignments;
  };
  std::map<PhraseKey, Accum> joint;
  std::map<TokenSeq, double> src_marginal;
  std::map<TokenSeq, double> tgt_marginal;
  for (const auto& p : pairs) {
    auto& acc = joint[PhraseKey{p.source, p.target}];
    acc.count += 1.0;
    acc.alignments[p.alignment] += 1.0;
    src_marginal[p.source] += 1.0;
    tgt_marginal[p.target] += 1.0;
  }

  PhraseTable table(g, meta);
  for (const auto& [key, acc] : joint) {
    PhraseEntry e;
    e.count = acc.count;
    e.phi_fwd = acc.count / src_marginal[key.source];
    e.phi_bwd = acc.count / tgt_marginal[key.target];
    e.penalty = kPhrasePenaltyValue;
    double best_count = -1.0;
    for (const auto& [links, c] : acc.alignments) {
      if (c > best_count) {  // std::map order keeps the lexicographically smallest on ties
        best_count = c;
        e.alignment = links;
      }
      e.lex_fwd = std::max(e.lex_fwd, lexical_weight(key.source, key.target, links, lex_fwd_table));
      e.lex_bwd = std::max(e.lex_bwd, lexical_weight(key.target, key.source, transpose_links(links), lex_bwd_table));
    }
    table.insert(key, std::move(e));
  }
  return table;
}

double max_normalization_error(const PhraseTable& table) {
  std::map<TokenSeq, double> fwd, bwd;
  for (const auto& [key, e] : table.entries()) {
    fwd[key.source] += e.phi_fwd;
    bwd[key.target] += e.phi_bwd;
  }
  double worst = 0.0;
  for (const auto& [k, v] : fwd) worst = std::max(worst, std::abs(v - 1.0));
  for (const auto& [k, v] : bwd) worst = std::max(worst, std::abs(v - 1.0));
  return worst;
}

std::vector<PhrasePair> extract_corpus(const std::vector<MorphSentence>& sources,
                                       const std::vector<MorphSentence>& targets,
                                       const std::vector<AlignmentMatrix>& alignments, Granularity g,
                                       const ExtractionConfig& config) {
  if (sources.size() != targets.size() || sources.size() != alignments.size())
    throw Error("extract_corpus: size mismatch");
  std::vector<PhrasePair> all;
  for (std::size_t k = 0; k < sources.size(); ++k) {
    std::vector<PhrasePair> pairs;
    if (config.boundary_aware) {
      if (g != Granularity::kMorpheme) throw Error("boundary-aware extraction needs morpheme granularity");
      pairs = extract_phrases_boundary_aware(sources[k], targets[k], alignments[k], config.max_len);
    } else {
      TokenSeq src, tgt;
      for (const auto& t : sources[k].tokens()) src.push_back(token_key(t, g));
      for (const auto& t : targets[k].tokens()) tgt.push_back(token_key(t, g));
      pairs = extract_phrases(src, tgt, alignments[k], config.max_len);
    }
    std::move(pairs.begin(), pairs.end(), std::back_inserter(all));
  }
  return all;
}

}  // namespace morphmt
