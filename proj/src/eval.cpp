#include "morphmt/eval.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "morphmt/error.hpp"
#include "morphmt/textio.hpp"

namespace morphmt {

BleuStats& BleuStats::operator+=(const BleuStats& o) {
  for (std::size_t n = 0; n < kBleuOrder; ++n) {
    matches[n] += o.matches[n];
    totals[n] += o.totals[n];
  }
  hyp_length += o.hyp_length;
  ref_length += o.ref_length;
  return *this;
}

BleuStats& BleuStats::operator-=(const BleuStats& o) {
  for (std::size_t n = 0; n < kBleuOrder; ++n) {
    matches[n] -= o.matches[n];
    totals[n] -= o.totals[n];
  }
  hyp_length -= o.hyp_length;
  ref_length -= o.ref_length;
  return *this;
}

BleuStats sentence_bleu_stats(const std::vector<std::string>& hyp, const std::vector<std::string>& ref) {
  BleuStats s;
  s.hyp_length = static_cast<double>(hyp.size());
  s.ref_length = static_cast<double>(ref.size());
  for (std::size_t n = 1; n <= kBleuOrder; ++n) {
    if (hyp.size() < n) continue;
    std::map<std::vector<std::string>, int> ref_counts;
    for (std::size_t i = 0; i + n <= ref.size(); ++i)
      ++ref_counts[std::vector<std::string>(ref.begin() + static_cast<long>(i), ref.begin() + static_cast<long>(i + n))];
    std::map<std::vector<std::string>, int> hyp_counts;
    for (std::size_t i = 0; i + n <= hyp.size(); ++i)
      ++hyp_counts[std::vector<std::string>(hyp.begin() + static_cast<long>(i), hyp.begin() + static_cast<long>(i + n))];
    double matched = 0.0;
    for (const auto& [gram, c] : hyp_counts) {
      const auto it = ref_counts.find(gram);
      if (it != ref_counts.end()) matched += std::min(c, it->second);
    }
    s.matches[n - 1] = matched;
    s.totals[n - 1] = static_cast<double>(hyp.size() - n + 1);
  }
  return s;
}

BleuReport bleu_from_stats(const BleuStats& stats) {
  BleuReport r;
  r.hyp_length = stats.hyp_length;
  r.ref_length = stats.ref_length;
  if (stats.hyp_length <= 0.0) return r;
  r.brevity_penalty = stats.hyp_length >= stats.ref_length ? 1.0 : std::exp(1.0 - stats.ref_length / stats.hyp_length);

  // Orders with no hypothesis n-grams anywhere are left out of the mean.
  double log_sum = 0.0;
  std::size_t used = 0;
  bool zero = false;
  for (std::size_t n = 0; n < kBleuOrder; ++n) {
    if (stats.totals[n] <= 0.0) continue;
    r.precisions[n] = stats.matches[n] / stats.totals[n];
    ++used;
    if (stats.matches[n] <= 0.0) {
      zero = true;
      continue;
    }
    log_sum += std::log(r.precisions[n]);
  }
  if (zero || used == 0) return r;
  r.score = r.brevity_penalty * std::exp(log_sum / static_cast<double>(used));
  return r;
}

BleuReport bleu(const std::vector<std::vector<std::string>>& hyps, const std::vector<std::vector<std::string>>& refs) {
  if (hyps.size() != refs.size()) throw Error("bleu: hypothesis and reference counts differ");
  if (hyps.empty()) throw Error("bleu: empty corpus");
  BleuStats total;
  for (std::size_t i = 0; i < hyps.size(); ++i) total += sentence_bleu_stats(hyps[i], refs[i]);
  return bleu_from_stats(total);
}

BleuReport m_bleu(const std::vector<MorphSentence>& hyps, const std::vector<MorphSentence>& refs) {
  std::vector<std::vector<std::string>> h, r;
  h.reserve(hyps.size());
  r.reserve(refs.size());
  for (const auto& s : hyps) h.push_back(s.token_strings());
  for (const auto& s : refs) r.push_back(s.token_strings());
  return bleu(h, r);
}

double smoothed_sentence_bleu(const std::vector<std::string>& hyp, const std::vector<std::string>& ref) {
  if (hyp.empty()) return 0.0;
  const BleuStats s = sentence_bleu_stats(hyp, ref);
  double log_sum = 0.0;
  for (std::size_t n = 0; n < kBleuOrder; ++n) {
    const double add = n == 0 ? 0.0 : 1.0;
    if (s.matches[n] + add <= 0.0) return 0.0;
    log_sum += std::log((s.matches[n] + add) / (s.totals[n] + add));
  }
  const double bp = s.hyp_length >= s.ref_length ? 1.0 : std::exp(1.0 - s.ref_length / s.hyp_length);
  return bp * std::exp(log_sum / static_cast<double>(kBleuOrder));
}

double lcsr(std::string_view a, std::string_view b) {
  if (a.empty() || b.empty()) throw Error("lcsr: empty input");
  const std::u32string x = utf8_decode(a);
  const std::u32string y = utf8_decode(b);
  std::vector<std::size_t> prev(y.size() + 1, 0), cur(y.size() + 1, 0);
  for (std::size_t i = 1; i <= x.size(); ++i) {
    for (std::size_t j = 1; j <= y.size(); ++j)
      cur[j] = x[i - 1] == y[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    std::swap(prev, cur);
  }
  return static_cast<double>(prev[y.size()]) / static_cast<double>(std::max(x.size(), y.size()));
}

ProximityResult proximity_triples(const std::vector<std::vector<std::string>>& sources,
                                  const std::vector<std::vector<UsedPhrase>>& trace,
                                  const std::vector<std::vector<std::string>>& references,
                                  const std::vector<const AlignmentMatrix*>& ref_alignments, double threshold,
                                  std::vector<ProximityTriple>* kept) {
  if (sources.size() != trace.size() || trace.size() != references.size())
    throw Error("proximity_triples: corpus size mismatch");
  ProximityResult result;
  for (std::size_t s = 0; s < trace.size(); ++s) {
    const AlignmentMatrix* a = s < ref_alignments.size() ? ref_alignments[s] : nullptr;
    if (!a || a->source_length() != sources[s].size() || a->target_length() != references[s].size()) {
      ++result.skipped_sentences;
      continue;
    }
    const auto links = a->links();
    for (const auto& used : trace[s]) {
      if (used.output.empty() || used.source.end >= sources[s].size()) continue;
      std::size_t lo = references[s].size(), hi = 0;
      for (const auto& [i, j] : links) {
        if (i < used.source.start || i > used.source.end) continue;
        lo = std::min(lo, j);
        hi = std::max(hi, j);
      }
      if (lo > hi) continue;
      const std::string ref =
          join(std::vector<std::string>(references[s].begin() + static_cast<long>(lo), references[s].begin() + static_cast<long>(hi) + 1));
      const double sim = lcsr(used.output, ref);
      if (sim < threshold) continue;
      ++result.triples;
      const bool exact = used.output == ref;
      if (exact) ++result.exact_matches;
      if (kept) {
        const std::string src = join(std::vector<std::string>(sources[s].begin() + static_cast<long>(used.source.start),
                                                              sources[s].begin() + static_cast<long>(used.source.end) + 1));
        kept->push_back(ProximityTriple{src, used.output, ref, sim, exact});
      }
    }
  }
  return result;
}

double sign_test(std::size_t wins_a, std::size_t wins_b) {
  const std::size_t n = wins_a + wins_b;
  if (n == 0) throw Error("sign_test: no decisive pairs");
  const std::size_t k = std::min(wins_a, wins_b);
  const double nd = static_cast<double>(n);
  // log of P(X <= k) for X ~ Binomial(n, 1/2), via log-sum-exp.
  std::vector<double> terms;
  terms.reserve(k + 1);
  for (std::size_t i = 0; i <= k; ++i) {
    const double id = static_cast<double>(i);
    terms.push_back(std::lgamma(nd + 1) - std::lgamma(id + 1) - std::lgamma(nd - id + 1) - nd * std::log(2.0));
  }
  const double mx = *std::max_element(terms.begin(), terms.end());
  double sum = 0.0;
  for (double t : terms) sum += std::exp(t - mx);
  const double tail = std::exp(mx + std::log(sum));
  return std::min(1.0, 2.0 * tail);
}

}  // namespace morphmt
