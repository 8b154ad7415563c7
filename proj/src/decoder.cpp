#include "morphmt/decoder.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <istream>
#include <limits>
#include <ostream>
#include <queue>
#include <set>
#include <unordered_map>

#include "morphmt/error.hpp"
#include "morphmt/textio.hpp"

namespace morphmt {

std::optional<Feature> feature_from_name(std::string_view name) {
  for (std::size_t i = 0; i < kNumFeatures; ++i)
    if (kFeatureNames[i] == name) return static_cast<Feature>(i);
  return std::nullopt;
}

FeatureVector& operator+=(FeatureVector& a, const FeatureVector& b) {
  for (std::size_t i = 0; i < kNumFeatures; ++i) a[i] += b[i];
  return a;
}

FeatureWeights FeatureWeights::defaults(bool lm_morph, bool lm_word, std::size_t merge_features) {
  FeatureWeights w;
  if (lm_morph) w.set(kLmMorph, 0.5);
  if (lm_word) w.set(kLmWord, 0.5);
  w.set(kPhiFwd, 0.2);
  w.set(kPhiBwd, 0.2);
  w.set(kLexFwd, 0.2);
  w.set(kLexBwd, 0.2);
  w.set(kPhrasePenalty, 0.0);
  w.set(kWordPenalty, 0.0);
  w.set(kDistortion, 0.3);
  if (merge_features >= 1) w.set(kMergeFeat1, 0.2);
  if (merge_features >= 2) w.set(kMergeFeat2, 0.2);
  return w;
}

void FeatureWeights::set(Feature f, double v) {
  if (!std::isfinite(v)) throw Error("feature weight must be finite");
  values_[f] = v;
  active_[f] = true;
}

std::vector<Feature> FeatureWeights::active_features() const {
  std::vector<Feature> out;
  for (std::size_t i = 0; i < kNumFeatures; ++i)
    if (active_[i]) out.push_back(static_cast<Feature>(i));
  return out;
}

double FeatureWeights::dot(const FeatureVector& features) const {
  double s = 0.0;
  for (std::size_t i = 0; i < kNumFeatures; ++i)
    if (active_[i] && values_[i] != 0.0) s += values_[i] * features[i];
  return s;
}

void FeatureWeights::write(std::ostream& out) const {
  for (std::size_t i = 0; i < kNumFeatures; ++i)
    if (active_[i]) out << kFeatureNames[i] << '\t' << format_double(values_[i]) << '\n';
}

FeatureWeights FeatureWeights::read(std::istream& in) {
  FeatureWeights w;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto parts = split_whitespace(line);
    if (parts.empty()) continue;
    if (parts.size() != 2) throw ParseError("weights line must be 'name<TAB>value'", line_no);
    const auto f = feature_from_name(parts[0]);
    if (!f) throw ParseError("unknown feature '" + parts[0] + "'", line_no);
    w.set(*f, parse_double(parts[1], line_no));
  }
  return w;
}

// ---------------------------------------------------------------------------

namespace {

constexpr double kScoreFloor = 1e-9;
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double floored_log(double v) { return std::log(std::max(v, kScoreFloor)); }

std::size_t count_words(const std::vector<MorphToken>& tokens) {
  return static_cast<std::size_t>(std::count_if(tokens.begin(), tokens.end(), [](const MorphToken& t) { return !t.continues; }));
}

}  // namespace

struct Decoder::Option {
  Span units;
  Span tokens;
  std::vector<MorphToken> target;
  std::vector<std::string> target_keys;  // morpheme-LM tokens
  FeatureVector tm{};
  double estimate = 0.0;
  bool oov = false;
};

struct Decoder::Search {
  struct Edge {
    std::size_t prev;
    const Option* option;  // null for the goal transition
    FeatureVector delta;
    double delta_score;
  };
  struct Node {
    std::vector<std::uint64_t> coverage;
    std::size_t covered = 0;
    std::size_t next_pos = 0;
    TwinScorerState lm;
    double score = kNegInf;
    double future = 0.0;
    std::vector<Edge> in;
  };
  static std::size_t key_hash(const Node& n) {
    std::size_t h = n.lm.hash();
    for (auto w : n.coverage) h ^= std::hash<std::uint64_t>{}(w) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    return h ^ (n.next_pos * 0x100000001b3ULL);
  }
  static bool same_state(const Node& a, const Node& b) {
    return a.next_pos == b.next_pos && a.coverage == b.coverage && a.lm == b.lm;
  }

  std::vector<Node> nodes;
};

Decoder::Decoder(const PhraseTable& table, const NGramModel* lm_morph, const NGramModel* lm_word, DecoderConfig config)
    : table_(table), lm_m_(lm_morph), lm_w_(lm_word), config_(config) {
  for (const auto& kv : table_.entries()) index_[join(kv.first.source)].push_back(&kv);
}

FeatureVector Decoder::entry_features(const PhraseEntry& e) const {
  FeatureVector f{};
  f[kPhiFwd] = floored_log(e.phi_fwd);
  f[kPhiBwd] = floored_log(e.phi_bwd);
  f[kLexFwd] = floored_log(e.lex_fwd);
  f[kLexBwd] = floored_log(e.lex_bwd);
  f[kPhrasePenalty] = floored_log(e.penalty);
  if (e.extra.size() >= 1) f[kMergeFeat1] = floored_log(e.extra[0]);
  if (e.extra.size() >= 2) f[kMergeFeat2] = floored_log(e.extra[1]);
  return f;
}

Translation Decoder::decode(const MorphSentence& source, const FeatureWeights& weights) const {
  auto list = search(source, weights, 1);
  if (list.empty()) throw Error("decoder produced no complete hypothesis");
  return std::move(list.front());
}

NBestList Decoder::nbest(const MorphSentence& source, const FeatureWeights& weights, std::size_t n) const {
  if (n == 0) return {};
  return search(source, weights, n);
}

NBestList Decoder::search(const MorphSentence& source, const FeatureWeights& weights, std::size_t n_best) const {
  const Granularity g = table_.granularity();

  // Source units.
  std::vector<Span> units;
  if (config_.word_units) {
    for (const auto& w : word_spans(source)) units.push_back({w.start, w.end});
  } else {
    for (std::size_t i = 0; i < source.size(); ++i) units.push_back({i, i});
  }
  const std::size_t n = units.size();
  std::vector<std::string> src_keys;
  for (const auto& t : source.tokens()) src_keys.push_back(token_key(t, g));

  const auto finish_option = [&](Option& o) {
    for (const auto& t : o.target) o.target_keys.push_back(t.serialize());
    o.estimate = weights.dot(o.tm) - weights.get(kWordPenalty) * static_cast<double>(count_words(o.target));
    if (lm_m_ && weights.active(kLmMorph)) o.estimate += weights.get(kLmMorph) * phrase_logprob_estimate(o.target_keys, *lm_m_);
  };

  const auto build_options = [&](bool pass_through_everywhere) {
    std::vector<std::vector<Option>> by_start(n);
    std::vector<char> covered(n, 0);
    std::vector<char> single(n, 0);
    const std::size_t max_units = std::max<std::size_t>(config_.max_phrase_units, 1);
    for (std::size_t a = 0; a < n; ++a) {
      std::string key;
      for (std::size_t b = a; b < n && b - a + 1 <= max_units; ++b) {
        for (std::size_t t = units[b].start; t <= units[b].end; ++t) {
          if (!key.empty()) key += ' ';
          key += src_keys[t];
        }
        const auto it = index_.find(key);
        if (it == index_.end()) continue;
        std::vector<Option> span_opts;
        for (const auto* kv : it->second) {
          Option o;
          o.units = {a, b};
          o.tokens = {units[a].start, units[b].end};
          for (const auto& k : kv->first.target) o.target.push_back(token_from_key(k, g));
          o.tm = entry_features(kv->second);
          finish_option(o);
          span_opts.push_back(std::move(o));
        }
        std::stable_sort(span_opts.begin(), span_opts.end(),
                         [](const Option& x, const Option& y) { return x.estimate > y.estimate; });
        if (config_.options_per_span && span_opts.size() > config_.options_per_span)
          span_opts.resize(config_.options_per_span);
        for (std::size_t u = a; u <= b; ++u) covered[u] = 1;
        if (a == b) single[a] = 1;
        for (auto& o : span_opts) by_start[a].push_back(std::move(o));
      }
    }
    for (std::size_t u = 0; u < n; ++u) {
      if (covered[u] && !(pass_through_everywhere && !single[u])) continue;
      Option o;
      o.units = {u, u};
      o.tokens = units[u];
      for (std::size_t t = units[u].start; t <= units[u].end; ++t) o.target.push_back(source[t]);
      if (g == Granularity::kWord)
        for (auto& t : o.target) t = MorphToken{t.surface, MorphTag::kStem, false};
      o.oov = true;
      for (Feature f : {kPhiFwd, kPhiBwd, kLexFwd, kLexBwd}) o.tm[f] = config_.oov_feature_value;
      o.tm[kPhrasePenalty] = 1.0;
      finish_option(o);
      by_start[u].push_back(std::move(o));
    }
    return by_start;
  };

  auto run = [&](const std::vector<std::vector<Option>>& by_start) -> NBestList {
    // Rest-cost table over unit spans.
    std::vector<std::vector<double>> fc(n, std::vector<double>(n, kNegInf));
    for (const auto& opts : by_start)
      for (const auto& o : opts) fc[o.units.start][o.units.end] = std::max(fc[o.units.start][o.units.end], o.estimate);
    for (std::size_t len = 2; len <= n; ++len)
      for (std::size_t a = 0; a + len <= n; ++a) {
        const std::size_t b = a + len - 1;
        for (std::size_t k = a; k < b; ++k) fc[a][b] = std::max(fc[a][b], fc[a][k] + fc[k + 1][b]);
      }

    const std::size_t words = (n + 63) / 64;
    const auto is_covered = [](const std::vector<std::uint64_t>& cov, std::size_t u) {
      return (cov[u / 64] >> (u % 64)) & 1ULL;
    };
    const auto future_of = [&](const std::vector<std::uint64_t>& cov) {
      double total = 0.0;
      std::size_t u = 0;
      while (u < n) {
        if (is_covered(cov, u)) {
          ++u;
          continue;
        }
        std::size_t e = u;
        while (e + 1 < n && !is_covered(cov, e + 1)) ++e;
        total += fc[u][e];
        u = e + 1;
      }
      return total;
    };

    Search s;
    using Node = Search::Node;
    using Edge = Search::Edge;
    s.nodes.reserve(1024);
    {
      Node start;
      start.coverage.assign(words, 0);
      start.lm = twin_initial(lm_m_, lm_w_);
      start.score = 0.0;
      start.future = future_of(start.coverage);
      s.nodes.push_back(std::move(start));
    }
    std::vector<std::vector<std::size_t>> stacks(n + 1);
    std::vector<std::unordered_multimap<std::size_t, std::size_t>> recombine(n + 1);
    stacks[0].push_back(0);

    const auto prune = [&](std::vector<std::size_t>& stack) {
      std::stable_sort(stack.begin(), stack.end(), [&](std::size_t x, std::size_t y) {
        return s.nodes[x].score + s.nodes[x].future > s.nodes[y].score + s.nodes[y].future;
      });
      if (config_.beam && stack.size() > config_.beam) stack.resize(config_.beam);
    };

    const int limit = config_.distortion_limit;
    for (std::size_t c = 0; c < n; ++c) {
      prune(stacks[c]);
      // Node storage may reallocate while expanding; copy the ids first.
      const std::vector<std::size_t> current = stacks[c];
      for (std::size_t id : current) {
        for (std::size_t a = 0; a < n; ++a) {
          if (is_covered(s.nodes[id].coverage, a)) continue;
          const std::size_t next_pos = s.nodes[id].next_pos;
          const std::size_t jump = a > next_pos ? a - next_pos : next_pos - a;
          if (limit >= 0 && jump > static_cast<std::size_t>(limit)) continue;
          for (const Option& o : by_start[a]) {
            bool free = true;
            for (std::size_t u = o.units.start; u <= o.units.end && free; ++u)
              if (is_covered(s.nodes[id].coverage, u)) free = false;
            if (!free) continue;

            Node next;
            next.coverage = s.nodes[id].coverage;
            for (std::size_t u = o.units.start; u <= o.units.end; ++u) next.coverage[u / 64] |= 1ULL << (u % 64);
            next.covered = s.nodes[id].covered + o.units.size();
            next.next_pos = o.units.end + 1;
            if (limit >= 0) {
              std::size_t gap = 0;
              while (gap < n && is_covered(next.coverage, gap)) ++gap;
              if (gap < o.units.start && next.next_pos - gap > static_cast<std::size_t>(limit)) continue;
            }
            auto ext = twin_extend(s.nodes[id].lm, o.target, lm_m_, lm_w_);
            Edge edge{id, &o, o.tm, 0.0};
            edge.delta[kLmMorph] = ext.morph_delta;
            edge.delta[kLmWord] = ext.word_delta;
            edge.delta[kWordPenalty] = -static_cast<double>(ext.words_completed);
            edge.delta[kDistortion] = -static_cast<double>(jump);
            edge.delta_score = weights.dot(edge.delta);
            const double score = s.nodes[id].score + edge.delta_score;
            next.lm = std::move(ext.state);

            auto& table = recombine[next.covered];
            const std::size_t h = Search::key_hash(next);
            std::size_t match = s.nodes.size();
            for (auto [it, end] = table.equal_range(h); it != end; ++it)
              if (Search::same_state(s.nodes[it->second], next)) {
                match = it->second;
                break;
              }
            if (match < s.nodes.size()) {
              Node& existing = s.nodes[match];
              existing.in.push_back(std::move(edge));
              if (score > existing.score) existing.score = score;
              continue;
            }
            next.future = future_of(next.coverage);
            next.score = score;
            next.in.push_back(std::move(edge));
            const std::size_t new_id = s.nodes.size();
            table.emplace(h, new_id);
            stacks[next.covered].push_back(new_id);
            s.nodes.push_back(std::move(next));
          }
        }
      }
      // Release recombination tables of earlier stacks.
      recombine[c].clear();
    }
    prune(stacks[n]);
    if (stacks[n].empty()) return {};

    // Goal node collects the end-of-sentence transitions.
    const std::size_t goal = s.nodes.size();
    s.nodes.emplace_back();
    for (std::size_t id : stacks[n]) {
      const auto fin = twin_finalize(s.nodes[id].lm, lm_m_, lm_w_);
      Edge edge{id, nullptr, FeatureVector{}, 0.0};
      edge.delta[kLmMorph] = fin.morph_delta;
      edge.delta[kLmWord] = fin.word_delta;
      edge.delta[kWordPenalty] = -static_cast<double>(fin.words_completed);
      edge.delta_score = weights.dot(edge.delta);
      s.nodes[goal].in.push_back(std::move(edge));
    }

    // Lazy k-best over the hypothesis graph.
    struct Deriv {
      std::size_t edge;
      std::size_t prev_rank;
      double score;
    };
    struct KBest {
      bool init = false;
      std::vector<Deriv> list;
      std::vector<Deriv> heap;
      std::set<std::pair<std::size_t, std::size_t>> seen;
    };
    std::vector<KBest> kb(s.nodes.size());
    const auto heap_less = [](const Deriv& x, const Deriv& y) {
      if (x.score != y.score) return x.score < y.score;
      if (x.edge != y.edge) return x.edge > y.edge;
      return x.prev_rank > y.prev_rank;
    };
    std::function<const Deriv*(std::size_t, std::size_t)> get = [&](std::size_t node, std::size_t rank) -> const Deriv* {
      KBest& k = kb[node];
      if (node == 0) {
        if (!k.init) {
          k.init = true;
          k.list.push_back(Deriv{0, 0, 0.0});
        }
        return rank < k.list.size() ? &k.list[rank] : nullptr;
      }
      if (!k.init) {
        k.init = true;
        for (std::size_t e = 0; e < s.nodes[node].in.size(); ++e) {
          const Edge& edge = s.nodes[node].in[e];
          const Deriv* p = get(edge.prev, 0);
          if (!p) continue;
          kb[node].heap.push_back(Deriv{e, 0, p->score + edge.delta_score});
          kb[node].seen.emplace(e, 0);
        }
        std::make_heap(kb[node].heap.begin(), kb[node].heap.end(), heap_less);
      }
      while (kb[node].list.size() <= rank && !kb[node].heap.empty()) {
        std::pop_heap(kb[node].heap.begin(), kb[node].heap.end(), heap_less);
        const Deriv d = kb[node].heap.back();
        kb[node].heap.pop_back();
        kb[node].list.push_back(d);
        const Edge& edge = s.nodes[node].in[d.edge];
        if (kb[node].seen.emplace(d.edge, d.prev_rank + 1).second) {
          const Deriv* p = get(edge.prev, d.prev_rank + 1);
          if (p) {
            kb[node].heap.push_back(Deriv{d.edge, d.prev_rank + 1, p->score + edge.delta_score});
            std::push_heap(kb[node].heap.begin(), kb[node].heap.end(), heap_less);
          }
        }
      }
      return rank < kb[node].list.size() ? &kb[node].list[rank] : nullptr;
    };

    NBestList out;
    std::set<std::string> surfaces;
    const std::size_t cap = std::max<std::size_t>(n_best * 20, 50);
    for (std::size_t r = 0; out.size() < n_best && r < cap; ++r) {
      const Deriv* d = get(goal, r);
      if (!d) break;
      // Walk back to the start node.
      std::vector<const Edge*> path;
      std::size_t node = goal;
      std::size_t rank = r;
      while (node != 0) {
        const Deriv& dv = kb[node].list[rank];
        const Edge& e = s.nodes[node].in[dv.edge];
        path.push_back(&e);
        node = e.prev;
        rank = dv.prev_rank;
      }
      std::reverse(path.begin(), path.end());
      Translation t;
      std::vector<MorphToken> tokens;
      for (const Edge* e : path) {
        t.features += e->delta;
        if (!e->option) continue;
        const Option& o = *e->option;
        tokens.insert(tokens.end(), o.target.begin(), o.target.end());
        t.trace.push_back(AppliedPhrase{o.units, o.tokens, o.target, o.oov});
      }
      if (!tokens.empty()) tokens.back().continues = false;
      t.target = MorphSentence(std::move(tokens));
      t.score = weights.dot(t.features);
      std::string surface = t.target.serialize();
      if (!surfaces.insert(surface).second) continue;
      out.push_back(std::move(t));
    }
    std::stable_sort(out.begin(), out.end(), [](const Translation& x, const Translation& y) { return x.score > y.score; });
    return out;
  };

  auto result = run(build_options(false));
  if (result.empty()) result = run(build_options(true));
  return result;
}

void write_nbest(std::ostream& out, std::size_t sent_id, const NBestList& list, Granularity g) {
  for (const auto& t : list) {
    std::vector<std::string> toks;
    for (const auto& tok : t.target.tokens()) toks.push_back(token_key(tok, g));
    out << sent_id << " ||| " << join(toks) << " |||";
    for (std::size_t i = 0; i < kNumFeatures; ++i) out << ' ' << kFeatureNames[i] << '=' << format_double(t.features[i]);
    out << " ||| " << format_double(t.score) << '\n';
  }
}

std::vector<NBestRecord> read_nbest(std::istream& in) {
  std::vector<NBestRecord> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (split_whitespace(line).empty()) continue;
    const auto fields = split_fields(line, "|||");
    if (fields.size() != 4) throw ParseError("n-best line needs 4 fields", line_no);
    NBestRecord r;
    r.sent_id = static_cast<std::size_t>(parse_double(fields[0], line_no));
    r.target = split_whitespace(fields[1]);
    for (const auto& kv : split_whitespace(fields[2])) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw ParseError("bad feature '" + kv + "'", line_no);
      const auto f = feature_from_name(kv.substr(0, eq));
      if (!f) throw ParseError("unknown feature '" + kv.substr(0, eq) + "'", line_no);
      r.features[*f] = parse_double(kv.substr(eq + 1), line_no);
    }
    r.score = parse_double(fields[3], line_no);
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace morphmt
