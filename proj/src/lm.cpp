#include "morphmt/lm.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <set>

#include "morphmt/error.hpp"
#include "morphmt/textio.hpp"

namespace morphmt {

namespace {

constexpr double kLn10 = 2.302585092994045684;
constexpr double kArpaZero = -99.0;

using Ids = std::vector<std::int32_t>;

double to_log10(double ln) { return std::isinf(ln) ? kArpaZero : ln / kLn10; }
double from_log10(double l10) { return l10 <= kArpaZero ? -INFINITY : l10 * kLn10; }

double safe_log(double p) { return p > 0.0 ? std::log(p) : -INFINITY; }

}  // namespace

Smoothing parse_smoothing(std::string_view name) {
  if (name == "mle") return Smoothing::kMle;
  if (name == "witten-bell") return Smoothing::kWittenBell;
  if (name == "kneser-ney") return Smoothing::kKneserNey;
  throw Error("unknown smoothing '" + std::string(name) + "'");
}

std::string_view smoothing_name(Smoothing s) {
  switch (s) {
    case Smoothing::kMle: return "mle";
    case Smoothing::kWittenBell: return "witten-bell";
    case Smoothing::kKneserNey: return "kneser-ney";
  }
  return "witten-bell";
}

std::size_t NGramModel::KeyHash::operator()(const Key& k) const noexcept {
  std::uint64_t h = 1469598103934665603ULL;
  for (auto id : k.ids) {
    h ^= static_cast<std::uint32_t>(id);
    h *= 1099511628211ULL;
  }
  return static_cast<std::size_t>(h);
}

std::int32_t NGramModel::id(std::string_view token) const {
  const auto it = ids_.find(std::string(token));
  return it == ids_.end() ? 0 : it->second;  // 0 is <unk>
}

std::int32_t NGramModel::intern(const std::string& token) {
  const auto [it, inserted] = ids_.emplace(token, static_cast<std::int32_t>(words_.size()));
  if (inserted) words_.push_back(token);
  return it->second;
}

bool NGramModel::known(std::string_view token) const { return ids_.count(std::string(token)) > 0; }

std::vector<std::string> NGramModel::events() const {
  std::vector<std::string> out;
  for (const auto& w : words_)
    if (w != kBos) out.push_back(w);
  return out;
}

std::size_t NGramModel::ngram_count(int n) const {
  if (n < 1 || n > order_) return 0;
  return tables_[static_cast<std::size_t>(n - 1)].size();
}

double NGramModel::lookup(std::int32_t word, std::span<const std::int32_t> context) const {
  // context already truncated to at most tables_.size()-1 tokens
  double backoff = 0.0;
  Key key;
  for (std::size_t k = context.size() + 1; k-- > 0;) {
    const auto ctx = context.subspan(context.size() - k);
    key.ids.assign(ctx.begin(), ctx.end());
    key.ids.push_back(word);
    const auto& table = tables_[k];
    const auto it = table.find(key);
    if (it != table.end()) return backoff + it->second.logprob;
    if (k > 0) {
      key.ids.pop_back();
      const auto cit = tables_[k - 1].find(key);
      if (cit != tables_[k - 1].end()) backoff += cit->second.logbow;
    }
  }
  return -INFINITY;
}

double NGramModel::logprob(std::string_view token, std::span<const std::string> context) const {
  if (order_ < 1) throw Error("logprob on an untrained model");
  const std::size_t keep = std::min(context.size(), static_cast<std::size_t>(order_ - 1));
  Ids ctx;
  ctx.reserve(keep);
  for (std::size_t i = context.size() - keep; i < context.size(); ++i) ctx.push_back(id(context[i]));
  return lookup(id(token), ctx);
}

double NGramModel::sentence_logprob(std::span<const std::string> tokens) const {
  std::vector<std::string> history{std::string(kBos)};
  double total = 0.0;
  for (const auto& t : tokens) {
    total += logprob(t, history);
    history.push_back(t);
  }
  total += logprob(kEos, history);
  return total;
}

NGramModel NGramModel::train(const std::vector<std::vector<std::string>>& corpus, int order, Smoothing smoothing) {
  if (order < 1) throw Error("train_lm: order must be >= 1");
  if (corpus.empty()) throw Error("train_lm: empty corpus");

  NGramModel m;
  m.order_ = order;
  m.smoothing_ = smoothing;
  m.intern(std::string(kUnk));
  const std::int32_t bos = m.intern(std::string(kBos));
  const std::int32_t eos = m.intern(std::string(kEos));
  m.tables_.resize(static_cast<std::size_t>(order));

  // Raw counts per order; std::map keeps iteration deterministic.
  std::vector<std::map<Ids, double>> raw(static_cast<std::size_t>(order));
  for (const auto& sentence : corpus) {
    Ids seq{bos};
    for (const auto& t : sentence) seq.push_back(m.intern(t));
    seq.push_back(eos);
    for (std::size_t p = 1; p < seq.size(); ++p) {
      for (std::size_t k = 1; k <= static_cast<std::size_t>(order) && k <= p + 1; ++k) {
        Ids gram(seq.begin() + static_cast<long>(p + 1 - k), seq.begin() + static_cast<long>(p + 1));
        raw[k - 1][gram] += 1.0;
      }
    }
  }

  // Counts actually used for estimation at each order.
  std::vector<std::map<Ids, double>> counts = raw;
  if (smoothing == Smoothing::kKneserNey) {
    for (std::size_t k = 0; k + 1 < static_cast<std::size_t>(order); ++k) {
      std::map<Ids, double> cont;
      for (const auto& [gram, c] : raw[k + 1]) {
        Ids suffix(gram.begin() + 1, gram.end());
        cont[suffix] += 1.0;
      }
      for (auto& [gram, c] : counts[k]) {
        if (gram.front() == bos) continue;  // no left extension possible
        const auto it = cont.find(gram);
        c = it == cont.end() ? c : it->second;
      }
    }
  }

  const auto types = static_cast<double>(raw[0].size());  // every predicted token, </s> included
  const double uniform = 1.0 / (types + 1.0);              // +1 for <unk>

  auto discount = [&](std::size_t k) {
    double n1 = 0, n2 = 0;
    for (const auto& [g, c] : counts[k]) {
      if (c == 1.0) n1 += 1;
      if (c == 2.0) n2 += 1;
    }
    if (n1 <= 0 || n2 <= 0) return 0.5;
    return std::clamp(n1 / (n1 + 2.0 * n2), 0.05, 0.95);
  };

  // Unigrams.
  {
    double total = 0.0;
    for (const auto& [g, c] : counts[0]) total += c;
    auto& table = m.tables_[0];
    const double d = discount(0);
    double unk_p = 0.0;
    for (const auto& [g, c] : counts[0]) {
      double p = 0.0;
      switch (smoothing) {
        case Smoothing::kMle: p = c / total; break;
        case Smoothing::kWittenBell: p = (c + types * uniform) / (total + types); break;
        case Smoothing::kKneserNey: p = std::max(c - d, 0.0) / total + d * types / total * uniform; break;
      }
      table[Key{g}] = Entry{safe_log(p), 0.0};
    }
    switch (smoothing) {
      case Smoothing::kMle: unk_p = 0.0; break;
      case Smoothing::kWittenBell: unk_p = types * uniform / (total + types); break;
      case Smoothing::kKneserNey: unk_p = d * types / total * uniform; break;
    }
    table[Key{{0}}] = Entry{safe_log(unk_p), 0.0};
    table[Key{{bos}}] = Entry{-INFINITY, 0.0};
  }

  // Higher orders, interpolated with the already-built lower order.
  for (std::size_t k = 1; k < static_cast<std::size_t>(order); ++k) {
    struct History {
      double total = 0.0;
      double distinct = 0.0;
    };
    std::map<Ids, History> hist;
    for (const auto& [gram, c] : counts[k]) {
      auto& h = hist[Ids(gram.begin(), gram.end() - 1)];
      h.total += c;
      h.distinct += 1.0;
    }
    const double d = discount(k);
    auto& table = m.tables_[k];
    for (const auto& [gram, c] : counts[k]) {
      const Ids ctx(gram.begin(), gram.end() - 1);
      const auto& h = hist.at(ctx);
      const Ids lower_ctx(ctx.begin() + 1, ctx.end());
      const double lower = std::exp(m.lookup(gram.back(), lower_ctx));
      double p = 0.0;
      switch (smoothing) {
        case Smoothing::kMle: p = c / h.total; break;
        case Smoothing::kWittenBell: p = (c + h.distinct * lower) / (h.total + h.distinct); break;
        case Smoothing::kKneserNey:
          p = std::max(c - d, 0.0) / h.total + d * h.distinct / h.total * lower;
          break;
      }
      table[Key{gram}] = Entry{safe_log(p), 0.0};
    }
    auto& lower_table = m.tables_[k - 1];
    for (const auto& [ctx, h] : hist) {
      double bow = 0.0;
      switch (smoothing) {
        case Smoothing::kMle: bow = 0.0; break;
        case Smoothing::kWittenBell: bow = h.distinct / (h.total + h.distinct); break;
        case Smoothing::kKneserNey: bow = d * h.distinct / h.total; break;
      }
      lower_table[Key{ctx}].logbow = safe_log(bow);
    }
  }
  return m;
}

void NGramModel::write_arpa(std::ostream& out) const {
  out << "\\data\\\n";
  for (int n = 1; n <= order_; ++n) out << "ngram " << n << "=" << tables_[static_cast<std::size_t>(n - 1)].size() << "\n";
  for (int n = 1; n <= order_; ++n) {
    out << "\n\\" << n << "-grams:\n";
    std::vector<std::pair<std::string, const Entry*>> lines;
    for (const auto& [key, e] : tables_[static_cast<std::size_t>(n - 1)]) {
      std::vector<std::string> toks;
      for (auto id : key.ids) toks.push_back(words_[static_cast<std::size_t>(id)]);
      lines.emplace_back(join(toks), &e);
    }
    std::sort(lines.begin(), lines.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    for (const auto& [text, e] : lines) {
      out << format_double(to_log10(e->logprob)) << '\t' << text;
      if (n < order_) out << '\t' << format_double(to_log10(e->logbow));
      out << '\n';
    }
  }
  out << "\n\\end\\\n";
}

NGramModel NGramModel::read_arpa(std::istream& in) {
  NGramModel m;
  m.intern(std::string(kUnk));
  std::string line;
  std::size_t line_no = 0;
  int section = 0;
  std::vector<std::size_t> declared;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty()) continue;
    if (t == "\\data\\") continue;
    if (t == "\\end\\") break;
    if (t.rfind("ngram ", 0) == 0) {
      const auto eq = t.find('=');
      if (eq == std::string::npos) throw ParseError("bad ARPA count line", line_no);
      declared.push_back(static_cast<std::size_t>(parse_double(trim(t.substr(eq + 1)), line_no)));
      continue;
    }
    if (t.front() == '\\' && t.find("-grams:") != std::string::npos) {
      section = static_cast<int>(parse_double(t.substr(1, t.find('-') - 1), line_no));
      if (section < 1) throw ParseError("bad ARPA section header", line_no);
      if (static_cast<int>(m.tables_.size()) < section) m.tables_.resize(static_cast<std::size_t>(section));
      m.order_ = std::max(m.order_, section);
      continue;
    }
    if (section == 0) throw ParseError("ARPA entry outside a section", line_no);
    const auto parts = split_whitespace(t);
    const auto n = static_cast<std::size_t>(section);
    if (parts.size() != n + 1 && parts.size() != n + 2) throw ParseError("bad ARPA entry", line_no);
    Entry e;
    e.logprob = from_log10(parse_double(parts[0], line_no));
    if (parts.size() == n + 2) e.logbow = from_log10(parse_double(parts[n + 1], line_no));
    Key key;
    for (std::size_t i = 1; i <= n; ++i) key.ids.push_back(m.intern(parts[i]));
    m.tables_[n - 1][key] = e;
  }
  if (m.order_ < 1) throw Error("ARPA file has no n-gram sections");
  for (std::size_t n = 0; n < declared.size() && n < m.tables_.size(); ++n)
    if (declared[n] != m.tables_[n].size()) throw Error("ARPA header counts do not match entries");
  return m;
}

// ---- twin scoring ----

namespace {

void push_context(std::vector<std::string>& ctx, std::string token, const NGramModel* lm) {
  if (!lm) return;
  ctx.push_back(std::move(token));
  const auto keep = static_cast<std::size_t>(std::max(lm->order() - 1, 0));
  if (ctx.size() > keep) ctx.erase(ctx.begin(), ctx.end() - static_cast<long>(keep));
}

}  // namespace

std::size_t TwinScorerState::hash() const {
  std::size_t h = 0x9e3779b97f4a7c15ULL;
  const auto mix = [&h](const std::vector<std::string>& v) {
    for (const auto& s : v) h ^= std::hash<std::string>{}(s) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    h ^= v.size() * 0x100000001b3ULL;
  };
  mix(morph_context);
  mix(pending);
  mix(word_context);
  return h;
}

TwinScorerState twin_initial(const NGramModel* lm_m, const NGramModel* lm_w) {
  TwinScorerState s;
  push_context(s.morph_context, std::string(kBos), lm_m);
  push_context(s.word_context, std::string(kBos), lm_w);
  return s;
}

TwinExtension twin_extend(const TwinScorerState& state, std::span<const MorphToken> morphemes,
                          const NGramModel* lm_m, const NGramModel* lm_w) {
  TwinExtension out{state, 0.0, 0.0, 0};
  auto& s = out.state;
  for (const auto& m : morphemes) {
    std::string key = m.serialize();
    if (lm_m) out.morph_delta += lm_m->logprob(key, s.morph_context);
    push_context(s.morph_context, std::move(key), lm_m);
    s.pending.push_back(m.surface);
    if (!m.continues) {
      std::string word;
      for (const auto& p : s.pending) word += p;
      s.pending.clear();
      if (lm_w) out.word_delta += lm_w->logprob(word, s.word_context);
      push_context(s.word_context, std::move(word), lm_w);
      ++out.words_completed;
    }
  }
  return out;
}

TwinExtension twin_finalize(const TwinScorerState& state, const NGramModel* lm_m, const NGramModel* lm_w) {
  TwinExtension out{state, 0.0, 0.0, 0};
  auto& s = out.state;
  if (!s.pending.empty()) {
    std::string word;
    for (const auto& p : s.pending) word += p;
    s.pending.clear();
    if (lm_w) out.word_delta += lm_w->logprob(word, s.word_context);
    push_context(s.word_context, std::move(word), lm_w);
    ++out.words_completed;
  }
  if (lm_m) out.morph_delta += lm_m->logprob(kEos, s.morph_context);
  if (lm_w) out.word_delta += lm_w->logprob(kEos, s.word_context);
  push_context(s.morph_context, std::string(kEos), lm_m);
  push_context(s.word_context, std::string(kEos), lm_w);
  return out;
}

double phrase_logprob_estimate(std::span<const std::string> tokens, const NGramModel& lm) {
  double total = 0.0;
  for (std::size_t i = 0; i < tokens.size(); ++i) total += lm.logprob(tokens[i], tokens.first(i));
  return total;
}

}  // namespace morphmt
