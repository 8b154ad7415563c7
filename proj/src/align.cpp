#include "morphmt/align.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include "morphmt/error.hpp"
#include "morphmt/textio.hpp"

namespace morphmt {

namespace {

const std::string& null_token() {
  static const std::string kNull(kNullToken);
  return kNull;
}

}  // namespace

ParallelCorpus::ParallelCorpus(std::vector<SentencePair> all, Granularity g) : granularity(g) {
  pairs.reserve(all.size());
  for (auto& p : all) {
    if (p.source.empty() || p.target.empty()) {
      ++dropped;
      continue;
    }
    pairs.push_back(std::move(p));
  }
}

double LexicalTable::stored(const std::string& source, const std::string& target) const {
  const auto row = table_.find(source);
  if (row == table_.end()) return 0.0;
  const auto cell = row->second.find(target);
  return cell == row->second.end() ? 0.0 : cell->second;
}

double LexicalTable::prob(const std::string& source, const std::string& target) const {
  return std::max(stored(source, target), kProbabilityFloor);
}

void LexicalTable::set(const std::string& source, const std::string& target, double p) {
  auto [it, inserted] = table_[source].insert_or_assign(target, p);
  if (inserted) ++targets_[target];
}

void LexicalTable::normalize() {
  for (auto& [src, row] : table_) {
    double total = 0.0;
    for (const auto& [tgt, p] : row) total += p;
    if (total <= 0.0) continue;
    for (auto& [tgt, p] : row) p /= total;
  }
}

std::size_t LexicalTable::size() const {
  std::size_t n = 0;
  for (const auto& [src, row] : table_) n += row.size();
  return n;
}

void AlignmentMatrix::add(std::size_t i, std::size_t j) {
  if (i >= src_len_ || j >= tgt_len_)
    throw Error("alignment link " + std::to_string(i) + "-" + std::to_string(j) + " out of bounds " +
                std::to_string(src_len_) + "x" + std::to_string(tgt_len_));
  const Link link{i, j};
  const auto pos = std::lower_bound(links_.begin(), links_.end(), link);
  if (pos == links_.end() || *pos != link) links_.insert(pos, link);
}

bool AlignmentMatrix::contains(std::size_t i, std::size_t j) const {
  return std::binary_search(links_.begin(), links_.end(), Link{i, j});
}

std::vector<Link> AlignmentMatrix::links() const { return links_; }

AlignmentMatrix AlignmentMatrix::transposed() const {
  AlignmentMatrix out(tgt_len_, src_len_);
  for (const auto& [i, j] : links_) out.links_.emplace_back(j, i);
  std::sort(out.links_.begin(), out.links_.end());
  return out;
}

std::string AlignmentMatrix::to_pharaoh() const {
  std::string out;
  for (const auto& [i, j] : links_) {
    if (!out.empty()) out += ' ';
    out += std::to_string(i) + "-" + std::to_string(j);
  }
  return out;
}

AlignmentMatrix AlignmentMatrix::from_pharaoh(std::string_view line, std::size_t source_len, std::size_t target_len) {
  AlignmentMatrix out(source_len, target_len);
  const auto parts = split_whitespace(line);
  for (std::size_t k = 0; k < parts.size(); ++k) {
    const auto dash = parts[k].find('-');
    if (dash == std::string::npos) throw ParseError("bad alignment link '" + parts[k] + "'", k);
    try {
      std::size_t used = 0;
      const auto i = std::stoul(parts[k].substr(0, dash), &used);
      if (used != dash) throw ParseError("bad alignment link '" + parts[k] + "'", k);
      const std::string rhs = parts[k].substr(dash + 1);
      const auto j = std::stoul(rhs, &used);
      if (used != rhs.size()) throw ParseError("bad alignment link '" + parts[k] + "'", k);
      out.add(i, j);
    } catch (const std::logic_error&) {
      throw ParseError("bad alignment link '" + parts[k] + "'", k);
    }
  }
  return out;
}

LexicalTable train_model1(const ParallelCorpus& corpus, int iterations, const LexicalTable* init) {
  if (corpus.empty()) throw Error("train_model1: empty corpus");
  if (iterations < 1) throw Error("train_model1: iterations must be >= 1");

  LexicalTable table;
  if (init) {
    table = *init;
  } else {
    // Uniform over co-occurring targets.
    std::unordered_map<std::string, std::set<std::string>> cooc;
    for (const auto& p : corpus.pairs) {
      auto& null_row = cooc[null_token()];
      null_row.insert(p.target.begin(), p.target.end());
      for (const auto& s : p.source) cooc[s].insert(p.target.begin(), p.target.end());
    }
    for (const auto& [src, targets] : cooc)
      for (const auto& t : targets) table.set(src, t, 1.0 / static_cast<double>(targets.size()));
  }

  for (int it = 0; it < iterations; ++it) {
    LexicalTable counts;
    std::unordered_map<std::string, std::unordered_map<std::string, double>> expected;
    std::vector<double> posts;
    for (const auto& p : corpus.pairs) {
      posts.resize(p.source.size() + 1);
      for (const auto& f : p.target) {
        double denom = table.prob(null_token(), f);
        posts[0] = denom;
        for (std::size_t i = 0; i < p.source.size(); ++i) {
          posts[i + 1] = table.prob(p.source[i], f);
          denom += posts[i + 1];
        }
        expected[null_token()][f] += posts[0] / denom;
        for (std::size_t i = 0; i < p.source.size(); ++i) expected[p.source[i]][f] += posts[i + 1] / denom;
      }
    }
    for (const auto& [src, row] : expected)
      for (const auto& [tgt, c] : row) counts.set(src, tgt, c);
    counts.normalize();
    table = std::move(counts);
  }
  return table;
}

double model1_log_likelihood(const ParallelCorpus& corpus, const LexicalTable& table) {
  double ll = 0.0;
  for (const auto& p : corpus.pairs) {
    const double norm = std::log(static_cast<double>(p.source.size() + 1));
    for (const auto& f : p.target) {
      double sum = table.prob(null_token(), f);
      for (const auto& e : p.source) sum += table.prob(e, f);
      ll += std::log(sum) - norm;
    }
  }
  return ll;
}

AlignmentMatrix viterbi_align(const TokenSeq& source, const TokenSeq& target, const LexicalTable& table) {
  AlignmentMatrix out(source.size(), target.size());
  for (std::size_t j = 0; j < target.size(); ++j) {
    if (!table.has_target(target[j])) continue;
    const double null_p = table.prob(null_token(), target[j]);
    double best = -1.0;
    std::size_t best_i = 0;
    for (std::size_t i = 0; i < source.size(); ++i) {
      const double p = table.prob(source[i], target[j]);
      if (p > best) {
        best = p;
        best_i = i;
      }
    }
    if (!source.empty() && best >= null_p) out.add(best_i, j);
  }
  return out;
}

SymmetrizeHeuristic parse_heuristic(std::string_view name) {
  if (name == "intersection") return SymmetrizeHeuristic::kIntersection;
  if (name == "union") return SymmetrizeHeuristic::kUnion;
  if (name == "grow-diag-final-and") return SymmetrizeHeuristic::kGrowDiagFinalAnd;
  throw Error("unknown symmetrization heuristic '" + std::string(name) + "'");
}

AlignmentMatrix symmetrize(const AlignmentMatrix& fwd, const AlignmentMatrix& rev_in, SymmetrizeHeuristic heuristic) {
  if (fwd.source_length() != rev_in.target_length() || fwd.target_length() != rev_in.source_length())
    throw Error("symmetrize: dimension mismatch");
  const AlignmentMatrix rev = rev_in.transposed();
  const std::size_t n = fwd.source_length();
  const std::size_t m = fwd.target_length();

  AlignmentMatrix result(n, m);
  AlignmentMatrix uni(n, m);
  for (const auto& [i, j] : fwd.links()) {
    uni.add(i, j);
    if (rev.contains(i, j)) result.add(i, j);
  }
  for (const auto& [i, j] : rev.links()) uni.add(i, j);

  if (heuristic == SymmetrizeHeuristic::kUnion) return uni;
  if (heuristic == SymmetrizeHeuristic::kIntersection) return result;

  std::vector<char> src_aligned(n, 0), tgt_aligned(m, 0);
  for (const auto& [i, j] : result.links()) {
    src_aligned[i] = 1;
    tgt_aligned[j] = 1;
  }
  static constexpr std::array<std::pair<int, int>, 8> kNeighbors{
      {{-1, 0}, {0, -1}, {1, 0}, {0, 1}, {-1, -1}, {-1, 1}, {1, -1}, {1, 1}}};

  bool added = true;
  while (added) {
    added = false;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < m; ++j) {
        if (!result.contains(i, j)) continue;
        for (const auto& [di, dj] : kNeighbors) {
          const long ni = static_cast<long>(i) + di;
          const long nj = static_cast<long>(j) + dj;
          if (ni < 0 || nj < 0 || ni >= static_cast<long>(n) || nj >= static_cast<long>(m)) continue;
          const auto ui = static_cast<std::size_t>(ni);
          const auto uj = static_cast<std::size_t>(nj);
          if ((!src_aligned[ui] || !tgt_aligned[uj]) && uni.contains(ui, uj) && !result.contains(ui, uj)) {
            result.add(ui, uj);
            src_aligned[ui] = 1;
            tgt_aligned[uj] = 1;
            added = true;
          }
        }
      }
    }
  }

  // final-and: fwd first, then rev.
  for (const AlignmentMatrix* a : {&fwd, &rev}) {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < m; ++j) {
        if (a->contains(i, j) && !src_aligned[i] && !tgt_aligned[j]) {
          result.add(i, j);
          src_aligned[i] = 1;
          tgt_aligned[j] = 1;
        }
      }
    }
  }
  return result;
}

ParallelCorpus reversed(const ParallelCorpus& corpus) {
  ParallelCorpus out;
  out.granularity = corpus.granularity;
  out.pairs.reserve(corpus.pairs.size());
  for (const auto& p : corpus.pairs) out.pairs.push_back({p.target, p.source});
  return out;
}

LexicalTable lexical_table_from_alignments(const ParallelCorpus& corpus,
                                           const std::vector<AlignmentMatrix>& alignments) {
  if (alignments.size() != corpus.size()) throw Error("lexical table: alignment count mismatch");
  std::unordered_map<std::string, std::unordered_map<std::string, double>> counts;
  for (std::size_t k = 0; k < corpus.size(); ++k) {
    const auto& p = corpus.pairs[k];
    std::vector<char> tgt_aligned(p.target.size(), 0);
    for (const auto& [i, j] : alignments[k].links()) {
      counts[p.source[i]][p.target[j]] += 1.0;
      tgt_aligned[j] = 1;
    }
    for (std::size_t j = 0; j < p.target.size(); ++j)
      if (!tgt_aligned[j]) counts[null_token()][p.target[j]] += 1.0;
  }
  LexicalTable table;
  for (const auto& [src, row] : counts)
    for (const auto& [tgt, c] : row) table.set(src, tgt, c);
  table.normalize();
  return table;
}

CorpusAlignment align_corpus(const ParallelCorpus& corpus, const AlignmentConfig& config) {
  CorpusAlignment out;
  out.fwd_model = train_model1(corpus, config.iterations);
  out.rev_model = train_model1(reversed(corpus), config.iterations);
  out.alignments.reserve(corpus.size());
  for (const auto& p : corpus.pairs) {
    const auto fwd = viterbi_align(p.source, p.target, out.fwd_model);
    const auto rev = viterbi_align(p.target, p.source, out.rev_model);
    out.alignments.push_back(symmetrize(fwd, rev, config.heuristic));
  }
  return out;
}

void write_lexical_table(std::ostream& out, const LexicalTable& table) {
  std::map<std::string, std::map<std::string, double>> sorted;
  for (const auto& [src, row] : table.rows())
    for (const auto& [tgt, p] : row) sorted[src][tgt] = p;
  for (const auto& [src, row] : sorted)
    for (const auto& [tgt, p] : row) out << src << ' ' << tgt << ' ' << format_double(p) << '\n';
}

LexicalTable read_lexical_table(std::istream& in) {
  LexicalTable table;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto fields = split_whitespace(line);
    if (fields.empty()) continue;
    if (fields.size() != 3) throw ParseError("lexical table line " + std::to_string(line_no) + ": expected 3 fields", line_no);
    table.set(fields[0], fields[1], parse_double(fields[2], line_no));
  }
  return table;
}

}  // namespace morphmt
