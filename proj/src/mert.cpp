#include "morphmt/mert.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <random>

#include "morphmt/error.hpp"
#include "morphmt/textio.hpp"

namespace morphmt {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kBleuTie = 1e-12;

double dot(const FeatureVector& a, const FeatureVector& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < kNumFeatures; ++i) s += a[i] * b[i];
  return s;
}

FeatureVector weight_vector(const FeatureWeights& w) {
  FeatureVector v{};
  for (std::size_t i = 0; i < kNumFeatures; ++i)
    if (w.active(static_cast<Feature>(i))) v[i] = w.get(static_cast<Feature>(i));
  return v;
}

struct Line {
  double slope;
  double intercept;
  std::size_t candidate;
  double start;  // envelope position from which this line is on top
};

// Upper envelope of score(x) = intercept + slope * x; equal lines keep the
// earliest candidate.
std::vector<Line> upper_envelope(std::vector<Line> lines) {
  std::stable_sort(lines.begin(), lines.end(), [](const Line& a, const Line& b) {
    if (a.slope != b.slope) return a.slope < b.slope;
    return a.intercept > b.intercept;
  });
  std::vector<Line> hull;
  for (const Line& l : lines) {
    if (!hull.empty() && hull.back().slope == l.slope) continue;
    double x = -kInf;
    while (!hull.empty()) {
      const Line& top = hull.back();
      x = (top.intercept - l.intercept) / (l.slope - top.slope);
      if (x <= top.start) {
        hull.pop_back();
        x = -kInf;
      } else {
        break;
      }
    }
    Line added = l;
    added.start = hull.empty() ? -kInf : x;
    hull.push_back(added);
  }
  return hull;
}

double representative_point(double lo, double hi) {
  if (lo < 0.0 && 0.0 < hi) return 0.0;
  if (std::isinf(lo) && std::isinf(hi)) return 0.0;
  if (std::isinf(lo)) return hi - 1.0;
  if (std::isinf(hi)) return lo + 1.0;
  return 0.5 * (lo + hi);
}

}  // namespace

bool CandidatePool::add(std::size_t sentence, MertCandidate candidate) {
  if (sentence >= lists_.size()) throw Error("candidate pool: sentence index out of range");
  std::string key = candidate.surface;
  key += " |||";
  for (double f : candidate.features) {
    key += ' ';
    key += format_double(f);
  }
  if (!seen_[sentence].insert(std::move(key)).second) return false;
  lists_[sentence].push_back(std::move(candidate));
  return true;
}

std::size_t CandidatePool::total() const {
  std::size_t n = 0;
  for (const auto& l : lists_) n += l.size();
  return n;
}

double CandidatePool::bleu(const FeatureWeights& weights) const {
  BleuStats total;
  for (const auto& list : lists_) {
    if (list.empty()) continue;
    std::size_t best = 0;
    double best_score = -kInf;
    for (std::size_t c = 0; c < list.size(); ++c) {
      const double s = weights.dot(list[c].features);
      if (s > best_score) {
        best_score = s;
        best = c;
      }
    }
    total += list[best].stats;
  }
  return bleu_from_stats(total).score;
}

LineSearchResult line_search(const CandidatePool& pool, const FeatureWeights& weights, const FeatureVector& direction) {
  const FeatureVector w = weight_vector(weights);
  BleuStats current;
  struct Event {
    double x;
    std::size_t sentence;
    BleuStats delta;
  };
  std::vector<Event> events;
  for (std::size_t s = 0; s < pool.sentences(); ++s) {
    const auto& list = pool.candidates(s);
    if (list.empty()) continue;
    std::vector<Line> lines;
    lines.reserve(list.size());
    for (std::size_t c = 0; c < list.size(); ++c)
      lines.push_back(Line{dot(direction, list[c].features), dot(w, list[c].features), c, -kInf});
    const auto hull = upper_envelope(std::move(lines));
    current += list[hull.front().candidate].stats;
    for (std::size_t k = 1; k < hull.size(); ++k) {
      BleuStats d = list[hull[k].candidate].stats;
      d -= list[hull[k - 1].candidate].stats;
      events.push_back(Event{hull[k].start, s, d});
    }
  }
  std::stable_sort(events.begin(), events.end(), [](const Event& a, const Event& b) { return a.x < b.x; });

  struct Interval {
    double lo, hi, bleu;
  };
  std::vector<Interval> intervals;
  double lo = -kInf;
  std::size_t e = 0;
  while (true) {
    const double hi = e < events.size() ? events[e].x : kInf;
    if (hi > lo || std::isinf(hi)) intervals.push_back(Interval{lo, hi, bleu_from_stats(current).score});
    if (e >= events.size()) break;
    const double x = events[e].x;
    while (e < events.size() && events[e].x == x) current += events[e++].delta;
    lo = x;
  }

  double best_bleu = -kInf;
  for (const auto& iv : intervals) best_bleu = std::max(best_bleu, iv.bleu);
  LineSearchResult result{0.0, best_bleu};
  double best_abs = kInf;
  for (const auto& iv : intervals) {
    if (iv.bleu < best_bleu - kBleuTie) continue;
    const double p = representative_point(iv.lo, iv.hi);
    if (std::abs(p) < best_abs) {
      best_abs = std::abs(p);
      result.step = p;
      result.bleu = iv.bleu;
    }
  }
  return result;
}

std::vector<std::string> metric_tokens(const MorphSentence& target, Granularity metric) {
  return metric == Granularity::kWord ? to_words(target) : target.token_strings();
}

MertResult mert(const std::vector<std::vector<std::string>>& references, const NBestProvider& decode,
                const FeatureWeights& initial, const MertConfig& config, std::ostream* log) {
  if (references.empty()) throw Error("mert: empty dev set");
  if (config.max_iters < 1) throw Error("mert: max_iters must be >= 1");

  const auto active = initial.active_features();
  std::mt19937_64 rng(config.seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  CandidatePool pool(references.size());
  MertResult result;
  result.weights = initial;
  double best = -kInf;
  FeatureWeights w = initial;

  for (int it = 1; it <= config.max_iters; ++it) {
    std::size_t added = 0;
    for (std::size_t s = 0; s < references.size(); ++s) {
      for (auto& t : decode(s, w, config.nbest)) {
        MertCandidate c;
        c.surface = t.target.serialize();
        c.features = t.features;
        c.stats = sentence_bleu_stats(metric_tokens(t.target, config.metric), references[s]);
        if (pool.add(s, std::move(c))) ++added;
      }
    }
    if (added == 0 && it > 1) break;

    double current = pool.bleu(w);
    for (int round = 0; round < config.max_rounds; ++round) {
      std::vector<FeatureVector> directions;
      for (Feature f : active) {
        FeatureVector d{};
        d[f] = 1.0;
        directions.push_back(d);
      }
      for (int r = 0; r < config.random_directions; ++r) {
        FeatureVector d{};
        for (Feature f : active) d[f] = normal(rng);
        directions.push_back(d);
      }
      bool improved = false;
      for (const auto& d : directions) {
        const auto ls = line_search(pool, w, d);
        if (ls.bleu > current + kBleuTie && ls.step != 0.0) {
          for (Feature f : active) w.set(f, w.get(f) + ls.step * d[f]);
          current = pool.bleu(w);
          improved = true;
        }
      }
      if (!improved) break;
    }

    result.pool_bleu.push_back(current);
    result.iteration_weights.push_back(w);
    const bool big_gain = current > best + config.epsilon;
    if (current > best) {
      best = current;
      result.weights = w;
    }
    result.best_bleu.push_back(best);
    if (log) *log << "iteration " << it << "\tpool=" << pool.total() << "\tdev_bleu=" << format_double(current) << '\n';
    if (!big_gain && it > 1) break;
  }
  return result;
}

}  // namespace morphmt
