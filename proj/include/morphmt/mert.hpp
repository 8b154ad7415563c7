#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <set>
#include <string>
#include <vector>

#include "morphmt/decoder.hpp"
#include "morphmt/eval.hpp"

namespace morphmt {

struct MertCandidate {
  std::string surface;  // target tokens as decoded
  FeatureVector features{};
  BleuStats stats;      // against the reference, at the metric granularity
};

/// Accumulated n-best candidates per dev sentence; only grows.
class CandidatePool {
 public:
  explicit CandidatePool(std::size_t sentences = 0) : lists_(sentences), seen_(sentences) {}

  /// Returns true if the candidate was new for that sentence.
  bool add(std::size_t sentence, MertCandidate candidate);

  std::size_t sentences() const { return lists_.size(); }
  const std::vector<MertCandidate>& candidates(std::size_t sentence) const { return lists_[sentence]; }
  std::size_t total() const;

  /// Corpus BLEU of the argmax candidates under `weights` (first wins ties).
  double bleu(const FeatureWeights& weights) const;

 private:
  std::vector<std::vector<MertCandidate>> lists_;
  std::vector<std::set<std::string>> seen_;
};

struct LineSearchResult {
  double step = 0.0;
  double bleu = 0.0;
};

/// Exact search along weights + step * direction over the piecewise-constant
/// corpus BLEU of the pool.
LineSearchResult line_search(const CandidatePool& pool, const FeatureWeights& weights, const FeatureVector& direction);

struct MertConfig {
  int max_iters = 10;
  double epsilon = 1e-4;
  std::size_t nbest = 100;
  std::uint64_t seed = 1;
  Granularity metric = Granularity::kWord;  // word BLEU or m-BLEU
  int random_directions = 1;
  int max_rounds = 20;
};

struct MertResult {
  FeatureWeights weights;
  std::vector<double> pool_bleu;  // after optimisation, per iteration
  std::vector<double> best_bleu;  // running best, per iteration
  std::vector<FeatureWeights> iteration_weights;
};

/// Produces the n-best list of dev sentence `index` under the given weights.
using NBestProvider = std::function<NBestList(std::size_t index, const FeatureWeights& weights, std::size_t n)>;

/// Tokens the metric sees: words (via to_words) or tagged morphemes.
std::vector<std::string> metric_tokens(const MorphSentence& target, Granularity metric);

/// `references` are already tokenised at `config.metric` granularity.
MertResult mert(const std::vector<std::vector<std::string>>& references, const NBestProvider& decode,
                const FeatureWeights& initial, const MertConfig& config, std::ostream* log = nullptr);

}  // namespace morphmt
