#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "morphmt/error.hpp"
#include "morphmt/mert.hpp"
#include "oracles.hpp"

using namespace morphmt;

namespace {

Translation candidate(const std::string& target, std::initializer_list<std::pair<Feature, double>> feats) {
  Translation t;
  t.target = parse_segmented_line(target);
  for (const auto& [f, v] : feats) t.features[f] = v;
  return t;
}

// Re-ranks fixed candidate sets under the given weights, like a decoder would.
struct FakeDecoder {
  std::vector<std::vector<Translation>> sets;
  std::vector<FeatureWeights> calls;

  NBestList operator()(std::size_t i, const FeatureWeights& w, std::size_t n) {
    calls.push_back(w);
    NBestList list = sets[i];
    for (auto& t : list) t.score = w.dot(t.features);
    std::stable_sort(list.begin(), list.end(), [](const Translation& a, const Translation& b) { return a.score > b.score; });
    if (list.size() > n) list.resize(n);
    return list;
  }
};

MertCandidate pooled(const std::string& target, const std::vector<std::string>& ref,
                     std::initializer_list<std::pair<Feature, double>> feats) {
  MertCandidate c;
  const auto t = candidate(target, feats);
  c.surface = t.target.serialize();
  c.features = t.features;
  c.stats = sentence_bleu_stats(metric_tokens(t.target, Granularity::kWord), ref);
  return c;
}

FeatureWeights two_weights(double a, double b) {
  FeatureWeights w;
  w.set(kPhiFwd, a);
  w.set(kPhiBwd, b);
  return w;
}

}  // namespace

TEST(CandidatePool, DeduplicatesAndGrows) {
  CandidatePool pool(1);
  const auto ref = split_whitespace("a b");
  EXPECT_TRUE(pool.add(0, pooled("a/STM b/STM", ref, {{kPhiFwd, 1.0}})));
  EXPECT_FALSE(pool.add(0, pooled("a/STM b/STM", ref, {{kPhiFwd, 1.0}})));
  EXPECT_TRUE(pool.add(0, pooled("a/STM b/STM", ref, {{kPhiFwd, 2.0}})));
  EXPECT_EQ(pool.total(), 2u);
}

TEST(LineSearch, ConstantFeaturesGiveZeroStep) {
  CandidatePool pool(1);
  const auto ref = split_whitespace("a b c d");
  pool.add(0, pooled("a/STM b/STM c/STM d/STM", ref, {{kPhiFwd, 1.0}, {kPhiBwd, 1.0}}));
  pool.add(0, pooled("x/STM b/STM c/STM d/STM", ref, {{kPhiFwd, 1.0}, {kPhiBwd, 1.0}}));
  FeatureVector dir{};
  dir[kPhiBwd] = 1.0;
  const auto r = line_search(pool, two_weights(1.0, 1.0), dir);
  EXPECT_EQ(r.step, 0.0);
  EXPECT_DOUBLE_EQ(r.bleu, pool.bleu(two_weights(1.0, 1.0)));
}

TEST(LineSearch, CrossingAtTwo) {
  CandidatePool pool(1);
  const auto ref = split_whitespace("a b c d");
  // Bad: score 2 + 0 * step. Good: score 0 + 1 * step.
  pool.add(0, pooled("w/STM x/STM y/STM z/STM", ref, {{kPhiFwd, 2.0}}));
  pool.add(0, pooled("a/STM b/STM c/STM d/STM", ref, {{kPhiBwd, 1.0}}));
  FeatureVector dir{};
  dir[kPhiBwd] = 1.0;
  const auto w = two_weights(1.0, 0.0);
  const auto r = line_search(pool, w, dir);
  EXPECT_GT(r.step, 2.0);
  EXPECT_EQ(r.bleu, 1.0);
  EXPECT_GE(r.bleu, pool.bleu(w));
}

TEST(LineSearch, NeverWorseThanStart) {
  std::mt19937_64 rng(59);
  const std::vector<std::string> vocab{"a", "b", "c"};
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 100; ++trial) {
    CandidatePool pool(3);
    for (std::size_t s = 0; s < 3; ++s) {
      const auto ref = oracle::random_tokens(rng, 4, vocab);
      for (int k = 0; k < 5; ++k) {
        MertCandidate c;
        const auto toks = oracle::random_tokens(rng, 3 + rng() % 3, vocab);
        c.surface = join(toks);
        c.features[kPhiFwd] = g(rng);
        c.features[kPhiBwd] = g(rng);
        c.features[kLexFwd] = g(rng);
        c.stats = sentence_bleu_stats(toks, ref);
        pool.add(s, c);
      }
    }
    FeatureWeights w = two_weights(g(rng), g(rng));
    w.set(kLexFwd, g(rng));
    FeatureVector dir{};
    dir[kPhiFwd] = g(rng);
    dir[kLexFwd] = g(rng);
    const auto r = line_search(pool, w, dir);
    EXPECT_GE(r.bleu, pool.bleu(w) - 1e-12);
    // The reported value is what the pool actually scores at that step.
    FeatureWeights moved = w;
    moved.set(kPhiFwd, w.get(kPhiFwd) + r.step * dir[kPhiFwd]);
    moved.set(kLexFwd, w.get(kLexFwd) + r.step * dir[kLexFwd]);
    EXPECT_NEAR(pool.bleu(moved), r.bleu, 1e-12);
  }
}

TEST(Mert, EmptyDevIsAnError) {
  FakeDecoder dec;
  EXPECT_THROW(mert({}, std::ref(dec), two_weights(1, 1), MertConfig{}), Error);
}

TEST(Mert, SingleCandidateListsLeaveWeightsUnchanged) {
  FakeDecoder dec;
  dec.sets = {{candidate("a/STM b/STM", {{kPhiFwd, -1.0}, {kPhiBwd, -2.0}})},
              {candidate("c/STM", {{kPhiFwd, -0.5}, {kPhiBwd, -0.1}})}};
  const auto w0 = two_weights(0.3, 0.7);
  const auto r = mert({split_whitespace("a b"), split_whitespace("c d")}, std::ref(dec), w0, MertConfig{});
  EXPECT_EQ(r.weights, w0);
}

TEST(Mert, PicksTheWordBleuWinner) {
  // A splits the word differently but matches the reference words; B matches
  // more morphemes but gets a word wrong.
  const auto ref = parse_segmented_line("p/STM q/STM r/STM+ s/SUF t/STM u/STM");
  FakeDecoder dec;
  dec.sets = {{candidate("p/STM q/STM rs/STM t/STM u/STM", {{kPhiFwd, 1.0}}),
               candidate("p/STM q/STM r/STM+ s/SUF t/STM v/STM", {{kPhiBwd, 1.0}})}};
  const auto& a = dec.sets[0][0].target;
  const auto& b = dec.sets[0][1].target;
  ASSERT_GT(bleu({to_words(a)}, {to_words(ref)}).score, bleu({to_words(b)}, {to_words(ref)}).score);
  ASSERT_LT(m_bleu({a}, {ref}).score, m_bleu({b}, {ref}).score);

  const auto w0 = two_weights(0.2, 1.0);  // starts on B
  MertConfig word;
  word.metric = Granularity::kWord;
  const auto rw = mert({metric_tokens(ref, Granularity::kWord)}, std::ref(dec), w0, word);
  EXPECT_GT(rw.weights.dot(dec.sets[0][0].features), rw.weights.dot(dec.sets[0][1].features));

  MertConfig morph;
  morph.metric = Granularity::kMorpheme;
  const auto rm = mert({metric_tokens(ref, Granularity::kMorpheme)}, std::ref(dec), w0, morph);
  EXPECT_LT(rm.weights.dot(dec.sets[0][0].features), rm.weights.dot(dec.sets[0][1].features));
}

TEST(Mert, ScaleInvariantSelectionsAtFirstIteration) {
  std::mt19937_64 rng(61);
  std::normal_distribution<double> g;
  const std::vector<std::string> vocab{"a", "b", "c"};
  FakeDecoder d1, d2;
  std::vector<std::vector<std::string>> refs;
  for (int s = 0; s < 4; ++s) {
    refs.push_back(oracle::random_tokens(rng, 4, vocab));
    std::vector<Translation> set;
    for (int k = 0; k < 6; ++k) {
      Translation t;
      std::vector<MorphToken> toks;
      for (const auto& w : oracle::random_tokens(rng, 4, vocab)) toks.push_back({w, MorphTag::kStem, false});
      t.target = MorphSentence(toks);
      t.features[kPhiFwd] = g(rng);
      t.features[kPhiBwd] = g(rng);
      set.push_back(t);
    }
    d1.sets.push_back(set);
  }
  d2.sets = d1.sets;
  MertConfig c;
  c.max_iters = 1;
  c.nbest = 3;
  const auto w = two_weights(0.4, -0.3);
  const auto w2 = two_weights(0.8, -0.6);
  mert(refs, std::ref(d1), w, c);
  mert(refs, std::ref(d2), w2, c);
  for (std::size_t s = 0; s < d1.sets.size(); ++s) {
    const auto a = d1(s, w, 3), b = d2(s, w2, 3);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t k = 0; k < a.size(); ++k) EXPECT_EQ(a[k].target, b[k].target);
  }
}

TEST(Mert, PooledBleuNeverDecreasesAndIsDeterministic) {
  std::mt19937_64 rng(67);
  std::normal_distribution<double> g;
  const std::vector<std::string> vocab{"a", "b", "c", "d"};
  FakeDecoder dec;
  std::vector<std::vector<std::string>> refs;
  for (int s = 0; s < 6; ++s) {
    refs.push_back(oracle::random_tokens(rng, 5, vocab));
    std::vector<Translation> set;
    for (int k = 0; k < 30; ++k) {
      Translation t;
      std::vector<MorphToken> toks;
      for (const auto& w : oracle::random_tokens(rng, 4 + rng() % 3, vocab)) toks.push_back({w, MorphTag::kStem, false});
      t.target = MorphSentence(toks);
      for (Feature f : {kPhiFwd, kPhiBwd, kLexFwd}) t.features[f] = g(rng);
      set.push_back(t);
    }
    dec.sets.push_back(set);
  }
  MertConfig c;
  c.max_iters = 5;
  c.nbest = 4;
  c.epsilon = 0.0;
  FeatureWeights w = two_weights(1.0, 1.0);
  w.set(kLexFwd, 1.0);
  const auto r1 = mert(refs, std::ref(dec), w, c);
  for (std::size_t i = 1; i < r1.best_bleu.size(); ++i) EXPECT_GE(r1.best_bleu[i], r1.best_bleu[i - 1]);
  const auto r2 = mert(refs, std::ref(dec), w, c);
  EXPECT_EQ(r1.weights, r2.weights);
  EXPECT_EQ(r1.best_bleu, r2.best_bleu);
}
