#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "morphmt/error.hpp"
#include "morphmt/lm.hpp"
#include "oracles.hpp"

using namespace morphmt;

namespace {

std::vector<std::vector<std::string>> corpus(const std::vector<std::string>& lines) {
  std::vector<std::vector<std::string>> out;
  for (const auto& l : lines) out.push_back(split_whitespace(l));
  return out;
}

std::vector<std::string> ctx(std::initializer_list<const char*> items) {
  std::vector<std::string> out;
  for (const auto* s : items) out.emplace_back(s);
  return out;
}

double context_mass(const NGramModel& lm, const std::vector<std::string>& context) {
  double sum = 0.0;
  for (const auto& e : lm.events()) sum += std::exp(lm.logprob(e, context));
  return sum;
}

std::vector<std::vector<std::string>> random_corpus(std::mt19937_64& rng, std::size_t lines,
                                                    const std::vector<std::string>& vocab) {
  std::vector<std::vector<std::string>> out;
  for (std::size_t k = 0; k < lines; ++k) out.push_back(oracle::random_tokens(rng, 1 + k % 6, vocab));
  return out;
}

std::vector<std::string> serialized(const std::vector<MorphToken>& toks) {
  std::vector<std::string> out;
  for (const auto& t : toks) out.push_back(t.serialize());
  return out;
}

}  // namespace

TEST(TrainLm, MleBigram) {
  const auto lm = NGramModel::train(corpus({"a b", "a c"}), 2, Smoothing::kMle);
  EXPECT_DOUBLE_EQ(lm.logprob("b", ctx({"a"})), std::log(0.5));
}

TEST(TrainLm, MleUnigramIncludesEndMarkers) {
  const auto lm = NGramModel::train(corpus({"a b", "a c"}), 1, Smoothing::kMle);
  // tokens a, b, a, c plus two </s>: total 6.
  EXPECT_DOUBLE_EQ(lm.logprob("a", {}), std::log(2.0 / 6.0));
  EXPECT_DOUBLE_EQ(lm.logprob(std::string(kEos), {}), std::log(2.0 / 6.0));
  EXPECT_DOUBLE_EQ(lm.logprob("b", {}), std::log(1.0 / 6.0));
}

TEST(TrainLm, WittenBellDiscountsSeenAndReservesUnseen) {
  const auto lm = NGramModel::train(corpus({"a b", "a c"}), 2, Smoothing::kWittenBell);
  EXPECT_LT(lm.logprob("b", ctx({"a"})), std::log(0.5));
  const double unseen = lm.logprob("a", ctx({"a"}));
  EXPECT_TRUE(std::isfinite(unseen));
  // 2 tokens and 2 types follow "a": p(b|a) = (1 + 2 p(b)) / (2 + 2).
  const double lambda = 2.0 / 4.0;
  const double uni_b = std::exp(lm.logprob("b", {}));
  EXPECT_NEAR(std::exp(lm.logprob("b", ctx({"a"}))), lambda * 0.5 + (1 - lambda) * uni_b, 1e-12);
}

TEST(TrainLm, OrderBelowOneIsAnError) {
  EXPECT_THROW(NGramModel::train(corpus({"a"}), 0), Error);
  EXPECT_THROW(NGramModel::train({}, 2), Error);
}

TEST(Logprob, UnknownTokenIsFiniteUnderSmoothing) {
  const auto lm = NGramModel::train(corpus({"a b", "a c"}), 2, Smoothing::kWittenBell);
  EXPECT_FALSE(lm.known("zzz"));
  EXPECT_TRUE(std::isfinite(lm.logprob("zzz", ctx({"a"}))));
  EXPECT_DOUBLE_EQ(lm.logprob("zzz", ctx({"a"})), lm.logprob(std::string(kUnk), ctx({"a"})));
}

TEST(Logprob, LongContextIsTruncated) {
  const auto lm = NGramModel::train(corpus({"a b c d", "b c a d", "c b a"}), 3, Smoothing::kWittenBell);
  EXPECT_DOUBLE_EQ(lm.logprob("d", ctx({"x", "y", "b", "c"})), lm.logprob("d", ctx({"b", "c"})));
}

TEST(Normalization, SmoothedModesSumToOne) {
  std::mt19937_64 rng(31);
  const std::vector<std::string> vocab{"a", "b", "c", "d", "e"};
  for (auto sm : {Smoothing::kWittenBell, Smoothing::kKneserNey}) {
    for (int order = 1; order <= 4; ++order) {
      const auto lm = NGramModel::train(random_corpus(rng, 12, vocab), order, sm);
      std::vector<std::vector<std::string>> contexts{{}, ctx({"<s>"}), ctx({"a"}), ctx({"b", "c"}), ctx({"<s>", "a", "b"}),
                                                     ctx({"zz"}), ctx({"e", "e", "e"})};
      for (const auto& c : contexts)
        EXPECT_NEAR(context_mass(lm, c), 1.0, 1e-6) << smoothing_name(sm) << " order " << order;
    }
  }
}

TEST(Normalization, MleSumsToOneOnSeenContexts) {
  const auto lm = NGramModel::train(corpus({"a b", "a c", "b c a"}), 2, Smoothing::kMle);
  EXPECT_NEAR(context_mass(lm, ctx({"a"})), 1.0, 1e-9);
  EXPECT_NEAR(context_mass(lm, ctx({"<s>"})), 1.0, 1e-9);
}

TEST(Arpa, RoundTripPreservesScores) {
  std::mt19937_64 rng(37);
  const std::vector<std::string> vocab{"a", "b", "c", "d"};
  for (auto sm : {Smoothing::kMle, Smoothing::kWittenBell, Smoothing::kKneserNey}) {
    const auto lm = NGramModel::train(random_corpus(rng, 15, vocab), 3, sm);
    std::ostringstream out;
    lm.write_arpa(out);
    std::istringstream in(out.str());
    const auto back = NGramModel::read_arpa(in);
    EXPECT_EQ(back.order(), 3);
    for (int k = 0; k < 50; ++k) {
      const auto s = oracle::random_tokens(rng, 1 + k % 5, vocab);
      const double a = lm.sentence_logprob(s), b = back.sentence_logprob(s);
      if (std::isinf(a)) {
        EXPECT_TRUE(std::isinf(b));
      } else {
        EXPECT_NEAR(a, b, 1e-9);
      }
    }
    std::ostringstream again;
    back.write_arpa(again);
    EXPECT_EQ(again.str(), out.str());
  }
  std::istringstream bad("not an arpa file\n");
  EXPECT_THROW(NGramModel::read_arpa(bad), ParseError);
}

TEST(TrainLm, Deterministic) {
  const auto c = corpus({"a b c", "b c d", "a c"});
  std::ostringstream x, y;
  NGramModel::train(c, 3).write_arpa(x);
  NGramModel::train(c, 3).write_arpa(y);
  EXPECT_EQ(x.str(), y.str());
}

class TwinTest : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto seg = std::vector<std::string>{
        "epä/PRE+ demokraat/STM+ t/SUF+ i/SUF+ s/SUF+ en/SUF maa/STM", "maa/STM on/STM", "talo/STM+ ssa/SUF on/STM"};
    std::vector<std::vector<std::string>> morphs, words;
    for (const auto& l : seg) {
      const auto s = parse_segmented_line(l);
      morphs.push_back(s.token_strings());
      words.push_back(to_words(s));
    }
    lm_m = NGramModel::train(morphs, 3);
    lm_w = NGramModel::train(words, 2);
  }
  NGramModel lm_m, lm_w;
};

TEST_F(TwinTest, PendingPrefixScoresNoWord) {
  const auto st = twin_initial(&lm_m, &lm_w);
  const std::vector<MorphToken> epa{{"epä", MorphTag::kPrefix, true}};
  const auto ext = twin_extend(st, epa, &lm_m, &lm_w);
  EXPECT_EQ(ext.word_delta, 0.0);
  EXPECT_EQ(ext.words_completed, 0u);
  EXPECT_EQ(ext.state.pending, (std::vector<std::string>{"epä"}));
  EXPECT_DOUBLE_EQ(ext.morph_delta, lm_m.logprob("epä/PRE+", ctx({"<s>"})));
}

TEST_F(TwinTest, CompletingTheWordScoresItOnce) {
  const auto s = parse_segmented_line("epä/PRE+ demokraat/STM+ t/SUF+ i/SUF+ s/SUF+ en/SUF");
  const auto& t = s.tokens();
  auto ext = twin_extend(twin_initial(&lm_m, &lm_w), std::span(t).first(1), &lm_m, &lm_w);
  ext = twin_extend(ext.state, std::span(t).subspan(1), &lm_m, &lm_w);
  EXPECT_DOUBLE_EQ(ext.word_delta, lm_w.logprob("epädemokraattisen", ctx({"<s>"})));
  EXPECT_EQ(ext.words_completed, 1u);
  EXPECT_TRUE(ext.state.pending.empty());
}

TEST_F(TwinTest, MonomorphemicWordScoresOneEventEach) {
  const std::vector<MorphToken> maa{{"maa", MorphTag::kStem, false}};
  const auto ext = twin_extend(twin_initial(&lm_m, &lm_w), maa, &lm_m, &lm_w);
  EXPECT_DOUBLE_EQ(ext.morph_delta, lm_m.logprob("maa/STM", ctx({"<s>"})));
  EXPECT_DOUBLE_EQ(ext.word_delta, lm_w.logprob("maa", ctx({"<s>"})));
}

TEST_F(TwinTest, FinalizeScoresEndOfSentence) {
  const std::vector<MorphToken> maa{{"maa", MorphTag::kStem, false}};
  const auto ext = twin_extend(twin_initial(&lm_m, &lm_w), maa, &lm_m, &lm_w);
  const auto fin = twin_finalize(ext.state, &lm_m, &lm_w);
  EXPECT_DOUBLE_EQ(fin.morph_delta, lm_m.logprob(std::string(kEos), ctx({"<s>", "maa/STM"})));
  EXPECT_DOUBLE_EQ(fin.word_delta, lm_w.logprob(std::string(kEos), ctx({"maa"})));
}

TEST_F(TwinTest, FinalizeFlushesPendingWord) {
  const std::vector<MorphToken> foo{{"foo", MorphTag::kStem, true}};
  const auto ext = twin_extend(twin_initial(&lm_m, &lm_w), foo, &lm_m, &lm_w);
  const auto fin = twin_finalize(ext.state, &lm_m, &lm_w);
  EXPECT_DOUBLE_EQ(fin.word_delta, lm_w.logprob("foo", ctx({"<s>"})) + lm_w.logprob(std::string(kEos), ctx({"foo"})));
  EXPECT_EQ(fin.words_completed, 1u);
}

TEST_F(TwinTest, MissingModelContributesNothing) {
  const std::vector<MorphToken> maa{{"maa", MorphTag::kStem, false}};
  const auto ext = twin_extend(twin_initial(&lm_m, nullptr), maa, &lm_m, nullptr);
  EXPECT_EQ(ext.word_delta, 0.0);
  EXPECT_TRUE(ext.state.word_context.empty());
  EXPECT_EQ(ext.words_completed, 1u);
}

TEST(TwinProperties, SumsMatchOfflineScoresAndChunkingIsIrrelevant) {
  std::mt19937_64 rng(41);
  const std::vector<std::string> alphabet{"ka", "lo", "ssa", "t", "i"};
  std::vector<std::vector<std::string>> morph_train, word_train;
  for (int k = 0; k < 40; ++k) {
    const auto s = oracle::random_morph_sentence(rng, 1 + k % 5, 3, alphabet);
    morph_train.push_back(s.token_strings());
    word_train.push_back(to_words(s));
  }
  const auto lm_m = NGramModel::train(morph_train, 4, Smoothing::kWittenBell);
  const auto lm_w = NGramModel::train(word_train, 3, Smoothing::kKneserNey);

  for (int trial = 0; trial < 100; ++trial) {
    const auto s = oracle::random_morph_sentence(rng, 1 + trial % 6, 4, alphabet);
    const auto& toks = s.tokens();
    std::vector<TwinScorerState> finals;
    for (int chunking = 0; chunking < 3; ++chunking) {
      auto st = twin_initial(&lm_m, &lm_w);
      double m = 0.0, w = 0.0;
      std::size_t pos = 0;
      while (pos < toks.size()) {
        const std::size_t len = std::uniform_int_distribution<std::size_t>(1, toks.size() - pos)(rng);
        const auto ext = twin_extend(st, std::span(toks).subspan(pos, len), &lm_m, &lm_w);
        m += ext.morph_delta;
        w += ext.word_delta;
        st = ext.state;
        pos += len;
      }
      finals.push_back(st);
      const auto fin = twin_finalize(st, &lm_m, &lm_w);
      m += fin.morph_delta;
      w += fin.word_delta;
      EXPECT_NEAR(w, lm_w.sentence_logprob(to_words(s)), 1e-9);
      EXPECT_NEAR(m, lm_m.sentence_logprob(serialized(toks)), 1e-9);
    }
    EXPECT_EQ(finals[0], finals[1]);
    EXPECT_EQ(finals[1], finals[2]);
  }
}

TEST(PhraseEstimate, FirstTokenIsUnigram) {
  const auto lm = NGramModel::train(corpus({"a b", "a c"}), 2, Smoothing::kWittenBell);
  EXPECT_DOUBLE_EQ(phrase_logprob_estimate(ctx({"a", "b"}), lm), lm.logprob("a", {}) + lm.logprob("b", ctx({"a"})));
}
