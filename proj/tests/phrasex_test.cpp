#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "morphmt/error.hpp"
#include "morphmt/phrasex.hpp"
#include "oracles.hpp"

using namespace morphmt;

namespace {

AlignmentMatrix matrix(std::size_t n, std::size_t m, const std::vector<Link>& links) {
  AlignmentMatrix a(n, m);
  for (const auto& [i, j] : links) a.add(i, j);
  return a;
}

AlignmentMatrix all_pairs(std::size_t n, std::size_t m) {
  AlignmentMatrix a(n, m);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) a.add(i, j);
  return a;
}

PhrasePair pair_of(const std::string& s, const std::string& t, std::vector<Link> links) {
  PhrasePair p;
  p.source = split_whitespace(s);
  p.target = split_whitespace(t);
  p.alignment = std::move(links);
  p.source_span = {0, p.source.size() - 1};
  p.target_span = {0, p.target.size() - 1};
  return p;
}

const LexicalTable kEmptyLex;

}  // namespace

TEST(ExtractPhrases, TwoWordDiagonal) {
  const auto pairs = extract_phrases({"a", "b"}, {"x", "y"}, matrix(2, 2, {{0, 0}, {1, 1}}), 2);
  std::set<std::pair<std::string, std::string>> got;
  for (const auto& p : pairs) got.emplace(join(p.source), join(p.target));
  EXPECT_EQ(got, (std::set<std::pair<std::string, std::string>>{{"a", "x"}, {"b", "y"}, {"a b", "x y"}}));
}

TEST(ExtractPhrases, SingleBoxAndNoLinks) {
  EXPECT_EQ(extract_phrases({"a"}, {"x"}, matrix(1, 1, {{0, 0}}), 7).size(), 1u);
  EXPECT_TRUE(extract_phrases({"a", "b"}, {"x"}, matrix(2, 1, {}), 7).empty());
}

TEST(ExtractPhrases, UnalignedTokensExtendBoxes) {
  // b is unaligned: (a, x), (a b, x), and the same with c/y.
  const auto pairs = extract_phrases({"a", "b", "c"}, {"x", "y"}, matrix(3, 2, {{0, 0}, {2, 1}}), 3);
  EXPECT_EQ(oracle::boxes_of(pairs), oracle::consistent_boxes(3, 2, {{0, 0}, {2, 1}}, 3, 3));
  std::set<std::pair<std::string, std::string>> got;
  for (const auto& p : pairs) got.emplace(join(p.source), join(p.target));
  EXPECT_TRUE(got.count({"a b", "x"}));
  EXPECT_TRUE(got.count({"b c", "y"}));
}

TEST(ExtractPhrases, InternalAlignmentIsRelative) {
  const auto pairs = extract_phrases({"a", "b"}, {"x", "y"}, matrix(2, 2, {{0, 1}, {1, 0}}), 2);
  for (const auto& p : pairs) {
    for (const auto& [i, j] : p.alignment) {
      EXPECT_LT(i, p.source.size());
      EXPECT_LT(j, p.target.size());
    }
    if (p.source.size() == 2) EXPECT_EQ(p.alignment, (std::vector<Link>{{0, 1}, {1, 0}}));
  }
}

TEST(ExtractPhrases, MatchesBruteForce) {
  std::mt19937_64 rng(17);
  const std::vector<std::string> vocab{"a", "b", "c"};
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 1 + trial % 6, m = 1 + (trial / 6) % 6;
    const auto a = oracle::random_alignment(rng, n, m, 0.25);
    const std::size_t max_len = 1 + trial % 4;
    const auto pairs = extract_phrases(oracle::random_tokens(rng, n, vocab), oracle::random_tokens(rng, m, vocab), a, max_len);
    EXPECT_EQ(oracle::boxes_of(pairs), oracle::consistent_boxes(n, m, a.links(), max_len, max_len));
    EXPECT_EQ(oracle::boxes_of(pairs).size(), pairs.size());
  }
}

TEST(BoundaryAware, UndemocraticFullyLinkedGivesOnePair) {
  const auto src = parse_segmented_line("un/PRE+ democratic/STM");
  const auto tgt = parse_segmented_line("epä/PRE+ demokraat/STM+ t/SUF+ i/SUF+ s/SUF+ en/SUF");
  const auto pairs = extract_phrases_boundary_aware(src, tgt, all_pairs(2, 6), 7);
  ASSERT_EQ(pairs.size(), 1u);
  EXPECT_EQ(pairs[0].source, src.token_strings());
  EXPECT_EQ(pairs[0].target, tgt.token_strings());
}

TEST(BoundaryAware, UndemocraticUnlinkedEndingDoesNotLeak) {
  // "en" unaligned: classic extraction also yields the five-morpheme nonword.
  const auto src = parse_segmented_line("un/PRE+ democratic/STM");
  const auto tgt = parse_segmented_line("epä/PRE+ demokraat/STM+ t/SUF+ i/SUF+ s/SUF+ en/SUF");
  AlignmentMatrix a(2, 6);
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 5; ++j) a.add(i, j);
  const TokenSeq spurious{"epä/PRE+", "demokraat/STM+", "t/SUF+", "i/SUF+", "s/SUF+"};

  bool classic_has_spurious = false;
  for (const auto& p : extract_phrases(src.token_strings(), tgt.token_strings(), a, 10))
    if (p.target == spurious) classic_has_spurious = true;
  EXPECT_TRUE(classic_has_spurious);

  const auto pairs = extract_phrases_boundary_aware(src, tgt, a, 7);
  ASSERT_EQ(pairs.size(), 1u);
  EXPECT_EQ(pairs[0].target, tgt.token_strings());
}

TEST(BoundaryAware, MonomorphemicPairMatchesClassic) {
  const auto src = parse_segmented_line("a/STM");
  const auto tgt = parse_segmented_line("x/STM");
  const auto a = matrix(1, 1, {{0, 0}});
  EXPECT_EQ(oracle::boxes_of(extract_phrases_boundary_aware(src, tgt, a, 1)),
            oracle::boxes_of(extract_phrases(src.token_strings(), tgt.token_strings(), a, 1)));
}

TEST(BoundaryAware, NineMorphemesInThreeWordsAllowed) {
  const auto src = parse_segmented_line("un/PRE+ democratic/STM and/STM land/STM");
  const auto tgt = parse_segmented_line("epä/PRE+ demokraat/STM+ t/SUF+ i/SUF+ s/SUF+ en/SUF ja/STM maa/STM+ n/SUF");
  const auto a = all_pairs(4, 9);
  const auto pairs = extract_phrases_boundary_aware(src, tgt, a, 7);
  bool spans_all = false;
  for (const auto& p : pairs)
    if (p.target.size() == 9) spans_all = true;
  EXPECT_TRUE(spans_all);
  EXPECT_TRUE(extract_phrases_boundary_aware(src, tgt, a, 2).empty());
}

TEST(BoundaryAware, MatchesFilteredBruteForce) {
  std::mt19937_64 rng(23);
  const std::vector<std::string> alphabet{"a", "b", "c"};
  for (int trial = 0; trial < 300; ++trial) {
    const auto src = oracle::random_morph_sentence(rng, 1 + trial % 3, 3, alphabet);
    const auto tgt = oracle::random_morph_sentence(rng, 1 + (trial / 3) % 3, 3, alphabet);
    const auto a = oracle::random_alignment(rng, src.size(), tgt.size(), 0.3);
    const std::size_t max_words = 1 + trial % 3;
    const auto brute = oracle::consistent_boxes(src.size(), tgt.size(), a.links(), src.size(), tgt.size());
    EXPECT_EQ(oracle::boxes_of(extract_phrases_boundary_aware(src, tgt, a, max_words)),
              oracle::whole_word_boxes(brute, src, tgt, max_words));
  }
}

TEST(LexicalWeight, AveragesOverLinkedSources) {
  LexicalTable t;
  t.set("a", "x", 0.5);
  t.set("b", "x", 0.25);
  EXPECT_DOUBLE_EQ(lexical_weight({"a", "b"}, {"x"}, {{0, 0}, {1, 0}}, t), 0.375);
}

TEST(LexicalWeight, UnlinkedTargetUsesNull) {
  LexicalTable t;
  t.set("a", "x", 0.5);
  t.set(std::string(kNullToken), "y", 0.2);
  EXPECT_DOUBLE_EQ(lexical_weight({"a"}, {"x", "y"}, {{0, 0}}, t), 0.1);
}

TEST(ScorePhraseTable, CountRatio) {
  std::vector<PhrasePair> pairs;
  for (int k = 0; k < 2; ++k) {
    pairs.push_back(pair_of("a", "x", {{0, 0}}));
    pairs.push_back(pair_of("a", "y", {{0, 0}}));
  }
  const auto pt = score_phrase_table(pairs, kEmptyLex, kEmptyLex, Granularity::kWord);
  const auto* e = pt.find({{"a"}, {"x"}});
  ASSERT_NE(e, nullptr);
  EXPECT_EQ(e->phi_fwd, 0.5);
  EXPECT_EQ(e->phi_bwd, 1.0);
  EXPECT_EQ(e->count, 2.0);
  EXPECT_EQ(e->penalty, kPhrasePenaltyValue);
}

TEST(ScorePhraseTable, SinglePairIsDegenerate) {
  const auto pt = score_phrase_table({pair_of("a", "x", {{0, 0}})}, kEmptyLex, kEmptyLex, Granularity::kWord);
  const auto* e = pt.find({{"a"}, {"x"}});
  ASSERT_NE(e, nullptr);
  EXPECT_EQ(e->phi_fwd, 1.0);
  EXPECT_EQ(e->phi_bwd, 1.0);
  EXPECT_EQ(e->count, 1.0);
}

TEST(ScorePhraseTable, EmptyInputGivesEmptyTable) {
  EXPECT_TRUE(score_phrase_table({}, kEmptyLex, kEmptyLex, Granularity::kWord).empty());
}

TEST(ScorePhraseTable, RepresentativeAlignmentAndMaxLex) {
  LexicalTable fwd, bwd;
  fwd.set("a", "x", 0.8);
  fwd.set("b", "x", 0.2);
  fwd.set("a", "y", 0.3);
  fwd.set("b", "y", 0.6);
  bwd.set("x", "a", 1.0);
  bwd.set("y", "b", 1.0);
  bwd.set("x", "b", 0.5);
  bwd.set("y", "a", 0.5);
  std::vector<PhrasePair> pairs{pair_of("a b", "x y", {{0, 1}, {1, 0}}), pair_of("a b", "x y", {{0, 1}, {1, 0}}),
                                pair_of("a b", "x y", {{0, 0}, {1, 1}})};
  const auto pt = score_phrase_table(pairs, fwd, bwd, Granularity::kWord);
  const auto* e = pt.find({{"a", "b"}, {"x", "y"}});
  ASSERT_NE(e, nullptr);
  EXPECT_EQ(e->alignment, (std::vector<Link>{{0, 1}, {1, 0}}));
  EXPECT_EQ(e->count, 3.0);
  // Diagonal: 0.8 * 0.6; crossed: 0.2 * 0.3.
  EXPECT_DOUBLE_EQ(e->lex_fwd, 0.8 * 0.6);
  EXPECT_DOUBLE_EQ(e->lex_bwd, 1.0 * 1.0);
}

TEST(ScorePhraseTable, TieBetweenAlignmentsIsLexicographic) {
  std::vector<PhrasePair> pairs{pair_of("a b", "x y", {{0, 1}, {1, 0}}), pair_of("a b", "x y", {{0, 0}, {1, 1}})};
  const auto pt = score_phrase_table(pairs, kEmptyLex, kEmptyLex, Granularity::kWord);
  EXPECT_EQ(pt.find({{"a", "b"}, {"x", "y"}})->alignment, (std::vector<Link>{{0, 0}, {1, 1}}));
}

TEST(ScorePhraseTable, NormalizedOnRandomCorpora) {
  std::mt19937_64 rng(29);
  const std::vector<std::string> vocab{"a", "b", "c", "d"};
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<PhrasePair> all;
    for (int k = 0; k < 10; ++k) {
      const std::size_t n = 1 + k % 5, m = 1 + (k + trial) % 5;
      const auto a = oracle::random_alignment(rng, n, m, 0.35);
      const auto p = extract_phrases(oracle::random_tokens(rng, n, vocab), oracle::random_tokens(rng, m, vocab), a, 4);
      all.insert(all.end(), p.begin(), p.end());
    }
    const auto pt = score_phrase_table(all, kEmptyLex, kEmptyLex, Granularity::kWord);
    EXPECT_LE(max_normalization_error(pt), 1e-9);
    for (const auto& [k, e] : pt.entries()) {
      EXPECT_GT(e.phi_fwd, 0.0);
      EXPECT_LE(e.phi_fwd, 1.0);
      EXPECT_GE(e.count, 1.0);
    }
  }
}

TEST(PhraseTable, TextRoundTrip) {
  const auto pt = score_phrase_table({pair_of("a/STM+ b/SUF", "x/STM", {{0, 0}, {1, 0}}), pair_of("a/STM+ b/SUF", "y/STM", {{1, 0}})},
                                     kEmptyLex, kEmptyLex, Granularity::kMorpheme, {10, true});
  std::ostringstream out;
  pt.write(out);
  std::istringstream in(out.str());
  const auto back = PhraseTable::read(in, Granularity::kMorpheme);
  ASSERT_EQ(back.size(), pt.size());
  for (const auto& [k, e] : pt.entries()) {
    const auto* b = back.find(k);
    ASSERT_NE(b, nullptr);
    EXPECT_EQ(b->phi_fwd, e.phi_fwd);
    EXPECT_EQ(b->lex_bwd, e.lex_bwd);
    EXPECT_EQ(b->count, e.count);
    EXPECT_EQ(b->alignment, e.alignment);
  }
  std::ostringstream again;
  back.write(again);
  EXPECT_EQ(again.str(), out.str());
  std::istringstream bad("a ||| x ||| 1 1 1\n");
  EXPECT_THROW(PhraseTable::read(bad, Granularity::kWord), ParseError);
}

TEST(ExtractCorpus, BoundaryAwareNeedsMorphemes) {
  const std::vector<MorphSentence> s{parse_segmented_line("a/STM")};
  const std::vector<AlignmentMatrix> a{matrix(1, 1, {{0, 0}})};
  EXPECT_THROW(extract_corpus(s, s, a, Granularity::kWord, {7, true}), Error);
  EXPECT_EQ(extract_corpus(s, s, a, Granularity::kMorpheme, {7, true}).size(), 1u);
}
