#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "morphmt/lm.hpp"
#include "morphmt/morpho.hpp"
#include "morphmt/phrasex.hpp"

namespace morphmt {

enum Feature : std::size_t {
  kLmMorph,
  kLmWord,
  kPhiFwd,
  kPhiBwd,
  kLexFwd,
  kLexBwd,
  kPhrasePenalty,
  kWordPenalty,
  kDistortion,
  kMergeFeat1,
  kMergeFeat2,
  kNumFeatures
};

inline constexpr std::array<std::string_view, kNumFeatures> kFeatureNames{
    "lm_morph", "lm_word",        "phi_fwd",      "phi_bwd",    "lex_fwd",     "lex_bwd",
    "phrase_penalty", "word_penalty", "distortion", "merge_feat_1", "merge_feat_2"};

std::optional<Feature> feature_from_name(std::string_view name);

using FeatureVector = std::array<double, kNumFeatures>;

FeatureVector& operator+=(FeatureVector& a, const FeatureVector& b);

/// Log-linear weights. Inactive features always contribute 0.
class FeatureWeights {
 public:
  FeatureWeights() { active_.fill(false); values_.fill(0.0); }

  /// Typical starting weights for the features a system carries.
  static FeatureWeights defaults(bool lm_morph, bool lm_word, std::size_t merge_features);

  double get(Feature f) const { return values_[f]; }
  void set(Feature f, double v);  // also activates f
  bool active(Feature f) const { return active_[f]; }
  void set_active(Feature f, bool on) { active_[f] = on; if (!on) values_[f] = 0.0; }
  std::vector<Feature> active_features() const;

  double dot(const FeatureVector& features) const;

  void write(std::ostream& out) const;  // feat_name<TAB>value
  static FeatureWeights read(std::istream& in);

  friend bool operator==(const FeatureWeights&, const FeatureWeights&) = default;

 private:
  std::array<double, kNumFeatures> values_;
  std::array<bool, kNumFeatures> active_;
};

struct DecoderConfig {
  std::size_t beam = 100;          // histogram pruning per stack; 0 = unlimited
  int distortion_limit = 6;        // in source units; negative = unlimited
  bool word_units = true;          // source units are whole words (else single tokens)
  std::size_t max_phrase_units = 10;
  std::size_t options_per_span = 20;  // 0 = unlimited
  double oov_feature_value = 0.0;  // contribution of a pass-through to each phrase-score feature
};

struct AppliedPhrase {
  Span source_units;
  Span source_tokens;
  std::vector<MorphToken> target;
  bool oov = false;
};

struct Translation {
  MorphSentence target;
  FeatureVector features{};
  double score = 0.0;
  std::vector<AppliedPhrase> trace;
};

using NBestList = std::vector<Translation>;

class Decoder {
 public:
  Decoder(const PhraseTable& table, const NGramModel* lm_morph, const NGramModel* lm_word, DecoderConfig config);

  Translation decode(const MorphSentence& source, const FeatureWeights& weights) const;
  /// Top-n distinct target strings, score descending.
  NBestList nbest(const MorphSentence& source, const FeatureWeights& weights, std::size_t n) const;

  const DecoderConfig& config() const { return config_; }
  Granularity granularity() const { return table_.granularity(); }

  /// Feature vector of one phrase-table entry (phrase scores only).
  FeatureVector entry_features(const PhraseEntry& entry) const;

 private:
  struct Option;
  struct Search;

  NBestList search(const MorphSentence& source, const FeatureWeights& weights, std::size_t n) const;

  const PhraseTable& table_;
  const NGramModel* lm_m_;
  const NGramModel* lm_w_;
  DecoderConfig config_;
  // source key -> entries
  std::unordered_map<std::string, std::vector<const PhraseTable::Map::value_type*>> index_;
};

/// `sent_id ||| target tokens ||| feat=value ... ||| score`
void write_nbest(std::ostream& out, std::size_t sent_id, const NBestList& list, Granularity g);

struct NBestRecord {
  std::size_t sent_id = 0;
  std::vector<std::string> target;
  FeatureVector features{};
  double score = 0.0;
};
std::vector<NBestRecord> read_nbest(std::istream& in);

}  // namespace morphmt
