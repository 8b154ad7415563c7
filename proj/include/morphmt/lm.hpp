#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "morphmt/morpho.hpp"

namespace morphmt {

inline constexpr std::string_view kBos = "<s>";
inline constexpr std::string_view kEos = "</s>";
inline constexpr std::string_view kUnk = "<unk>";

enum class Smoothing { kMle, kWittenBell, kKneserNey };
Smoothing parse_smoothing(std::string_view name);
std::string_view smoothing_name(Smoothing s);

/// Backoff n-gram model. Probabilities are natural logs internally; the ARPA
/// form stores log10.
class NGramModel {
 public:
  NGramModel() = default;

  static NGramModel train(const std::vector<std::vector<std::string>>& corpus, int order,
                          Smoothing smoothing = Smoothing::kWittenBell);

  int order() const { return order_; }
  Smoothing smoothing() const { return smoothing_; }

  /// ln p(token | context); the context is truncated to the last order-1 tokens.
  /// Unknown tokens score as <unk>.
  double logprob(std::string_view token, std::span<const std::string> context) const;
  /// Sum over tokens plus the end-of-sentence event, starting from <s>.
  double sentence_logprob(std::span<const std::string> tokens) const;

  bool known(std::string_view token) const;
  /// Every predictable event: vocabulary (without <s>) plus <unk>.
  std::vector<std::string> events() const;
  std::size_t ngram_count(int n) const;

  void write_arpa(std::ostream& out) const;
  static NGramModel read_arpa(std::istream& in);

 private:
  struct Key {
    std::vector<std::int32_t> ids;
    friend bool operator==(const Key&, const Key&) = default;
  };
  struct KeyHash {
    std::size_t operator()(const Key& k) const noexcept;
  };
  struct Entry {
    double logprob = 0.0;
    double logbow = 0.0;
  };

  std::int32_t id(std::string_view token) const;
  std::int32_t intern(const std::string& token);
  double lookup(std::int32_t word, std::span<const std::int32_t> context) const;

  int order_ = 0;
  Smoothing smoothing_ = Smoothing::kWittenBell;
  std::vector<std::string> words_;
  std::unordered_map<std::string, std::int32_t> ids_;
  std::vector<std::unordered_map<Key, Entry, KeyHash>> tables_;  // tables_[n-1] holds n-grams
};

/// Decoder-side state for scoring a morpheme hypothesis with a morpheme LM and
/// a word LM at once. Words are only scored once their final morpheme arrives.
struct TwinScorerState {
  std::vector<std::string> morph_context;  // last order_m-1 morpheme tokens
  std::vector<std::string> pending;        // surfaces of the unfinished word
  std::vector<std::string> word_context;   // last order_w-1 completed words

  friend bool operator==(const TwinScorerState&, const TwinScorerState&) = default;
  std::size_t hash() const;
};

struct TwinExtension {
  TwinScorerState state;
  double morph_delta = 0.0;
  double word_delta = 0.0;
  std::size_t words_completed = 0;
};

/// Either model may be null; its delta is then 0 and its context stays empty.
TwinScorerState twin_initial(const NGramModel* lm_m, const NGramModel* lm_w);
TwinExtension twin_extend(const TwinScorerState& state, std::span<const MorphToken> morphemes,
                          const NGramModel* lm_m, const NGramModel* lm_w);
/// Flushes any pending word, then scores end-of-sentence under both models.
TwinExtension twin_finalize(const TwinScorerState& state, const NGramModel* lm_m, const NGramModel* lm_w);

/// Context-free morpheme-LM estimate of a phrase (first token scored as a unigram).
double phrase_logprob_estimate(std::span<const std::string> tokens, const NGramModel& lm);

}  // namespace morphmt
