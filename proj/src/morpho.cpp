#include "morphmt/morpho.hpp"

#include <algorithm>

#include "morphmt/error.hpp"

namespace morphmt {

std::string_view tag_name(MorphTag tag) {
  switch (tag) {
    case MorphTag::kPrefix: return "PRE";
    case MorphTag::kStem: return "STM";
    case MorphTag::kSuffix: return "SUF";
  }
  return "STM";
}

MorphTag parse_tag(std::string_view name) {
  if (name == "PRE") return MorphTag::kPrefix;
  if (name == "STM") return MorphTag::kStem;
  if (name == "SUF") return MorphTag::kSuffix;
  throw Error("unknown morpheme tag '" + std::string(name) + "'");
}

std::string_view granularity_name(Granularity g) {
  return g == Granularity::kWord ? "word" : "morpheme";
}

Granularity parse_granularity(std::string_view name) {
  if (name == "word") return Granularity::kWord;
  if (name == "morpheme") return Granularity::kMorpheme;
  throw Error("unknown granularity '" + std::string(name) + "'");
}

std::string MorphToken::serialize() const {
  std::string out = surface;
  out += '/';
  out += tag_name(tag);
  if (continues) out += '+';
  return out;
}

MorphToken parse_token(std::string_view text, std::size_t index) {
  const auto slash = text.rfind('/');
  if (slash == std::string_view::npos)
    throw ParseError("token '" + std::string(text) + "' has no '/TAG'", index);
  if (slash == 0) throw ParseError("token '" + std::string(text) + "' has an empty surface", index);

  std::string_view tag = text.substr(slash + 1);
  MorphToken tok;
  tok.surface = std::string(text.substr(0, slash));
  if (!tag.empty() && tag.back() == '+') {
    tok.continues = true;
    tag.remove_suffix(1);
  }
  if (tag == "PRE") tok.tag = MorphTag::kPrefix;
  else if (tag == "STM") tok.tag = MorphTag::kStem;
  else if (tag == "SUF") tok.tag = MorphTag::kSuffix;
  else throw ParseError("token '" + std::string(text) + "' has unknown tag", index);
  return tok;
}

MorphSentence::MorphSentence(std::vector<MorphToken> tokens) : tokens_(std::move(tokens)) {
  if (!tokens_.empty() && tokens_.back().continues)
    throw ParseError("dangling continuation on final token '" + tokens_.back().serialize() + "'",
                     tokens_.size() - 1);
  for (std::size_t i = 0; i < tokens_.size(); ++i)
    if (tokens_[i].surface.empty()) throw ParseError("empty morpheme surface", i);
}

std::string MorphSentence::serialize() const { return join(token_strings()); }

std::vector<std::string> MorphSentence::token_strings() const {
  std::vector<std::string> out;
  out.reserve(tokens_.size());
  for (const auto& t : tokens_) out.push_back(t.serialize());
  return out;
}

MorphSentence parse_segmented_line(std::string_view line) {
  std::vector<MorphToken> tokens;
  const auto parts = split_whitespace(line);
  tokens.reserve(parts.size());
  for (std::size_t i = 0; i < parts.size(); ++i) tokens.push_back(parse_token(parts[i], i));
  return MorphSentence(std::move(tokens));
}

std::vector<std::string> phrase_to_words(const std::vector<MorphToken>& tokens) {
  std::vector<std::string> words;
  std::string pending;
  for (const auto& t : tokens) {
    pending += t.surface;
    if (!t.continues) {
      words.push_back(std::move(pending));
      pending.clear();
    }
  }
  if (!pending.empty()) words.push_back(std::move(pending));
  return words;
}

std::vector<std::size_t> token_word_index(const std::vector<MorphToken>& tokens) {
  std::vector<std::size_t> index(tokens.size());
  std::size_t word = 0;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    index[i] = word;
    if (!tokens[i].continues) ++word;
  }
  return index;
}

std::vector<std::string> to_words(const MorphSentence& s) { return phrase_to_words(s.tokens()); }

std::vector<WordSpan> word_spans(const MorphSentence& s) {
  std::vector<WordSpan> spans;
  std::size_t start = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (!s[i].continues) {
      spans.push_back({start, i});
      start = i + 1;
    }
  }
  return spans;
}

bool validate_word_tags(const std::vector<MorphTag>& tags) {
  // DFA for (PRE* STM SUF*)+ : 0 = expecting a (PRE* STM) group, 1 = after a stem.
  int state = 0;
  for (MorphTag tag : tags) {
    switch (tag) {
      case MorphTag::kPrefix: state = 0; break;
      case MorphTag::kStem: state = 1; break;
      case MorphTag::kSuffix:
        if (state != 1) return false;
        break;
    }
  }
  // A prefix after a suffix opens a new group that still needs a stem.
  return state == 1;
}

bool validate_morphotactics(const MorphSentence& s) {
  for (const auto& span : word_spans(s)) {
    std::vector<MorphTag> tags;
    for (std::size_t i = span.start; i <= span.end; ++i) tags.push_back(s[i].tag);
    if (!validate_word_tags(tags)) return false;
  }
  return true;
}

StubSegmenter::StubSegmenter(std::vector<std::string> suffixes) : suffixes_(std::move(suffixes)) {
  std::erase_if(suffixes_, [](const std::string& s) { return s.empty(); });
  std::stable_sort(suffixes_.begin(), suffixes_.end(),
                   [](const std::string& a, const std::string& b) { return a.size() > b.size(); });
}

std::vector<MorphToken> StubSegmenter::segment(std::string_view word) const {
  for (const auto& suffix : suffixes_) {
    if (word.size() > suffix.size() && word.ends_with(suffix)) {
      return {MorphToken{std::string(word.substr(0, word.size() - suffix.size())), MorphTag::kStem, true},
              MorphToken{suffix, MorphTag::kSuffix, false}};
    }
  }
  return {MorphToken{std::string(word), MorphTag::kStem, false}};
}

MorphSentence StubSegmenter::segment_line(const std::vector<std::string>& words) const {
  std::vector<MorphToken> tokens;
  for (const auto& w : words) {
    auto seg = segment(w);
    tokens.insert(tokens.end(), seg.begin(), seg.end());
  }
  return MorphSentence(std::move(tokens));
}

std::vector<MorphToken> stub_segment(std::string_view word, const std::vector<std::string>& suffixes) {
  return StubSegmenter(suffixes).segment(word);
}

MorphSentence words_as_sentence(const std::vector<std::string>& words) {
  std::vector<MorphToken> tokens;
  tokens.reserve(words.size());
  for (const auto& w : words) tokens.push_back(MorphToken{w, MorphTag::kStem, false});
  return MorphSentence(std::move(tokens));
}

std::string token_key(const MorphToken& t, Granularity g) {
  return g == Granularity::kMorpheme ? t.serialize() : t.surface;
}

MorphToken token_from_key(std::string_view key, Granularity g) {
  if (g == Granularity::kMorpheme) return parse_token(key);
  return MorphToken{std::string(key), MorphTag::kStem, false};
}

std::vector<std::string> split_whitespace(std::string_view line) {
  std::vector<std::string> out;
  std::size_t i = 0;
  const auto is_space = [](char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; };
  while (i < line.size()) {
    while (i < line.size() && is_space(line[i])) ++i;
    const std::size_t start = i;
    while (i < line.size() && !is_space(line[i])) ++i;
    if (i > start) out.emplace_back(line.substr(start, i - start));
  }
  return out;
}

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

}  // namespace morphmt
