#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "morphmt/align.hpp"
#include "morphmt/config.hpp"
#include "morphmt/decoder.hpp"
#include "morphmt/eval.hpp"
#include "morphmt/lm.hpp"
#include "morphmt/merge.hpp"
#include "morphmt/mert.hpp"
#include "morphmt/morpho.hpp"
#include "morphmt/phrasex.hpp"

namespace morphmt {

enum class SystemName {
  kWord,
  kMorph,
  kMorphPhr,
  kMorphLm,
  kMorphTune,
  kMorphPhrLm,
  kMorphPhrLmTune,
  kMerged,
};

struct SystemTraits {
  bool morpheme = false;        // morpheme tokens on both sides
  bool boundary_aware = false;  // word-boundary-aware extraction
  bool word_lm = false;         // twin LM (word LM next to the morpheme LM)
  bool word_tuning = false;     // MERT on word BLEU
  bool merged = false;          // table merged with the word system's table
};

std::string_view system_name(SystemName s);
SystemName parse_system(std::string_view name);
const std::vector<SystemName>& all_systems();
SystemTraits system_traits(SystemName s);

/// One data split in both forms, both languages.
struct BilingualSplit {
  std::vector<std::vector<std::string>> source_words;
  std::vector<std::vector<std::string>> target_words;
  std::vector<MorphSentence> source_segmented;
  std::vector<MorphSentence> target_segmented;

  std::size_t size() const { return source_words.size(); }
};

/// Reads <data.dir>/<split>.<lang> and <split>.seg.<lang>; checks that line
/// counts agree and that each segmented line reassembles to its word line.
BilingualSplit load_split(const Config& config, const std::string& split);

std::vector<std::vector<std::string>> read_word_corpus(const std::string& path);
std::vector<MorphSentence> read_segmented_corpus(const std::string& path);

/// Token keys of a sentence at the given granularity.
TokenSeq sentence_keys(const MorphSentence& s, Granularity g);

struct TranslationModel {
  PhraseTable table;
  LexicalTable lex_fwd;  // t(target | source)
  LexicalTable lex_bwd;  // t(source | target)
  std::vector<AlignmentMatrix> alignments;
  std::size_t dropped = 0;
};

/// Align, extract, score. Pairs with an empty side are skipped.
TranslationModel train_translation_model(const std::vector<MorphSentence>& sources,
                                         const std::vector<MorphSentence>& targets, Granularity g,
                                         const ExtractionConfig& extraction, const AlignmentConfig& alignment);

/// Builds the configured merge of a morpheme table with a word table.
PhraseTable merge_tables(const std::string& method, const TranslationModel& morph, const TranslationModel& word,
                         const SegmentationLexicon& source_lexicon, const SegmentationLexicon& target_lexicon,
                         double alpha, bool word_primary);

struct PipelineReport {
  BleuReport bleu;
  BleuReport m_bleu;
  ProximityResult proximity;
  std::optional<double> p_value;
  double normalization_error = 0.0;
  std::size_t table_entries = 0;

  /// key=value lines.
  std::string to_text() const;
};

struct PipelineRun {
  PipelineReport report;
  std::string run_dir;
  MertResult mert;
};

/// Sign test of two hypothesis sets against one reference, wins decided by
/// smoothed sentence BLEU (ties dropped). nullopt when every sentence ties.
std::optional<double> paired_sign_test(const std::vector<std::vector<std::string>>& system,
                                       const std::vector<std::vector<std::string>>& baseline,
                                       const std::vector<std::vector<std::string>>& references);

/// Runs one named system end to end and writes its artifacts to
/// <output.dir>/<system name>/.
PipelineRun run_pipeline(SystemName system, const Config& config, std::ostream* log = nullptr);

}  // namespace morphmt
