#include "morphmt/pipeline.hpp"

#include <array>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

#include "morphmt/error.hpp"
#include "morphmt/textio.hpp"

namespace morphmt {

namespace {

constexpr std::array<std::string_view, 8> kSystemNames{
    "w-system", "m-system", "m+phr", "m+lm", "m+tune", "m+phr+lm", "m+phr+lm+tune", "merged"};

void say(std::ostream* log, const std::string& msg) {
  if (log) *log << msg << '\n';
}

template <typename Fn>
void write_with(const std::string& path, Fn&& fn) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path + "'");
  fn(out);
  if (!out) throw Error("write failed for '" + path + "'");
}

std::vector<std::vector<std::string>> token_strings(const std::vector<MorphSentence>& sents) {
  std::vector<std::vector<std::string>> out;
  out.reserve(sents.size());
  for (const auto& s : sents) out.push_back(s.token_strings());
  return out;
}

std::vector<MorphSentence> as_word_sentences(const std::vector<std::vector<std::string>>& words) {
  std::vector<MorphSentence> out;
  out.reserve(words.size());
  for (const auto& w : words) out.push_back(words_as_sentence(w));
  return out;
}

std::string file_digest(const std::string& path) { return fnv1a_hex(read_file(path)); }

}  // namespace

std::string_view system_name(SystemName s) { return kSystemNames[static_cast<std::size_t>(s)]; }

SystemName parse_system(std::string_view name) {
  for (std::size_t i = 0; i < kSystemNames.size(); ++i)
    if (kSystemNames[i] == name) return static_cast<SystemName>(i);
  throw Error("unknown system '" + std::string(name) + "'");
}

const std::vector<SystemName>& all_systems() {
  static const std::vector<SystemName> all = {SystemName::kWord,       SystemName::kMorph,
                                              SystemName::kMorphPhr,   SystemName::kMorphLm,
                                              SystemName::kMorphTune,  SystemName::kMorphPhrLm,
                                              SystemName::kMorphPhrLmTune, SystemName::kMerged};
  return all;
}

SystemTraits system_traits(SystemName s) {
  switch (s) {
    case SystemName::kWord: return {false, false, false, true, false};
    case SystemName::kMorph: return {true, false, false, false, false};
    case SystemName::kMorphPhr: return {true, true, false, false, false};
    case SystemName::kMorphLm: return {true, false, true, false, false};
    case SystemName::kMorphTune: return {true, false, false, true, false};
    case SystemName::kMorphPhrLm: return {true, true, true, false, false};
    case SystemName::kMorphPhrLmTune: return {true, true, true, true, false};
    case SystemName::kMerged: return {true, true, true, false, true};
  }
  throw Error("unknown system");
}

std::vector<std::vector<std::string>> read_word_corpus(const std::string& path) {
  std::vector<std::vector<std::string>> out;
  for (const auto& line : read_lines(path)) out.push_back(split_whitespace(line));
  return out;
}

std::vector<MorphSentence> read_segmented_corpus(const std::string& path) {
  std::vector<MorphSentence> out;
  std::size_t n = 0;
  for (const auto& line : read_lines(path)) {
    ++n;
    try {
      out.push_back(parse_segmented_line(line));
    } catch (const Error& e) {
      throw Error(path + ":" + std::to_string(n) + ": " + e.what());
    }
  }
  return out;
}

BilingualSplit load_split(const Config& config, const std::string& split) {
  const std::string dir = config.get_path("data.dir");
  const std::string base = (std::filesystem::path(dir) / split).string();
  const std::string src = config.get("data.source_lang");
  const std::string tgt = config.get("data.target_lang");
  BilingualSplit s;
  s.source_words = read_word_corpus(base + "." + src);
  s.target_words = read_word_corpus(base + "." + tgt);
  s.source_segmented = read_segmented_corpus(base + ".seg." + src);
  s.target_segmented = read_segmented_corpus(base + ".seg." + tgt);
  const std::size_t n = s.source_words.size();
  if (s.target_words.size() != n || s.source_segmented.size() != n || s.target_segmented.size() != n)
    throw Error("split '" + split + "': line counts differ across files");
  for (std::size_t i = 0; i < n; ++i) {
    if (to_words(s.source_segmented[i]) != s.source_words[i] || to_words(s.target_segmented[i]) != s.target_words[i])
      throw Error("split '" + split + "' line " + std::to_string(i + 1) + ": segmentation does not match words");
  }
  return s;
}

TokenSeq sentence_keys(const MorphSentence& s, Granularity g) {
  TokenSeq out;
  out.reserve(s.size());
  for (const auto& t : s.tokens()) out.push_back(token_key(t, g));
  return out;
}

TranslationModel train_translation_model(const std::vector<MorphSentence>& sources,
                                         const std::vector<MorphSentence>& targets, Granularity g,
                                         const ExtractionConfig& extraction, const AlignmentConfig& alignment) {
  if (sources.size() != targets.size()) throw Error("train_translation_model: corpus sides differ in length");
  std::vector<SentencePair> pairs;
  std::vector<MorphSentence> kept_src, kept_tgt;
  TranslationModel tm;
  for (std::size_t i = 0; i < sources.size(); ++i) {
    if (sources[i].size() == 0 || targets[i].size() == 0) {
      ++tm.dropped;
      continue;
    }
    pairs.push_back(SentencePair{sentence_keys(sources[i], g), sentence_keys(targets[i], g)});
    kept_src.push_back(sources[i]);
    kept_tgt.push_back(targets[i]);
  }
  const ParallelCorpus corpus(std::move(pairs), g);
  CorpusAlignment aligned = align_corpus(corpus, alignment);
  std::vector<AlignmentMatrix> transposed;
  transposed.reserve(aligned.alignments.size());
  for (const auto& a : aligned.alignments) transposed.push_back(a.transposed());
  tm.lex_fwd = lexical_table_from_alignments(corpus, aligned.alignments);
  tm.lex_bwd = lexical_table_from_alignments(reversed(corpus), transposed);
  const auto phrases = extract_corpus(kept_src, kept_tgt, aligned.alignments, g, extraction);
  tm.table = score_phrase_table(phrases, tm.lex_fwd, tm.lex_bwd, g,
                                PhraseTableMeta{extraction.max_len, extraction.boundary_aware});
  tm.alignments = std::move(aligned.alignments);
  return tm;
}

PhraseTable merge_tables(const std::string& method, const TranslationModel& morph, const TranslationModel& word,
                         const SegmentationLexicon& source_lexicon, const SegmentationLexicon& target_lexicon,
                         double alpha, bool word_primary) {
  const PhraseTable pt_wm = retokenize_pt(word.table, source_lexicon, target_lexicon);
  if (method == "our-method")
    return merge_our_method(morph.table, pt_wm, word.table, alpha,
                            LexicalModels{morph.lex_fwd, morph.lex_bwd, word.lex_fwd, word.lex_bwd});
  if (method == "add-1" || method == "add-2") {
    const int n = method == "add-1" ? 1 : 2;
    return word_primary ? merge_add_features(pt_wm, morph.table, n) : merge_add_features(morph.table, pt_wm, n);
  }
  if (method == "interpolate") return merge_interpolate(morph.table, pt_wm, alpha);
  throw Error("unknown merge method '" + method + "'");
}

std::string PipelineReport::to_text() const {
  std::string out;
  out += "bleu=" + format_double(bleu.score) + "\n";
  out += "m_bleu=" + format_double(m_bleu.score) + "\n";
  std::string p;
  for (std::size_t n = 0; n < kBleuOrder; ++n) p += (n ? "," : "") + format_double(bleu.precisions[n]);
  out += "precisions=" + p + "\n";
  out += "bp=" + format_double(bleu.brevity_penalty) + "\n";
  std::string mp;
  for (std::size_t n = 0; n < kBleuOrder; ++n) mp += (n ? "," : "") + format_double(m_bleu.precisions[n]);
  out += "m_precisions=" + mp + "\n";
  out += "m_bp=" + format_double(m_bleu.brevity_penalty) + "\n";
  out += "hyp_length=" + format_double(bleu.hyp_length) + "\n";
  out += "ref_length=" + format_double(bleu.ref_length) + "\n";
  out += "triples=" + std::to_string(proximity.triples) + "\n";
  out += "exact_matches=" + std::to_string(proximity.exact_matches) + "\n";
  out += "p_value=" + (p_value ? format_double(*p_value) : std::string("NA")) + "\n";
  out += "table_entries=" + std::to_string(table_entries) + "\n";
  out += "normalization_error=" + format_double(normalization_error) + "\n";
  return out;
}

std::optional<double> paired_sign_test(const std::vector<std::vector<std::string>>& system,
                                       const std::vector<std::vector<std::string>>& baseline,
                                       const std::vector<std::vector<std::string>>& references) {
  if (system.size() != references.size() || baseline.size() != references.size())
    throw Error("sign test: hypothesis and reference counts differ");
  std::size_t wins = 0, losses = 0;
  for (std::size_t i = 0; i < references.size(); ++i) {
    const double a = smoothed_sentence_bleu(system[i], references[i]);
    const double b = smoothed_sentence_bleu(baseline[i], references[i]);
    if (a > b) ++wins;
    else if (b > a) ++losses;
  }
  if (wins + losses == 0) return std::nullopt;
  return sign_test(wins, losses);
}

PipelineRun run_pipeline(SystemName system, const Config& config, std::ostream* log) {
  const SystemTraits traits = system_traits(system);
  const std::string name(system_name(system));
  PipelineRun run;
  run.run_dir = (std::filesystem::path(config.get_path("output.dir")) / name).string();
  std::filesystem::create_directories(run.run_dir);
  const auto artifact = [&](const std::string& file) { return (std::filesystem::path(run.run_dir) / file).string(); };

  for (const char* key : {"align.iterations", "phrase.max_words", "phrase.max_morphemes", "lm.word_order",
                          "lm.morph_order", "decoder.nbest", "mert.max_iters"})
    if (config.get_int(key) <= 0) throw Error(std::string("config key '") + key + "' must be positive");
  if (config.get_int("decoder.beam") < 0) throw Error("config key 'decoder.beam' must be >= 0");

  say(log, "[" + name + "] loading data");
  const BilingualSplit train = load_split(config, config.get("data.train"));
  const BilingualSplit dev = load_split(config, config.get("data.dev"));
  const BilingualSplit test = load_split(config, config.get("data.test"));

  const Granularity g = traits.morpheme ? Granularity::kMorpheme : Granularity::kWord;
  const auto pick = [&](const BilingualSplit& s, bool source) {
    if (traits.morpheme) return source ? s.source_segmented : s.target_segmented;
    return as_word_sentences(source ? s.source_words : s.target_words);
  };

  AlignmentConfig align_cfg;
  align_cfg.iterations = config.get_int("align.iterations");
  align_cfg.heuristic = parse_heuristic(config.get("align.heuristic"));
  const auto max_words = static_cast<std::size_t>(config.get_int("phrase.max_words"));
  const auto max_morphemes = static_cast<std::size_t>(config.get_int("phrase.max_morphemes"));

  ExtractionConfig extraction;
  extraction.boundary_aware = traits.boundary_aware;
  extraction.max_len = traits.morpheme && !traits.boundary_aware ? max_morphemes : max_words;

  say(log, "[" + name + "] training translation model");
  TranslationModel tm = train_translation_model(pick(train, true), pick(train, false), g, extraction, align_cfg);

  const SegmentationLexicon target_lexicon =
      SegmentationLexicon::from_corpora(train.target_words, train.target_segmented);
  if (traits.merged) {
    say(log, "[" + name + "] training word model and merging");
    const TranslationModel word_tm = train_translation_model(as_word_sentences(train.source_words),
                                                             as_word_sentences(train.target_words), Granularity::kWord,
                                                             ExtractionConfig{max_words, false}, align_cfg);
    const SegmentationLexicon source_lexicon =
        SegmentationLexicon::from_corpora(train.source_words, train.source_segmented);
    const std::string primary = config.get("merge.primary");
    if (primary != "word" && primary != "morph") throw Error("merge.primary must be 'word' or 'morph'");
    tm.table = merge_tables(config.get("merge.method"), tm, word_tm, source_lexicon, target_lexicon,
                            config.get_double("merge.alpha"), primary == "word");
  }
  run.report.table_entries = tm.table.size();
  run.report.normalization_error = max_normalization_error(tm.table);
  write_with(artifact("pt.txt"), [&](std::ostream& out) { tm.table.write(out); });

  say(log, "[" + name + "] training language models");
  const Smoothing smoothing = parse_smoothing(config.get("lm.smoothing"));
  std::optional<NGramModel> lm_m, lm_w;
  if (traits.morpheme) {
    lm_m = NGramModel::train(token_strings(train.target_segmented), config.get_int("lm.morph_order"), smoothing);
    write_with(artifact("lm_m.arpa"), [&](std::ostream& out) { lm_m->write_arpa(out); });
  }
  if (!traits.morpheme || traits.word_lm) {
    lm_w = NGramModel::train(train.target_words, config.get_int("lm.word_order"), smoothing);
    write_with(artifact("lm_w.arpa"), [&](std::ostream& out) { lm_w->write_arpa(out); });
  }

  DecoderConfig dcfg;
  dcfg.beam = static_cast<std::size_t>(config.get_int("decoder.beam"));
  dcfg.distortion_limit = config.get_int("decoder.distortion_limit");
  dcfg.options_per_span = static_cast<std::size_t>(config.get_int("decoder.options_per_span"));
  dcfg.word_units = !(traits.morpheme && !traits.boundary_aware);
  dcfg.max_phrase_units = dcfg.word_units ? max_words : max_morphemes;
  const Decoder decoder(tm.table, lm_m ? &*lm_m : nullptr, lm_w ? &*lm_w : nullptr, dcfg);

  say(log, "[" + name + "] tuning");
  const std::vector<MorphSentence> dev_src = pick(dev, true);
  MertConfig mcfg;
  mcfg.max_iters = config.get_int("mert.max_iters");
  mcfg.epsilon = config.get_double("mert.epsilon");
  mcfg.nbest = static_cast<std::size_t>(config.get_int("decoder.nbest"));
  mcfg.seed = static_cast<std::uint64_t>(config.get_int("seed"));
  mcfg.random_directions = config.get_int("mert.random_directions");
  mcfg.metric = traits.word_tuning ? Granularity::kWord : Granularity::kMorpheme;
  const auto dev_refs =
      mcfg.metric == Granularity::kWord ? dev.target_words : token_strings(dev.target_segmented);
  const FeatureWeights initial = FeatureWeights::defaults(lm_m.has_value(), lm_w.has_value(), tm.table.extra_features());
  std::ostringstream mert_log;
  run.mert = mert(
      dev_refs,
      [&](std::size_t i, const FeatureWeights& w, std::size_t n) { return decoder.nbest(dev_src[i], w, n); },
      initial, mcfg, &mert_log);
  write_file(artifact("mert.log"), mert_log.str());
  write_with(artifact("weights.tsv"), [&](std::ostream& out) { run.mert.weights.write(out); });

  say(log, "[" + name + "] decoding test set");
  const std::vector<MorphSentence> test_src = pick(test, true);
  std::vector<std::vector<std::string>> hyp_words, hyp_morphs;
  std::vector<std::vector<UsedPhrase>> used(test.size());
  std::ostringstream nbest_out;
  std::vector<std::string> hyp_lines, hyp_word_lines;
  const std::size_t nbest_size = std::min<std::size_t>(10, mcfg.nbest);
  for (std::size_t i = 0; i < test.size(); ++i) {
    const NBestList list = decoder.nbest(test_src[i], run.mert.weights, nbest_size);
    write_nbest(nbest_out, i, list, g);
    const Translation& best = list.front();
    hyp_words.push_back(to_words(best.target));
    if (traits.morpheme) {
      hyp_morphs.push_back(best.target.token_strings());
    } else {
      std::vector<std::string> toks;
      for (const auto& w : hyp_words.back())
        for (const auto& t : target_lexicon.segment(w)) toks.push_back(t.serialize());
      hyp_morphs.push_back(std::move(toks));
    }
    hyp_lines.push_back(join(hyp_morphs.back()));
    hyp_word_lines.push_back(join(hyp_words.back()));

    const auto word_of = token_word_index(test_src[i].tokens());
    for (const auto& ap : best.trace) {
      UsedPhrase u;
      u.source = dcfg.word_units ? ap.source_units
                                 : Span{word_of[ap.source_tokens.start], word_of[ap.source_tokens.end]};
      u.output = join(phrase_to_words(ap.target));
      used[i].push_back(std::move(u));
    }
  }
  write_file(artifact("nbest.txt"), nbest_out.str());
  write_lines(artifact("hyp.txt"), hyp_lines);
  write_lines(artifact("hyp.words.txt"), hyp_word_lines);

  say(log, "[" + name + "] evaluating");
  run.report.bleu = bleu(hyp_words, test.target_words);
  run.report.m_bleu = bleu(hyp_morphs, token_strings(test.target_segmented));

  // Source-reference alignments from a word model over train (plus test when configured).
  std::vector<SentencePair> prox_pairs;
  for (std::size_t i = 0; i < train.size(); ++i)
    prox_pairs.push_back(SentencePair{train.source_words[i], train.target_words[i]});
  if (config.get_bool("eval.append_test_to_train"))
    for (std::size_t i = 0; i < test.size(); ++i)
      prox_pairs.push_back(SentencePair{test.source_words[i], test.target_words[i]});
  const ParallelCorpus prox_corpus(std::move(prox_pairs), Granularity::kWord);
  const LexicalTable prox_fwd = train_model1(prox_corpus, align_cfg.iterations);
  const LexicalTable prox_rev = train_model1(reversed(prox_corpus), align_cfg.iterations);
  std::vector<AlignmentMatrix> prox_alignments(test.size());
  std::vector<const AlignmentMatrix*> ref_alignments(test.size(), nullptr);
  for (std::size_t i = 0; i < test.size(); ++i) {
    if (test.source_words[i].empty() || test.target_words[i].empty()) continue;
    prox_alignments[i] = symmetrize(viterbi_align(test.source_words[i], test.target_words[i], prox_fwd),
                                    viterbi_align(test.target_words[i], test.source_words[i], prox_rev),
                                    align_cfg.heuristic);
    ref_alignments[i] = &prox_alignments[i];
  }
  run.report.proximity = proximity_triples(test.source_words, used, test.target_words, ref_alignments,
                                           config.get_double("eval.threshold"));

  const std::string baseline = config.get_path("eval.baseline");
  if (!baseline.empty() && std::filesystem::exists(baseline))
    run.report.p_value = paired_sign_test(hyp_words, read_word_corpus(baseline), test.target_words);

  write_file(artifact("report.txt"), run.report.to_text());

  std::string manifest = "system = " + name + "\n";
  const std::string dir = config.get_path("data.dir");
  for (const std::string& split : {config.get("data.train"), config.get("data.dev"), config.get("data.test")}) {
    for (const std::string& lang : {config.get("data.source_lang"), config.get("data.target_lang")}) {
      for (const std::string& mid : {std::string("."), std::string(".seg.")}) {
        const std::string file = split + mid + lang;
        manifest += "input " + file + " = " + file_digest((std::filesystem::path(dir) / file).string()) + "\n";
      }
    }
  }
  for (const auto& [k, v] : config.values()) {
    if (k == "output.dir" || k == "data.dir" || k == "eval.baseline") continue;  // machine-specific paths
    manifest += "setting " + k + " = " + v + "\n";
  }
  for (const char* file : {"pt.txt", "weights.tsv", "hyp.txt", "report.txt"})
    manifest += std::string("output ") + file + " = " + file_digest(artifact(file)) + "\n";
  write_file(artifact("manifest.txt"), manifest);
  say(log, "[" + name + "] done: bleu=" + format_double(run.report.bleu.score) +
               " m_bleu=" + format_double(run.report.m_bleu.score));
  return run;
}

}  // namespace morphmt
