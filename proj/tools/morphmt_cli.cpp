// Command-line front end: one subcommand per pipeline stage plus `pipeline`.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "morphmt/config.hpp"
#include "morphmt/error.hpp"
#include "morphmt/pipeline.hpp"
#include "morphmt/textio.hpp"

using namespace morphmt;

namespace {

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "'");
  return in;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path + "'");
  return out;
}

// Sentences of a file in tagged form: morpheme lines are parsed, word lines lifted.
std::vector<MorphSentence> read_sentences(const std::string& path, Granularity g) {
  if (g == Granularity::kMorpheme) return read_segmented_corpus(path);
  std::vector<MorphSentence> out;
  for (const auto& words : read_word_corpus(path)) out.push_back(words_as_sentence(words));
  return out;
}

PhraseTable read_table(const std::string& path, Granularity g) {
  auto in = open_in(path);
  return PhraseTable::read(in, g);
}

LexicalTable read_lex(const std::string& path) {
  auto in = open_in(path);
  return read_lexical_table(in);
}

std::optional<NGramModel> read_lm(const std::string& path) {
  if (path.empty()) return std::nullopt;
  auto in = open_in(path);
  return NGramModel::read_arpa(in);
}

struct DecodeOptions {
  std::string table;
  std::string granularity = "morpheme";
  std::string lm_morph;
  std::string lm_word;
  std::string weights;
  std::size_t beam = 100;
  int distortion_limit = 6;
  bool token_units = false;
  std::size_t max_phrase_units = 10;
};

void add_decode_options(CLI::App* cmd, DecodeOptions& o) {
  cmd->add_option("--table", o.table, "Phrase table")->required();
  cmd->add_option("--granularity", o.granularity, "word or morpheme");
  cmd->add_option("--lm-morph", o.lm_morph, "Morpheme LM (ARPA)");
  cmd->add_option("--lm-word", o.lm_word, "Word LM (ARPA)");
  cmd->add_option("--beam", o.beam, "Histogram beam (0 = unlimited)");
  cmd->add_option("--distortion-limit", o.distortion_limit, "Distortion limit (negative = unlimited)");
  cmd->add_flag("--token-units", o.token_units, "Cover the source one morpheme at a time");
  cmd->add_option("--max-phrase-units", o.max_phrase_units, "Longest source phrase in units");
}

struct LoadedDecoder {
  PhraseTable table;
  std::optional<NGramModel> lm_m, lm_w;
  std::unique_ptr<Decoder> decoder;
  Granularity g;
};

std::unique_ptr<LoadedDecoder> load_decoder(const DecodeOptions& o) {
  auto d = std::make_unique<LoadedDecoder>();
  d->g = parse_granularity(o.granularity);
  d->table = read_table(o.table, d->g);
  d->lm_m = read_lm(o.lm_morph);
  d->lm_w = read_lm(o.lm_word);
  DecoderConfig cfg;
  cfg.beam = o.beam;
  cfg.distortion_limit = o.distortion_limit;
  cfg.word_units = !o.token_units;
  cfg.max_phrase_units = o.max_phrase_units;
  d->decoder = std::make_unique<Decoder>(d->table, d->lm_m ? &*d->lm_m : nullptr, d->lm_w ? &*d->lm_w : nullptr, cfg);
  return d;
}

FeatureWeights load_weights(const std::string& path, const LoadedDecoder& d) {
  if (path.empty()) return FeatureWeights::defaults(d.lm_m.has_value(), d.lm_w.has_value(), d.table.extra_features());
  auto in = open_in(path);
  return FeatureWeights::read(in);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hybrid morpheme-word phrase-based translation toolkit"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::vector<std::string> overrides;
  app.add_option("--config", config_path, "Config file (key = value)");
  app.add_option("--set", overrides, "Override a config key: key=value")->take_all();

  // segment-apply
  auto* seg = app.add_subcommand("segment-apply", "Segment a word corpus into tagged morphemes");
  std::string seg_in, seg_out, seg_suffixes, seg_lex_words, seg_lex_seg;
  seg->add_option("--input", seg_in, "Word corpus")->required();
  seg->add_option("--output", seg_out, "Segmented output")->required();
  seg->add_option("--suffixes", seg_suffixes, "Comma-separated suffix list for the stub segmenter");
  seg->add_option("--lexicon-words", seg_lex_words, "Word corpus paired with --lexicon-segmented");
  seg->add_option("--lexicon-segmented", seg_lex_seg, "Segmented corpus giving word segmentations");

  // align
  auto* al = app.add_subcommand("align", "Word-align a parallel corpus");
  std::string al_src, al_tgt, al_out, al_lex, al_gran = "morpheme", al_heur = "grow-diag-final-and";
  int al_iters = 5;
  al->add_option("--source", al_src, "Source corpus")->required();
  al->add_option("--target", al_tgt, "Target corpus")->required();
  al->add_option("--output", al_out, "Alignment output, one line per pair")->required();
  al->add_option("--lex-prefix", al_lex, "Write <prefix>.fwd and <prefix>.bwd lexical tables");
  al->add_option("--granularity", al_gran, "word or morpheme");
  al->add_option("--iterations", al_iters, "EM iterations");
  al->add_option("--heuristic", al_heur, "intersection, union or grow-diag-final-and");

  // extract
  auto* ex = app.add_subcommand("extract", "Extract and score a phrase table");
  std::string ex_src, ex_tgt, ex_align, ex_out, ex_fwd, ex_bwd, ex_gran = "morpheme";
  std::size_t ex_max = 7;
  bool ex_boundary = false;
  ex->add_option("--source", ex_src, "Source corpus")->required();
  ex->add_option("--target", ex_tgt, "Target corpus")->required();
  ex->add_option("--alignment", ex_align, "Alignments from `align`")->required();
  ex->add_option("--lex-fwd", ex_fwd, "t(target|source) table")->required();
  ex->add_option("--lex-bwd", ex_bwd, "t(source|target) table")->required();
  ex->add_option("--output", ex_out, "Phrase table output")->required();
  ex->add_option("--granularity", ex_gran, "word or morpheme");
  ex->add_option("--max-len", ex_max, "Longest phrase (tokens, or words with --boundary-aware)");
  ex->add_flag("--boundary-aware", ex_boundary, "Only whole-word phrases");

  // lm-train
  auto* lmt = app.add_subcommand("lm-train", "Train an n-gram LM");
  std::string lm_in, lm_out, lm_smooth = "witten-bell", lm_gran = "word";
  int lm_order = 4;
  lmt->add_option("--input", lm_in, "Training corpus")->required();
  lmt->add_option("--output", lm_out, "ARPA output")->required();
  lmt->add_option("--order", lm_order, "N-gram order");
  lmt->add_option("--smoothing", lm_smooth, "mle, witten-bell or kneser-ney");
  lmt->add_option("--granularity", lm_gran, "word: whitespace tokens; words-of-morphemes: join a segmented corpus");

  // decode
  auto* dec = app.add_subcommand("decode", "Translate a corpus");
  DecodeOptions dec_opts;
  std::string dec_in, dec_out, dec_nbest_out;
  std::size_t dec_nbest = 0;
  add_decode_options(dec, dec_opts);
  dec->add_option("--weights", dec_opts.weights, "Weights file (default weights otherwise)");
  dec->add_option("--input", dec_in, "Source corpus")->required();
  dec->add_option("--output", dec_out, "1-best output")->required();
  dec->add_option("--nbest", dec_nbest, "N-best size");
  dec->add_option("--nbest-output", dec_nbest_out, "N-best output");

  // mert
  auto* mt = app.add_subcommand("mert", "Tune weights on a dev set");
  DecodeOptions mt_opts;
  std::string mt_src, mt_ref, mt_out, mt_metric = "word", mt_init;
  MertConfig mt_cfg;
  add_decode_options(mt, mt_opts);
  mt->add_option("--initial", mt_init, "Initial weights");
  mt->add_option("--dev-source", mt_src, "Dev source corpus")->required();
  mt->add_option("--dev-reference", mt_ref, "Dev reference (segmented for morpheme metric)")->required();
  mt->add_option("--metric", mt_metric, "word (BLEU over words) or morpheme (m-BLEU)");
  mt->add_option("--output", mt_out, "Tuned weights")->required();
  mt->add_option("--max-iters", mt_cfg.max_iters, "Outer iterations");
  mt->add_option("--nbest", mt_cfg.nbest, "N-best size");
  mt->add_option("--seed", mt_cfg.seed, "Random direction seed");

  // eval
  auto* ev = app.add_subcommand("eval", "Score hypotheses against references");
  std::string ev_hyp, ev_ref, ev_base, ev_out, ev_gran = "word";
  ev->add_option("--hyp", ev_hyp, "Hypotheses")->required();
  ev->add_option("--ref", ev_ref, "References")->required();
  ev->add_option("--baseline", ev_base, "Baseline hypotheses for the sign test");
  ev->add_option("--granularity", ev_gran, "word or morpheme (tagged tokens, for m-BLEU)");
  ev->add_option("--output", ev_out, "Report file (stdout otherwise)");

  // merge-pt
  auto* mg = app.add_subcommand("merge-pt", "Merge a morpheme table with a word table");
  std::string mg_method = "our-method", mg_primary, mg_secondary, mg_out, mg_word;
  std::string mg_lex_mf, mg_lex_mb, mg_lex_wf, mg_lex_wb;
  std::string mg_src_words, mg_src_seg, mg_tgt_words, mg_tgt_seg;
  double mg_alpha = 0.6;
  mg->add_option("--method", mg_method, "add-1, add-2, interpolate or our-method");
  mg->add_option("--primary", mg_primary, "Primary (morpheme) table")->required();
  mg->add_option("--secondary", mg_secondary, "Secondary table (already retokenized for add-n/interpolate)");
  mg->add_option("--word-table", mg_word, "Original word table (our-method)");
  mg->add_option("--alpha", mg_alpha, "Interpolation weight");
  mg->add_option("--lex-morph-fwd", mg_lex_mf, "Morpheme t(target|source) (our-method)");
  mg->add_option("--lex-morph-bwd", mg_lex_mb, "Morpheme t(source|target) (our-method)");
  mg->add_option("--lex-word-fwd", mg_lex_wf, "Word t(target|source) (our-method)");
  mg->add_option("--lex-word-bwd", mg_lex_wb, "Word t(source|target) (our-method)");
  mg->add_option("--source-words", mg_src_words, "Source word corpus for the lexicon");
  mg->add_option("--source-segmented", mg_src_seg, "Source segmented corpus for the lexicon");
  mg->add_option("--target-words", mg_tgt_words, "Target word corpus for the lexicon");
  mg->add_option("--target-segmented", mg_tgt_seg, "Target segmented corpus for the lexicon");
  mg->add_option("--output", mg_out, "Merged table")->required();

  // pipeline
  auto* pl = app.add_subcommand("pipeline", "Run a named system end to end");
  std::string pl_system;
  pl->add_option("system", pl_system, "w-system, m-system, m+phr, m+lm, m+tune, m+phr+lm, m+phr+lm+tune or merged")
      ->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (seg->parsed()) {
      std::vector<std::string> out;
      if (!seg_lex_words.empty()) {
        const auto lex =
            SegmentationLexicon::from_corpora(read_word_corpus(seg_lex_words), read_segmented_corpus(seg_lex_seg));
        for (const auto& words : read_word_corpus(seg_in)) {
          std::vector<std::string> toks;
          for (const auto& w : words)
            for (const auto& t : lex.segment(w)) toks.push_back(t.serialize());
          out.push_back(join(toks));
        }
      } else {
        const StubSegmenter segmenter(seg_suffixes.empty() ? std::vector<std::string>{}
                                                           : split_fields(seg_suffixes, ","));
        for (const auto& words : read_word_corpus(seg_in)) out.push_back(segmenter.segment_line(words).serialize());
      }
      write_lines(seg_out, out);
    } else if (al->parsed()) {
      const Granularity g = parse_granularity(al_gran);
      const auto src = read_sentences(al_src, g);
      const auto tgt = read_sentences(al_tgt, g);
      if (src.size() != tgt.size()) throw Error("align: corpus sides differ in length");
      std::vector<SentencePair> pairs;
      for (std::size_t i = 0; i < src.size(); ++i)
        pairs.push_back(SentencePair{sentence_keys(src[i], g), sentence_keys(tgt[i], g)});
      // Keep line numbering: empty pairs get an empty alignment line.
      std::vector<std::size_t> kept;
      for (std::size_t i = 0; i < pairs.size(); ++i)
        if (!pairs[i].source.empty() && !pairs[i].target.empty()) kept.push_back(i);
      const ParallelCorpus corpus(pairs, g);
      const CorpusAlignment a = align_corpus(corpus, AlignmentConfig{al_iters, parse_heuristic(al_heur)});
      std::vector<std::string> lines(pairs.size());
      for (std::size_t k = 0; k < kept.size(); ++k) lines[kept[k]] = a.alignments[k].to_pharaoh();
      write_lines(al_out, lines);
      if (!al_lex.empty()) {
        std::vector<AlignmentMatrix> transposed;
        for (const auto& m : a.alignments) transposed.push_back(m.transposed());
        auto f = open_out(al_lex + ".fwd");
        write_lexical_table(f, lexical_table_from_alignments(corpus, a.alignments));
        auto b = open_out(al_lex + ".bwd");
        write_lexical_table(b, lexical_table_from_alignments(reversed(corpus), transposed));
      }
      if (corpus.dropped) std::cerr << "align: skipped " << corpus.dropped << " pairs with an empty side\n";
    } else if (ex->parsed()) {
      const Granularity g = parse_granularity(ex_gran);
      const auto src = read_sentences(ex_src, g);
      const auto tgt = read_sentences(ex_tgt, g);
      const auto lines = read_lines(ex_align);
      if (src.size() != tgt.size() || src.size() != lines.size()) throw Error("extract: input line counts differ");
      std::vector<MorphSentence> s, t;
      std::vector<AlignmentMatrix> a;
      for (std::size_t i = 0; i < src.size(); ++i) {
        if (src[i].size() == 0 || tgt[i].size() == 0) continue;
        s.push_back(src[i]);
        t.push_back(tgt[i]);
        a.push_back(AlignmentMatrix::from_pharaoh(lines[i], src[i].size(), tgt[i].size()));
      }
      const auto phrases = extract_corpus(s, t, a, g, ExtractionConfig{ex_max, ex_boundary});
      const auto table = score_phrase_table(phrases, read_lex(ex_fwd), read_lex(ex_bwd), g,
                                            PhraseTableMeta{ex_max, ex_boundary});
      auto out = open_out(ex_out);
      table.write(out);
    } else if (lmt->parsed()) {
      std::vector<std::vector<std::string>> corpus;
      if (lm_gran == "word") {
        corpus = read_word_corpus(lm_in);
      } else if (lm_gran == "words-of-morphemes") {
        for (const auto& s : read_segmented_corpus(lm_in)) corpus.push_back(to_words(s));
      } else {
        throw Error("lm-train: unknown granularity '" + lm_gran + "'");
      }
      const auto lm = NGramModel::train(corpus, lm_order, parse_smoothing(lm_smooth));
      auto out = open_out(lm_out);
      lm.write_arpa(out);
    } else if (dec->parsed()) {
      const auto d = load_decoder(dec_opts);
      const FeatureWeights w = load_weights(dec_opts.weights, *d);
      std::vector<std::string> out;
      std::ostringstream nb;
      const auto sources = read_sentences(dec_in, d->g);
      for (std::size_t i = 0; i < sources.size(); ++i) {
        if (dec_nbest > 0) {
          const auto list = d->decoder->nbest(sources[i], w, dec_nbest);
          write_nbest(nb, i, list, d->g);
          out.push_back(list.front().target.serialize());
        } else {
          out.push_back(d->decoder->decode(sources[i], w).target.serialize());
        }
      }
      write_lines(dec_out, out);
      if (!dec_nbest_out.empty()) write_file(dec_nbest_out, nb.str());
    } else if (mt->parsed()) {
      const auto d = load_decoder(mt_opts);
      const FeatureWeights init = load_weights(mt_init, *d);
      mt_cfg.metric = parse_granularity(mt_metric);
      const auto sources = read_sentences(mt_src, d->g);
      std::vector<std::vector<std::string>> refs;
      if (mt_cfg.metric == Granularity::kWord) {
        for (const auto& s : read_sentences(mt_ref, d->g)) refs.push_back(to_words(s));
      } else {
        for (const auto& s : read_segmented_corpus(mt_ref)) refs.push_back(s.token_strings());
      }
      if (refs.size() != sources.size()) throw Error("mert: dev source and reference differ in length");
      const MertResult r = mert(
          refs, [&](std::size_t i, const FeatureWeights& w, std::size_t n) { return d->decoder->nbest(sources[i], w, n); },
          init, mt_cfg, &std::cerr);
      auto out = open_out(mt_out);
      r.weights.write(out);
    } else if (ev->parsed()) {
      const Granularity g = parse_granularity(ev_gran);
      std::vector<std::vector<std::string>> hyps, refs;
      if (g == Granularity::kWord) {
        hyps = read_word_corpus(ev_hyp);
        refs = read_word_corpus(ev_ref);
      } else {
        for (const auto& s : read_segmented_corpus(ev_hyp)) hyps.push_back(s.token_strings());
        for (const auto& s : read_segmented_corpus(ev_ref)) refs.push_back(s.token_strings());
      }
      PipelineReport report;
      report.bleu = bleu(hyps, refs);
      report.m_bleu = report.bleu;
      if (!ev_base.empty()) report.p_value = paired_sign_test(hyps, read_word_corpus(ev_base), refs);
      std::string text;
      text += "bleu=" + format_double(report.bleu.score) + "\n";
      std::string p;
      for (std::size_t n = 0; n < kBleuOrder; ++n) p += (n ? "," : "") + format_double(report.bleu.precisions[n]);
      text += "precisions=" + p + "\n";
      text += "bp=" + format_double(report.bleu.brevity_penalty) + "\n";
      text += "p_value=" + (report.p_value ? format_double(*report.p_value) : std::string("NA")) + "\n";
      if (ev_out.empty())
        std::cout << text;
      else
        write_file(ev_out, text);
    } else if (mg->parsed()) {
      PhraseTable merged;
      if (mg_method == "our-method") {
        if (mg_word.empty() || mg_lex_mf.empty() || mg_lex_mb.empty() || mg_lex_wf.empty() || mg_lex_wb.empty() ||
            mg_src_words.empty() || mg_src_seg.empty() || mg_tgt_words.empty() || mg_tgt_seg.empty())
          throw Error("merge-pt our-method needs --word-table, the four --lex-* tables and the lexicon corpora");
        const auto pt_m = read_table(mg_primary, Granularity::kMorpheme);
        const auto pt_w = read_table(mg_word, Granularity::kWord);
        const auto src_lex =
            SegmentationLexicon::from_corpora(read_word_corpus(mg_src_words), read_segmented_corpus(mg_src_seg));
        const auto tgt_lex =
            SegmentationLexicon::from_corpora(read_word_corpus(mg_tgt_words), read_segmented_corpus(mg_tgt_seg));
        merged = merge_our_method(pt_m, retokenize_pt(pt_w, src_lex, tgt_lex), pt_w, mg_alpha,
                                  LexicalModels{read_lex(mg_lex_mf), read_lex(mg_lex_mb), read_lex(mg_lex_wf),
                                                read_lex(mg_lex_wb)});
      } else {
        const auto primary = read_table(mg_primary, Granularity::kMorpheme);
        PhraseTable secondary(Granularity::kMorpheme);
        if (!mg_secondary.empty()) secondary = read_table(mg_secondary, Granularity::kMorpheme);
        if (mg_method == "add-1" || mg_method == "add-2")
          merged = merge_add_features(primary, secondary, mg_method == "add-1" ? 1 : 2);
        else if (mg_method == "interpolate")
          merged = merge_interpolate(primary, secondary, mg_alpha);
        else
          throw Error("unknown merge method '" + mg_method + "'");
      }
      auto out = open_out(mg_out);
      merged.write(out);
    } else if (pl->parsed()) {
      Config config = config_path.empty() ? Config::defaults() : Config::load(config_path);
      for (const auto& o : overrides) config.apply_override(o);
      const PipelineRun run = run_pipeline(parse_system(pl_system), config, &std::cerr);
      std::cout << run.report.to_text();
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
