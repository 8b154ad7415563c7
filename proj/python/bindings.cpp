#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <fstream>
#include <sstream>

#include "morphmt/config.hpp"
#include "morphmt/error.hpp"
#include "morphmt/eval.hpp"
#include "morphmt/lm.hpp"
#include "morphmt/morpho.hpp"
#include "morphmt/phrasex.hpp"
#include "morphmt/pipeline.hpp"

namespace py = pybind11;
using namespace morphmt;

namespace {

py::dict bleu_dict(const BleuReport& r) {
  py::dict d;
  d["score"] = r.score;
  d["precisions"] = std::vector<double>(r.precisions.begin(), r.precisions.end());
  d["brevity_penalty"] = r.brevity_penalty;
  d["hyp_length"] = r.hyp_length;
  d["ref_length"] = r.ref_length;
  return d;
}

std::vector<MorphSentence> parse_all(const std::vector<std::string>& lines) {
  std::vector<MorphSentence> out;
  out.reserve(lines.size());
  for (const auto& l : lines) out.push_back(parse_segmented_line(l));
  return out;
}

AlignmentMatrix matrix(std::size_t n, std::size_t m, const std::vector<Link>& links) {
  AlignmentMatrix a(n, m);
  for (const auto& [i, j] : links) a.add(i, j);
  return a;
}

py::list phrase_list(const std::vector<PhrasePair>& pairs) {
  py::list out;
  for (const auto& p : pairs) {
    py::dict d;
    d["source"] = p.source;
    d["target"] = p.target;
    d["source_span"] = py::make_tuple(p.source_span.start, p.source_span.end);
    d["target_span"] = py::make_tuple(p.target_span.start, p.target_span.end);
    d["alignment"] = p.alignment;
    out.append(d);
  }
  return out;
}

}  // namespace

PYBIND11_MODULE(_morphmt, m) {
  m.doc() = "Hybrid morpheme-word phrase-based translation toolkit";

  auto error = py::register_exception<Error>(m, "Error", PyExc_ValueError);
  py::register_exception<ParseError>(m, "ParseError", error.ptr());

  m.def(
      "parse_segmented_line",
      [](const std::string& line) {
        const auto sentence = parse_segmented_line(line);
        std::vector<std::tuple<std::string, std::string, bool>> out;
        for (const auto& t : sentence.tokens())
          out.emplace_back(t.surface, std::string(tag_name(t.tag)), t.continues);
        return out;
      },
      py::arg("line"), "Tokens as (surface, tag, continues) triples.");
  m.def(
      "to_words", [](const std::string& line) { return to_words(parse_segmented_line(line)); }, py::arg("line"),
      "Reassembled words of a segmented line.");

  m.def(
      "bleu",
      [](const std::vector<std::vector<std::string>>& hyps, const std::vector<std::vector<std::string>>& refs) {
        return bleu_dict(bleu(hyps, refs));
      },
      py::arg("hyps"), py::arg("refs"));
  m.def(
      "m_bleu",
      [](const std::vector<std::string>& hyps, const std::vector<std::string>& refs) {
        return bleu_dict(m_bleu(parse_all(hyps), parse_all(refs)));
      },
      py::arg("hyps"), py::arg("refs"), "BLEU over tagged morpheme tokens of segmented lines.");
  m.def("lcsr", &lcsr, py::arg("a"), py::arg("b"));
  m.def("sign_test", &sign_test, py::arg("wins_a"), py::arg("wins_b"));

  m.def(
      "extract_phrases",
      [](const std::vector<std::string>& source, const std::vector<std::string>& target, const std::vector<Link>& links,
         std::size_t max_len) {
        return phrase_list(extract_phrases(source, target, matrix(source.size(), target.size(), links), max_len));
      },
      py::arg("source"), py::arg("target"), py::arg("links"), py::arg("max_len") = 7);
  m.def(
      "extract_phrases_boundary_aware",
      [](const std::string& source, const std::string& target, const std::vector<Link>& links, std::size_t max_words) {
        const auto s = parse_segmented_line(source), t = parse_segmented_line(target);
        return phrase_list(extract_phrases_boundary_aware(s, t, matrix(s.size(), t.size(), links), max_words));
      },
      py::arg("source"), py::arg("target"), py::arg("links"), py::arg("max_words") = 7);

  m.def(
      "table_normalization_error",
      [](const std::string& path, const std::string& granularity) {
        std::ifstream in(path);
        if (!in) throw Error("cannot open " + path);
        return max_normalization_error(PhraseTable::read(in, parse_granularity(granularity)));
      },
      py::arg("path"), py::arg("granularity") = "morpheme");

  py::class_<NGramModel>(m, "NGramModel")
      .def_static(
          "train",
          [](const std::vector<std::vector<std::string>>& corpus, int order, const std::string& smoothing) {
            return NGramModel::train(corpus, order, parse_smoothing(smoothing));
          },
          py::arg("corpus"), py::arg("order"), py::arg("smoothing") = "witten-bell")
      .def_static(
          "from_arpa",
          [](const std::string& text) {
            std::istringstream in(text);
            return NGramModel::read_arpa(in);
          },
          py::arg("text"))
      .def_property_readonly("order", &NGramModel::order)
      .def(
          "logprob",
          [](const NGramModel& lm, const std::string& token, const std::vector<std::string>& context) {
            return lm.logprob(token, context);
          },
          py::arg("token"), py::arg("context") = std::vector<std::string>{})
      .def(
          "sentence_logprob", [](const NGramModel& lm, const std::vector<std::string>& tokens) { return lm.sentence_logprob(tokens); },
          py::arg("tokens"))
      .def("to_arpa", [](const NGramModel& lm) {
        std::ostringstream out;
        lm.write_arpa(out);
        return out.str();
      });

  m.def("systems", [] {
    std::vector<std::string> out;
    for (auto s : all_systems()) out.emplace_back(system_name(s));
    return out;
  });
  m.def(
      "run_pipeline",
      [](const std::string& system, const std::string& config_path, const std::vector<std::string>& overrides) {
        auto config = Config::load(config_path);
        for (const auto& o : overrides) config.apply_override(o);
        PipelineRun run;
        {
          py::gil_scoped_release release;
          run = run_pipeline(parse_system(system), config);
        }
        py::dict d;
        d["run_dir"] = run.run_dir;
        d["bleu"] = bleu_dict(run.report.bleu);
        d["m_bleu"] = bleu_dict(run.report.m_bleu);
        d["normalization_error"] = run.report.normalization_error;
        d["table_entries"] = run.report.table_entries;
        d["p_value"] = run.report.p_value ? py::cast(*run.report.p_value) : py::none();
        d["report"] = run.report.to_text();
        return d;
      },
      py::arg("system"), py::arg("config"), py::arg("overrides") = std::vector<std::string>{},
      "Runs a named system; overrides are key=value strings.");
}
