#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "provkit/cli.hpp"
#include "provkit/corpus.hpp"
#include "provkit/errors.hpp"
#include "provkit/evalmetrics.hpp"
#include "provkit/features.hpp"
#include "provkit/learn.hpp"
#include "provkit/lm_gltr.hpp"
#include "provkit/pipeline.hpp"
#include "provkit/textmetrics.hpp"

namespace py = pybind11;
using namespace provkit;

namespace {

TokenSeq seq(const std::vector<std::string>& tokens, TokenMode mode) { return TokenSeq{tokens, mode}; }

FeatureVector fv(const std::vector<double>& v) { return FeatureVector{v}; }

}  // namespace

PYBIND11_MODULE(_provkit, m) {
  m.doc() = "Polish Ratio labelling, LLM-involvement detection and GLTR token statistics";
  m.attr("__version__") = "0.1.0";

  py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);

  py::enum_<TokenMode>(m, "TokenMode").value("word", TokenMode::word).value("char", TokenMode::char_);
  py::enum_<Source>(m, "Source")
      .value("human", Source::human)
      .value("polished", Source::polished)
      .value("generated", Source::generated);
  py::enum_<Split>(m, "Split").value("train", Split::train).value("val", Split::val).value("test", Split::test);
  py::enum_<Task>(m, "Task").value("detect", Task::detect).value("pr_regress", Task::pr_regress);
  py::enum_<LossKind>(m, "LossKind")
      .value("l1", LossKind::l1)
      .value("smooth_l1", LossKind::smooth_l1)
      .value("mse", LossKind::mse)
      .value("bce", LossKind::bce);
  py::enum_<SmoothL1Mode>(m, "SmoothL1Mode")
      .value("paper_literal", SmoothL1Mode::paper_literal)
      .value("standard", SmoothL1Mode::standard);

  // textmetrics: token lists in, numbers out.
  m.def(
      "tokenize", [](const std::string& text, TokenMode mode) { return tokenize(text, mode).tokens; },
      py::arg("text"), py::arg("mode") = TokenMode::word);
  m.def(
      "jaccard_distance",
      [](const std::vector<std::string>& a, const std::vector<std::string>& b) {
        return jaccard_distance(seq(a, TokenMode::word), seq(b, TokenMode::word));
      },
      py::arg("a"), py::arg("b"));
  m.def(
      "levenshtein",
      [](const std::vector<std::string>& a, const std::vector<std::string>& b) {
        return levenshtein(seq(a, TokenMode::word), seq(b, TokenMode::word));
      },
      py::arg("a"), py::arg("b"));
  m.def(
      "normalized_levenshtein",
      [](const std::vector<std::string>& a, const std::vector<std::string>& b) {
        return normalized_levenshtein(seq(a, TokenMode::word), seq(b, TokenMode::word));
      },
      py::arg("a"), py::arg("b"));
  m.def(
      "polish_ratio",
      [](const std::string& original, const std::string& polished, TokenMode mode) {
        const auto a = tokenize(original, mode), b = tokenize(polished, mode);
        return py::dict(py::arg("jaccard") = jaccard_distance(a, b),
                        py::arg("levenshtein_norm") = normalized_levenshtein(a, b));
      },
      py::arg("original"), py::arg("polished"), py::arg("mode") = TokenMode::word);
  m.def(
      "cosine_similarity",
      [](const std::vector<double>& u, const std::vector<double>& v) { return cosine_similarity(fv(u), fv(v)); },
      py::arg("u"), py::arg("v"));

  // features
  py::class_<FeaturizerConfig>(m, "FeaturizerConfig")
      .def(py::init<>())
      .def_readwrite("dim", &FeaturizerConfig::dim)
      .def_readwrite("char_ngram_min", &FeaturizerConfig::char_ngram_min)
      .def_readwrite("char_ngram_max", &FeaturizerConfig::char_ngram_max)
      .def_readwrite("include_word_unigrams", &FeaturizerConfig::include_word_unigrams)
      .def_readwrite("hash_seed", &FeaturizerConfig::hash_seed)
      .def("fingerprint", &FeaturizerConfig::fingerprint);
  m.def(
      "featurize", [](const std::string& text, const FeaturizerConfig& cfg) { return featurize(text, cfg).values; },
      py::arg("text"), py::arg("config") = FeaturizerConfig{});

  // evalmetrics
  m.def("accuracy", [](const std::vector<int>& p, const std::vector<int>& t) { return accuracy(p, t); });
  m.def("auroc", [](const std::vector<double>& s, const std::vector<int>& t) { return auroc(s, t); });
  m.def("mae", [](const std::vector<double>& p, const std::vector<double>& t) { return mae(p, t); });
  m.def("precision_recall", [](const std::vector<int>& p, const std::vector<int>& t) {
    py::dict out;
    for (const auto& [c, s] : precision_recall(p, t)) {
      out[py::int_(c)] = py::dict(py::arg("precision") = s.precision, py::arg("recall") = s.recall,
                                  py::arg("support") = s.support);
    }
    return out;
  });
  m.def(
      "interpret_pr",
      [](double score, double low, double high) {
        return std::string(to_string(interpret_pr(score, PrThresholds{low, high})));
      },
      py::arg("score"), py::arg("low") = 0.2, py::arg("high") = 0.6);
  m.def("distribution_summary", [](const std::map<std::string, std::vector<double>>& groups) {
    py::dict out;
    for (const auto& [name, s] : distribution_summary(groups)) {
      out[py::str(name)] = py::dict(py::arg("min") = s.min, py::arg("q1") = s.q1, py::arg("median") = s.median,
                                    py::arg("q3") = s.q3, py::arg("max") = s.max, py::arg("mean") = s.mean);
    }
    return out;
  });

  // learn
  m.def(
      "loss",
      [](LossKind kind, double y, double y_hat, double beta, SmoothL1Mode mode) {
        return loss(kind, y, y_hat, beta, mode);
      },
      py::arg("kind"), py::arg("y"), py::arg("y_hat"), py::arg("beta") = 0.1,
      py::arg("mode") = SmoothL1Mode::standard);

  py::class_<ModelArtifact>(m, "Model")
      .def_static(
          "load", [](const std::filesystem::path& p) { return load_model(p); }, py::arg("path"))
      .def_property_readonly("task", [](const ModelArtifact& a) { return a.head.task(); })
      .def_property_readonly("input_dim", [](const ModelArtifact& a) { return a.head.input_dim(); })
      .def_property_readonly("featurizer_hash", [](const ModelArtifact& a) { return a.featurizer_hash; })
      .def("forward", [](const ModelArtifact& a, const std::vector<double>& x) { return a.head.forward(x); })
      .def("score_text", [](const ModelArtifact& a, const std::string& text) {
        if (!a.featurizer) throw ValidationError("model was trained on imported embeddings; use forward()");
        return a.head.forward(featurize(text, *a.featurizer));
      });

  // lm_gltr
  py::class_<TokenStats>(m, "TokenStats")
      .def_readonly("token", &TokenStats::token)
      .def_readonly("prob", &TokenStats::prob)
      .def_readonly("rank", &TokenStats::rank)
      .def_readonly("entropy", &TokenStats::entropy);
  py::class_<NGramLM>(m, "NGramLM")
      .def(py::init([](const std::vector<std::string>& texts, int order, double add_k, TokenMode mode) {
             std::vector<TokenSeq> corpus;
             for (const auto& t : texts) corpus.push_back(tokenize(t, mode));
             return std::make_unique<NGramLM>(corpus, order, add_k);
           }),
           py::arg("texts"), py::arg("order") = 3, py::arg("add_k") = 0.1, py::arg("mode") = TokenMode::word)
      .def_property_readonly("vocab", &NGramLM::vocab)
      .def("next_distribution",
           [](const NGramLM& lm, const std::vector<std::string>& context) { return lm.next_distribution(context); })
      .def(
          "token_stats",
          [](const NGramLM& lm, const std::string& text, TokenMode mode) {
            return token_stats(lm, tokenize(text, mode));
          },
          py::arg("text"), py::arg("mode") = TokenMode::word);
  m.def("bucket_histogram", [](const std::vector<TokenStats>& stats) {
    const auto h = bucket_histogram(stats);
    return py::dict(py::arg("le10") = h.le10, py::arg("le100") = h.le100, py::arg("le1000") = h.le1000,
                    py::arg("rest") = h.rest);
  });

  // corpus / pipeline, exchanged as JSONL text
  m.def(
      "label_jsonl",
      [](const std::string& jsonl) {
        std::istringstream in(jsonl);
        std::ostringstream out;
        write_jsonl(label(parse_jsonl(in)), out);
        return out.str();
      },
      py::arg("jsonl"));
  m.def(
      "split_jsonl",
      [](const std::string& jsonl, const std::string& ratios, std::uint64_t seed) {
        std::istringstream in(jsonl);
        std::ostringstream out;
        write_jsonl(split(parse_jsonl(in), parse_ratios(ratios), seed), out);
        return out.str();
      },
      py::arg("jsonl"), py::arg("ratios") = "6:3:1", py::arg("seed") = 0);
  m.def(
      "synthesize_jsonl",
      [](std::size_t pairs, const std::vector<double>& rates, std::uint64_t seed) {
        SynthParams p;
        p.pairs = pairs;
        p.rates = rates;
        p.seed = seed;
        std::ostringstream out;
        write_jsonl(synthesize(p), out);
        return out.str();
      },
      py::arg("pairs"), py::arg("rates"), py::arg("seed") = 0);
  m.def(
      "highlight_diff",
      [](const std::string& original, const std::string& polished, TokenMode mode) {
        const auto d = highlight_diff(original, polished, mode);
        return py::dict(py::arg("text") = render_diff_text(d), py::arg("edited") = d.edited_count,
                        py::arg("levenshtein_norm") = d.levenshtein_norm, py::arg("jaccard") = d.jaccard);
      },
      py::arg("original"), py::arg("polished"), py::arg("mode") = TokenMode::word);

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        const int code = run_cli(args, out, err);
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"));
}
