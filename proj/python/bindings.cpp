#include <sstream>

#include <pybind11/operators.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "tarlab/analysis.hpp"
#include "tarlab/cli.hpp"
#include "tarlab/corpus.hpp"
#include "tarlab/error.hpp"
#include "tarlab/lexical.hpp"
#include "tarlab/metrics.hpp"
#include "tarlab/runio.hpp"

namespace py = pybind11;
using namespace tarlab;

namespace {

TokenizerOptions tokenizer_of(const std::vector<std::string>& stopwords)
{
    TokenizerOptions opts;
    opts.stopwords.insert(stopwords.begin(), stopwords.end());
    return opts;
}

template <typename T, typename F>
T from_text(const std::string& text, F&& parse)
{
    std::istringstream in(text);
    return parse(in);
}

template <typename F>
std::string to_text(F&& write)
{
    std::ostringstream out;
    write(out);
    return out.str();
}

Representation repr_arg(const py::object& o)
{
    if (py::isinstance<py::str>(o)) {
        return parse_representation(o.cast<std::string>());
    }
    return o.cast<Representation>();
}

Model model_arg(const py::object& o)
{
    if (py::isinstance<py::str>(o)) {
        return parse_model(o.cast<std::string>());
    }
    return o.cast<Model>();
}

Measure measure_arg(const py::object& o)
{
    if (py::isinstance<py::str>(o)) {
        return parse_measure(o.cast<std::string>());
    }
    return o.cast<Measure>();
}

EvaluationOptions eval_options(bool strict)
{
    EvaluationOptions opts;
    opts.completion = strict ? CompletionMode::Strict : CompletionMode::Append;
    return opts;
}

}  // namespace

PYBIND11_MODULE(_core, m)
{
    m.doc() = "Screening prioritisation: corpus parsing, lexical ranking, evaluation and run comparison";

    py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
    py::register_exception<IngestError>(m, "IngestError", PyExc_ValueError);
    py::register_exception<MissingDocumentsError>(m, "MissingDocumentsError", PyExc_LookupError);
    py::register_exception<EvaluationError>(m, "EvaluationError", PyExc_RuntimeError);

    m.attr("SEPARATOR") = std::string(kSeparator);

    py::enum_<Representation>(m, "Representation")
        .value("TITLE", Representation::Title)
        .value("TIAB", Representation::TiAb);
    py::enum_<Model>(m, "Model").value("BM25", Model::BM25).value("QLM", Model::QLM);
    py::enum_<Measure>(m, "Measure")
        .value("LAST_REL", Measure::LastRel)
        .value("AP", Measure::AP)
        .value("RECALL_1", Measure::Recall1)
        .value("RECALL_5", Measure::Recall5)
        .value("RECALL_10", Measure::Recall10)
        .value("RECALL_20", Measure::Recall20)
        .value("WSS_95", Measure::WSS95)
        .value("WSS_100", Measure::WSS100);
    py::enum_<TTestStatus>(m, "TTestStatus")
        .value("OK", TTestStatus::Ok)
        .value("IDENTICAL_RUNS", TTestStatus::IdenticalRuns)
        .value("ZERO_VARIANCE", TTestStatus::ZeroVariance);

    // corpus
    py::class_<Topic>(m, "Topic")
        .def(py::init<>())
        .def(py::init([](std::string id, std::string title, std::vector<std::string> pmids, std::string query) {
                 return Topic{std::move(id), std::move(title), std::move(query), std::move(pmids), {}};
             }),
             py::arg("id"), py::arg("title"), py::arg("pmids"), py::arg("boolean_query") = "")
        .def_readwrite("id", &Topic::id)
        .def_readwrite("title", &Topic::title)
        .def_readwrite("boolean_query", &Topic::boolean_query)
        .def_readwrite("pmids", &Topic::pmids)
        .def_readwrite("metadata", &Topic::metadata)
        .def(py::self == py::self)
        .def("__repr__", [](const Topic& t) {
            return "Topic(" + t.id + ", " + std::to_string(t.pmids.size()) + " candidates)";
        });

    py::class_<DocRecord>(m, "DocRecord")
        .def(py::init([](std::string pmid, std::string title, std::string abstract) {
                 return DocRecord{std::move(pmid), std::move(title), std::move(abstract)};
             }),
             py::arg("pmid"), py::arg("title"), py::arg("abstract") = "")
        .def_readwrite("pmid", &DocRecord::pmid)
        .def_readwrite("title", &DocRecord::title)
        .def_readwrite("abstract", &DocRecord::abstract)
        .def(py::self == py::self);

    py::class_<Qrels>(m, "Qrels")
        .def(py::init<>())
        .def("add", &Qrels::add, py::arg("topic_id"), py::arg("pmid"), py::arg("grade"))
        .def("grade", &Qrels::grade)
        .def("is_relevant", &Qrels::is_relevant)
        .def("topics", &Qrels::topics)
        .def("__len__", &Qrels::size)
        .def(py::self == py::self);

    py::class_<DocStore>(m, "DocStore")
        .def(py::init<>())
        .def("insert", &DocStore::insert)
        .def("get", [](const DocStore& s, const std::string& pmid) -> std::optional<DocRecord> {
            if (const auto* d = s.find(pmid)) {
                return *d;
            }
            return std::nullopt;
        })
        .def("__contains__", [](const DocStore& s, const std::string& pmid) { return s.contains(pmid); })
        .def("__len__", &DocStore::size)
        .def("pmids", [](const DocStore& s) {
            std::vector<std::string> out;
            for (const auto& [pmid, doc] : s) {
                out.push_back(pmid);
            }
            return out;
        });

    m.def("parse_topics", [](const std::string& text) { return from_text<std::vector<Topic>>(text, [](std::istream& in) { return parse_topics(in); }); });
    m.def("write_topics", [](const std::vector<Topic>& topics) {
        return to_text([&](std::ostream& os) { write_topics(os, topics); });
    });
    m.def("parse_qrels", [](const std::string& text) { return from_text<Qrels>(text, [](std::istream& in) { return parse_qrels(in); }); });
    m.def("write_qrels", [](const Qrels& q) { return to_text([&](std::ostream& os) { write_qrels(os, q); }); });
    m.def(
        "load_corpus",
        [](const std::string& text) {
            auto loaded = from_text<CorpusLoad>(text, [](std::istream& in) { return load_corpus(in); });
            return py::make_tuple(std::move(loaded.store), loaded.warnings, loaded.rejected_lines);
        },
        "Parse JSON-lines records; returns (store, warnings, rejected line numbers).");
    m.def(
        "represent",
        [](const DocRecord& doc, const py::object& mode) { return represent(doc, repr_arg(mode)).text; },
        py::arg("doc"), py::arg("mode"));

    // lexical
    py::class_<LexicalParams>(m, "LexicalParams")
        .def(py::init([](double k1, double b, double lambda, double epsilon) {
                 LexicalParams p{k1, b, lambda, epsilon};
                 p.validate();
                 return p;
             }),
             py::arg("k1") = 1.5, py::arg("b") = 0.75, py::arg("lambda_") = 0.5, py::arg("epsilon") = 0.25)
        .def_readwrite("k1", &LexicalParams::k1)
        .def_readwrite("b", &LexicalParams::b)
        .def_readwrite("lambda_", &LexicalParams::lambda)
        .def_readwrite("epsilon", &LexicalParams::epsilon);

    m.def(
        "tokenize",
        [](const std::string& text, const std::vector<std::string>& stopwords) {
            return tokenize(text, tokenizer_of(stopwords)).tokens;
        },
        py::arg("text"), py::arg("stopwords") = std::vector<std::string>{});

    m.def(
        "score_documents",
        [](const std::vector<std::pair<std::string, std::string>>& docs, const std::string& query,
           const py::object& model, const LexicalParams& params) {
            params.validate();
            std::vector<std::pair<std::string, TokenStream>> toks;
            for (const auto& [pmid, text] : docs) {
                toks.emplace_back(pmid, tokenize(text));
            }
            const auto stats = CollectionStats::from_documents(toks);
            const auto q = tokenize(query);
            const auto mdl = model_arg(model);
            std::vector<std::pair<std::string, double>> out;
            for (const auto& [pmid, t] : toks) {
                out.emplace_back(pmid, mdl == Model::BM25 ? bm25_score(q, pmid, stats, params)
                                                          : qlm_score(q, pmid, stats, params));
            }
            return out;
        },
        py::arg("docs"), py::arg("query"), py::arg("model"), py::arg("params") = LexicalParams{},
        "Score (pmid, text) documents against a query using statistics over exactly these documents.");

    m.def(
        "rank_topic",
        [](const Topic& topic, const DocStore& store, const py::object& mode, const py::object& model,
           const LexicalParams& params) { return rank_topic(topic, store, repr_arg(mode), model_arg(model), params); },
        py::arg("topic"), py::arg("store"), py::arg("mode"), py::arg("model"), py::arg("params") = LexicalParams{});
    m.def(
        "rank_topics",
        [](const std::vector<Topic>& topics, const DocStore& store, const py::object& mode, const py::object& model,
           const LexicalParams& params, std::string tag, unsigned jobs) {
            const auto r = repr_arg(mode);
            const auto mdl = model_arg(model);
            py::gil_scoped_release release;
            return rank_topics(topics, store, r, mdl, params, std::move(tag), jobs);
        },
        py::arg("topics"), py::arg("store"), py::arg("mode"), py::arg("model"), py::arg("params") = LexicalParams{},
        py::arg("tag") = "run", py::arg("jobs") = 1);

    // runio
    py::class_<RunEntry>(m, "RunEntry")
        .def(py::init([](std::string pmid, std::size_t rank, double score) {
                 return RunEntry{std::move(pmid), rank, score};
             }),
             py::arg("pmid"), py::arg("rank") = 0, py::arg("score") = 0.0)
        .def_readwrite("pmid", &RunEntry::pmid)
        .def_readwrite("rank", &RunEntry::rank)
        .def_readwrite("score", &RunEntry::score)
        .def(py::self == py::self)
        .def("__repr__", [](const RunEntry& e) {
            return "RunEntry(" + e.pmid + ", " + std::to_string(e.rank) + ", " + format_score(e.score) + ")";
        });

    py::class_<RankedRun>(m, "RankedRun")
        .def(py::init<>())
        .def_readwrite("tag", &RankedRun::tag)
        .def_readwrite("flag", &RankedRun::flag)
        .def_readwrite("topics", &RankedRun::topics)
        .def("normalize", [](RankedRun& r) {
            for (auto& [id, entries] : r.topics) {
                sort_entries(entries);
            }
        })
        .def(py::self == py::self);

    m.def("read_run", [](const std::string& text) { return from_text<RankedRun>(text, [](std::istream& in) { return read_run(in); }); });
    m.def("write_run", [](const RankedRun& run) { return to_text([&](std::ostream& os) { write_run(os, run); }); });
    m.def("validate_run", [](const RankedRun& run, const std::vector<Topic>& topics, const Qrels& qrels) {
        const auto report = validate_against(run, topics, qrels);
        py::dict out;
        out["complete"] = report.complete();
        py::list gaps;
        for (const auto& t : report.topics) {
            py::dict g;
            g["topic_id"] = t.topic_id;
            g["missing_candidates"] = t.missing_candidates;
            g["foreign_documents"] = t.foreign_documents;
            g["unranked_relevant"] = t.unranked_relevant;
            gaps.append(g);
        }
        out["topics"] = gaps;
        out["unranked_topics"] = report.unranked_topics;
        out["unknown_topics"] = report.unknown_topics;
        return out;
    });

    // metrics
    m.def("last_rel", [](std::size_t n, std::vector<std::size_t> ranks) { return last_rel(JudgedRanking(n, std::move(ranks))); },
          py::arg("n"), py::arg("relevant_ranks"));
    m.def("average_precision",
          [](std::size_t n, std::vector<std::size_t> ranks) { return average_precision(JudgedRanking(n, std::move(ranks))); },
          py::arg("n"), py::arg("relevant_ranks"));
    m.def(
        "recall_at_percent",
        [](std::size_t n, std::vector<std::size_t> ranks, double p) {
            return recall_at_percent(JudgedRanking(n, std::move(ranks)), p);
        },
        py::arg("n"), py::arg("relevant_ranks"), py::arg("p"));
    m.def(
        "wss",
        [](std::size_t n, std::vector<std::size_t> ranks, double k) { return wss(JudgedRanking(n, std::move(ranks)), k); },
        py::arg("n"), py::arg("relevant_ranks"), py::arg("k"));

    py::class_<TopicEval>(m, "TopicEval")
        .def_readonly("topic_id", &TopicEval::topic_id)
        .def_readonly("n", &TopicEval::n)
        .def_readonly("r", &TopicEval::r)
        .def_readonly("last_rel", &TopicEval::last_rel)
        .def_readonly("ap", &TopicEval::ap)
        .def_readonly("recall", &TopicEval::recall)
        .def_readonly("wss95", &TopicEval::wss95)
        .def_readonly("wss100", &TopicEval::wss100)
        .def("value", [](const TopicEval& t, const py::object& measure) { return t.value(measure_arg(measure)); });

    py::class_<MetricReport>(m, "MetricReport")
        .def_readonly("run_tag", &MetricReport::run_tag)
        .def_readonly("topics", &MetricReport::topics)
        .def_property_readonly("excluded",
                               [](const MetricReport& r) {
                                   std::vector<std::pair<std::string, std::string>> out;
                                   for (const auto& e : r.excluded) {
                                       out.emplace_back(e.topic_id, e.reason);
                                   }
                                   return out;
                               })
        .def("mean", [](const MetricReport& r, const py::object& measure) { return r.mean(measure_arg(measure)); })
        .def("to_jsonl", &cli::report_jsonl);

    m.def(
        "evaluate",
        [](const RankedRun& run, const std::vector<Topic>& topics, const Qrels& qrels, bool strict) {
            return evaluate(run, topics, qrels, eval_options(strict));
        },
        py::arg("run"), py::arg("topics"), py::arg("qrels"), py::arg("strict") = false);

    // analysis
    py::class_<PairedComparison>(m, "PairedComparison")
        .def_readonly("measure", &PairedComparison::measure)
        .def_readonly("n", &PairedComparison::n)
        .def_readonly("mean_a", &PairedComparison::mean_a)
        .def_readonly("mean_b", &PairedComparison::mean_b)
        .def_readonly("t_statistic", &PairedComparison::t_statistic)
        .def_readonly("df", &PairedComparison::df)
        .def_readonly("p_value", &PairedComparison::p_value)
        .def_readonly("corrected_p", &PairedComparison::corrected_p)
        .def_readonly("n_comparisons", &PairedComparison::n_comparisons)
        .def_readonly("status", &PairedComparison::status)
        .def("significant", &PairedComparison::significant, py::arg("alpha") = 0.05);

    m.def(
        "paired_ttest",
        [](const std::vector<double>& a, const std::vector<double>& b, int n_comparisons) {
            return paired_ttest(a, b, n_comparisons);
        },
        py::arg("a"), py::arg("b"), py::arg("n_comparisons") = 1);
    m.def("student_t_two_tailed", &student_t_two_tailed, py::arg("t"), py::arg("df"));
    m.def("regularized_incomplete_beta", &regularized_incomplete_beta, py::arg("a"), py::arg("b"), py::arg("x"));

    m.def(
        "gain_loss",
        [](const MetricReport& a, const MetricReport& b, const py::object& measure) {
            const auto gl = gain_loss(a, b, measure_arg(measure));
            py::dict out;
            py::list entries;
            for (const auto& e : gl.entries) {
                entries.append(py::make_tuple(e.topic_id, e.value_a, e.value_b, e.delta));
            }
            out["measure"] = gl.measure;
            out["entries"] = entries;
            out["wins"] = gl.wins;
            out["losses"] = gl.losses;
            out["ties"] = gl.ties;
            out["dropped_topics"] = gl.dropped_topics;
            return out;
        },
        py::arg("a"), py::arg("b"), py::arg("measure") = "ap");

    m.def(
        "convergence",
        [](const std::vector<std::pair<long, RankedRun>>& series, const std::vector<Topic>& topics, const Qrels& qrels,
           const py::object& measure, double alpha, bool strict) {
            std::vector<Checkpoint> checkpoints;
            for (const auto& [step, run] : series) {
                checkpoints.push_back({step, run});
            }
            const auto res = convergence(checkpoints, topics, qrels, measure_arg(measure), alpha, eval_options(strict));
            py::dict out;
            py::list points;
            for (const auto& p : res.points) {
                points.append(py::make_tuple(p.step, p.mean, p.values));
            }
            out["measure"] = res.measure;
            out["topic_ids"] = res.topic_ids;
            out["points"] = points;
            out["best_step"] = res.best_step;
            out["saturation_step"] = res.saturation_step;
            return out;
        },
        py::arg("series"), py::arg("topics"), py::arg("qrels"), py::arg("measure") = "ap", py::arg("alpha") = 0.05,
        py::arg("strict") = false);

    // cli
    m.def(
        "main",
        [](const std::vector<std::string>& args) {
            std::vector<const char*> argv{"tarlab"};
            for (const auto& a : args) {
                argv.push_back(a.c_str());
            }
            std::ostringstream out;
            std::ostringstream err;
            const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
            return py::make_tuple(code, out.str(), err.str());
        },
        py::arg("args"), "Run a command-line invocation; returns (exit code, stdout, stderr).");
}
