#include "tarlab/cli.hpp"

#include <fnmatch.h>

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "tarlab/error.hpp"
#include "tarlab/pubmed.hpp"
#include "text_util.hpp"

namespace tarlab::cli {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace {

/// Thrown for problems the user must fix in the invocation or config.
class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

std::ifstream open_input(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw UsageError("cannot open " + path);
    }
    return in;
}

// Writes through a temporary so readers never observe a partial file.
void write_file(const fs::path& path, const std::string& content)
{
    if (path.has_parent_path()) {
        fs::create_directories(path.parent_path());
    }
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw std::runtime_error("cannot write " + path.string());
        }
        out << content;
        if (!out.flush()) {
            throw std::runtime_error("write failed for " + path.string());
        }
    }
    fs::rename(tmp, path);
}

template <typename F>
std::string render(F&& f)
{
    std::ostringstream os;
    f(os);
    return os.str();
}

std::vector<Topic> load_topics(const std::string& path)
{
    auto in = open_input(path);
    try {
        return parse_topics(in);
    } catch (const ParseError& e) {
        throw ParseError(e.line(), path + ": " + e.message());
    } catch (const IngestError& e) {
        throw IngestError(path + ": " + e.what());
    }
}

Qrels load_qrels(const std::string& path)
{
    auto in = open_input(path);
    try {
        return parse_qrels(in);
    } catch (const ParseError& e) {
        throw ParseError(e.line(), path + ": " + e.message());
    }
}

DocStore load_docs(const std::string& path, std::ostream& err)
{
    auto in = open_input(path);
    try {
        auto loaded = load_corpus(in);
        for (const auto& w : loaded.warnings) {
            err << "warning: " << path << ": " << w << '\n';
        }
        return std::move(loaded.store);
    } catch (const ParseError& e) {
        throw ParseError(e.line(), path + ": " + e.message());
    }
}

RankedRun load_run(const std::string& path)
{
    auto in = open_input(path);
    try {
        return read_run(in);
    } catch (const ParseError& e) {
        throw ParseError(e.line(), path + ": " + e.message());
    }
}

TokenizerOptions load_tokenizer(const std::string& stopwords_path)
{
    TokenizerOptions opts;
    if (stopwords_path.empty()) {
        return opts;
    }
    auto in = open_input(stopwords_path);
    std::string line;
    while (std::getline(in, line)) {
        for (const auto& tok : tokenize(line).tokens) {
            opts.stopwords.insert(tok);
        }
    }
    return opts;
}

std::vector<Measure> parse_measures(const std::vector<std::string>& names)
{
    std::vector<Measure> out;
    for (const auto& n : names) {
        out.push_back(parse_measure(n));
    }
    if (out.empty()) {
        throw UsageError("at least one measure is required");
    }
    return out;
}

ordered_json topic_eval_json(const TopicEval& t)
{
    ordered_json rec;
    rec["type"] = "topic";
    rec["topic_id"] = t.topic_id;
    rec["n"] = t.n;
    rec["r"] = t.r;
    for (auto m : kAllMeasures) {
        if (m == Measure::LastRel) {
            rec[std::string(measure_name(m))] = t.last_rel;
        } else {
            rec[std::string(measure_name(m))] = t.value(m);
        }
    }
    return rec;
}

std::string toml_string(const std::string& v)
{
    return nlohmann::json(v).dump();
}

std::string toml_list(const std::vector<std::string>& v)
{
    std::string s = "[";
    for (std::size_t i = 0; i < v.size(); ++i) {
        s += (i ? ", " : "") + toml_string(v[i]);
    }
    return s + "]";
}

std::string toml_number(double v)
{
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    std::string s(buf, res.ptr);
    if (s.find_first_of(".eE") == std::string::npos) {
        s += ".0";
    }
    return s;
}

std::string effective_config(const PipelineConfig& c)
{
    std::ostringstream os;
    os << "seed = " << c.seed << "\n";
    os << "jobs = " << c.jobs << "\n\n";
    os << "[pipeline]\n";
    os << "topics = " << toml_string(c.topics) << "\n";
    os << "qrels = " << toml_string(c.qrels) << "\n";
    os << "corpus = " << toml_string(c.corpus) << "\n";
    os << "out-dir = " << toml_string(c.output_dir) << "\n";
    os << "models = " << toml_list(c.models) << "\n";
    os << "reprs = " << toml_list(c.representations) << "\n";
    os << "k1 = " << toml_number(c.params.k1) << "\n";
    os << "b = " << toml_number(c.params.b) << "\n";
    os << "lambda = " << toml_number(c.params.lambda) << "\n";
    os << "epsilon = " << toml_number(c.params.epsilon) << "\n";
    if (!c.stopwords.empty()) {
        os << "stopwords = " << toml_string(c.stopwords) << "\n";
    }
    if (!c.tag.empty()) {
        os << "tag = " << toml_string(c.tag) << "\n";
    }
    os << "measure = " << toml_list(c.measures) << "\n";
    os << "alpha = " << toml_number(c.alpha) << "\n";
    os << "strict = " << (c.strict ? "true" : "false") << "\n";
    return os.str();
}

std::string default_tag(const std::string& prefix, std::string_view model, std::string_view repr)
{
    std::string tag = prefix.empty() ? "" : prefix + "-";
    tag += model;
    tag += '-';
    tag += repr;
    return tag;
}

void print_validation_summary(const RunValidation& v, std::ostream& os)
{
    for (const auto& t : v.topics) {
        os << "topic " << t.topic_id << ": " << t.missing_candidates.size() << " unranked candidates, "
           << t.foreign_documents.size() << " foreign documents, " << t.unranked_relevant.size()
           << " unranked relevant\n";
    }
    for (const auto& id : v.unranked_topics) {
        os << "topic " << id << ": not ranked by run\n";
    }
    for (const auto& id : v.unknown_topics) {
        os << "topic " << id << ": not in topic set\n";
    }
}

MetricReport evaluate_checked(const RankedRun& run, const std::vector<Topic>& topics, const Qrels& qrels,
                              bool strict, std::ostream& err)
{
    if (strict) {
        const auto v = validate_against(run, topics, qrels);
        if (!v.complete()) {
            err << "error: run " << run.tag << " failed strict validation\n";
            print_validation_summary(v, err);
            throw EvaluationError("run " + run.tag + " is incomplete");
        }
    }
    EvaluationOptions opts;
    opts.completion = strict ? CompletionMode::Strict : CompletionMode::Append;
    return evaluate(run, topics, qrels, opts);
}

// Pulls the last run of digits out of a file name: "step-1200.run" -> 1200.
std::optional<long> step_of(const std::string& name)
{
    auto end = name.find_last_of("0123456789");
    if (end == std::string::npos) {
        return std::nullopt;
    }
    auto begin = end;
    while (begin > 0 && std::isdigit(static_cast<unsigned char>(name[begin - 1]))) {
        --begin;
    }
    return std::stol(name.substr(begin, end - begin + 1));
}

}  // namespace

std::string report_jsonl(const MetricReport& report)
{
    std::string out;
    for (const auto& t : report.topics) {
        out += topic_eval_json(t).dump() + '\n';
    }
    for (const auto& ex : report.excluded) {
        ordered_json rec;
        rec["type"] = "excluded";
        rec["topic_id"] = ex.topic_id;
        rec["reason"] = ex.reason;
        out += rec.dump() + '\n';
    }
    ordered_json mean;
    mean["type"] = "mean";
    mean["run"] = report.run_tag;
    mean["topics"] = report.topics.size();
    for (auto m : kAllMeasures) {
        mean[std::string(measure_name(m))] = report.mean(m);
    }
    out += mean.dump() + '\n';
    return out;
}

std::string report_table(const MetricReport& report)
{
    std::ostringstream os;
    char line[256];
    std::snprintf(line, sizeof line, "%-14s %6s %5s %9s %7s %7s %7s %7s %7s %7s %7s\n", "topic", "N", "R",
                  "Last_Rel", "AP", "R@1%", "R@5%", "R@10%", "R@20%", "WSS95", "WSS100");
    os << "run: " << report.run_tag << '\n' << line;
    for (const auto& t : report.topics) {
        std::snprintf(line, sizeof line, "%-14s %6zu %5zu %9zu %7.4f %7.4f %7.4f %7.4f %7.4f %7.4f %7.4f\n",
                      t.topic_id.c_str(), t.n, t.r, t.last_rel, t.ap, t.recall[0], t.recall[1], t.recall[2],
                      t.recall[3], t.wss95, t.wss100);
        os << line;
    }
    std::snprintf(line, sizeof line, "%-14s %6s %5s %9.4f %7.4f %7.4f %7.4f %7.4f %7.4f %7.4f %7.4f\n", "mean", "",
                  "", report.mean(Measure::LastRel), report.mean(Measure::AP), report.mean(Measure::Recall1),
                  report.mean(Measure::Recall5), report.mean(Measure::Recall10), report.mean(Measure::Recall20),
                  report.mean(Measure::WSS95), report.mean(Measure::WSS100));
    os << line;
    for (const auto& ex : report.excluded) {
        os << "excluded " << ex.topic_id << ": " << ex.reason << '\n';
    }
    return os.str();
}

std::string ingest_report_json(const IngestReport& report)
{
    ordered_json j;
    j["documents"] = report.documents;
    j["missing_documents"] = report.missing_document_count();
    auto& topics = j["topics"] = ordered_json::array();
    for (const auto& t : report.topics) {
        ordered_json rec;
        rec["topic_id"] = t.topic_id;
        rec["candidates"] = t.candidates;
        rec["relevant"] = t.relevant;
        rec["missing_documents"] = t.missing_documents;
        rec["judged_outside_candidates"] = t.judged_outside_candidates;
        rec["empty_abstracts"] = t.empty_abstracts;
        topics.push_back(std::move(rec));
    }
    j["qrels_without_topic"] = report.qrels_without_topic;
    j["topics_without_relevant"] = report.topics_without_relevant;
    return j.dump(2) + '\n';
}

std::string validation_json(const RunValidation& report)
{
    ordered_json j;
    j["complete"] = report.complete();
    auto& topics = j["topics"] = ordered_json::array();
    for (const auto& t : report.topics) {
        ordered_json rec;
        rec["topic_id"] = t.topic_id;
        rec["missing_candidates"] = t.missing_candidates;
        rec["foreign_documents"] = t.foreign_documents;
        rec["unranked_relevant"] = t.unranked_relevant;
        topics.push_back(std::move(rec));
    }
    j["unranked_topics"] = report.unranked_topics;
    j["unknown_topics"] = report.unknown_topics;
    return j.dump(2) + '\n';
}

namespace {

struct Dataset {
    std::vector<Topic> topics;
    Qrels qrels;
    DocStore docs;
    IngestReport report;
};

Dataset ingest_dataset(const PipelineConfig& config, std::ostream& out, std::ostream& err)
{
    Dataset ds;
    ds.topics = load_topics(config.topics);
    ds.qrels = load_qrels(config.qrels);
    ds.docs = load_docs(config.corpus, err);
    ds.report = check_consistency(ds.topics, ds.qrels, ds.docs);

    const auto& report = ds.report;
    out << "topics: " << ds.topics.size() << ", judgments: " << ds.qrels.size() << ", documents: " << ds.docs.size()
        << ", missing documents: " << report.missing_document_count() << '\n';
    for (const auto& t : report.topics) {
        if (!t.missing_documents.empty()) {
            out << "topic " << t.topic_id << ": " << t.missing_documents.size() << " candidates without a record\n";
        }
        if (!t.judged_outside_candidates.empty()) {
            out << "topic " << t.topic_id << ": " << t.judged_outside_candidates.size()
                << " judged documents outside the candidate set\n";
        }
    }
    for (const auto& id : report.topics_without_relevant) {
        out << "topic " << id << ": no relevant candidates (will be excluded from evaluation)\n";
    }
    for (const auto& id : report.qrels_without_topic) {
        out << "qrels topic " << id << " has no topic block\n";
    }
    return ds;
}

}  // namespace

int cmd_ingest(const PipelineConfig& config, std::ostream& out, std::ostream& err)
{
    const auto ds = ingest_dataset(config, out, err);
    if (!config.output_dir.empty()) {
        write_file(fs::path(config.output_dir) / "ingest_report.json", ingest_report_json(ds.report));
    }
    return kExitOk;
}

int cmd_pipeline(const PipelineConfig& config, std::ostream& out, std::ostream& err)
{
    if (config.output_dir.empty()) {
        throw UsageError("an output directory is required");
    }
    config.params.validate();
    const fs::path dir(config.output_dir);
    const auto measures = parse_measures(config.measures);
    const auto tokenizer = load_tokenizer(config.stopwords);

    const auto ds = ingest_dataset(config, out, err);
    write_file(dir / "ingest_report.json", ingest_report_json(ds.report));
    const auto& topics = ds.topics;
    const auto& qrels = ds.qrels;
    const auto& docs = ds.docs;

    std::vector<MetricReport> reports;
    for (const auto& model_name : config.models) {
        const auto model = parse_model(model_name);
        for (const auto& repr_name : config.representations) {
            const auto repr = parse_representation(repr_name);
            const auto tag = default_tag(config.tag, to_string(model), to_string(repr));
            const auto run = rank_topics(topics, docs, repr, model, config.params, tag, config.jobs, tokenizer);

            const auto run_text = render([&](std::ostream& os) { write_run(os, run); });
            write_file(dir / "runs" / (tag + ".run"), run_text);

            // Evaluate what was written, so the report matches the run file exactly.
            std::istringstream reread(run_text);
            auto report = evaluate_checked(read_run(reread), topics, qrels, config.strict, err);
            write_file(dir / "reports" / (tag + ".jsonl"), report_jsonl(report));
            const auto table = report_table(report);
            write_file(dir / "reports" / (tag + ".txt"), table);
            out << table;
            reports.push_back(std::move(report));
        }
    }

    if (reports.size() >= 2) {
        std::vector<RunComparison> rows;
        const std::span<const MetricReport> others(reports.data() + 1, reports.size() - 1);
        for (auto m : measures) {
            auto part = compare_runs(reports.front(), others, m);
            rows.insert(rows.end(), part.begin(), part.end());
        }
        write_file(dir / "compare.csv", render([&](std::ostream& os) { write_comparisons_csv(os, rows, config.alpha); }));

        const auto gl = gain_loss(reports[0], reports[1], measures.front());
        write_file(dir / "gainloss.csv", render([&](std::ostream& os) { write_gain_loss_csv(os, gl); }));
        out << "gain-loss " << reports[0].run_tag << " vs " << reports[1].run_tag << " (" << gl.measure
            << "): wins " << gl.wins << ", losses " << gl.losses << ", ties " << gl.ties << '\n';
    }
    return kExitOk;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Screening prioritisation lab: rank, evaluate and compare systematic-review runs", "tarlab"};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_config("--config", "", "Read options from a TOML/INI config file");

    PipelineConfig cfg;
    app.add_option("--seed", cfg.seed, "Recorded in the effective config; ranking is deterministic")
        ->capture_default_str();
    app.add_option("--jobs", cfg.jobs, "Topics ranked in parallel")->check(CLI::PositiveNumber)->capture_default_str();

    auto measure_check = CLI::Validator(
        [](std::string& s) {
            try {
                parse_measure(s);
            } catch (const std::invalid_argument& e) {
                return std::string(e.what());
            }
            return std::string();
        },
        "MEASURE");
    const auto models = CLI::IsMember({"bm25", "qlm"}, CLI::ignore_case);
    const auto reprs = CLI::IsMember({"title", "tiab"}, CLI::ignore_case);

    auto lexical_options = [&](CLI::App* sub) {
        sub->add_option("--k1", cfg.params.k1, "BM25 term-frequency saturation")->capture_default_str();
        sub->add_option("--b", cfg.params.b, "BM25 length normalisation")->capture_default_str();
        sub->add_option("--lambda", cfg.params.lambda, "Jelinek-Mercer collection weight")->capture_default_str();
        sub->add_option("--epsilon", cfg.params.epsilon, "BM25 negative-idf floor factor")->capture_default_str();
        sub->add_option("--stopwords", cfg.stopwords, "Stopword list, one or more words per line")
            ->check(CLI::ExistingFile);
    };

    // fetch
    std::string pmid_file;
    std::string fetch_out;
    std::string missing_out;
    FetchOptions fetch_opts;
    std::size_t batch_size = fetch_opts.batch_size;
    auto* fetch = app.add_subcommand("fetch", "Fetch titles and abstracts from an E-utilities efetch endpoint");
    auto* fetch_src = fetch->add_option_group("source");
    fetch_src->add_option("--topics", cfg.topics, "Fetch every candidate of these topics")->check(CLI::ExistingFile);
    fetch_src->add_option("--pmids", pmid_file, "File with pmids (whitespace separated)")->check(CLI::ExistingFile);
    fetch_src->require_option(1);
    fetch->add_option("--out", fetch_out, "Corpus file to write (JSON lines)")->required();
    fetch->add_option("--missing-out", missing_out, "Write pmids the service did not return");
    fetch->add_option("--endpoint", fetch_opts.endpoint, "efetch URL")
        ->envname("TARLAB_EFETCH_ENDPOINT")
        ->capture_default_str();
    fetch->add_option("--api-key", fetch_opts.api_key, "E-utilities API key")->envname("NCBI_API_KEY");
    fetch->add_option("--batch-size", batch_size, "Identifiers per request")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    fetch->add_option("--max-attempts", fetch_opts.max_attempts, "Attempts per batch")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();

    // ingest
    std::string ingest_out;
    auto* ingest = app.add_subcommand("ingest", "Parse a dataset and report consistency problems");
    ingest->add_option("--topics", cfg.topics)->required()->check(CLI::ExistingFile);
    ingest->add_option("--qrels", cfg.qrels)->required()->check(CLI::ExistingFile);
    ingest->add_option("--corpus", cfg.corpus)->required()->check(CLI::ExistingFile);
    ingest->add_option("--out", ingest_out, "Write the consistency report (JSON) here");

    // rank
    std::string model_name = "bm25";
    std::string repr_name = "tiab";
    std::string run_out;
    std::string run_tag;
    auto* rank = app.add_subcommand("rank", "Rank each topic's candidates against its title");
    rank->add_option("--model", model_name)->check(models)->capture_default_str();
    rank->add_option("--repr", repr_name)->check(reprs)->capture_default_str();
    lexical_options(rank);
    rank->add_option("--topics", cfg.topics)->required()->check(CLI::ExistingFile);
    rank->add_option("--corpus", cfg.corpus)->required()->check(CLI::ExistingFile);
    rank->add_option("--out", run_out, "Run file to write")->required();
    rank->add_option("--tag", run_tag, "Run tag (default <model>-<repr>)");

    // evaluate
    std::string run_path;
    std::string report_out;
    auto* evaluate_cmd = app.add_subcommand("evaluate", "Compute Last_Rel, AP, Recall@p% and WSS for a run");
    evaluate_cmd->add_option("--run", run_path)->required()->check(CLI::ExistingFile);
    evaluate_cmd->add_option("--topics", cfg.topics)->required()->check(CLI::ExistingFile);
    evaluate_cmd->add_option("--qrels", cfg.qrels)->required()->check(CLI::ExistingFile);
    evaluate_cmd->add_option("--out", report_out, "Structured report (JSON lines)");
    evaluate_cmd->add_flag("--strict", cfg.strict, "Reject incomplete runs instead of appending unranked candidates");

    // compare
    std::vector<std::string> run_paths;
    std::string csv_out;
    auto* compare = app.add_subcommand("compare", "Paired t-tests of the first run against each other run");
    compare->add_option("--runs", run_paths, "Focal run followed by the runs it is compared with")
        ->required()
        ->expected(2, CLI::detail::expected_max_vector_size)
        ->check(CLI::ExistingFile);
    compare->add_option("--measure", cfg.measures)->check(measure_check)->capture_default_str();
    compare->add_option("--topics", cfg.topics)->required()->check(CLI::ExistingFile);
    compare->add_option("--qrels", cfg.qrels)->required()->check(CLI::ExistingFile);
    compare->add_option("--alpha", cfg.alpha)->check(CLI::Range(0.0, 1.0))->capture_default_str();
    compare->add_option("--out", csv_out, "CSV output (default stdout)");
    compare->add_flag("--strict", cfg.strict);

    // gainloss
    std::string run_a;
    std::string run_b;
    std::string gl_measure = "ap";
    auto* gainloss = app.add_subcommand("gainloss", "Per-topic differences between two runs");
    gainloss->add_option("--run-a", run_a)->required()->check(CLI::ExistingFile);
    gainloss->add_option("--run-b", run_b)->required()->check(CLI::ExistingFile);
    gainloss->add_option("--measure", gl_measure)->check(measure_check)->capture_default_str();
    gainloss->add_option("--topics", cfg.topics)->required()->check(CLI::ExistingFile);
    gainloss->add_option("--qrels", cfg.qrels)->required()->check(CLI::ExistingFile);
    gainloss->add_option("--out", csv_out, "CSV output (default stdout)");
    gainloss->add_flag("--strict", cfg.strict);

    // convergence
    std::string series_dir;
    std::string pattern = "step-*.run";
    std::string conv_measure = "ap";
    auto* conv = app.add_subcommand("convergence", "Checkpoint series analysis and saturation detection");
    conv->add_option("--series", series_dir)->required()->check(CLI::ExistingDirectory);
    conv->add_option("--pattern", pattern, "Glob for checkpoint run files; the step is the last number in the name")
        ->capture_default_str();
    conv->add_option("--measure", conv_measure)->check(measure_check)->capture_default_str();
    conv->add_option("--topics", cfg.topics)->required()->check(CLI::ExistingFile);
    conv->add_option("--qrels", cfg.qrels)->required()->check(CLI::ExistingFile);
    conv->add_option("--alpha", cfg.alpha)->check(CLI::Range(0.0, 1.0))->capture_default_str();
    conv->add_option("--out", csv_out, "CSV output (default stdout)");
    conv->add_flag("--strict", cfg.strict);

    // validate
    std::string validate_out;
    auto* validate = app.add_subcommand("validate", "Check a run against the topics' candidate sets");
    validate->add_option("--run", run_path)->required()->check(CLI::ExistingFile);
    validate->add_option("--topics", cfg.topics)->required()->check(CLI::ExistingFile);
    validate->add_option("--qrels", cfg.qrels)->required()->check(CLI::ExistingFile);
    validate->add_option("--out", validate_out, "Write the report (JSON) here instead of stdout");
    validate->add_flag("--strict", cfg.strict, "Exit 1 unless the run is complete");

    // pipeline
    auto* pipeline = app.add_subcommand("pipeline", "ingest, rank, evaluate, compare and gain-loss in one go");
    pipeline->add_option("--topics", cfg.topics)->required()->check(CLI::ExistingFile);
    pipeline->add_option("--qrels", cfg.qrels)->required()->check(CLI::ExistingFile);
    pipeline->add_option("--corpus", cfg.corpus)->required()->check(CLI::ExistingFile);
    pipeline->add_option("--out-dir", cfg.output_dir)->required();
    pipeline->add_option("--models", cfg.models)->check(models)->capture_default_str();
    pipeline->add_option("--reprs", cfg.representations)->check(reprs)->capture_default_str();
    lexical_options(pipeline);
    pipeline->add_option("--tag", cfg.tag, "Prefix for run tags");
    pipeline->add_option("--measure", cfg.measures, "Measures to compare; gain-loss uses the first")
        ->check(measure_check)
        ->capture_default_str();
    pipeline->add_option("--alpha", cfg.alpha)->check(CLI::Range(0.0, 1.0))->capture_default_str();
    pipeline->add_flag("--strict", cfg.strict);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    auto emit = [&](const std::string& path, const std::string& content) {
        if (path.empty()) {
            out << content;
        } else {
            write_file(path, content);
        }
    };

    try {
        if (fetch->parsed()) {
            std::vector<std::string> pmids;
            if (!cfg.topics.empty()) {
                for (const auto& t : load_topics(cfg.topics)) {
                    pmids.insert(pmids.end(), t.pmids.begin(), t.pmids.end());
                }
            } else {
                auto in = open_input(pmid_file);
                std::string tok;
                while (in >> tok) {
                    pmids.push_back(tok);
                }
            }
            fetch_opts.batch_size = batch_size;
            if (fs::path(fetch_out).has_parent_path()) {
                fs::create_directories(fs::path(fetch_out).parent_path());
            }
            std::ofstream corpus_out(fetch_out, std::ios::binary | std::ios::trunc);
            if (!corpus_out) {
                throw std::runtime_error("cannot write " + fetch_out);
            }
            FetchSummary summary;
            try {
                summary = fetch_pubmed(pmids, fetch_opts, [&](const DocRecord& doc) {
                    corpus_out << corpus_line(doc) << '\n';
                });
            } catch (const MissingDocumentsError& e) {
                corpus_out.flush();
                err << "error: " << e.what() << "\nunfetched:";
                for (const auto& id : e.pmids()) {
                    err << ' ' << id;
                }
                err << '\n';
                return kExitFailure;
            }
            out << "fetched " << summary.fetched << " records in " << summary.requests << " requests; "
                << summary.missing.size() << " missing\n";
            std::string missing_text;
            for (const auto& id : summary.missing) {
                missing_text += id + '\n';
            }
            if (!missing_out.empty()) {
                write_file(missing_out, missing_text);
            } else if (!summary.missing.empty()) {
                err << "missing:\n" << missing_text;
            }
            return kExitOk;
        }

        if (ingest->parsed()) {
            const auto ds = ingest_dataset(cfg, out, err);
            if (!ingest_out.empty()) {
                write_file(ingest_out, ingest_report_json(ds.report));
            }
            return kExitOk;
        }

        if (rank->parsed()) {
            cfg.params.validate();
            const auto topics = load_topics(cfg.topics);
            const auto docs = load_docs(cfg.corpus, err);
            const auto model = parse_model(model_name);
            const auto repr = parse_representation(repr_name);
            if (run_tag.empty()) {
                run_tag = default_tag("", to_string(model), to_string(repr));
            }
            const auto ranked =
                rank_topics(topics, docs, repr, model, cfg.params, run_tag, cfg.jobs, load_tokenizer(cfg.stopwords));
            write_file(run_out, render([&](std::ostream& os) { write_run(os, ranked); }));
            return kExitOk;
        }

        if (evaluate_cmd->parsed()) {
            const auto topics = load_topics(cfg.topics);
            const auto qrels = load_qrels(cfg.qrels);
            const auto report = evaluate_checked(load_run(run_path), topics, qrels, cfg.strict, err);
            out << report_table(report);
            if (!report_out.empty()) {
                write_file(report_out, report_jsonl(report));
            }
            return kExitOk;
        }

        if (compare->parsed()) {
            const auto topics = load_topics(cfg.topics);
            const auto qrels = load_qrels(cfg.qrels);
            std::vector<MetricReport> reports;
            for (const auto& p : run_paths) {
                reports.push_back(evaluate_checked(load_run(p), topics, qrels, cfg.strict, err));
            }
            std::vector<RunComparison> rows;
            const std::span<const MetricReport> others(reports.data() + 1, reports.size() - 1);
            for (auto m : parse_measures(cfg.measures)) {
                auto part = compare_runs(reports.front(), others, m);
                rows.insert(rows.end(), part.begin(), part.end());
            }
            emit(csv_out, render([&](std::ostream& os) { write_comparisons_csv(os, rows, cfg.alpha); }));
            return kExitOk;
        }

        if (gainloss->parsed()) {
            const auto topics = load_topics(cfg.topics);
            const auto qrels = load_qrels(cfg.qrels);
            const auto a = evaluate_checked(load_run(run_a), topics, qrels, cfg.strict, err);
            const auto b = evaluate_checked(load_run(run_b), topics, qrels, cfg.strict, err);
            const auto gl = gain_loss(a, b, parse_measure(gl_measure));
            for (const auto& id : gl.dropped_topics) {
                err << "warning: topic " << id << " is evaluated in only one run; dropped\n";
            }
            emit(csv_out, render([&](std::ostream& os) { write_gain_loss_csv(os, gl); }));
            err << "wins " << gl.wins << ", losses " << gl.losses << ", ties " << gl.ties << '\n';
            return kExitOk;
        }

        if (conv->parsed()) {
            const auto topics = load_topics(cfg.topics);
            const auto qrels = load_qrels(cfg.qrels);
            std::map<long, fs::path> files;
            for (const auto& entry : fs::directory_iterator(series_dir)) {
                const auto name = entry.path().filename().string();
                if (!entry.is_regular_file() || fnmatch(pattern.c_str(), name.c_str(), 0) != 0) {
                    continue;
                }
                const auto step = step_of(name);
                if (!step) {
                    throw UsageError("no step number in checkpoint file name " + name);
                }
                if (!files.emplace(*step, entry.path()).second) {
                    throw UsageError("two checkpoint files for step " + std::to_string(*step));
                }
            }
            std::vector<Checkpoint> series;
            for (const auto& [step, path] : files) {
                series.push_back({step, load_run(path.string())});
            }
            EvaluationOptions opts;
            opts.completion = cfg.strict ? CompletionMode::Strict : CompletionMode::Append;
            const auto result = convergence(series, topics, qrels, parse_measure(conv_measure), cfg.alpha, opts);
            emit(csv_out, render([&](std::ostream& os) { write_convergence_csv(os, result); }));
            err << "best step " << result.best_step << "; ";
            if (result.saturation_step) {
                err << "saturation at step " << *result.saturation_step << '\n';
            } else {
                err << "no saturation within series\n";
            }
            return kExitOk;
        }

        if (validate->parsed()) {
            const auto topics = load_topics(cfg.topics);
            const auto qrels = load_qrels(cfg.qrels);
            const auto report = validate_against(load_run(run_path), topics, qrels);
            emit(validate_out, validation_json(report));
            if (!report.complete()) {
                print_validation_summary(report, err);
                if (cfg.strict) {
                    return kExitFailure;
                }
            }
            return kExitOk;
        }

        if (pipeline->parsed()) {
            fs::create_directories(cfg.output_dir);
            write_file(fs::path(cfg.output_dir) / "effective_config.toml", effective_config(cfg));
            return cmd_pipeline(cfg, out, err);
        }
    } catch (const UsageError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const MissingDocumentsError& e) {
        err << "error: " << e.what() << '\n';
        return kExitFailure;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitFailure;
    }
    return kExitUsage;
}

}  // namespace tarlab::cli
