#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "tarlab/analysis.hpp"
#include "tarlab/corpus.hpp"
#include "tarlab/lexical.hpp"
#include "tarlab/metrics.hpp"
#include "tarlab/runio.hpp"

namespace tarlab::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

struct PipelineConfig {
    std::string topics;
    std::string qrels;
    std::string corpus;
    std::string output_dir;
    std::vector<std::string> models{"bm25", "qlm"};
    std::vector<std::string> representations{"title", "tiab"};
    LexicalParams params;
    std::string stopwords;
    /// Prefix for run tags; tags are "<prefix>-<model>-<repr>" (or "<model>-<repr>" when empty).
    std::string tag;
    std::vector<std::string> measures{"ap"};
    bool strict = false;
    double alpha = 0.05;
    unsigned jobs = 1;
    std::uint64_t seed = 0;
};

/// Loads and cross-checks the dataset and writes `ingest_report.json` into
/// the output directory (when set). Returns a process exit code.
int cmd_ingest(const PipelineConfig& config, std::ostream& out, std::ostream& err);

/// ingest -> rank (every model x representation) -> write runs -> evaluate ->
/// compare (first run against the rest) -> gain-loss (first vs second run).
int cmd_pipeline(const PipelineConfig& config, std::ostream& out, std::ostream& err);

/// Entry point of the `tarlab` executable. Exit codes: 0 success, 1 runtime
/// failure, 2 usage or configuration error.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Structured forms of the reports written by the commands.
std::string report_jsonl(const MetricReport& report);
std::string report_table(const MetricReport& report);
std::string ingest_report_json(const IngestReport& report);
std::string validation_json(const RunValidation& report);

}  // namespace tarlab::cli
