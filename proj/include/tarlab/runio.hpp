#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tarlab/corpus.hpp"

namespace tarlab {

struct RunEntry {
    std::string pmid;
    std::size_t rank = 0;
    double score = 0.0;

    bool operator==(const RunEntry&) const = default;
};

/// Per-topic rankings plus the run tag. Within a topic, ranks are 1..n,
/// pmids are unique and scores never increase with rank.
struct RankedRun {
    std::string tag;
    /// Flag column as read from file ("Q0", "NF" or "AF"); always written as "NF".
    std::string flag = "NF";
    std::map<std::string, std::vector<RunEntry>, std::less<>> topics;

    /// Structural equality on tag and rankings; the flag is provenance only.
    bool operator==(const RankedRun& other) const { return tag == other.tag && topics == other.topics; }
    bool empty() const noexcept { return topics.empty(); }
};

/// Orders by score descending then pmid ascending and rewrites ranks 1..n.
void sort_entries(std::vector<RunEntry>& entries);

/// Six columns per line: topic flag pmid rank score tag. Entries are re-sorted
/// with sort_entries, so input ranks are advisory. Throws ParseError with the
/// line number on malformed lines or duplicate (topic, pmid) pairs.
RankedRun read_run(std::istream& in);

/// Writes topics in ascending id order with flag NF and six-decimal scores.
/// Entries are ordered by their printed score, so write(read(write(r))) == write(r).
void write_run(std::ostream& out, const RankedRun& run);

std::string format_score(double score);

struct TopicRunGaps {
    std::string topic_id;
    std::vector<std::string> missing_candidates;
    std::vector<std::string> foreign_documents;
    std::vector<std::string> unranked_relevant;

    bool empty() const noexcept
    {
        return missing_candidates.empty() && foreign_documents.empty() && unranked_relevant.empty();
    }
};

struct RunValidation {
    /// Only topics with at least one gap are listed.
    std::vector<TopicRunGaps> topics;
    std::vector<std::string> unknown_topics;
    std::vector<std::string> unranked_topics;

    /// True iff the run ranks exactly the candidate set of every topic.
    bool complete() const noexcept { return topics.empty() && unknown_topics.empty() && unranked_topics.empty(); }
};

RunValidation validate_against(const RankedRun& run, std::span<const Topic> topics, const Qrels& qrels);

enum class CompletionMode {
    /// Unranked candidates go after the last ranked document in pmid order;
    /// documents outside the candidate set are dropped.
    Append,
    /// Any gap is an EvaluationError.
    Strict,
};

/// The full candidate ordering used for evaluation.
std::vector<std::string> complete_ranking(std::span<const RunEntry> entries, const Topic& topic, CompletionMode mode);

}  // namespace tarlab
