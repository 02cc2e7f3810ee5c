#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "tarlab/pmid.hpp"

namespace tarlab {

/// Reserved token placed between title and abstract in a TiAb representation.
/// Neural consumers map it to their model's segment separator; the lexical
/// tokenizer drops it.
inline constexpr std::string_view kSeparator = "⟂";

/// One systematic review: the title is the ranking query, the Boolean query
/// is kept verbatim, and pmids is the candidate set it retrieved.
struct Topic {
    std::string id;
    std::string title;
    std::string boolean_query;
    std::vector<std::string> pmids;
    /// Header lines other than Topic/Title/Query/Pids, in file order.
    std::vector<std::pair<std::string, std::string>> metadata;

    bool operator==(const Topic&) const = default;
};

struct DocRecord {
    std::string pmid;
    std::string title;
    std::string abstract;

    bool operator==(const DocRecord&) const = default;
};

/// (topic, pmid) -> relevance grade. Grade > 0 means relevant.
class Qrels {
public:
    using TopicJudgments = std::map<std::string, int, PmidLess>;

    /// Throws IngestError when the pair is already judged or the grade is negative.
    void add(const std::string& topic_id, const std::string& pmid, int grade);

    std::optional<int> grade(std::string_view topic_id, std::string_view pmid) const;
    bool is_relevant(std::string_view topic_id, std::string_view pmid) const;

    /// Judgments of one topic, or nullptr when the topic has none.
    const TopicJudgments* topic(std::string_view topic_id) const;
    const std::map<std::string, TopicJudgments, std::less<>>& topics() const noexcept { return judgments_; }

    std::size_t size() const noexcept { return size_; }
    bool empty() const noexcept { return size_ == 0; }

    bool operator==(const Qrels&) const = default;

private:
    std::map<std::string, TopicJudgments, std::less<>> judgments_;
    std::size_t size_ = 0;
};

/// Documents keyed by pmid. Immutable once loading finishes.
class DocStore {
public:
    /// Returns true when an existing record was replaced.
    bool insert(DocRecord doc);

    const DocRecord* find(std::string_view pmid) const;
    bool contains(std::string_view pmid) const { return find(pmid) != nullptr; }
    std::size_t size() const noexcept { return docs_.size(); }

    auto begin() const { return docs_.begin(); }
    auto end() const { return docs_.end(); }

private:
    std::map<std::string, DocRecord, PmidLess> docs_;
};

struct CorpusLoad {
    DocStore store;
    std::vector<std::string> warnings;
    /// Line numbers of records dropped for lacking a title.
    std::vector<std::size_t> rejected_lines;
};

/// Topic files are blocks of `Topic:`, `Title:`, `Query:` and `Pids:` headers.
/// Throws ParseError on structural problems and IngestError on invariant
/// violations (duplicate ids, empty or repeated candidates).
std::vector<Topic> parse_topics(std::istream& in);
void write_topics(std::ostream& out, std::span<const Topic> topics);

/// Four whitespace-separated columns: topic iteration pmid grade.
Qrels parse_qrels(std::istream& in);
void write_qrels(std::ostream& out, const Qrels& qrels);

/// One JSON object per line with pmid, title and optional abstract.
/// Malformed lines throw ParseError; untitled records are rejected and
/// reported; duplicate pmids keep the last record and warn.
CorpusLoad load_corpus(std::istream& in);
void write_corpus(std::ostream& out, const DocStore& store);
std::string corpus_line(const DocRecord& doc);

enum class Representation { Title, TiAb };

Representation parse_representation(std::string_view name);
std::string_view to_string(Representation mode) noexcept;

struct DocRepresentation {
    Representation mode;
    std::string text;
};

DocRepresentation represent(const DocRecord& doc, Representation mode);

/// Relevant documents of a topic restricted to its candidate set.
std::set<std::string, PmidLess> relevant_candidates(const Topic& topic, const Qrels& qrels);

struct TopicConsistency {
    std::string topic_id;
    std::size_t candidates = 0;
    std::size_t relevant = 0;
    std::vector<std::string> missing_documents;
    std::vector<std::string> judged_outside_candidates;
    std::vector<std::string> empty_abstracts;
};

struct IngestReport {
    std::size_t documents = 0;
    std::vector<TopicConsistency> topics;
    std::vector<std::string> qrels_without_topic;
    std::vector<std::string> topics_without_relevant;

    std::size_t missing_document_count() const;
};

IngestReport check_consistency(std::span<const Topic> topics, const Qrels& qrels, const DocStore& store);

}  // namespace tarlab
