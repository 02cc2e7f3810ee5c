#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tarlab/corpus.hpp"
#include "tarlab/runio.hpp"

namespace tarlab {

enum class Measure { LastRel, AP, Recall1, Recall5, Recall10, Recall20, WSS95, WSS100 };

inline constexpr std::array<Measure, 8> kAllMeasures{Measure::LastRel, Measure::AP,       Measure::Recall1,
                                                     Measure::Recall5, Measure::Recall10, Measure::Recall20,
                                                     Measure::WSS95,   Measure::WSS100};

/// Canonical names: last_rel, ap, recall@1, recall@5, recall@10, recall@20, wss@95, wss@100.
std::string_view measure_name(Measure m) noexcept;
/// Accepts the canonical names plus the CLEF column spellings (Last_Rel, WSS95, Recall@1% ...).
Measure parse_measure(std::string_view name);

/// Ranks (1-based, ascending) at which relevant documents occur in a complete ranking.
class JudgedRanking {
public:
    /// `relevant` may contain documents outside the ranking; they are ignored.
    JudgedRanking(std::span<const std::string> ranking, const std::set<std::string, PmidLess>& relevant);
    /// From explicit relevant ranks; throws std::invalid_argument unless they are
    /// strictly increasing and within 1..size.
    JudgedRanking(std::size_t size, std::vector<std::size_t> relevant_ranks);

    std::size_t size() const noexcept { return size_; }
    std::size_t relevant_count() const noexcept { return relevant_ranks_.size(); }
    std::span<const std::size_t> relevant_ranks() const noexcept { return relevant_ranks_; }

private:
    std::size_t size_;
    std::vector<std::size_t> relevant_ranks_;
};

// Each measure returns nullopt when the ranking holds no relevant document.

std::optional<std::size_t> last_rel(const JudgedRanking& ranking);
std::optional<double> average_precision(const JudgedRanking& ranking);
/// Recall within the top ceil(p/100 * N) documents; p in (0, 100].
std::optional<double> recall_at_percent(const JudgedRanking& ranking, double p);
/// Work saved over sampling once ceil(k/100 * R) relevant documents are found; k in (0, 100].
std::optional<double> wss(const JudgedRanking& ranking, double k);

struct TopicEval {
    std::string topic_id;
    std::size_t n = 0;
    std::size_t r = 0;
    std::size_t last_rel = 0;
    double ap = 0.0;
    /// Recall at 1, 5, 10 and 20 percent.
    std::array<double, 4> recall{};
    double wss95 = 0.0;
    double wss100 = 0.0;

    double value(Measure m) const noexcept;
};

TopicEval evaluate_topic(std::string topic_id, const JudgedRanking& ranking);

struct ExcludedTopic {
    std::string topic_id;
    std::string reason;
};

struct MetricReport {
    std::string run_tag;
    /// Ascending topic id.
    std::vector<TopicEval> topics;
    std::vector<ExcludedTopic> excluded;

    /// Arithmetic mean over the evaluated topics (0 when there are none).
    double mean(Measure m) const noexcept;
    const TopicEval* find(std::string_view topic_id) const;
};

struct EvaluationOptions {
    CompletionMode completion = CompletionMode::Append;
};

/// Evaluates every topic that the run ranks and that has at least one relevant
/// candidate. Relevance is grade > 0, counted only inside the candidate set.
/// Throws EvaluationError when no topic is evaluable, or on any gap in strict mode.
MetricReport evaluate(const RankedRun& run, std::span<const Topic> topics, const Qrels& qrels,
                      const EvaluationOptions& options = {});

}  // namespace tarlab
