#include "tarlab/metrics.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <stdexcept>

#include "tarlab/error.hpp"

namespace tarlab {

std::string_view measure_name(Measure m) noexcept
{
    switch (m) {
    case Measure::LastRel: return "last_rel";
    case Measure::AP: return "ap";
    case Measure::Recall1: return "recall@1";
    case Measure::Recall5: return "recall@5";
    case Measure::Recall10: return "recall@10";
    case Measure::Recall20: return "recall@20";
    case Measure::WSS95: return "wss@95";
    case Measure::WSS100: return "wss@100";
    }
    return "?";
}

Measure parse_measure(std::string_view name)
{
    std::string key;
    for (char c : name) {
        if (c == '_' || c == '@' || c == '%' || c == '-') {
            continue;
        }
        key += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
    static const std::map<std::string, Measure, std::less<>> names{
        {"lastrel", Measure::LastRel},   {"ap", Measure::AP},           {"map", Measure::AP},
        {"recall1", Measure::Recall1},   {"recall5", Measure::Recall5}, {"recall10", Measure::Recall10},
        {"recall20", Measure::Recall20}, {"wss95", Measure::WSS95},     {"wss100", Measure::WSS100},
    };
    auto it = names.find(key);
    if (it == names.end()) {
        throw std::invalid_argument("unknown measure '" + std::string(name) + "'");
    }
    return it->second;
}

JudgedRanking::JudgedRanking(std::span<const std::string> ranking, const std::set<std::string, PmidLess>& relevant)
    : size_(ranking.size())
{
    for (std::size_t i = 0; i < ranking.size(); ++i) {
        if (relevant.count(ranking[i])) {
            relevant_ranks_.push_back(i + 1);
        }
    }
}

JudgedRanking::JudgedRanking(std::size_t size, std::vector<std::size_t> relevant_ranks)
    : size_(size), relevant_ranks_(std::move(relevant_ranks))
{
    for (std::size_t i = 0; i < relevant_ranks_.size(); ++i) {
        const auto r = relevant_ranks_[i];
        if (r < 1 || r > size_ || (i > 0 && r <= relevant_ranks_[i - 1])) {
            throw std::invalid_argument("relevant ranks must be strictly increasing within 1..N");
        }
    }
}

std::optional<std::size_t> last_rel(const JudgedRanking& ranking)
{
    if (ranking.relevant_count() == 0) {
        return std::nullopt;
    }
    return ranking.relevant_ranks().back();
}

std::optional<double> average_precision(const JudgedRanking& ranking)
{
    const auto ranks = ranking.relevant_ranks();
    if (ranks.empty()) {
        return std::nullopt;
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < ranks.size(); ++i) {
        sum += static_cast<double>(i + 1) / static_cast<double>(ranks[i]);
    }
    return sum / static_cast<double>(ranks.size());
}

namespace {

// ceil(percent/100 * count). The product is exact for integral percentages.
std::size_t percent_ceil(double percent, std::size_t count)
{
    return static_cast<std::size_t>(std::ceil(percent * static_cast<double>(count) / 100.0));
}

void require_percent(double p, const char* what)
{
    if (!(p > 0.0 && p <= 100.0)) {
        throw std::invalid_argument(std::string(what) + " must lie in (0, 100]");
    }
}

}  // namespace

std::optional<double> recall_at_percent(const JudgedRanking& ranking, double p)
{
    require_percent(p, "recall percentage");
    const auto ranks = ranking.relevant_ranks();
    if (ranks.empty()) {
        return std::nullopt;
    }
    const auto cutoff = percent_ceil(p, ranking.size());
    const auto found = std::upper_bound(ranks.begin(), ranks.end(), cutoff) - ranks.begin();
    return static_cast<double>(found) / static_cast<double>(ranks.size());
}

std::optional<double> wss(const JudgedRanking& ranking, double k)
{
    require_percent(k, "WSS recall level");
    const auto ranks = ranking.relevant_ranks();
    if (ranks.empty()) {
        return std::nullopt;
    }
    const auto needed = std::max<std::size_t>(1, percent_ceil(k, ranks.size()));
    const auto stop_rank = ranks[needed - 1];
    const auto n = static_cast<double>(ranking.size());
    return (n - static_cast<double>(stop_rank)) / n - (1.0 - k / 100.0);
}

double TopicEval::value(Measure m) const noexcept
{
    switch (m) {
    case Measure::LastRel: return static_cast<double>(last_rel);
    case Measure::AP: return ap;
    case Measure::Recall1: return recall[0];
    case Measure::Recall5: return recall[1];
    case Measure::Recall10: return recall[2];
    case Measure::Recall20: return recall[3];
    case Measure::WSS95: return wss95;
    case Measure::WSS100: return wss100;
    }
    return 0.0;
}

TopicEval evaluate_topic(std::string topic_id, const JudgedRanking& ranking)
{
    if (ranking.relevant_count() == 0) {
        throw EvaluationError("topic " + topic_id + " has no relevant documents");
    }
    TopicEval ev;
    ev.topic_id = std::move(topic_id);
    ev.n = ranking.size();
    ev.r = ranking.relevant_count();
    ev.last_rel = *last_rel(ranking);
    ev.ap = *average_precision(ranking);
    constexpr std::array<double, 4> cutoffs{1.0, 5.0, 10.0, 20.0};
    for (std::size_t i = 0; i < cutoffs.size(); ++i) {
        ev.recall[i] = *recall_at_percent(ranking, cutoffs[i]);
    }
    ev.wss95 = *wss(ranking, 95.0);
    ev.wss100 = *wss(ranking, 100.0);
    return ev;
}

double MetricReport::mean(Measure m) const noexcept
{
    if (topics.empty()) {
        return 0.0;
    }
    double sum = 0.0;
    for (const auto& t : topics) {
        sum += t.value(m);
    }
    return sum / static_cast<double>(topics.size());
}

const TopicEval* MetricReport::find(std::string_view topic_id) const
{
    for (const auto& t : topics) {
        if (t.topic_id == topic_id) {
            return &t;
        }
    }
    return nullptr;
}

MetricReport evaluate(const RankedRun& run, std::span<const Topic> topics, const Qrels& qrels,
                      const EvaluationOptions& options)
{
    MetricReport report;
    report.run_tag = run.tag;

    std::map<std::string_view, const Topic*> by_id;
    for (const auto& t : topics) {
        by_id.emplace(t.id, &t);
    }
    for (const auto& [topic_id, entries] : run.topics) {
        if (!by_id.count(topic_id)) {
            if (options.completion == CompletionMode::Strict) {
                throw EvaluationError("run ranks unknown topic " + topic_id);
            }
            report.excluded.push_back({topic_id, "not in topic set"});
        }
    }
    for (const auto& [topic_id, topic] : by_id) {
        auto it = run.topics.find(topic_id);
        if (it == run.topics.end()) {
            if (options.completion == CompletionMode::Strict) {
                throw EvaluationError("run does not rank topic " + std::string(topic_id));
            }
            report.excluded.push_back({std::string(topic_id), "not ranked by run"});
            continue;
        }
        const auto order = complete_ranking(it->second, *topic, options.completion);
        const JudgedRanking judged(order, relevant_candidates(*topic, qrels));
        if (judged.relevant_count() == 0) {
            report.excluded.push_back({std::string(topic_id), "no relevant documents"});
            continue;
        }
        report.topics.push_back(evaluate_topic(std::string(topic_id), judged));
    }
    std::sort(report.excluded.begin(), report.excluded.end(),
              [](const ExcludedTopic& a, const ExcludedTopic& b) { return a.topic_id < b.topic_id; });
    if (report.topics.empty()) {
        throw EvaluationError("run covers no evaluable topic");
    }
    return report;
}

}  // namespace tarlab
