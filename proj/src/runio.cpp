#include "tarlab/runio.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <set>

#include "tarlab/error.hpp"
#include "text_util.hpp"

namespace tarlab {

void sort_entries(std::vector<RunEntry>& entries)
{
    std::sort(entries.begin(), entries.end(), [](const RunEntry& a, const RunEntry& b) {
        if (a.score != b.score) {
            return a.score > b.score;
        }
        return pmid_less(a.pmid, b.pmid);
    });
    for (std::size_t i = 0; i < entries.size(); ++i) {
        entries[i].rank = i + 1;
    }
}

std::string format_score(double score)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", score);
    std::string out(buf);
    if (out == "-0.000000") {
        out = "0.000000";
    }
    return out;
}

namespace {

template <typename T>
bool parse_number(std::string_view s, T& value)
{
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    return ec == std::errc{} && ptr == s.data() + s.size();
}

}  // namespace

RankedRun read_run(std::istream& in)
{
    RankedRun run;
    bool first = true;
    std::set<std::pair<std::string, std::string>, std::less<>> seen;
    std::string raw;
    std::size_t lineno = 0;

    while (std::getline(in, raw)) {
        ++lineno;
        const auto cols = detail::split_ws(raw);
        if (cols.empty()) {
            continue;
        }
        if (cols.size() != 6) {
            throw ParseError(lineno, "expected 6 columns (topic flag pmid rank score tag), got "
                                         + std::to_string(cols.size()));
        }
        const auto flag = cols[1];
        if (flag != "Q0" && flag != "NF" && flag != "AF") {
            throw ParseError(lineno, "unknown flag '" + std::string(flag) + "' (expected Q0, NF or AF)");
        }
        long long rank = 0;
        if (!parse_number(cols[3], rank)) {
            throw ParseError(lineno, "non-numeric rank '" + std::string(cols[3]) + "'");
        }
        double score = 0.0;
        if (!parse_number(cols[4], score) || !std::isfinite(score)) {
            throw ParseError(lineno, "non-numeric score '" + std::string(cols[4]) + "'");
        }
        if (first) {
            run.tag = std::string(cols[5]);
            run.flag = std::string(flag);
            first = false;
        }
        if (!seen.emplace(cols[0], cols[2]).second) {
            throw ParseError(lineno, "duplicate document " + std::string(cols[2]) + " in topic " + std::string(cols[0]));
        }
        auto& entries = run.topics[std::string(cols[0])];
        entries.push_back({std::string(cols[2]), static_cast<std::size_t>(std::max(0LL, rank)), score});
    }

    for (auto& [topic_id, entries] : run.topics) {
        sort_entries(entries);
    }
    return run;
}

void write_run(std::ostream& out, const RankedRun& run)
{
    for (const auto& [topic_id, entries] : run.topics) {
        struct Line {
            const RunEntry* entry;
            std::string score;
            double printed;
        };
        std::vector<Line> lines;
        lines.reserve(entries.size());
        for (const auto& e : entries) {
            auto s = format_score(e.score);
            const double printed = std::strtod(s.c_str(), nullptr);
            lines.push_back({&e, std::move(s), printed});
        }
        std::stable_sort(lines.begin(), lines.end(), [](const Line& a, const Line& b) {
            if (a.printed != b.printed) {
                return a.printed > b.printed;
            }
            return pmid_less(a.entry->pmid, b.entry->pmid);
        });
        std::size_t rank = 0;
        for (const auto& line : lines) {
            out << topic_id << " NF " << line.entry->pmid << ' ' << ++rank << ' ' << line.score << ' ' << run.tag
                << '\n';
        }
    }
}

RunValidation validate_against(const RankedRun& run, std::span<const Topic> topics, const Qrels& qrels)
{
    RunValidation report;
    std::set<std::string_view> known;
    for (const auto& topic : topics) {
        known.insert(topic.id);
        auto it = run.topics.find(topic.id);
        if (it == run.topics.end()) {
            report.unranked_topics.push_back(topic.id);
            continue;
        }
        std::set<std::string_view> ranked;
        for (const auto& e : it->second) {
            ranked.insert(e.pmid);
        }
        const std::set<std::string_view> candidates(topic.pmids.begin(), topic.pmids.end());

        TopicRunGaps gaps;
        gaps.topic_id = topic.id;
        for (const auto& pmid : topic.pmids) {
            if (!ranked.count(pmid)) {
                gaps.missing_candidates.push_back(pmid);
                if (qrels.is_relevant(topic.id, pmid)) {
                    gaps.unranked_relevant.push_back(pmid);
                }
            }
        }
        for (const auto& e : it->second) {
            if (!candidates.count(e.pmid)) {
                gaps.foreign_documents.push_back(e.pmid);
            }
        }
        if (!gaps.empty()) {
            report.topics.push_back(std::move(gaps));
        }
    }
    for (const auto& [topic_id, entries] : run.topics) {
        if (!known.count(topic_id)) {
            report.unknown_topics.push_back(topic_id);
        }
    }
    return report;
}

std::vector<std::string> complete_ranking(std::span<const RunEntry> entries, const Topic& topic, CompletionMode mode)
{
    const std::set<std::string_view> candidates(topic.pmids.begin(), topic.pmids.end());
    std::vector<std::string> order;
    std::set<std::string_view> ranked;
    std::vector<std::string> foreign;
    for (const auto& e : entries) {
        if (!candidates.count(e.pmid)) {
            foreign.push_back(e.pmid);
            continue;
        }
        if (ranked.insert(e.pmid).second) {
            order.push_back(e.pmid);
        }
    }
    std::vector<std::string> rest;
    for (const auto& pmid : topic.pmids) {
        if (!ranked.count(pmid)) {
            rest.push_back(pmid);
        }
    }
    if (mode == CompletionMode::Strict && (!rest.empty() || !foreign.empty())) {
        throw EvaluationError("topic " + topic.id + ": run is incomplete (" + std::to_string(rest.size())
                              + " unranked candidates, " + std::to_string(foreign.size()) + " foreign documents)");
    }
    std::sort(rest.begin(), rest.end(), PmidLess{});
    order.insert(order.end(), std::make_move_iterator(rest.begin()), std::make_move_iterator(rest.end()));
    return order;
}

}  // namespace tarlab
