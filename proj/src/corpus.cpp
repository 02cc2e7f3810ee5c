#include "tarlab/corpus.hpp"

#include <algorithm>
#include <charconv>
#include <istream>
#include <ostream>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

#include "tarlab/error.hpp"
#include "text_util.hpp"

namespace tarlab {

using detail::split_ws;
using detail::trim;

void Qrels::add(const std::string& topic_id, const std::string& pmid, int grade)
{
    if (grade < 0) {
        throw IngestError("negative grade for (" + topic_id + ", " + pmid + ")");
    }
    auto& judged = judgments_[topic_id];
    if (!judged.emplace(pmid, grade).second) {
        throw IngestError("duplicate judgment for (" + topic_id + ", " + pmid + ")");
    }
    ++size_;
}

const Qrels::TopicJudgments* Qrels::topic(std::string_view topic_id) const
{
    auto it = judgments_.find(topic_id);
    return it == judgments_.end() ? nullptr : &it->second;
}

std::optional<int> Qrels::grade(std::string_view topic_id, std::string_view pmid) const
{
    const auto* judged = topic(topic_id);
    if (!judged) {
        return std::nullopt;
    }
    auto it = judged->find(pmid);
    if (it == judged->end()) {
        return std::nullopt;
    }
    return it->second;
}

bool Qrels::is_relevant(std::string_view topic_id, std::string_view pmid) const
{
    return grade(topic_id, pmid).value_or(0) > 0;
}

bool DocStore::insert(DocRecord doc)
{
    auto key = doc.pmid;
    auto [it, inserted] = docs_.insert_or_assign(std::move(key), std::move(doc));
    return !inserted;
}

const DocRecord* DocStore::find(std::string_view pmid) const
{
    auto it = docs_.find(pmid);
    return it == docs_.end() ? nullptr : &it->second;
}

namespace {

// A header is `Key: rest` starting in column 0 with an alphabetic key.
std::optional<std::pair<std::string, std::string_view>> header_of(std::string_view line)
{
    const auto colon = line.find(':');
    if (colon == std::string_view::npos || colon == 0) {
        return std::nullopt;
    }
    const auto key = line.substr(0, colon);
    if (!std::isalpha(static_cast<unsigned char>(key.front()))) {
        return std::nullopt;
    }
    const bool ok = std::all_of(key.begin(), key.end(), [](char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == ' ';
    });
    if (!ok || key.back() == ' ') {
        return std::nullopt;
    }
    return std::make_pair(std::string(key), line.substr(colon + 1));
}

enum class Section { None, Title, Query, Pids, Meta };

struct TopicBlock {
    Topic topic;
    std::size_t line = 0;
    bool has_title = false;
    bool has_query = false;
    bool has_pids = false;
    std::vector<std::string> query_lines;
};

Topic finish_block(TopicBlock& block)
{
    auto& t = block.topic;
    auto require = [&](bool seen, const char* key) {
        if (!seen) {
            throw ParseError(block.line, "topic " + t.id + " is missing the '" + key + ":' header");
        }
    };
    require(block.has_title, "Title");
    require(block.has_query, "Query");
    require(block.has_pids, "Pids");

    auto& lines = block.query_lines;
    auto blank = [](const std::string& s) { return trim(s).empty(); };
    while (!lines.empty() && blank(lines.back())) {
        lines.pop_back();
    }
    auto first = std::find_if_not(lines.begin(), lines.end(), blank);
    std::string query;
    for (auto it = first; it != lines.end(); ++it) {
        if (it != first) {
            query += '\n';
        }
        query += *it;
    }
    t.boolean_query = std::move(query);

    if (t.pmids.empty()) {
        throw IngestError("topic " + t.id + ": topic has no candidates");
    }
    std::unordered_set<std::string> seen;
    for (const auto& pmid : t.pmids) {
        if (!seen.insert(pmid).second) {
            throw IngestError("topic " + t.id + ": duplicate candidate pmid " + pmid);
        }
    }
    return std::move(t);
}

}  // namespace

std::vector<Topic> parse_topics(std::istream& in)
{
    std::vector<Topic> topics;
    std::optional<TopicBlock> block;
    Section section = Section::None;
    std::string raw;
    std::size_t lineno = 0;

    while (std::getline(in, raw)) {
        ++lineno;
        if (!raw.empty() && raw.back() == '\r') {
            raw.pop_back();
        }
        auto header = header_of(raw);
        if (header && section == Section::Query && header->first != "Topic" && header->first != "Pids"
            && header->first != "Title") {
            header.reset();
        }

        if (header) {
            const auto& key = header->first;
            const auto rest = trim(header->second);
            if (key == "Topic") {
                if (block) {
                    topics.push_back(finish_block(*block));
                }
                if (rest.empty()) {
                    throw ParseError(lineno, "empty topic id");
                }
                block.emplace();
                block->topic.id = std::string(rest);
                block->line = lineno;
                section = Section::None;
                continue;
            }
            if (!block) {
                throw ParseError(lineno, "expected 'Topic:' before '" + key + ":'");
            }
            auto once = [&](bool& seen) {
                if (seen) {
                    throw ParseError(lineno, "repeated '" + key + ":' header in topic " + block->topic.id);
                }
                seen = true;
            };
            if (key == "Title") {
                once(block->has_title);
                block->topic.title = std::string(rest);
                section = Section::Title;
            } else if (key == "Query") {
                once(block->has_query);
                if (!rest.empty()) {
                    block->query_lines.emplace_back(header->second.substr(header->second.find_first_not_of(" \t")));
                }
                section = Section::Query;
            } else if (key == "Pids") {
                once(block->has_pids);
                for (auto tok : split_ws(rest)) {
                    block->topic.pmids.emplace_back(tok);
                }
                section = Section::Pids;
            } else {
                block->topic.metadata.emplace_back(key, std::string(rest));
                section = Section::Meta;
            }
            continue;
        }

        const auto content = trim(raw);
        if (!block) {
            if (content.empty()) {
                continue;
            }
            throw ParseError(lineno, "content outside a topic block");
        }
        switch (section) {
        case Section::None:
            if (!content.empty()) {
                throw ParseError(lineno, "unexpected content before any header in topic " + block->topic.id);
            }
            break;
        case Section::Title:
            if (!content.empty()) {
                auto& title = block->topic.title;
                title += title.empty() ? "" : " ";
                title += content;
            }
            break;
        case Section::Query:
            block->query_lines.push_back(raw);
            break;
        case Section::Pids:
            for (auto tok : split_ws(content)) {
                block->topic.pmids.emplace_back(tok);
            }
            break;
        case Section::Meta:
            if (!content.empty()) {
                auto& value = block->topic.metadata.back().second;
                value += value.empty() ? "" : " ";
                value += content;
            }
            break;
        }
    }
    if (block) {
        topics.push_back(finish_block(*block));
    }

    std::unordered_set<std::string> ids;
    for (const auto& t : topics) {
        if (!ids.insert(t.id).second) {
            throw IngestError("duplicate topic id " + t.id);
        }
    }
    return topics;
}

void write_topics(std::ostream& out, std::span<const Topic> topics)
{
    for (const auto& t : topics) {
        out << "Topic: " << t.id << "\n\n";
        out << "Title: " << t.title << "\n\n";
        for (const auto& [key, value] : t.metadata) {
            out << key << ": " << value << "\n\n";
        }
        out << "Query:\n";
        if (!t.boolean_query.empty()) {
            out << t.boolean_query << '\n';
        }
        out << "\nPids:\n";
        for (const auto& pmid : t.pmids) {
            out << "    " << pmid << '\n';
        }
        out << '\n';
    }
}

Qrels parse_qrels(std::istream& in)
{
    Qrels qrels;
    std::string raw;
    std::size_t lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        const auto cols = split_ws(raw);
        if (cols.empty()) {
            continue;
        }
        if (cols.size() != 4) {
            throw ParseError(lineno, "expected 4 columns (topic iteration pmid grade), got " + std::to_string(cols.size()));
        }
        int grade = 0;
        const auto g = cols[3];
        auto [ptr, ec] = std::from_chars(g.data(), g.data() + g.size(), grade);
        if (ec != std::errc{} || ptr != g.data() + g.size()) {
            throw ParseError(lineno, "non-integer grade '" + std::string(g) + "'");
        }
        try {
            qrels.add(std::string(cols[0]), std::string(cols[2]), grade);
        } catch (const IngestError& e) {
            throw ParseError(lineno, e.what());
        }
    }
    return qrels;
}

void write_qrels(std::ostream& out, const Qrels& qrels)
{
    for (const auto& [topic_id, judged] : qrels.topics()) {
        for (const auto& [pmid, grade] : judged) {
            out << topic_id << " 0 " << pmid << ' ' << grade << '\n';
        }
    }
}

CorpusLoad load_corpus(std::istream& in)
{
    using nlohmann::json;
    CorpusLoad result;
    std::string raw;
    std::size_t lineno = 0;

    auto text_field = [&](const json& rec, const char* name) -> std::optional<std::string> {
        auto it = rec.find(name);
        if (it == rec.end() || it->is_null()) {
            return std::nullopt;
        }
        if (!it->is_string()) {
            throw ParseError(lineno, std::string("field '") + name + "' must be a string");
        }
        return it->get<std::string>();
    };

    while (std::getline(in, raw)) {
        ++lineno;
        if (trim(raw).empty()) {
            continue;
        }
        json rec = json::parse(raw, nullptr, false);
        if (rec.is_discarded() || !rec.is_object()) {
            throw ParseError(lineno, "malformed corpus record");
        }
        DocRecord doc;
        auto pmid = rec.find("pmid");
        if (pmid != rec.end() && pmid->is_number_unsigned()) {
            doc.pmid = std::to_string(pmid->get<std::uint64_t>());
        } else if (pmid != rec.end() && pmid->is_string()) {
            doc.pmid = std::string(trim(pmid->get<std::string>()));
        }
        if (doc.pmid.empty()) {
            throw ParseError(lineno, "corpus record without a pmid");
        }
        doc.title = std::string(trim(text_field(rec, "title").value_or("")));
        doc.abstract = text_field(rec, "abstract").value_or("");
        if (doc.title.empty()) {
            result.rejected_lines.push_back(lineno);
            result.warnings.push_back("line " + std::to_string(lineno) + ": record " + doc.pmid
                                      + " has no title; rejected");
            continue;
        }
        const auto id = doc.pmid;
        if (result.store.insert(std::move(doc))) {
            result.warnings.push_back("line " + std::to_string(lineno) + ": duplicate pmid " + id
                                      + "; keeping the later record");
        }
    }
    return result;
}

std::string corpus_line(const DocRecord& doc)
{
    nlohmann::ordered_json rec;
    rec["pmid"] = doc.pmid;
    rec["title"] = doc.title;
    rec["abstract"] = doc.abstract;
    return rec.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
}

void write_corpus(std::ostream& out, const DocStore& store)
{
    for (const auto& [pmid, doc] : store) {
        out << corpus_line(doc) << '\n';
    }
}

Representation parse_representation(std::string_view name)
{
    std::string lower(name);
    std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
    if (lower == "title") {
        return Representation::Title;
    }
    if (lower == "tiab") {
        return Representation::TiAb;
    }
    throw std::invalid_argument("unknown representation '" + std::string(name) + "' (expected title or tiab)");
}

std::string_view to_string(Representation mode) noexcept
{
    return mode == Representation::Title ? "title" : "tiab";
}

DocRepresentation represent(const DocRecord& doc, Representation mode)
{
    if (mode == Representation::Title) {
        return {mode, doc.title};
    }
    std::string text;
    text.reserve(doc.title.size() + kSeparator.size() + doc.abstract.size() + 2);
    text += doc.title;
    text += ' ';
    text += kSeparator;
    text += ' ';
    text += doc.abstract;
    return {mode, std::move(text)};
}

std::set<std::string, PmidLess> relevant_candidates(const Topic& topic, const Qrels& qrels)
{
    std::set<std::string, PmidLess> relevant;
    const auto* judged = qrels.topic(topic.id);
    if (!judged) {
        return relevant;
    }
    for (const auto& pmid : topic.pmids) {
        auto it = judged->find(pmid);
        if (it != judged->end() && it->second > 0) {
            relevant.insert(pmid);
        }
    }
    return relevant;
}

std::size_t IngestReport::missing_document_count() const
{
    std::size_t n = 0;
    for (const auto& t : topics) {
        n += t.missing_documents.size();
    }
    return n;
}

IngestReport check_consistency(std::span<const Topic> topics, const Qrels& qrels, const DocStore& store)
{
    IngestReport report;
    report.documents = store.size();
    std::set<std::string, std::less<>> topic_ids;

    for (const auto& t : topics) {
        topic_ids.insert(t.id);
        TopicConsistency tc;
        tc.topic_id = t.id;
        tc.candidates = t.pmids.size();
        tc.relevant = relevant_candidates(t, qrels).size();
        std::set<std::string_view> candidates;
        for (const auto& pmid : t.pmids) {
            candidates.insert(pmid);
            const auto* doc = store.find(pmid);
            if (!doc) {
                tc.missing_documents.push_back(pmid);
            } else if (doc->abstract.empty()) {
                tc.empty_abstracts.push_back(pmid);
            }
        }
        if (const auto* judged = qrels.topic(t.id)) {
            for (const auto& [pmid, grade] : *judged) {
                if (!candidates.count(pmid)) {
                    tc.judged_outside_candidates.push_back(pmid);
                }
            }
        }
        if (tc.relevant == 0) {
            report.topics_without_relevant.push_back(t.id);
        }
        report.topics.push_back(std::move(tc));
    }
    for (const auto& [topic_id, judged] : qrels.topics()) {
        if (!topic_ids.count(topic_id)) {
            report.qrels_without_topic.push_back(topic_id);
        }
    }
    return report;
}

}  // namespace tarlab
