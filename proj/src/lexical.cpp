#include "tarlab/lexical.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <stdexcept>
#include <thread>

#include "tarlab/error.hpp"

namespace tarlab {

namespace {

bool is_word_codepoint(char32_t cp) noexcept
{
    if (cp < 0x80) {
        return (cp >= '0' && cp <= '9') || (cp >= 'a' && cp <= 'z') || (cp >= 'A' && cp <= 'Z');
    }
    // C1 controls and Latin-1 punctuation, keeping the ordinal and superscript letters.
    if (cp <= 0xBF) {
        return cp == 0xAA || cp == 0xB2 || cp == 0xB3 || cp == 0xB5 || cp == 0xB9 || cp == 0xBA;
    }
    if (cp == 0xD7 || cp == 0xF7) {
        return false;
    }
    // General punctuation through misc symbols and arrows, CJK punctuation,
    // fullwidth ASCII punctuation, BOM.
    if ((cp >= 0x2000 && cp <= 0x2BFF) || (cp >= 0x2E00 && cp <= 0x2E7F) || (cp >= 0x3000 && cp <= 0x303F)
        || (cp >= 0xFE30 && cp <= 0xFE4F) || (cp >= 0xFF00 && cp <= 0xFF0F) || cp == 0xFEFF) {
        return false;
    }
    return true;
}

// Decodes one UTF-8 sequence at `pos`; returns its length (1 for invalid bytes,
// which decode to U+FFFD and are treated as separators).
std::size_t decode(std::string_view s, std::size_t pos, char32_t& cp) noexcept
{
    const auto lead = static_cast<unsigned char>(s[pos]);
    std::size_t len = 0;
    if (lead < 0x80) {
        cp = lead;
        return 1;
    }
    if ((lead & 0xE0) == 0xC0) {
        len = 2;
        cp = lead & 0x1F;
    } else if ((lead & 0xF0) == 0xE0) {
        len = 3;
        cp = lead & 0x0F;
    } else if ((lead & 0xF8) == 0xF0) {
        len = 4;
        cp = lead & 0x07;
    } else {
        cp = 0xFFFD;
        return 1;
    }
    if (pos + len > s.size()) {
        cp = 0xFFFD;
        return 1;
    }
    for (std::size_t i = 1; i < len; ++i) {
        const auto c = static_cast<unsigned char>(s[pos + i]);
        if ((c & 0xC0) != 0x80) {
            cp = 0xFFFD;
            return 1;
        }
        cp = (cp << 6) | (c & 0x3F);
    }
    return len;
}

}  // namespace

TokenStream tokenize(std::string_view text, const TokenizerOptions& options)
{
    TokenStream out;
    std::string current;
    auto flush = [&] {
        if (!current.empty()) {
            if (!options.stopwords.count(current)) {
                out.tokens.push_back(std::move(current));
            }
            current.clear();
        }
    };

    std::size_t pos = 0;
    while (pos < text.size()) {
        if (text.substr(pos, kSeparator.size()) == kSeparator) {
            flush();
            pos += kSeparator.size();
            continue;
        }
        char32_t cp = 0;
        const auto len = decode(text, pos, cp);
        if (is_word_codepoint(cp) && cp != 0xFFFD) {
            if (cp < 0x80) {
                current += static_cast<char>(std::tolower(static_cast<unsigned char>(text[pos])));
            } else {
                current.append(text.substr(pos, len));
            }
        } else {
            flush();
        }
        pos += len;
    }
    flush();
    return out;
}

void LexicalParams::validate() const
{
    if (!(k1 >= 0.0) || !std::isfinite(k1)) {
        throw std::invalid_argument("k1 must be >= 0");
    }
    if (!(b >= 0.0 && b <= 1.0)) {
        throw std::invalid_argument("b must lie in [0, 1]");
    }
    if (!(lambda > 0.0 && lambda < 1.0)) {
        throw std::invalid_argument("lambda must lie in (0, 1)");
    }
    if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) {
        throw std::invalid_argument("epsilon must be >= 0");
    }
}

CollectionStats CollectionStats::from_documents(std::span<const std::pair<std::string, TokenStream>> docs)
{
    CollectionStats stats;
    for (const auto& [pmid, stream] : docs) {
        auto [slot, inserted] = stats.docs_.try_emplace(pmid);
        auto& doc = slot->second;
        if (!inserted) {
            throw std::invalid_argument("document " + pmid + " appears twice in a collection");
        }
        doc.length = stream.tokens.size();
        for (const auto& tok : stream.tokens) {
            ++doc.tf[tok];
        }
        for (const auto& [term, count] : doc.tf) {
            auto& t = stats.terms_[term];
            ++t.df;
            t.cf += count;
        }
        stats.total_tokens_ += doc.length;
    }
    if (!stats.docs_.empty()) {
        stats.avg_doc_len_ = static_cast<double>(stats.total_tokens_) / static_cast<double>(stats.docs_.size());
    }

    double positive_sum = 0.0;
    std::size_t positive = 0;
    for (const auto& [term, t] : stats.terms_) {
        const double idf = stats.raw_idf(term);
        if (idf > 0.0) {
            positive_sum += idf;
            ++positive;
        }
    }
    stats.mean_positive_idf_ = positive ? positive_sum / static_cast<double>(positive) : 0.0;
    return stats;
}

std::size_t CollectionStats::doc_length(std::string_view pmid) const
{
    auto it = docs_.find(std::string(pmid));
    return it == docs_.end() ? 0 : it->second.length;
}

std::size_t CollectionStats::tf(std::string_view term, std::string_view pmid) const
{
    auto it = docs_.find(std::string(pmid));
    if (it == docs_.end()) {
        return 0;
    }
    auto t = it->second.tf.find(std::string(term));
    return t == it->second.tf.end() ? 0 : t->second;
}

std::size_t CollectionStats::df(std::string_view term) const
{
    auto it = terms_.find(std::string(term));
    return it == terms_.end() ? 0 : it->second.df;
}

std::size_t CollectionStats::cf(std::string_view term) const
{
    auto it = terms_.find(std::string(term));
    return it == terms_.end() ? 0 : it->second.cf;
}

double CollectionStats::raw_idf(std::string_view term) const
{
    const auto n = static_cast<double>(docs_.size());
    const auto d = static_cast<double>(df(term));
    return std::log((n - d + 0.5) / (d + 0.5));
}

CollectionStats build_stats(const Topic& topic, const DocStore& store, Representation mode,
                            const TokenizerOptions& tokenizer)
{
    std::vector<std::pair<std::string, TokenStream>> docs;
    std::vector<std::string> missing;
    docs.reserve(topic.pmids.size());
    for (const auto& pmid : topic.pmids) {
        const auto* doc = store.find(pmid);
        if (!doc) {
            missing.push_back(pmid);
            continue;
        }
        docs.emplace_back(pmid, tokenize(represent(*doc, mode).text, tokenizer));
    }
    if (!missing.empty()) {
        std::string list;
        for (const auto& id : missing) {
            list += (list.empty() ? "" : ", ") + id;
        }
        throw MissingDocumentsError("topic " + topic.id + ": " + std::to_string(missing.size())
                                        + " candidate(s) missing from the corpus: " + list,
                                    std::move(missing));
    }
    return CollectionStats::from_documents(docs);
}

double bm25_score(const TokenStream& query, std::string_view pmid, const CollectionStats& stats,
                  const LexicalParams& params)
{
    const auto doc_len = static_cast<double>(stats.doc_length(pmid));
    const double norm = params.k1 * (1.0 - params.b + params.b * doc_len / stats.avg_doc_len());
    const double idf_floor = params.epsilon * stats.mean_positive_idf();

    double score = 0.0;
    for (const auto& term : query.tokens) {
        const auto tf = static_cast<double>(stats.tf(term, pmid));
        if (tf == 0.0) {
            continue;
        }
        double idf = stats.raw_idf(term);
        if (idf < 0.0) {
            idf = idf_floor;
        }
        score += idf * tf * (params.k1 + 1.0) / (tf + norm);
    }
    return score;
}

double qlm_score(const TokenStream& query, std::string_view pmid, const CollectionStats& stats,
                 const LexicalParams& params)
{
    const auto doc_len = static_cast<double>(stats.doc_length(pmid));
    const auto total = static_cast<double>(stats.total_tokens());

    double score = 0.0;
    for (const auto& term : query.tokens) {
        const auto cf = static_cast<double>(stats.cf(term));
        if (cf == 0.0) {
            continue;
        }
        const double p_doc = doc_len > 0.0 ? static_cast<double>(stats.tf(term, pmid)) / doc_len : 0.0;
        score += std::log((1.0 - params.lambda) * p_doc + params.lambda * cf / total);
    }
    return score;
}

Model parse_model(std::string_view name)
{
    std::string lower(name);
    std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
    if (lower == "bm25") {
        return Model::BM25;
    }
    if (lower == "qlm") {
        return Model::QLM;
    }
    throw std::invalid_argument("unknown model '" + std::string(name) + "' (expected bm25 or qlm)");
}

std::string_view to_string(Model model) noexcept
{
    return model == Model::BM25 ? "bm25" : "qlm";
}

std::vector<RunEntry> rank_topic(const Topic& topic, const DocStore& store, Representation mode, Model model,
                                 const LexicalParams& params, const TokenizerOptions& tokenizer)
{
    params.validate();
    const auto stats = build_stats(topic, store, mode, tokenizer);
    const auto query = tokenize(topic.title, tokenizer);

    std::vector<RunEntry> entries;
    entries.reserve(topic.pmids.size());
    for (const auto& pmid : topic.pmids) {
        const double score =
            model == Model::BM25 ? bm25_score(query, pmid, stats, params) : qlm_score(query, pmid, stats, params);
        entries.push_back({pmid, 0, score});
    }
    sort_entries(entries);
    return entries;
}

RankedRun rank_topics(std::span<const Topic> topics, const DocStore& store, Representation mode, Model model,
                      const LexicalParams& params, std::string tag, unsigned jobs, const TokenizerOptions& tokenizer)
{
    params.validate();
    std::vector<std::vector<RunEntry>> ranked(topics.size());
    std::vector<std::exception_ptr> failures(topics.size());
    std::atomic<std::size_t> next{0};

    auto worker = [&] {
        for (auto i = next.fetch_add(1); i < topics.size(); i = next.fetch_add(1)) {
            try {
                ranked[i] = rank_topic(topics[i], store, mode, model, params, tokenizer);
            } catch (...) {
                failures[i] = std::current_exception();
            }
        }
    };

    const auto workers = std::clamp<std::size_t>(jobs, 1, std::max<std::size_t>(topics.size(), 1));
    if (workers == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back(worker);
        }
    }
    for (const auto& failure : failures) {
        if (failure) {
            std::rethrow_exception(failure);
        }
    }

    RankedRun run;
    run.tag = std::move(tag);
    for (std::size_t i = 0; i < topics.size(); ++i) {
        run.topics.emplace(topics[i].id, std::move(ranked[i]));
    }
    return run;
}

}  // namespace tarlab
