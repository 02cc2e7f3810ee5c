#include "tarlab/pubmed.hpp"

#include <algorithm>
#include <set>
#include <sstream>
#include <thread>
#include <unordered_set>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>
#include <httplib.h>

#include "tarlab/error.hpp"
#include "text_util.hpp"

namespace tarlab {

namespace pt = boost::property_tree;

namespace {

// Concatenates all text below `node` in document order (inline markup such as
// <i> or <sup> is flattened) and collapses whitespace runs.
void collect_text(const pt::ptree& node, std::string& out)
{
    for (const auto& [key, child] : node) {
        if (key == "<xmlattr>" || key == "<xmlcomment>") {
            continue;
        }
        if (key == "<xmltext>") {
            out += child.data();
        } else {
            collect_text(child, out);
        }
    }
}

std::string flat_text(const pt::ptree& node)
{
    std::string raw;
    collect_text(node, raw);
    std::string out;
    for (auto tok : detail::split_ws(raw)) {
        if (!out.empty()) {
            out += ' ';
        }
        out += tok;
    }
    return out;
}

std::string abstract_of(const pt::ptree& parent)
{
    std::string out;
    auto abstract = parent.get_child_optional("Abstract");
    if (!abstract) {
        return out;
    }
    for (const auto& [key, section] : *abstract) {
        if (key != "AbstractText") {
            continue;
        }
        auto text = flat_text(section);
        if (text.empty()) {
            continue;
        }
        if (!out.empty()) {
            out += ' ';
        }
        out += text;
    }
    return out;
}

void take_record(std::string pmid, std::string title, std::string abstract, EfetchDocuments& docs)
{
    if (pmid.empty()) {
        return;
    }
    if (title.empty()) {
        docs.untitled.push_back(std::move(pmid));
        return;
    }
    docs.records.push_back({std::move(pmid), std::move(title), std::move(abstract)});
}

struct Endpoint {
    std::string origin;
    std::string path;
};

Endpoint split_endpoint(const std::string& url)
{
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) {
        throw std::invalid_argument("endpoint must be an absolute http(s) URL: " + url);
    }
    const auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) {
        return {url, "/"};
    }
    return {url.substr(0, path_start), url.substr(path_start)};
}

std::string join(std::span<const std::string> ids, char sep)
{
    std::string out;
    for (const auto& id : ids) {
        if (!out.empty()) {
            out += sep;
        }
        out += id;
    }
    return out;
}

}  // namespace

EfetchDocuments parse_efetch_xml(std::string_view xml)
{
    pt::ptree tree;
    try {
        std::istringstream in{std::string(xml)};
        pt::read_xml(in, tree, pt::xml_parser::no_concat_text);
    } catch (const pt::xml_parser_error& e) {
        throw ParseError(e.line(), std::string("efetch response: ") + e.message());
    }

    EfetchDocuments docs;
    auto set = tree.get_child_optional("PubmedArticleSet");
    if (!set) {
        return docs;
    }
    for (const auto& [key, entry] : *set) {
        if (key == "PubmedArticle") {
            auto citation = entry.get_child_optional("MedlineCitation");
            if (!citation) {
                continue;
            }
            auto pmid = citation->get_child_optional("PMID");
            auto article = citation->get_child_optional("Article");
            std::string title;
            std::string abstract;
            if (article) {
                if (auto t = article->get_child_optional("ArticleTitle")) {
                    title = flat_text(*t);
                }
                if (title.empty()) {
                    if (auto t = article->get_child_optional("VernacularTitle")) {
                        title = flat_text(*t);
                    }
                }
                abstract = abstract_of(*article);
            }
            take_record(pmid ? flat_text(*pmid) : std::string{}, std::move(title), std::move(abstract), docs);
        } else if (key == "PubmedBookArticle") {
            auto book = entry.get_child_optional("BookDocument");
            if (!book) {
                continue;
            }
            auto pmid = book->get_child_optional("PMID");
            std::string title;
            if (auto t = book->get_child_optional("ArticleTitle")) {
                title = flat_text(*t);
            }
            if (title.empty()) {
                if (auto t = book->get_child_optional("Book.BookTitle")) {
                    title = flat_text(*t);
                }
            }
            take_record(pmid ? flat_text(*pmid) : std::string{}, std::move(title), abstract_of(*book), docs);
        }
    }
    return docs;
}

FetchSummary fetch_pubmed(std::span<const std::string> pmids, const FetchOptions& options,
                          const std::function<void(const DocRecord&)>& sink)
{
    if (options.batch_size < 1) {
        throw std::invalid_argument("batch size must be at least 1");
    }
    FetchSummary summary;

    std::vector<std::string> wanted;
    {
        std::unordered_set<std::string> seen;
        for (const auto& id : pmids) {
            if (seen.insert(id).second) {
                wanted.push_back(id);
            }
        }
    }
    if (wanted.empty()) {
        return summary;
    }

    const auto endpoint = split_endpoint(options.endpoint);
    httplib::Client client(endpoint.origin);
    client.set_connection_timeout(options.timeout);
    client.set_read_timeout(options.timeout);
    client.set_follow_location(true);

    for (std::size_t start = 0; start < wanted.size(); start += options.batch_size) {
        const auto count = std::min(options.batch_size, wanted.size() - start);
        const std::span<const std::string> batch(wanted.data() + start, count);

        httplib::Params params{{"db", "pubmed"}, {"retmode", "xml"}, {"id", join(batch, ',')}};
        if (!options.api_key.empty()) {
            params.emplace("api_key", options.api_key);
        }

        std::string body;
        std::string last_error;
        auto delay = options.initial_backoff;
        bool ok = false;
        for (int attempt = 1; attempt <= std::max(1, options.max_attempts); ++attempt) {
            ++summary.requests;
            auto res = client.Post(endpoint.path, params);
            if (res && res->status == 200) {
                body = std::move(res->body);
                ok = true;
                break;
            }
            last_error = res ? "HTTP " + std::to_string(res->status) : httplib::to_string(res.error());
            if (attempt < options.max_attempts) {
                std::this_thread::sleep_for(delay);
                delay = std::min(delay * 2, options.max_backoff);
            }
        }
        if (!ok) {
            std::vector<std::string> unfetched(wanted.begin() + static_cast<std::ptrdiff_t>(start), wanted.end());
            throw MissingDocumentsError("efetch failed after " + std::to_string(options.max_attempts)
                                            + " attempts (" + last_error + "); "
                                            + std::to_string(unfetched.size()) + " pmids unfetched",
                                        std::move(unfetched));
        }

        auto docs = parse_efetch_xml(body);
        std::set<std::string_view> requested(batch.begin(), batch.end());
        std::set<std::string_view> returned;
        for (const auto& doc : docs.records) {
            if (!requested.count(doc.pmid) || !returned.insert(doc.pmid).second) {
                continue;
            }
            sink(doc);
            ++summary.fetched;
        }
        for (const auto& id : batch) {
            if (!returned.count(id)) {
                summary.missing.push_back(id);
            }
        }
    }
    return summary;
}

}  // namespace tarlab
