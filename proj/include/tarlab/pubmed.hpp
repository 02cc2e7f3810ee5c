#pragma once

#include <chrono>
#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tarlab/corpus.hpp"

namespace tarlab {

inline constexpr std::string_view kDefaultEfetchEndpoint = "https://eutils.ncbi.nlm.nih.gov/entrez/eutils/efetch.fcgi";

struct FetchOptions {
    std::string endpoint{kDefaultEfetchEndpoint};
    std::string api_key;
    std::size_t batch_size = 200;
    /// Attempts per batch, including the first one.
    int max_attempts = 4;
    std::chrono::milliseconds initial_backoff{500};
    std::chrono::milliseconds max_backoff{8000};
    std::chrono::seconds timeout{60};
};

struct FetchSummary {
    std::size_t fetched = 0;
    std::size_t requests = 0;
    /// Requested pmids the service did not return (or returned without a title).
    std::vector<std::string> missing;
};

/// Result of parsing one efetch XML payload.
struct EfetchDocuments {
    std::vector<DocRecord> records;
    std::vector<std::string> untitled;
};

/// Extracts pmid, article title and abstract from a PubmedArticleSet document.
/// Abstract sections are joined with a single space. Throws ParseError on
/// malformed XML.
EfetchDocuments parse_efetch_xml(std::string_view xml);

/// Fetches records in batches of `batch_size`, handing each to `sink` as it
/// arrives. A batch that keeps failing after `max_attempts` (exponential
/// backoff) raises MissingDocumentsError listing every pmid not yet fetched.
FetchSummary fetch_pubmed(std::span<const std::string> pmids, const FetchOptions& options,
                          const std::function<void(const DocRecord&)>& sink);

}  // namespace tarlab
