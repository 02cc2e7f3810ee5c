#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "tarlab/corpus.hpp"
#include "tarlab/runio.hpp"

namespace tarlab {

/// Normalized terms: non-empty, lowercase, no whitespace.
struct TokenStream {
    std::vector<std::string> tokens;

    bool operator==(const TokenStream&) const = default;
};

struct TokenizerOptions {
    /// Empty by default; matched after lowercasing.
    std::unordered_set<std::string> stopwords;
};

/// Lowercases ASCII, splits on anything that is not a letter or digit and
/// drops the title/abstract separator. Non-ASCII letters are kept as part of
/// words; Unicode punctuation and symbols split.
TokenStream tokenize(std::string_view text, const TokenizerOptions& options = {});

struct LexicalParams {
    double k1 = 1.5;
    double b = 0.75;
    double lambda = 0.5;
    double epsilon = 0.25;

    /// Throws std::invalid_argument when a field is out of range.
    void validate() const;
};

/// Term and length statistics over one topic's candidate documents.
class CollectionStats {
public:
    struct Term {
        std::size_t df = 0;
        std::size_t cf = 0;
    };

    static CollectionStats from_documents(std::span<const std::pair<std::string, TokenStream>> docs);

    std::size_t doc_count() const noexcept { return docs_.size(); }
    std::size_t total_tokens() const noexcept { return total_tokens_; }
    double avg_doc_len() const noexcept { return avg_doc_len_; }

    bool has_doc(std::string_view pmid) const { return docs_.count(std::string(pmid)) != 0; }
    std::size_t doc_length(std::string_view pmid) const;
    std::size_t tf(std::string_view term, std::string_view pmid) const;
    std::size_t df(std::string_view term) const;
    std::size_t cf(std::string_view term) const;
    const std::unordered_map<std::string, Term>& terms() const noexcept { return terms_; }

    /// Raw Robertson idf ln((N - df + 0.5) / (df + 0.5)); may be negative.
    double raw_idf(std::string_view term) const;
    /// Mean of the positive raw idf values in the vocabulary (0 if none).
    double mean_positive_idf() const noexcept { return mean_positive_idf_; }

private:
    struct Doc {
        std::size_t length = 0;
        std::unordered_map<std::string, std::size_t> tf;
    };

    std::unordered_map<std::string, Doc> docs_;
    std::unordered_map<std::string, Term> terms_;
    std::size_t total_tokens_ = 0;
    double avg_doc_len_ = 0.0;
    double mean_positive_idf_ = 0.0;
};

/// Statistics over the topic's candidates in the given representation.
/// Throws MissingDocumentsError listing candidates absent from the store.
CollectionStats build_stats(const Topic& topic, const DocStore& store, Representation mode,
                            const TokenizerOptions& tokenizer = {});

/// Okapi BM25 with the Robertson idf; negative idf values are replaced by
/// epsilon times the mean positive idf. Terms absent from the collection add 0.
double bm25_score(const TokenStream& query, std::string_view pmid, const CollectionStats& stats,
                  const LexicalParams& params);

/// Query log-likelihood under Jelinek-Mercer smoothing, lambda weighting the
/// collection model. Terms absent from the collection add 0.
double qlm_score(const TokenStream& query, std::string_view pmid, const CollectionStats& stats,
                 const LexicalParams& params);

enum class Model { BM25, QLM };

Model parse_model(std::string_view name);
std::string_view to_string(Model model) noexcept;

/// Scores every candidate against the topic title and returns entries sorted
/// by score descending, pmid ascending, ranked 1..n.
std::vector<RunEntry> rank_topic(const Topic& topic, const DocStore& store, Representation mode, Model model,
                                 const LexicalParams& params, const TokenizerOptions& tokenizer = {});

/// Ranks all topics, up to `jobs` at a time. Output is independent of `jobs`.
RankedRun rank_topics(std::span<const Topic> topics, const DocStore& store, Representation mode, Model model,
                      const LexicalParams& params, std::string tag, unsigned jobs = 1,
                      const TokenizerOptions& tokenizer = {});

}  // namespace tarlab
