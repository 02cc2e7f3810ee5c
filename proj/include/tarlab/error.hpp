#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace tarlab {

/// Malformed input at a known line (1-based; 0 when the line is unknown).
class ParseError : public std::runtime_error {
public:
    ParseError(std::size_t line, const std::string& what)
        : std::runtime_error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line), message_(what)
    {}

    std::size_t line() const noexcept { return line_; }
    /// The description without the line prefix.
    const std::string& message() const noexcept { return message_; }

private:
    std::size_t line_;
    std::string message_;
};

/// Well-formed input that violates a dataset invariant (duplicate ids, empty candidate sets, ...).
class IngestError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raised when documents cannot be resolved or fetched; carries the offending pmids.
class MissingDocumentsError : public std::runtime_error {
public:
    MissingDocumentsError(const std::string& what, std::vector<std::string> pmids)
        : std::runtime_error(what), pmids_(std::move(pmids))
    {}

    const std::vector<std::string>& pmids() const noexcept { return pmids_; }

private:
    std::vector<std::string> pmids_;
};

/// A run failed strict validation or cannot be evaluated.
class EvaluationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace tarlab
