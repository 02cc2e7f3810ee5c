#include <doctest.h>

#include <random>
#include <sstream>

#include "tarlab/corpus.hpp"
#include "tarlab/error.hpp"

using namespace tarlab;

namespace {

std::vector<Topic> topics_from(const std::string& text)
{
    std::istringstream in(text);
    return parse_topics(in);
}

Qrels qrels_from(const std::string& text)
{
    std::istringstream in(text);
    return parse_qrels(in);
}

CorpusLoad corpus_from(const std::string& text)
{
    std::istringstream in(text);
    return load_corpus(in);
}

const char* kTwoTopics = R"(Topic: CD008643

Title: Red flags to screen for vertebral fracture in patients presenting with low-back pain

Query:
1. exp Spinal Fractures/
2. (vertebra* adj3 fracture*).ti,ab.
3. or/1-2

Pids:
    23553380
    23472856
    23350658

Topic: CD009579
Title: Rapid tests for malaria
Query: "malaria"[MeSH]
Pids: 111 222
    333
)";

}  // namespace

TEST_CASE("topic blocks parse into topics")
{
    const auto topics = topics_from(kTwoTopics);
    REQUIRE(topics.size() == 2);
    CHECK(topics[0].id == "CD008643");
    CHECK(topics[0].title == "Red flags to screen for vertebral fracture in patients presenting with low-back pain");
    CHECK(topics[0].pmids.size() == 3);
    CHECK(topics[0].pmids == std::vector<std::string>{"23553380", "23472856", "23350658"});
    CHECK(topics[0].boolean_query == "1. exp Spinal Fractures/\n2. (vertebra* adj3 fracture*).ti,ab.\n3. or/1-2");

    CHECK(topics[1].boolean_query == "\"malaria\"[MeSH]");
    CHECK(topics[1].pmids == std::vector<std::string>{"111", "222", "333"});
}

TEST_CASE("topic parsing errors")
{
    SUBCASE("empty Pids section")
    {
        try {
            topics_from("Topic: T1\nTitle: x\nQuery:\nq\nPids:\n\n");
            FAIL("expected an error");
        } catch (const IngestError& e) {
            CHECK(std::string(e.what()).find("topic has no candidates") != std::string::npos);
        }
    }
    SUBCASE("duplicate topic id")
    {
        CHECK_THROWS_AS(topics_from("Topic: T1\nTitle: x\nQuery:\nq\nPids:\n 1\nTopic: T1\nTitle: y\nQuery:\nq\nPids:\n 2\n"),
                        IngestError);
    }
    SUBCASE("missing header names the topic line")
    {
        try {
            topics_from("\n\nTopic: T9\nQuery:\nq\nPids:\n 1\n");
            FAIL("expected an error");
        } catch (const ParseError& e) {
            CHECK(e.line() == 3);
            CHECK(std::string(e.what()).find("Title") != std::string::npos);
        }
    }
    SUBCASE("content before the first block")
    {
        try {
            topics_from("Title: orphan\n");
            FAIL("expected an error");
        } catch (const ParseError& e) {
            CHECK(e.line() == 1);
        }
    }
    SUBCASE("duplicate pmid inside a topic")
    {
        CHECK_THROWS_AS(topics_from("Topic: T1\nTitle: x\nQuery:\nq\nPids:\n 1\n 1\n"), IngestError);
    }
}

TEST_CASE("unknown headers are kept as metadata")
{
    const auto topics = topics_from("Topic: T1\nTitle: x\nType: DTA\nQuery:\nline one\nNote: inside query\nPids:\n 5\nYear: 2019\n");
    REQUIRE(topics.size() == 1);
    const auto& t = topics[0];
    CHECK(t.boolean_query == "line one\nNote: inside query");
    REQUIRE(t.metadata.size() == 2);
    CHECK(t.metadata[0] == std::pair<std::string, std::string>{"Type", "DTA"});
    CHECK(t.metadata[1] == std::pair<std::string, std::string>{"Year", "2019"});
}

TEST_CASE("topics round-trip through write_topics")
{
    const auto topics = topics_from(kTwoTopics);
    std::ostringstream out;
    write_topics(out, topics);
    CHECK(topics_from(out.str()) == topics);

    // Randomized: metadata, multi-line queries, numeric pmids.
    std::mt19937 rng(7);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<Topic> generated;
        const int n = 1 + static_cast<int>(rng() % 4);
        for (int i = 0; i < n; ++i) {
            Topic t;
            t.id = "CD" + std::to_string(1000 + i);
            t.title = "title " + std::to_string(rng() % 1000) + " words";
            const int lines = 1 + static_cast<int>(rng() % 5);
            for (int l = 0; l < lines; ++l) {
                t.boolean_query += (l ? "\n" : "") + std::to_string(l + 1) + ". term" + std::to_string(rng() % 50) + "/";
            }
            if (rng() % 2) {
                t.metadata.emplace_back("Type", "Intervention");
            }
            const int k = 1 + static_cast<int>(rng() % 20);
            for (int p = 0; p < k; ++p) {
                t.pmids.push_back(std::to_string(100000 + i * 1000 + p));
            }
            generated.push_back(std::move(t));
        }
        std::ostringstream os;
        write_topics(os, generated);
        CHECK(topics_from(os.str()) == generated);
    }
}

TEST_CASE("qrels parsing")
{
    const auto q = qrels_from("CD1 0 111 1\nCD1 0 222 0\n\nCD2 0 111 2\n");
    CHECK(q.size() == 3);
    CHECK(q.grade("CD1", "111") == 1);
    CHECK(q.grade("CD1", "222") == 0);
    CHECK_FALSE(q.is_relevant("CD1", "222"));
    CHECK(q.is_relevant("CD2", "111"));
    CHECK_FALSE(q.grade("CD1", "999").has_value());

    CHECK_THROWS_AS(qrels_from("CD1 0 111 1\nCD1 0 111 0\n"), ParseError);
    CHECK_THROWS_AS(qrels_from("CD1 0 111 yes\n"), ParseError);
    CHECK_THROWS_AS(qrels_from("CD1 0 111 1.5\n"), ParseError);
    CHECK_THROWS_AS(qrels_from("CD1 0 111\n"), ParseError);
    try {
        qrels_from("CD1 0 1 1\nCD1 0 2 x\n");
    } catch (const ParseError& e) {
        CHECK(e.line() == 2);
    }
}

TEST_CASE("qrels round-trip")
{
    std::mt19937 rng(11);
    for (int trial = 0; trial < 30; ++trial) {
        Qrels q;
        const int topics = 1 + static_cast<int>(rng() % 3);
        for (int t = 0; t < topics; ++t) {
            const int docs = 1 + static_cast<int>(rng() % 30);
            for (int d = 0; d < docs; ++d) {
                q.add("T" + std::to_string(t), std::to_string(rng() % 100000 + d * 100000), static_cast<int>(rng() % 3));
            }
        }
        std::ostringstream os;
        write_qrels(os, q);
        CHECK(qrels_from(os.str()) == q);
    }
}

TEST_CASE("corpus loading")
{
    SUBCASE("two records")
    {
        const auto c = corpus_from(R"({"pmid": "1", "title": "A", "abstract": "B"}
{"pmid": 2, "title": "C"}
)");
        CHECK(c.store.size() == 2);
        REQUIRE(c.store.find("2") != nullptr);
        CHECK(c.store.find("2")->abstract.empty());
        CHECK(c.warnings.empty());
    }
    SUBCASE("missing title is rejected")
    {
        const auto c = corpus_from("{\"pmid\": \"1\", \"abstract\": \"B\"}\n{\"pmid\": \"2\", \"title\": \"  \"}\n");
        CHECK(c.store.size() == 0);
        CHECK(c.rejected_lines == std::vector<std::size_t>{1, 2});
    }
    SUBCASE("duplicate pmid keeps the last record")
    {
        const auto c = corpus_from("{\"pmid\": \"1\", \"title\": \"old\"}\n{\"pmid\": \"1\", \"title\": \"new\"}\n");
        CHECK(c.store.size() == 1);
        CHECK(c.store.find("1")->title == "new");
        CHECK(c.warnings.size() == 1);
    }
    SUBCASE("malformed record reports its line")
    {
        try {
            corpus_from("{\"pmid\": \"1\", \"title\": \"ok\"}\n\n{not json\n");
            FAIL("expected an error");
        } catch (const ParseError& e) {
            CHECK(e.line() == 3);
        }
        CHECK_THROWS_AS(corpus_from("{\"title\": \"no id\"}\n"), ParseError);
        CHECK_THROWS_AS(corpus_from("{\"pmid\": \"1\", \"title\": 5}\n"), ParseError);
    }
    SUBCASE("write_corpus round-trip")
    {
        const auto c = corpus_from(R"({"pmid": "9", "title": "T \"quoted\"", "abstract": "line\nbreak ⟂ ü"})" "\n");
        std::ostringstream os;
        write_corpus(os, c.store);
        const auto again = corpus_from(os.str());
        CHECK(*again.store.find("9") == *c.store.find("9"));
    }
}

TEST_CASE("document representations")
{
    const DocRecord doc{"1", "A", "B"};
    CHECK(represent(doc, Representation::TiAb).text == "A ⟂ B");
    CHECK(represent(doc, Representation::Title).text == "A");
    CHECK(represent(DocRecord{"1", "A", ""}, Representation::TiAb).text == "A ⟂ ");
    CHECK(parse_representation("TiAb") == Representation::TiAb);
    CHECK_THROWS_AS(parse_representation("abstract"), std::invalid_argument);
}

TEST_CASE("consistency report")
{
    const auto topics = topics_from("Topic: T1\nTitle: x\nQuery:\nq\nPids:\n 1\n 2\n 3\nTopic: T2\nTitle: y\nQuery:\nq\nPids:\n 4\n");
    const auto qrels = qrels_from("T1 0 1 1\nT1 0 9 1\nT1 0 2 0\nT3 0 5 1\nT2 0 4 0\n");
    const auto corpus = corpus_from("{\"pmid\": \"1\", \"title\": \"a\", \"abstract\": \"x\"}\n{\"pmid\": \"2\", \"title\": \"b\"}\n");
    const auto report = check_consistency(topics, qrels, corpus.store);

    REQUIRE(report.topics.size() == 2);
    CHECK(report.topics[0].relevant == 1);  // pmid 9 is relevant but not a candidate
    CHECK(report.topics[0].judged_outside_candidates == std::vector<std::string>{"9"});
    CHECK(report.topics[0].missing_documents == std::vector<std::string>{"3"});
    CHECK(report.topics[0].empty_abstracts == std::vector<std::string>{"2"});
    CHECK(report.topics[1].missing_documents == std::vector<std::string>{"4"});
    CHECK(report.missing_document_count() == 2);
    CHECK(report.qrels_without_topic == std::vector<std::string>{"T3"});
    CHECK(report.topics_without_relevant == std::vector<std::string>{"T2"});
    CHECK(relevant_candidates(topics[0], qrels).size() == 1);
}

TEST_CASE("pmid ordering is numeric for numeric ids")
{
    CHECK(pmid_less("99", "100"));
    CHECK_FALSE(pmid_less("100", "99"));
    CHECK(pmid_less("007", "7") != pmid_less("7", "007"));
    CHECK(pmid_less("5", "abc"));
    CHECK(pmid_less("abc", "abd"));
}
