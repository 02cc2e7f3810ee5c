// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <boost/math/distributions/students_t.hpp>

#include "oracles.hpp"
#include "tarlab/analysis.hpp"
#include "tarlab/cli.hpp"
#include "tarlab/lexical.hpp"
#include "tarlab/metrics.hpp"
#include "tarlab/runio.hpp"

namespace fs = std::filesystem;
using namespace tarlab;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
    enum Status { Pass, Fail, Skip } status;
    std::string detail;
};

Outcome pass(std::string d) { return {Outcome::Pass, std::move(d)}; }
Outcome fail(std::string d) { return {Outcome::Fail, std::move(d)}; }
Outcome skip(std::string d) { return {Outcome::Skip, std::move(d)}; }

double seconds_since(Clock::time_point t0)
{
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

JudgedRanking judged(const std::vector<bool>& rel)
{
    std::vector<std::size_t> ranks;
    for (std::size_t i = 0; i < rel.size(); ++i) {
        if (rel[i]) {
            ranks.push_back(i + 1);
        }
    }
    return JudgedRanking(rel.size(), ranks);
}

std::vector<std::vector<bool>> oracle_instances()
{
    std::mt19937_64 rng(20240501);
    std::vector<std::vector<bool>> out;
    for (int i = 0; i < 1000; ++i) {
        out.push_back(oracle::random_instance(rng, 50));
    }
    return out;
}

Outcome metric_oracle()
{
    const auto t0 = Clock::now();
    const auto instances = oracle_instances();
    std::size_t mismatches = 0;
    double worst = 0.0;
    for (const auto& rel : instances) {
        const auto want = oracle::screen(rel);
        const auto got = evaluate_topic("T", judged(rel));
        const double diffs[] = {got.ap - want.ap,          got.recall[0] - want.recall[0], got.recall[1] - want.recall[1],
                                got.recall[2] - want.recall[2], got.recall[3] - want.recall[3], got.wss95 - want.wss95,
                                got.wss100 - want.wss100};
        bool ok = got.last_rel == want.last_rel && got.n == want.n && got.r == want.r;
        for (double d : diffs) {
            worst = std::max(worst, std::abs(d));
            ok = ok && std::abs(d) <= 1e-12;
        }
        mismatches += ok ? 0 : 1;
    }
    const double secs = seconds_since(t0);
    const auto detail = std::to_string(instances.size()) + " instances, " + std::to_string(mismatches)
                        + " mismatches, max |diff| " + fmt("%.3g", worst) + ", " + fmt("%.3f", secs) + " s";
    return mismatches == 0 && secs < 10.0 ? pass(detail) : fail(detail);
}

Outcome wss_identity()
{
    std::size_t violations = 0;
    const auto instances = oracle_instances();
    for (const auto& rel : instances) {
        const auto ev = evaluate_topic("T", judged(rel));
        const double n = static_cast<double>(ev.n);
        if (ev.wss100 != (n - static_cast<double>(ev.last_rel)) / n) {
            ++violations;
        }
    }
    const auto detail = std::to_string(violations) + " violations over " + std::to_string(instances.size()) + " instances";
    return violations == 0 ? pass(detail) : fail(detail);
}

TokenStream words(std::initializer_list<const char*> ws)
{
    TokenStream t;
    for (const auto* w : ws) {
        t.tokens.emplace_back(w);
    }
    return t;
}

Outcome lexical_hand_oracles()
{
    DocStore store;
    store.insert({"1", "heart attack treatment", ""});
    store.insert({"2", "heart disease", ""});
    store.insert({"3", "cancer screening", ""});
    const Topic topic{"T", "heart", "", {"1", "2", "3"}, {}};
    const auto ranked = rank_topic(topic, store, Representation::Title, Model::BM25, LexicalParams{});
    const bool order = ranked.size() == 3 && ranked[0].pmid == "2" && ranked[1].pmid == "1" && ranked[2].pmid == "3"
                       && ranked[0].score > ranked[1].score && ranked[1].score > ranked[2].score
                       && ranked[2].score == 0.0;

    const std::vector<std::pair<std::string, TokenStream>> docs{{"d1", words({"a", "b"})}, {"d2", words({"c", "d"})}};
    const auto stats = CollectionStats::from_documents(docs);
    const double qlm = qlm_score(words({"a"}), "d1", stats, LexicalParams{.lambda = 0.5});
    const double qlm_err = std::abs(qlm - std::log(0.375));

    std::string detail = "bm25 order " + (ranked.size() == 3 ? ranked[0].pmid + ">" + ranked[1].pmid + ">" + ranked[2].pmid : "?")
                         + " scores " + (ranked.size() == 3 ? fmt("%.6f", ranked[0].score) + "," + fmt("%.6f", ranked[1].score) + "," + fmt("%.6f", ranked[2].score) : "?")
                         + "; qlm " + fmt("%.12f", qlm) + " (|err| " + fmt("%.2g", qlm_err) + ")";
    return order && qlm_err <= 1e-9 ? pass(detail) : fail(detail);
}

double reference_p(double t, double df)
{
    const boost::math::students_t dist(df);
    return 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t)));
}

Outcome ttest_reference()
{
    const std::vector<double> a{1, 2, 3, 4, 5};
    const std::vector<double> b(5, 0.0);
    const auto r = paired_ttest(a, b);
    const double t_err = std::abs(r.t_statistic - 4.2426);
    const double p_err = std::abs(r.p_value - reference_p(oracle::paired_t(a, b), 4));
    bool ok = t_err <= 1e-4 && p_err <= 1e-4;

    std::mt19937 rng(1234);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::normal_distribution<double> noise(0.0, 0.15);
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
        const auto n = 2 + rng() % 49;
        const double shift = u(rng) * 0.2 - 0.1;
        std::vector<double> x(n);
        std::vector<double> y(n);
        for (std::size_t k = 0; k < n; ++k) {
            x[k] = u(rng);
            y[k] = x[k] + shift + noise(rng);
        }
        const auto res = paired_ttest(x, y);
        const double want = reference_p(oracle::paired_t(x, y), static_cast<double>(n - 1));
        worst = std::max(worst, std::abs(res.p_value - want));
    }
    ok = ok && worst <= 1e-6;
    return (ok ? pass : fail)("t " + fmt("%.6f", r.t_statistic) + ", p " + fmt("%.8f", r.p_value) + " (|err| "
                              + fmt("%.2g", p_err) + "); 100 random samples max |p err| " + fmt("%.2g", worst));
}

RankedRun random_run(std::mt19937& rng)
{
    RankedRun run;
    run.tag = "run" + std::to_string(rng() % 1000);
    std::uniform_real_distribution<double> score(-50.0, 50.0);
    const int topics = 1 + static_cast<int>(rng() % 6);
    for (int t = 0; t < topics; ++t) {
        std::vector<RunEntry> entries;
        const int n = 1 + static_cast<int>(rng() % 80);
        for (int i = 0; i < n; ++i) {
            double s = std::stod(format_score(score(rng)));
            if (i > 0 && rng() % 5 == 0) {
                s = entries.back().score;
            }
            entries.push_back({std::to_string(1000000 + rng() % 9000000) + std::to_string(i), 0, s});
        }
        sort_entries(entries);
        run.topics.emplace("CD" + std::to_string(10000 + t), std::move(entries));
    }
    return run;
}

Outcome run_io()
{
    std::mt19937 rng(777);
    int roundtrip_failures = 0;
    for (int i = 0; i < 100; ++i) {
        const auto run = random_run(rng);
        std::ostringstream os;
        write_run(os, run);
        std::istringstream is(os.str());
        if (!(read_run(is) == run)) {
            ++roundtrip_failures;
        }
    }

    // Gap injection: drop candidates and add foreign documents, then compare
    // the validator's findings with exactly what was injected.
    int missed = 0;
    int false_positives = 0;
    int injected_total = 0;
    for (int i = 0; i < 100; ++i) {
        const auto run = random_run(rng);
        std::vector<Topic> topics;
        Qrels qrels;
        for (const auto& [id, entries] : run.topics) {
            Topic t{id, "title", "q", {}, {}};
            for (const auto& e : entries) {
                t.pmids.push_back(e.pmid);
                if (rng() % 4 == 0) {
                    qrels.add(id, e.pmid, 1);
                }
            }
            topics.push_back(std::move(t));
        }
        auto broken = run;
        std::map<std::string, std::set<std::string>> dropped;
        std::map<std::string, std::set<std::string>> foreign;
        const bool clean = i % 5 == 0;  // some runs stay intact
        for (auto& [id, entries] : broken.topics) {
            if (clean) {
                break;
            }
            const auto drops = rng() % 3;
            for (std::size_t d = 0; d < drops && entries.size() > 1; ++d) {
                const auto pos = rng() % entries.size();
                dropped[id].insert(entries[pos].pmid);
                entries.erase(entries.begin() + static_cast<std::ptrdiff_t>(pos));
            }
            const auto adds = rng() % 3;
            for (std::size_t k = 0; k < adds; ++k) {
                const auto pmid = "F" + std::to_string(i) + "-" + id + "-" + std::to_string(k);
                foreign[id].insert(pmid);
                entries.push_back({pmid, 0, -1000.0});
            }
        }
        for (const auto& [id, s] : dropped) {
            injected_total += static_cast<int>(s.size());
        }
        for (const auto& [id, s] : foreign) {
            injected_total += static_cast<int>(s.size());
        }

        const auto report = validate_against(broken, topics, qrels);
        std::map<std::string, std::set<std::string>> seen_dropped;
        std::map<std::string, std::set<std::string>> seen_foreign;
        for (const auto& gaps : report.topics) {
            for (const auto& m : gaps.missing_candidates) {
                seen_dropped[gaps.topic_id].insert(m);
                if (!dropped[gaps.topic_id].count(m)) {
                    ++false_positives;
                }
            }
            for (const auto& f : gaps.foreign_documents) {
                seen_foreign[gaps.topic_id].insert(f);
                if (!foreign[gaps.topic_id].count(f)) {
                    ++false_positives;
                }
            }
            for (const auto& u : gaps.unranked_relevant) {
                if (!dropped[gaps.topic_id].count(u) || !qrels.is_relevant(gaps.topic_id, u)) {
                    ++false_positives;
                }
            }
        }
        false_positives += static_cast<int>(report.unknown_topics.size() + report.unranked_topics.size());
        for (const auto& [id, s] : dropped) {
            for (const auto& m : s) {
                missed += seen_dropped[id].count(m) ? 0 : 1;
            }
        }
        for (const auto& [id, s] : foreign) {
            for (const auto& f : s) {
                missed += seen_foreign[id].count(f) ? 0 : 1;
            }
        }
        if (clean && !report.complete()) {
            ++false_positives;
        }
    }
    const auto detail = std::to_string(roundtrip_failures) + "/100 round-trip failures; " + std::to_string(injected_total)
                        + " injected gaps, " + std::to_string(missed) + " missed, " + std::to_string(false_positives)
                        + " false positives";
    return roundtrip_failures == 0 && missed == 0 && false_positives == 0 ? pass(detail) : fail(detail);
}

std::map<std::string, std::string> snapshot(const fs::path& dir)
{
    std::map<std::string, std::string> files;
    for (const auto& entry : fs::recursive_directory_iterator(dir)) {
        if (entry.is_regular_file()) {
            files[fs::relative(entry.path(), dir).generic_string()] = oracle::slurp(entry.path());
        }
    }
    return files;
}

int run_cli(const std::vector<std::string>& args, std::string& err_text)
{
    std::vector<const char*> argv{"tarlab"};
    for (const auto& a : args) {
        argv.push_back(a.c_str());
    }
    std::ostringstream out;
    std::ostringstream err;
    const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
    err_text = err.str();
    return code;
}

Outcome pipeline_determinism()
{
    const fs::path data = fs::path(TARLAB_DATA_DIR) / "synthetic";
    if (!fs::exists(data / "topics.txt")) {
        return fail("synthetic dataset not found under " + data.string());
    }
    oracle::TempDir tmp("tarlab-acceptance");
    const auto out_dir = tmp / "out";
    const std::vector<std::string> args{"pipeline",  "--topics",  (data / "topics.txt").string(),
                                        "--qrels",   (data / "qrels.txt").string(), "--corpus",
                                        (data / "corpus.jsonl").string(), "--out-dir", out_dir.string(),
                                        "--models",  "bm25", "qlm", "--reprs", "title", "tiab"};
    std::string err;
    const auto t0 = Clock::now();
    if (const int code = run_cli(args, err); code != 0) {
        return fail("first run exited " + std::to_string(code) + ": " + err);
    }
    const auto first = snapshot(out_dir);
    if (run_cli(args, err) != 0) {
        return fail("second run failed: " + err);
    }
    const double secs = seconds_since(t0);
    const auto second = snapshot(out_dir);

    int runs = 0;
    for (const auto& [name, content] : first) {
        runs += name.rfind("runs/", 0) == 0 ? 1 : 0;
    }
    const bool expected = runs == 4 && first.count("compare.csv") && first.count("gainloss.csv")
                          && first.count("ingest_report.json");
    std::string differing;
    for (const auto& [name, content] : first) {
        auto it = second.find(name);
        if (it == second.end() || it->second != content) {
            differing += " " + name;
        }
    }
    if (second.size() != first.size()) {
        differing += " (file count changed)";
    }
    const auto detail = std::to_string(first.size()) + " files, " + std::to_string(runs) + " runs, two runs in "
                        + fmt("%.2f", secs) + " s" + (differing.empty() ? ", byte-identical" : "; differs:" + differing);
    return expected && differing.empty() && secs < 30.0 ? pass(detail) : fail(detail);
}

Outcome clef2017_reproduction()
{
    const char* dir = std::getenv("TARLAB_CLEF2017_DIR");
    if (!dir || !*dir) {
        return skip("set TARLAB_CLEF2017_DIR to a directory with topics.txt, qrels.txt and corpus.jsonl");
    }
    const fs::path data(dir);
    oracle::TempDir tmp("tarlab-clef2017");
    std::string err;
    const int code = run_cli({"pipeline", "--topics", (data / "topics.txt").string(), "--qrels",
                              (data / "qrels.txt").string(), "--corpus", (data / "corpus.jsonl").string(), "--out-dir",
                              tmp.path().string(), "--models", "bm25", "qlm", "--reprs", "tiab", "--jobs", "4"},
                             err);
    if (code != 0) {
        return fail("pipeline exited " + std::to_string(code) + ": " + err);
    }
    auto mean_ap = [&](const std::string& tag) {
        std::istringstream lines(oracle::slurp(tmp / ("reports/" + tag + ".jsonl")));
        std::string line;
        double v = std::nan("");
        while (std::getline(lines, line)) {
            const auto pos = line.find("\"type\":\"mean\"");
            if (pos != std::string::npos) {
                const auto ap = line.find("\"ap\":");
                v = std::strtod(line.c_str() + ap + 5, nullptr);
            }
        }
        return v;
    };
    const double bm25 = mean_ap("bm25-tiab");
    const double qlm = mean_ap("qlm-tiab");
    const bool ok = std::abs(bm25 - 0.1497) <= 0.05 && std::abs(qlm - 0.1721) <= 0.05;
    return (ok ? pass : fail)("BM25 TiAb mean AP " + fmt("%.4f", bm25) + " (target 0.1497 +/- 0.05), QLM TiAb "
                              + fmt("%.4f", qlm) + " (target 0.1721 +/- 0.05)");
}

}  // namespace

int main()
{
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"metric oracle suite", metric_oracle},
        {"wss identity", wss_identity},
        {"lexical hand oracles", lexical_hand_oracles},
        {"t-test reference", ttest_reference},
        {"run i/o round-trip and validator", run_io},
        {"end-to-end determinism", pipeline_determinism},
        {"clef 2017 reproduction (optional)", clef2017_reproduction},
    };
    int failures = 0;
    for (const auto& [name, check] : criteria) {
        Outcome o;
        try {
            o = check();
        } catch (const std::exception& e) {
            o = fail(std::string("exception: ") + e.what());
        }
        const char* tag = o.status == Outcome::Pass ? "PASS" : o.status == Outcome::Fail ? "FAIL" : "SKIP";
        std::cout << tag << "  " << name << ": " << o.detail << '\n';
        failures += o.status == Outcome::Fail ? 1 : 0;
    }
    return failures == 0 ? 0 : 1;
}
