import math
import os
import random
from pathlib import Path

import pytest

import tarlab

DATA = Path(os.environ.get("TARLAB_DATA_DIR", Path(__file__).resolve().parents[2] / "data")) / "synthetic"


def test_tokenize_and_represent():
    assert tarlab.tokenize("Heart-attack, 2019") == ["heart", "attack", "2019"]
    assert tarlab.tokenize("A ⟂ B") == ["a", "b"]
    assert tarlab.tokenize("the drug", stopwords=["the"]) == ["drug"]
    doc = tarlab.DocRecord("1", "A", "B")
    assert tarlab.represent(doc, "tiab") == "A " + tarlab.SEPARATOR + " B"
    assert tarlab.represent(doc, tarlab.Representation.TITLE) == "A"


def test_bm25_and_qlm_examples():
    docs = [("d1", "heart attack treatment"), ("d2", "heart disease"), ("d3", "cancer screening")]
    scores = dict(tarlab.score_documents(docs, "heart", "bm25"))
    assert scores["d2"] > scores["d1"] > scores["d3"] == 0.0
    assert scores["d1"] == pytest.approx(0.11315757488487137, rel=1e-12)

    qlm = dict(tarlab.score_documents([("d1", "a b"), ("d2", "c d")], "a", "qlm"))
    assert qlm["d1"] == pytest.approx(math.log(0.375), abs=1e-12)

    with pytest.raises(ValueError):
        tarlab.LexicalParams(lambda_=1.0)


def test_metrics():
    assert tarlab.last_rel(10, [2, 5]) == 5
    assert tarlab.average_precision(4, [2, 4]) == pytest.approx(0.5)
    assert tarlab.recall_at_percent(300, [3, 200], 1) == 0.5
    assert tarlab.wss(100, list(range(1, 11)), 95) == pytest.approx(0.85)
    assert tarlab.average_precision(5, []) is None


def test_ttest_matches_scipy():
    stats = pytest.importorskip("scipy.stats")
    res = tarlab.paired_ttest([1, 2, 3, 4, 5], [0, 0, 0, 0, 0])
    assert res.t_statistic == pytest.approx(4.242640687119285)
    assert res.df == 4
    assert res.p_value == pytest.approx(0.013235599563682695, abs=1e-9)

    rng = random.Random(3)
    for _ in range(100):
        n = rng.randint(2, 40)
        a = [rng.random() for _ in range(n)]
        b = [x + rng.gauss(0.02, 0.1) for x in a]
        ours = tarlab.paired_ttest(a, b, n_comparisons=3)
        ref = stats.ttest_rel(a, b)
        assert ours.t_statistic == pytest.approx(ref.statistic, rel=1e-9)
        assert abs(ours.p_value - ref.pvalue) <= 1e-6
        assert ours.corrected_p == pytest.approx(min(1.0, 3 * ours.p_value))

    same = tarlab.paired_ttest([0.1, 0.2], [0.1, 0.2])
    assert same.status == tarlab.TTestStatus.IDENTICAL_RUNS
    assert same.p_value == 1.0


def test_run_round_trip_and_validation():
    text = "CD1 NF 222 1 1.500000 t\nCD1 NF 111 2 2.500000 t\n"
    run = tarlab.read_run(text)
    assert [e.pmid for e in run.topics["CD1"]] == ["111", "222"]
    assert tarlab.read_run(tarlab.write_run(run)) == run
    with pytest.raises(tarlab.ParseError):
        tarlab.read_run("CD1 NF 111 1 2.5\n")

    topics = [tarlab.Topic("CD1", "x", ["111", "222", "333"])]
    qrels = tarlab.parse_qrels("CD1 0 333 1\n")
    report = tarlab.validate_run(run, topics, qrels)
    assert not report["complete"]
    assert report["topics"][0]["unranked_relevant"] == ["333"]


def test_pipeline_on_synthetic_data():
    topics = tarlab.parse_topics((DATA / "topics.txt").read_text())
    qrels = tarlab.parse_qrels((DATA / "qrels.txt").read_text())
    store, warnings, rejected = tarlab.load_corpus((DATA / "corpus.jsonl").read_text())
    assert len(topics) == 5
    assert not warnings and not rejected

    reports = {}
    for model in ("bm25", "qlm"):
        run = tarlab.rank_topics(topics, store, "tiab", model, tag=model, jobs=2)
        assert tarlab.validate_run(run, topics, qrels)["complete"]
        assert tarlab.write_run(run) == tarlab.write_run(tarlab.rank_topics(topics, store, "tiab", model, tag=model))
        reports[model] = tarlab.evaluate(run, topics, qrels, strict=True)
        assert 0.0 < reports[model].mean("ap") <= 1.0

    gl = tarlab.gain_loss(reports["bm25"], reports["qlm"], "ap")
    assert gl["wins"] + gl["losses"] + gl["ties"] == 5
    deltas = [e[3] for e in gl["entries"]]
    assert deltas == sorted(deltas, reverse=True)

    run = tarlab.rank_topics(topics, store, "title", "bm25")
    conv = tarlab.convergence([(100, run), (200, run)], topics, qrels)
    assert conv["saturation_step"] == 100
    assert conv["best_step"] == 100


def test_cli_entry_point(tmp_path):
    code, out, err = tarlab.main(["rank", "--model", "tfidf", "--topics", str(DATA / "topics.txt"),
                                  "--corpus", str(DATA / "corpus.jsonl"), "--out", str(tmp_path / "x.run")])
    assert code == 2
    code, out, err = tarlab.main(["rank", "--topics", str(DATA / "topics.txt"),
                                  "--corpus", str(DATA / "corpus.jsonl"), "--out", str(tmp_path / "x.run")])
    assert code == 0
    assert (tmp_path / "x.run").read_text().endswith(" bm25-tiab\n")
