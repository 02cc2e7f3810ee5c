#!/usr/bin/env python3
"""Regenerates the bundled five-topic synthetic dataset in data/synthetic/.

Relevant documents reuse the review title's vocabulary; non-relevant ones mix
in general medical filler and occasional title words, so both lexical models
rank relevant documents early but not perfectly.
"""
import json
import pathlib
import random

TOPICS = [
    ("CD000001", "Galactomannan detection for invasive aspergillosis in immunocompromised patients",
     ["galactomannan", "aspergillosis", "invasive", "immunocompromised", "fungal", "antigen"]),
    ("CD000002", "Exercise therapy for chronic low back pain",
     ["exercise", "therapy", "chronic", "back", "pain", "lumbar"]),
    ("CD000003", "Rapid diagnostic tests for malaria in endemic regions",
     ["rapid", "diagnostic", "malaria", "endemic", "plasmodium", "parasite"]),
    ("CD000004", "Statins for primary prevention of cardiovascular disease",
     ["statins", "prevention", "cardiovascular", "disease", "cholesterol", "lipid"]),
    ("CD000005", "Mindfulness interventions for anxiety in adolescents",
     ["mindfulness", "interventions", "anxiety", "adolescents", "stress", "meditation"]),
]

FILLER = ("study trial patients outcome cohort randomised analysis clinical results hospital group "
          "treatment follow review data evidence risk effect sample method population adult children "
          "women men dose week month year baseline control placebo survey registry model").split()


def sentence(rng, words, n):
    return " ".join(rng.choice(words) for _ in range(n)).capitalize() + "."


def main():
    rng = random.Random(20230501)
    out = pathlib.Path(__file__).resolve().parent.parent / "data" / "synthetic"
    out.mkdir(parents=True, exist_ok=True)
    next_pmid = 10000001
    topics, qrels, corpus = [], [], []
    for index, (tid, title, vocab) in enumerate(TOPICS):
        n_docs = 30 + 5 * index
        n_rel = 4 + index
        pmids = []
        for d in range(n_docs):
            pmid = str(next_pmid)
            next_pmid += rng.randint(1, 7)
            relevant = d < n_rel
            if relevant:
                words = vocab * 2 + FILLER
                t = sentence(rng, words, rng.randint(5, 10))
                a = " ".join(sentence(rng, words, rng.randint(8, 16)) for _ in range(rng.randint(2, 4)))
            else:
                words = FILLER + ([rng.choice(vocab)] if rng.random() < 0.5 else [])
                t = sentence(rng, words, rng.randint(5, 10))
                a = " ".join(sentence(rng, words, rng.randint(8, 16)) for _ in range(rng.randint(1, 4)))
            if d == n_docs - 1:
                a = ""  # one record per topic without an abstract
            pmids.append(pmid)
            corpus.append({"pmid": pmid, "title": t, "abstract": a})
            qrels.append((tid, pmid, 1 if relevant else 0))
        rng.shuffle(pmids)
        topics.append((tid, title, pmids))

    with open(out / "topics.txt", "w") as f:
        for tid, title, pmids in topics:
            f.write(f"Topic: {tid}\n\nTitle: {title}\n\nQuery:\n1. exp {title.split()[0]}/\n2. limit 1 to humans\n\nPids:\n")
            for p in pmids:
                f.write(f"    {p}\n")
            f.write("\n")
    with open(out / "qrels.txt", "w") as f:
        for tid, pmid, grade in qrels:
            f.write(f"{tid} 0 {pmid} {grade}\n")
    with open(out / "corpus.jsonl", "w") as f:
        for rec in corpus:
            f.write(json.dumps(rec) + "\n")


if __name__ == "__main__":
    main()
