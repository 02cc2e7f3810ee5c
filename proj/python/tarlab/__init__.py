"""Screening prioritisation toolkit: corpus parsing, lexical ranking, evaluation and run comparison."""

from ._core import (
    SEPARATOR,
    DocRecord,
    DocStore,
    EvaluationError,
    IngestError,
    LexicalParams,
    Measure,
    MetricReport,
    MissingDocumentsError,
    Model,
    PairedComparison,
    ParseError,
    Qrels,
    RankedRun,
    Representation,
    RunEntry,
    Topic,
    TopicEval,
    TTestStatus,
    average_precision,
    convergence,
    evaluate,
    gain_loss,
    last_rel,
    load_corpus,
    main,
    paired_ttest,
    parse_qrels,
    parse_topics,
    rank_topic,
    rank_topics,
    read_run,
    recall_at_percent,
    regularized_incomplete_beta,
    represent,
    score_documents,
    student_t_two_tailed,
    tokenize,
    validate_run,
    write_qrels,
    write_run,
    write_topics,
    wss,
)

__all__ = [name for name in dir() if not name.startswith("_")]
