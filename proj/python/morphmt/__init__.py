"""Hybrid morpheme-word phrase-based translation toolkit."""

from ._morphmt import (
    Error,
    NGramModel,
    ParseError,
    bleu,
    extract_phrases,
    extract_phrases_boundary_aware,
    lcsr,
    m_bleu,
    parse_segmented_line,
    run_pipeline,
    sign_test,
    systems,
    table_normalization_error,
    to_words,
)

__all__ = [
    "Error",
    "NGramModel",
    "ParseError",
    "bleu",
    "extract_phrases",
    "extract_phrases_boundary_aware",
    "lcsr",
    "m_bleu",
    "parse_segmented_line",
    "run_pipeline",
    "sign_test",
    "systems",
    "table_normalization_error",
    "to_words",
]
