"""Institutional-grammar (ABDICO) extraction and governance analytics."""

from abdico.classifier import ComponentLabel, ComponentSpan, TokenClassifierModel, group_spans, predict, train
from abdico.corpus import Corpus, GoldAnnotation, InstitutionalStatement, PolicyDocument, load_corpus, load_gold
from abdico.stats import ChiSquareResult, ContingencyTable, chi_square, crosstab, histogram

__version__ = "0.1.0"

__all__ = [
    "ChiSquareResult",
    "ComponentLabel",
    "ComponentSpan",
    "ContingencyTable",
    "Corpus",
    "GoldAnnotation",
    "InstitutionalStatement",
    "PolicyDocument",
    "TokenClassifierModel",
    "chi_square",
    "crosstab",
    "group_spans",
    "histogram",
    "load_corpus",
    "load_gold",
    "predict",
    "train",
]
