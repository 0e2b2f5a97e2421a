"""Defect-braiding calculus: event words, their Clifford semantics and rewrite rules."""

from .channel import CliffordChannel, channel_of, cnot_channel, equivalent, identity_channel, swap_channel
from .events import Braid, Color, EventWord, MalformedWordError, Meas, MeasX, MeasZ, Prep, PrepX, PrepZ, StabLoop, parse_word, parse_words, word
from .rewrite import RULES, RewriteResult, SearchResult, equivalence_search, rewrite, same_diagram

__all__ = [
    "Braid", "CliffordChannel", "Color", "EventWord", "MalformedWordError", "Meas", "MeasX", "MeasZ",
    "Prep", "PrepX", "PrepZ", "RULES", "RewriteResult", "SearchResult", "StabLoop", "channel_of",
    "cnot_channel", "equivalence_search", "equivalent", "identity_channel", "parse_word", "parse_words",
    "rewrite", "same_diagram", "swap_channel", "word",
]
