"""Sentence splitting and token counting shared across modules."""

from __future__ import annotations

import re

# A sentence ends at . ? or ! followed by whitespace or end of string.
_SENTENCE_END = re.compile(r"[.?!](?=\s|$)")


def split_sentences(text: str) -> list[str]:
    """Split on ASCII sentence punctuation; a trailing fragment counts as a sentence."""
    sentences: list[str] = []
    start = 0
    for m in _SENTENCE_END.finditer(text):
        sentences.append(text[start:m.end()].strip())
        start = m.end()
    tail = text[start:].strip()
    if tail:
        sentences.append(tail)
    return [s for s in sentences if s]


def whitespace_tokens(text: str) -> int:
    """Deterministic token estimate: whitespace-delimited word count."""
    return len(text.split())
