"""Corpus reading, rule-based sentence splitting and greedy sentence packing."""

from __future__ import annotations

import json
import logging
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, Sequence

from .core import Tokenizer

log = logging.getLogger(__name__)

# Lower-cased, without the trailing period.
ABBREVIATIONS = frozenset({
    "bv", "dr", "drs", "ir", "ing", "mr", "mevr", "dhr", "prof", "st", "nr", "blz", "enz",
    "etc", "o.a", "i.p.v", "m.a.w", "d.w.z", "e.g", "i.e", "vs", "mrs", "ms", "jr", "sr",
    "ca", "resp", "incl", "excl", "jan", "feb", "aug", "sept", "okt", "nov", "dec",
})

OPEN_QUOTES = "\"'“‘„«(["

_BOUNDARY_RE = re.compile(r"[.!?…]+[\"'”’»)\]]*(?=(\s+)([^\s]))")


class CorpusError(ValueError):
    pass


def read_corpus(path: str | Path, fmt: str = "jsonl") -> Iterator[tuple[str, str]]:
    """Yield ``(doc_id, text)``. JSONL records need a ``text`` field; ``id`` is optional."""
    if fmt not in ("jsonl", "text"):
        raise ValueError(f"unknown corpus format {fmt!r}")
    with open(path, encoding="utf-8") as fh:
        for index, line in enumerate(fh):
            line = line.rstrip("\n")
            if fmt == "text":
                yield str(index), line
                continue
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusError(f"{path}: document {index} (line {index + 1}) is not valid JSON: {exc.msg}") from None
            if not isinstance(record, dict) or not isinstance(record.get("text"), str):
                raise CorpusError(f"{path}: document {index} (line {index + 1}) lacks a string 'text' field")
            yield str(record.get("id", index)), record["text"]


@dataclass
class SentenceSplit:
    """Sentences plus the whitespace around them.

    ``gaps`` has one more element than ``sentences``: leading whitespace,
    the separators between sentences, and trailing whitespace.
    """

    sentences: list[str]
    gaps: list[str] = field(default_factory=lambda: [""])

    def __len__(self) -> int:
        return len(self.sentences)

    def __iter__(self):
        return iter(self.sentences)

    def __getitem__(self, i):
        return self.sentences[i]

    def text(self) -> str:
        out = [self.gaps[0]]
        for sentence, gap in zip(self.sentences, self.gaps[1:]):
            out.append(sentence)
            out.append(gap)
        return "".join(out)


def _is_abbreviation(text: str, end: int) -> bool:
    start = end
    while start > 0 and not text[start - 1].isspace():
        start -= 1
    word = text[start:end].lstrip(OPEN_QUOTES).lower()
    return word in ABBREVIATIONS or (len(word) == 1 and word.isalpha())


def split_sentences(text: str) -> SentenceSplit:
    """Split after . ! ? … when whitespace and an uppercase letter or opening quote follow."""
    stripped = text.strip()
    if not stripped:
        return SentenceSplit([], [text])
    lead = text[: len(text) - len(text.lstrip())]
    trail = text[len(text.rstrip()):]
    body_start = len(lead)
    body = text[body_start: len(text) - len(trail)]

    sentences: list[str] = []
    gaps = [lead]
    start = 0
    for m in _BOUNDARY_RE.finditer(body):
        nxt = m.group(2)
        if not (nxt.isupper() or nxt in OPEN_QUOTES):
            continue
        if body[m.start()] == "." and m.end() - m.start() == 1 and _is_abbreviation(body, m.start()):
            continue
        sentences.append(body[start:m.end()])
        gaps.append(m.group(1))
        start = m.end() + len(m.group(1))
    sentences.append(body[start:])
    gaps.append(trail)
    return SentenceSplit(sentences, gaps)


@dataclass
class PackedChunk:
    token_ids: list[int]
    sentence_spans: list[tuple[int, int]]
    source_doc: str = ""
    truncated_from: int | None = None

    def to_json(self) -> str:
        return json.dumps(
            {"doc_id": self.source_doc, "ids": self.token_ids, "spans": [list(s) for s in self.sentence_spans]}
        )


def pack_sequences(
    encoded: Sequence[Sequence[int]],
    max_tokens: int = 512,
    doc_id: str = "",
) -> list[PackedChunk]:
    """Greedy first-fit of whole encoded sentences into chunks of at most ``max_tokens``."""
    if max_tokens < 1:
        raise ValueError(f"max_tokens must be >= 1, got {max_tokens}")
    chunks: list[PackedChunk] = []
    ids: list[int] = []
    spans: list[tuple[int, int]] = []

    def close() -> None:
        nonlocal ids, spans
        if ids or spans:
            chunks.append(PackedChunk(ids, spans, doc_id))
        ids, spans = [], []

    for index, sentence in enumerate(encoded):
        n = len(sentence)
        if n > max_tokens:
            close()
            log.warning(
                "oversize sentence truncated doc=%s sentence=%d tokens=%d budget=%d",
                doc_id, index, n, max_tokens,
            )
            chunks.append(PackedChunk(list(sentence[:max_tokens]), [(0, max_tokens)], doc_id, truncated_from=n))
            continue
        if len(ids) + n > max_tokens:
            close()
        spans.append((len(ids), len(ids) + n))
        ids.extend(sentence)
    close()
    return chunks


def pack_document(
    sentences: Iterable[str],
    tokenizer: Tokenizer,
    max_tokens: int = 512,
    doc_id: str = "",
) -> list[PackedChunk]:
    """Encode each sentence with one leading space, then pack greedily.

    The leading space normalizes inter-sentence whitespace to a single space
    and makes each sentence's encoding independent of its chunk position.
    """
    encoded = [tokenizer.encode(" " + s) for s in sentences]
    return pack_sequences(encoded, max_tokens, doc_id)
