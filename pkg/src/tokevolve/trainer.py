"""Train a byte-level BPE tokenizer by repeatedly merging the most frequent pair."""

from __future__ import annotations

import heapq
import logging
from collections import Counter, defaultdict
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping, Sequence

from .core import DEFAULT_SPECIALS, SpecialTokens, Tokenizer, build_byte_map, pre_tokenize

log = logging.getLogger(__name__)

Pair = tuple[str, str]


@dataclass(frozen=True)
class TrainConfig:
    target_vocab_size: int
    min_pair_frequency: int = 2
    specials: SpecialTokens = DEFAULT_SPECIALS

    def __post_init__(self) -> None:
        floor = 256 + len(SpecialTokens.ROLES)
        if self.target_vocab_size < floor:
            raise ValueError(f"target_vocab_size must be at least {floor}, got {self.target_vocab_size}")
        if self.min_pair_frequency < 1:
            raise ValueError(f"min_pair_frequency must be positive, got {self.min_pair_frequency}")


def _count_chunk(docs: Sequence[tuple[int, object]]) -> Counter:
    byte_map = build_byte_map()
    counts: Counter = Counter()
    for index, doc in docs:
        if not isinstance(doc, str):
            raise TypeError(f"document {index} is not a string (got {type(doc).__name__})")
        counts.update(pre_tokenize(doc, byte_map))
    return counts


def count_words(corpus: Iterable[str], workers: int = 1, chunk_size: int = 2048) -> Counter:
    """Occurrences of each pre-tokenized word across the corpus."""
    indexed = list(enumerate(corpus))
    if workers <= 1 or len(indexed) <= chunk_size:
        return _count_chunk(indexed)
    chunks = [indexed[i:i + chunk_size] for i in range(0, len(indexed), chunk_size)]
    total: Counter = Counter()
    with ProcessPoolExecutor(max_workers=workers) as pool:
        for part in pool.map(_count_chunk, chunks):
            total.update(part)
    return total


def count_pairs(
    word_counts: Mapping[str, int],
    segmentation: Mapping[str, Sequence[str]] | None = None,
) -> Counter:
    """Adjacent-pair frequencies weighted by word count; base segmentation by default."""
    pairs: Counter = Counter()
    for word, n in word_counts.items():
        parts = segmentation[word] if segmentation is not None else list(word)
        for pair in zip(parts, parts[1:]):
            pairs[pair] += n
    return pairs


def _apply(parts: list[str], pair: Pair, result: str) -> list[str]:
    out: list[str] = []
    i = 0
    while i < len(parts):
        if i + 1 < len(parts) and parts[i] == pair[0] and parts[i + 1] == pair[1]:
            out.append(result)
            i += 2
        else:
            out.append(parts[i])
            i += 1
    return out


def iter_merges(
    word_counts: Mapping[str, int],
    config: TrainConfig,
) -> Iterator[tuple[Pair, int]]:
    """Yield ``(pair, frequency)`` for each accepted merge, in rank order.

    Ties on frequency go to the lexicographically smallest ``(left, right)``.
    A pair whose concatenation is already a token (including a special token)
    is never selected.
    """
    known = set(build_byte_map().forward) | set(config.specials.literals)
    room = config.target_vocab_size - 256 - len(SpecialTokens.ROLES)

    words = list(word_counts)
    freqs = [word_counts[w] for w in words]
    segs = [list(w) for w in words]
    pair_counts: dict[Pair, int] = defaultdict(int)
    where: dict[Pair, set[int]] = defaultdict(set)
    for wi, parts in enumerate(segs):
        for pair in zip(parts, parts[1:]):
            pair_counts[pair] += freqs[wi]
            where[pair].add(wi)

    heap = [(-c, p[0], p[1]) for p, c in pair_counts.items()]
    heapq.heapify(heap)

    emitted = 0
    while emitted < room and heap:
        neg, left, right = heapq.heappop(heap)
        pair = (left, right)
        if pair_counts.get(pair, 0) != -neg:
            continue  # stale entry; a fresh one was pushed when the count changed
        if -neg < config.min_pair_frequency:
            break
        result = left + right
        if result in known:
            continue
        known.add(result)
        yield pair, -neg
        emitted += 1

        touched: set[Pair] = set()
        for wi in list(where.pop(pair, ())):
            old = segs[wi]
            new = _apply(old, pair, result)
            n = freqs[wi]
            for p in zip(old, old[1:]):
                pair_counts[p] -= n
                touched.add(p)
            for p in zip(new, new[1:]):
                pair_counts[p] += n
                touched.add(p)
                where[p].add(wi)
            segs[wi] = new
        pair_counts.pop(pair, None)
        for p in touched:
            c = pair_counts.get(p, 0)
            if c <= 0:
                pair_counts.pop(p, None)
                where.pop(p, None)
            elif p != pair:
                heapq.heappush(heap, (-c, p[0], p[1]))


def train(corpus: Iterable[str], config: TrainConfig, workers: int = 1) -> Tokenizer:
    word_counts = count_words(corpus, workers=workers)
    pairs = [pair for pair, _ in iter_merges(word_counts, config)]
    tokenizer = Tokenizer.from_merges(pairs, config.specials)
    if tokenizer.size < config.target_vocab_size:
        reason = "empty corpus" if not word_counts else "no pair reaches min_pair_frequency"
        log.warning(
            "training stopped at vocab size %d below target %d (%s)",
            tokenizer.size, config.target_vocab_size, reason,
        )
    return tokenizer
