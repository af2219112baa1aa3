"""Pseudo-log-likelihood and pseudo-perplexity under a masked-token scorer."""

from __future__ import annotations

import json
import math
from abc import ABC, abstractmethod
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

PROB_FLOOR = 1e-12
MASKED = -1  # placeholder written at the scored position


class MaskedScorer(ABC):
    """Predicts the token at a masked position given every other position.

    The sequence passed in has ``mask_id`` at ``position``. Model adapters
    translate that into their own mask token.
    """

    vocab_size: int

    @abstractmethod
    def distribution(self, ids: Sequence[int], position: int) -> np.ndarray:
        ...

    def probability(self, ids: Sequence[int], position: int, token: int) -> float:
        return float(self.distribution(ids, position)[token])


class UniformScorer(MaskedScorer):
    def __init__(self, vocab_size: int) -> None:
        self.vocab_size = vocab_size

    def distribution(self, ids, position):
        return np.full(self.vocab_size, 1.0 / self.vocab_size)

    def probability(self, ids, position, token):
        return 1.0 / self.vocab_size


class UnigramScorer(MaskedScorer):
    """Context-free add-one smoothed unigram model over the full vocabulary."""

    def __init__(self, vocab_size: int, counts: Counter | None = None) -> None:
        self.vocab_size = vocab_size
        self.counts: Counter = counts or Counter()
        self.total = sum(self.counts.values())

    @classmethod
    def fit(cls, sequences: Iterable[Sequence[int]], vocab_size: int, skip_ids: Iterable[int] = ()) -> UnigramScorer:
        skip = frozenset(skip_ids)
        counts: Counter = Counter()
        for seq in sequences:
            counts.update(i for i in seq if i not in skip)
        for i in counts:
            if not 0 <= i < vocab_size:
                raise ValueError(f"token id {i} outside vocabulary of size {vocab_size}")
        return cls(vocab_size, counts)

    def distribution(self, ids, position):
        dist = np.ones(self.vocab_size)
        for i, c in self.counts.items():
            dist[i] += c
        return dist / (self.total + self.vocab_size)

    def probability(self, ids, position, token):
        return (self.counts.get(token, 0) + 1) / (self.total + self.vocab_size)


def check_distribution(dist: np.ndarray, atol: float = 1e-9) -> None:
    dist = np.asarray(dist, dtype=np.float64)
    if np.any(dist < 0):
        raise ValueError("distribution has negative entries")
    if abs(math.fsum(dist) - 1.0) > atol:
        raise ValueError(f"distribution sums to {math.fsum(dist)!r}, not 1")


def _position_terms(
    scorer: MaskedScorer,
    ids: Sequence[int],
    skip_ids: frozenset[int],
    mask_id: int,
    order: Sequence[int] | None,
) -> dict[int, float]:
    positions = [t for t in range(len(ids)) if ids[t] not in skip_ids]
    if order is not None:
        if sorted(order) != list(range(len(ids))):
            raise ValueError("order must be a permutation of the sequence positions")
        positions = [t for t in order if ids[t] not in skip_ids]
    terms: dict[int, float] = {}
    masked = list(ids)
    for t in positions:
        masked[t] = mask_id
        p = scorer.probability(masked, t, ids[t])
        masked[t] = ids[t]
        terms[t] = math.log(max(p, PROB_FLOOR))
    return terms


def pseudo_log_likelihood(
    scorer: MaskedScorer,
    ids: Sequence[int],
    skip_ids: Iterable[int] = (),
    mask_id: int = MASKED,
    order: Sequence[int] | None = None,
) -> float:
    """Sum of ln P(w_t | all other positions) over non-special positions.

    The sum is exactly rounded, so the result does not depend on ``order``.
    """
    if not ids:
        raise ValueError("cannot score an empty sequence")
    terms = _position_terms(scorer, ids, frozenset(skip_ids), mask_id, order)
    return math.fsum(terms.values())


@dataclass
class PPPLReport:
    n_tokens: int
    pll_sum: float
    pppl: float
    per_doc: list[dict] = field(default_factory=list)

    def to_json(self) -> str:
        return json.dumps(
            {"n_tokens": self.n_tokens, "pll_sum": self.pll_sum, "pppl": self.pppl, "per_doc": self.per_doc}
        )


def pppl(
    scorer: MaskedScorer,
    corpus: Iterable[Sequence[int]],
    skip_ids: Iterable[int] = (),
    mask_id: int = MASKED,
    doc_ids: Sequence[str] | None = None,
) -> PPPLReport:
    """exp(-PLL / N) over a corpus of ID sequences; special positions are not counted."""
    skip = frozenset(skip_ids)
    per_doc = []
    plls = []
    n_total = 0
    for index, ids in enumerate(corpus):
        if not ids:
            continue
        terms = _position_terms(scorer, ids, skip, mask_id, None)
        if not terms:
            continue
        pll = math.fsum(terms.values())
        n = len(terms)
        plls.append(pll)
        n_total += n
        name = doc_ids[index] if doc_ids is not None else str(index)
        per_doc.append({"doc_id": name, "n_tokens": n, "pll": pll, "pppl": math.exp(-pll / n)})
    if n_total == 0:
        raise ValueError("corpus has no scorable tokens")
    total = math.fsum(plls)
    return PPPLReport(n_total, total, math.exp(-total / n_total), per_doc)


@dataclass(frozen=True)
class EarlyStopDecision:
    stop: bool
    best_index: int
    evals_since_best: int


def early_stop_check(history: Sequence[float], patience: int) -> EarlyStopDecision:
    """Stop once the best (strictly lowest) value is ``patience`` evaluations old."""
    if not history:
        raise ValueError("history must be nonempty")
    if patience < 1:
        raise ValueError(f"patience must be >= 1, got {patience}")
    best = 0
    for i, value in enumerate(history):
        if value < history[best]:
            best = i
    since = len(history) - 1 - best
    return EarlyStopDecision(since >= patience, best, since)
