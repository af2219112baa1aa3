"""Extend an existing tokenizer with the novel tokens of a newer one, keeping old IDs."""

from __future__ import annotations

import csv
import io
import json
from collections import Counter
from dataclasses import asdict, dataclass, field
from typing import Iterable, Mapping

from .core import BOUNDARY, MergeRule, Tokenizer, pre_tokenize


class TokenizerMismatchError(ValueError):
    pass


class UnreachableRuleError(ValueError):
    pass


@dataclass
class MergeOutcome:
    merged: Tokenizer
    added_tokens: list[tuple[str, int]]
    appended_rules: list[MergeRule]
    skipped_rules: list[MergeRule] = field(default_factory=list)

    @property
    def added_count(self) -> int:
        return len(self.added_tokens)


def vocab_diff(old: Tokenizer, new: Tokenizer) -> set[str]:
    return set(new.vocab) - set(old.vocab)


def _check_compatible(old: Tokenizer, new: Tokenizer) -> None:
    if old.byte_map.forward != new.byte_map.forward:
        raise TokenizerMismatchError("tokenizers use different byte-to-unicode maps")
    if old.specials != new.specials:
        raise TokenizerMismatchError(
            f"special tokens differ: {old.specials.to_dict()} vs {new.specials.to_dict()}"
        )


def merge_tokenizers(old: Tokenizer, new: Tokenizer) -> MergeOutcome:
    """Append the rules of ``new`` that produce tokens ``old`` lacks, in ``new``'s rank order."""
    _check_compatible(old, new)
    novel = vocab_diff(old, new)
    vocab = dict(old.vocab)
    base = set(old.byte_map.forward)
    merges = list(old.merges)
    added: list[tuple[str, int]] = []
    appended: list[MergeRule] = []
    skipped: list[MergeRule] = []

    for rule in sorted(new.merges, key=lambda r: r.rank):
        if rule.result not in novel or rule.result in vocab:
            skipped.append(rule)
            continue
        for operand in (rule.left, rule.right):
            if operand not in vocab and operand not in base:
                raise UnreachableRuleError(
                    f"rule {rule.left!r} + {rule.right!r} (rank {rule.rank} in the new tokenizer) "
                    f"uses {operand!r}, which is neither an old token nor produced by an earlier appended rule"
                )
        placed = MergeRule(rule.left, rule.right, rule.result, len(merges))
        merges.append(placed)
        appended.append(placed)
        vocab[rule.result] = len(vocab)
        added.append((rule.result, vocab[rule.result]))

    merged = Tokenizer(vocab, merges, old.specials, old.byte_map)
    return MergeOutcome(merged, added, appended, skipped)


def outcome_from_tokenizers(old: Tokenizer, merged: Tokenizer) -> MergeOutcome:
    """Recover the merge outcome from a saved (old, merged) pair."""
    _check_compatible(old, merged)
    for tok, i in old.vocab.items():
        if merged.vocab.get(tok) != i:
            raise TokenizerMismatchError(f"token {tok!r} does not keep id {i} in the merged tokenizer")
    n_old = len(old.merges)
    if merged.merges[:n_old] != old.merges:
        raise TokenizerMismatchError("merged tokenizer does not start with the old merge rules")
    added = sorted(((t, i) for t, i in merged.vocab.items() if i >= old.size), key=lambda x: x[1])
    return MergeOutcome(merged, added, list(merged.merges[n_old:]), [])


@dataclass
class DiffEntry:
    token: str
    token_id: int
    frequency: int
    has_boundary_variant: bool
    capitalization_duplicate: bool
    category: str = ""

    @property
    def flags(self) -> list[str]:
        out = []
        if self.has_boundary_variant:
            out.append("boundary_variant")
        if self.capitalization_duplicate:
            out.append("capitalization_duplicate")
        return out


@dataclass
class DiffReport:
    entries: list[DiffEntry]

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def get(self, token: str) -> DiffEntry:
        for entry in self.entries:
            if entry.token == token:
                return entry
        raise KeyError(token)

    def to_tsv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, delimiter="\t", lineterminator="\n", quoting=csv.QUOTE_MINIMAL)
        writer.writerow(["token", "frequency", "flags", "category"])
        for e in self.entries:
            writer.writerow([e.token, e.frequency, ",".join(e.flags) or "-", e.category])
        return buf.getvalue()

    def to_json(self) -> str:
        rows = []
        for e in self.entries:
            row = asdict(e)
            row["flags"] = e.flags
            rows.append(row)
        return json.dumps(rows, ensure_ascii=False, indent=1)


def has_boundary_variant(token: str, vocab: Mapping[str, int]) -> bool:
    if token.startswith(BOUNDARY):
        twin = token[len(BOUNDARY):]
    else:
        twin = BOUNDARY + token
    return bool(twin) and twin in vocab


def _case_key(token: str) -> tuple[bool, str]:
    bounded = token.startswith(BOUNDARY)
    core = token[len(BOUNDARY):] if bounded else token
    return bounded, core.casefold()


def build_diff_report(
    outcome: MergeOutcome,
    corpus: Iterable[str] = (),
    categories: Mapping[str, str] | None = None,
) -> DiffReport:
    """Annotate each added token with its T_M frequency on ``corpus`` and duplicate flags.

    A capitalization duplicate is another token with the same boundary prefix
    whose remainder differs only in letter case (``ĠCOVID`` / ``Ġcovid``).
    """
    merged = outcome.merged
    categories = categories or {}
    added_ids = {i for _, i in outcome.added_tokens}

    counts: Counter = Counter()
    word_counts: Counter = Counter()
    for doc in corpus:
        word_counts.update(pre_tokenize(doc, merged.byte_map))
    for word, n in word_counts.items():
        for i in merged.encode_word(word):
            if i in added_ids:
                counts[i] += n

    by_case: dict[tuple[bool, str], set[str]] = {}
    for tok in merged.vocab:
        if tok in merged.specials.literals:
            continue
        by_case.setdefault(_case_key(tok), set()).add(tok)

    entries = []
    for tok, i in outcome.added_tokens:
        twins = by_case.get(_case_key(tok), set()) - {tok}
        entries.append(
            DiffEntry(
                token=tok,
                token_id=i,
                frequency=counts[i],
                has_boundary_variant=has_boundary_variant(tok, merged.vocab),
                capitalization_duplicate=bool(twins),
                category=categories.get(tok, ""),
            )
        )
    return DiffReport(entries)
