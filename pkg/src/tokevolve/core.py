"""Byte-level BPE data model: byte map, pre-tokenization, merge rules, encode/decode."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Sequence

BOUNDARY = "Ġ"  # mapped space byte, marks a word-initial token


@dataclass(frozen=True)
class ByteUnicodeMap:
    forward: tuple[str, ...]
    inverse: dict[str, int] = field(compare=False, hash=False, repr=False)

    def encode_bytes(self, data: bytes) -> str:
        return "".join(self.forward[b] for b in data)

    def decode_symbols(self, symbols: str) -> bytes:
        try:
            return bytes(self.inverse[c] for c in symbols)
        except KeyError as exc:
            raise ValueError(f"symbol {exc.args[0]!r} is not in the byte map") from None


@lru_cache(maxsize=1)
def build_byte_map() -> ByteUnicodeMap:
    """Printable bytes map to themselves; the rest shift into U+0100 and up."""
    printable = (
        list(range(ord("!"), ord("~") + 1))
        + list(range(ord("¡"), ord("¬") + 1))
        + list(range(ord("®"), ord("ÿ") + 1))
    )
    table: dict[int, str] = {b: chr(b) for b in printable}
    shift = 0
    for b in range(256):
        if b not in table:
            table[b] = chr(256 + shift)
            shift += 1
    forward = tuple(table[b] for b in range(256))
    return ByteUnicodeMap(forward=forward, inverse={c: b for b, c in enumerate(forward)})


# A single space is folded into the following word; other whitespace forms its own piece.
_PIECE_RE = re.compile(r" ?\S+|\s+(?= \S)|\s+")


def pre_tokenize(text: str, byte_map: ByteUnicodeMap | None = None) -> list[str]:
    byte_map = byte_map or build_byte_map()
    return [byte_map.encode_bytes(piece.encode("utf-8")) for piece in _PIECE_RE.findall(text)]


@dataclass(frozen=True)
class MergeRule:
    left: str
    right: str
    result: str
    rank: int

    @classmethod
    def of(cls, left: str, right: str, rank: int) -> MergeRule:
        return cls(left, right, left + right, rank)


@dataclass(frozen=True)
class SpecialTokens:
    bos: tuple[str, int] = ("<s>", 0)
    pad: tuple[str, int] = ("<pad>", 1)
    eos: tuple[str, int] = ("</s>", 2)
    unk: tuple[str, int] = ("<unk>", 3)
    mask: tuple[str, int] = ("<mask>", 4)

    ROLES = ("bos", "pad", "eos", "unk", "mask")

    def items(self) -> list[tuple[str, str, int]]:
        return [(role, *getattr(self, role)) for role in self.ROLES]

    @property
    def literals(self) -> frozenset[str]:
        return frozenset(tok for _, tok, _ in self.items())

    @property
    def ids(self) -> frozenset[int]:
        return frozenset(i for _, _, i in self.items())

    def to_dict(self) -> dict[str, list]:
        return {role: [tok, i] for role, tok, i in self.items()}

    @classmethod
    def from_dict(cls, data: dict) -> SpecialTokens:
        return cls(**{role: (str(data[role][0]), int(data[role][1])) for role in cls.ROLES})


DEFAULT_SPECIALS = SpecialTokens()


class Tokenizer:
    """Vocabulary, ranked merge rules, special tokens and byte map.

    Construction does not enforce the invariants, so that malformed tokenizers
    can be inspected with :func:`validate`. Instances are treated as immutable.
    """

    def __init__(
        self,
        vocab: dict[str, int],
        merges: Sequence[MergeRule],
        specials: SpecialTokens = DEFAULT_SPECIALS,
        byte_map: ByteUnicodeMap | None = None,
    ) -> None:
        self.vocab: dict[str, int] = dict(vocab)
        self.merges: tuple[MergeRule, ...] = tuple(merges)
        self.specials = specials
        self.byte_map = byte_map or build_byte_map()
        self.id_to_token: dict[int, str] = {i: t for t, i in self.vocab.items()}
        # first rule wins if a pair is (invalidly) listed twice
        self._ranks: dict[tuple[str, str], MergeRule] = {}
        for rule in sorted(self.merges, key=lambda r: r.rank):
            self._ranks.setdefault((rule.left, rule.right), rule)
        self._special_ids = specials.ids
        self._cache: dict[str, tuple[int, ...]] = {}

    @classmethod
    def from_merges(
        cls,
        pairs: Iterable[tuple[str, str]],
        specials: SpecialTokens = DEFAULT_SPECIALS,
    ) -> Tokenizer:
        """Specials, then the 256 base symbols in byte order, then one token per merge."""
        byte_map = build_byte_map()
        vocab = {tok: i for _, tok, i in specials.items()}
        for sym in byte_map.forward:
            vocab[sym] = len(vocab)
        merges = []
        for rank, (left, right) in enumerate(pairs):
            rule = MergeRule.of(left, right, rank)
            merges.append(rule)
            vocab.setdefault(rule.result, len(vocab))
        return cls(vocab, merges, specials, byte_map)

    @property
    def size(self) -> int:
        return len(self.vocab)

    def __len__(self) -> int:
        return len(self.vocab)

    def __contains__(self, token: str) -> bool:
        return token in self.vocab

    def token_id(self, token: str) -> int:
        return self.vocab[token]

    def segment_word(self, symbols: str) -> tuple[str, ...]:
        """Apply the lowest-ranked applicable rule until none applies."""
        parts = list(symbols)
        ranks = self._ranks
        while len(parts) > 1:
            best: MergeRule | None = None
            for pair in zip(parts, parts[1:]):
                rule = ranks.get(pair)
                if rule is not None and (best is None or rule.rank < best.rank):
                    best = rule
            if best is None:
                break
            merged: list[str] = []
            i = 0
            while i < len(parts):
                if i + 1 < len(parts) and parts[i] == best.left and parts[i + 1] == best.right:
                    merged.append(best.result)
                    i += 2
                else:
                    merged.append(parts[i])
                    i += 1
            parts = merged
        return tuple(parts)

    def encode_word(self, symbols: str) -> tuple[int, ...]:
        cached = self._cache.get(symbols)
        if cached is None:
            cached = tuple(self.vocab[t] for t in self.segment_word(symbols))
            if len(self._cache) < 100_000:
                self._cache[symbols] = cached
        return cached

    def encode(self, text: str) -> list[int]:
        ids: list[int] = []
        for word in pre_tokenize(text, self.byte_map):
            ids.extend(self.encode_word(word))
        return ids

    def decode(self, ids: Iterable[int], specials: str = "skip") -> str:
        """``specials`` is ``"skip"`` (default) or ``"keep"`` to render their literals."""
        if specials not in ("skip", "keep"):
            raise ValueError(f"unknown special-token policy {specials!r}")
        out = bytearray()
        inverse = self.byte_map.inverse
        for i in ids:
            token = self.id_to_token.get(i)
            if token is None:
                raise ValueError(f"token id {i} is out of range [0, {self.size})")
            if i in self._special_ids:
                if specials == "keep":
                    out += token.encode("utf-8")
                continue
            out += bytes(inverse[c] for c in token)
        return out.decode("utf-8", errors="replace")

    def __repr__(self) -> str:
        return f"Tokenizer(size={self.size}, merges={len(self.merges)})"


def encode(tokenizer: Tokenizer, text: str) -> list[int]:
    return tokenizer.encode(text)


def decode(tokenizer: Tokenizer, ids: Iterable[int], specials: str = "skip") -> str:
    return tokenizer.decode(ids, specials=specials)


def same_structure(a: Tokenizer, b: Tokenizer) -> bool:
    return (
        a.vocab == b.vocab
        and a.merges == b.merges
        and a.specials == b.specials
        and a.byte_map.forward == b.byte_map.forward
    )


def validate(tokenizer: Tokenizer) -> list[str]:
    """Return one diagnostic per violated invariant; empty means well-formed."""
    problems: list[str] = []
    vocab = tokenizer.vocab
    size = len(vocab)

    ids = sorted(vocab.values())
    if len(set(ids)) != size:
        problems.append("vocab is not a bijection: duplicate ids")
    if ids != list(range(size)):
        problems.append(f"vocab ids are not the contiguous range [0, {size})")

    specials = tokenizer.specials
    if len(specials.ids) != len(SpecialTokens.ROLES):
        problems.append("special token ids are not distinct")
    for role, tok, i in specials.items():
        if vocab.get(tok) != i:
            problems.append(f"special token {role}={tok!r} is not in vocab with id {i}")

    base = set(tokenizer.byte_map.forward)
    missing = [c for c in tokenizer.byte_map.forward if c not in vocab]
    if missing:
        problems.append(f"{len(missing)} base byte symbols missing from vocab")

    producers: dict[str, list[int]] = {}
    for index, rule in enumerate(tokenizer.merges):
        if rule.rank != index:
            problems.append(f"rule {index} ({rule.left} {rule.right}) has rank {rule.rank}; ranks must be 0..n-1 in order")
        if rule.result != rule.left + rule.right:
            problems.append(f"rule rank {rule.rank}: result {rule.result!r} != {rule.left!r} + {rule.right!r}")
        for role, tok in (("left", rule.left), ("right", rule.right), ("result", rule.result)):
            if tok not in vocab:
                problems.append(f"rule rank {rule.rank}: {role} token {tok!r} not in vocab")
        if rule.result in specials.literals:
            problems.append(f"rule rank {rule.rank}: result collides with special token {rule.result!r}")
        producers.setdefault(rule.result, []).append(rule.rank)

    for tok, ranks in producers.items():
        if len(ranks) > 1:
            problems.append(f"token {tok!r} is produced by {len(ranks)} rules (ranks {ranks})")

    first_rank = {tok: min(r) for tok, r in producers.items()}
    for rule in tokenizer.merges:
        for tok in (rule.left, rule.right):
            if tok in base:
                continue
            made = first_rank.get(tok)
            if made is None or made >= rule.rank:
                where = "never produced" if made is None else f"produced at rank {made}"
                problems.append(f"rule rank {rule.rank} consumes {tok!r}, which is {where}")

    for tok in vocab:
        if tok in specials.literals or tok in base:
            continue
        if tok not in producers:
            problems.append(f"token {tok!r} is not produced by any merge rule")
    return problems
