"""On-disk tokenizer format: ``vocab.json``, ``merges.txt`` and ``special_tokens.json``."""

from __future__ import annotations

import json
from pathlib import Path

from .core import DEFAULT_SPECIALS, MergeRule, SpecialTokens, Tokenizer, validate

VOCAB_FILE = "vocab.json"
MERGES_FILE = "merges.txt"
SPECIALS_FILE = "special_tokens.json"
MERGES_HEADER = "#version: 0.2"


class TokenizerFormatError(ValueError):
    pass


def save(tokenizer: Tokenizer, directory: str | Path) -> Path:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    ordered = dict(sorted(tokenizer.vocab.items(), key=lambda kv: kv[1]))
    (directory / VOCAB_FILE).write_text(
        json.dumps(ordered, ensure_ascii=False, indent=1) + "\n", encoding="utf-8"
    )
    lines = [MERGES_HEADER]
    lines.extend(f"{r.left} {r.right}" for r in sorted(tokenizer.merges, key=lambda r: r.rank))
    (directory / MERGES_FILE).write_text("\n".join(lines) + "\n", encoding="utf-8")
    (directory / SPECIALS_FILE).write_text(
        json.dumps(tokenizer.specials.to_dict(), ensure_ascii=False, indent=1) + "\n",
        encoding="utf-8",
    )
    return directory


def _load_vocab(path: Path) -> dict[str, int]:
    text = path.read_text(encoding="utf-8")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise TokenizerFormatError(
            f"{path}: invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}"
        ) from None
    if not isinstance(data, dict):
        raise TokenizerFormatError(f"{path}: expected a flat object of token -> id")
    for tok, i in data.items():
        if not isinstance(i, int) or isinstance(i, bool):
            raise TokenizerFormatError(f"{path}: token {tok!r} has non-integer id {i!r}")
    return data


def _load_merges(path: Path, vocab: dict[str, int]) -> list[MergeRule]:
    merges: list[MergeRule] = []
    with path.open(encoding="utf-8", newline="") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\r\n")
            if lineno == 1 and line.startswith("#version"):
                continue
            if not line:
                continue
            parts = line.split(" ")
            if len(parts) != 2 or not parts[0] or not parts[1]:
                raise TokenizerFormatError(
                    f"{path}:{lineno}: expected '<left> <right>' separated by one space, got {line!r}"
                )
            left, right = parts
            for tok in (left, right, left + right):
                if tok not in vocab:
                    raise TokenizerFormatError(f"{path}:{lineno}: token {tok!r} is not in the vocabulary")
            merges.append(MergeRule.of(left, right, len(merges)))
    return merges


def load(directory: str | Path, check: bool = True) -> Tokenizer:
    """Load a tokenizer directory; ``special_tokens.json`` is optional (RoBERTa defaults)."""
    directory = Path(directory)
    for name in (VOCAB_FILE, MERGES_FILE):
        if not (directory / name).is_file():
            raise TokenizerFormatError(f"{directory}: missing {name}")
    vocab = _load_vocab(directory / VOCAB_FILE)
    merges = _load_merges(directory / MERGES_FILE, vocab)
    specials = DEFAULT_SPECIALS
    if (directory / SPECIALS_FILE).is_file():
        try:
            specials = SpecialTokens.from_dict(
                json.loads((directory / SPECIALS_FILE).read_text(encoding="utf-8"))
            )
        except (json.JSONDecodeError, KeyError, TypeError, ValueError, IndexError) as exc:
            raise TokenizerFormatError(f"{directory / SPECIALS_FILE}: malformed special tokens ({exc})") from None
    tokenizer = Tokenizer(vocab, merges, specials)
    if check:
        problems = validate(tokenizer)
        if problems:
            raise TokenizerFormatError(
                f"{directory}: tokenizer failed validation ({len(problems)} problems); first: {problems[0]}"
            )
    return tokenizer
