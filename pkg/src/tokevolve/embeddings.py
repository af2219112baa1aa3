"""Grow a token-embedding matrix for a merged tokenizer, and the EMB1 file format."""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .core import Tokenizer
from .evolve import MergeOutcome

MAGIC = b"EMB1"
_HEADER = struct.Struct("<4sII")
STRATEGIES = ("subtoken-mean", "gaussian")


class EmbeddingFormatError(ValueError):
    pass


def extend_embeddings(
    old: np.ndarray,
    old_tokenizer: Tokenizer,
    outcome: MergeOutcome,
    strategy: str = "subtoken-mean",
    std: float = 0.02,
    seed: int = 0,
) -> np.ndarray:
    """Return a matrix with one row per merged-vocab token; old rows are copied verbatim.

    ``subtoken-mean`` sets each new row to the mean of the old rows of the
    token's segmentation under the old tokenizer. ``gaussian`` draws
    N(0, std^2) values from a generator seeded with ``seed``.
    """
    if strategy not in STRATEGIES:
        raise ValueError(f"unknown strategy {strategy!r}; expected one of {', '.join(STRATEGIES)}")
    old = np.asarray(old)
    if old.ndim != 2:
        raise ValueError(f"embedding matrix must be 2-D, got shape {old.shape}")
    if old.shape[0] != old_tokenizer.size:
        raise ValueError(
            f"embedding matrix has {old.shape[0]} rows but the old tokenizer has {old_tokenizer.size} tokens"
        )
    n_old, dim = old.shape
    n_new = outcome.merged.size - n_old
    ids = [i for _, i in outcome.added_tokens]
    if n_new != len(ids) or ids != list(range(n_old, n_old + n_new)):
        raise ValueError("added token ids are not the contiguous range after the old vocabulary")

    out = np.empty((n_old + n_new, dim), dtype=old.dtype)
    out[:n_old] = old
    if not n_new:
        return out
    if strategy == "gaussian":
        rng = np.random.default_rng(seed)
        out[n_old:] = rng.normal(0.0, std, size=(n_new, dim)).astype(old.dtype)
        return out
    for token, i in outcome.added_tokens:
        parts = list(old_tokenizer.encode_word(token))
        out[i] = old[parts].astype(np.float64).mean(axis=0)
    return out


def save_embeddings(matrix: np.ndarray, path: str | Path) -> None:
    matrix = np.asarray(matrix)
    if matrix.ndim != 2:
        raise ValueError(f"embedding matrix must be 2-D, got shape {matrix.shape}")
    if not np.all(np.isfinite(matrix)):
        raise ValueError("embedding matrix contains non-finite values")
    rows, dim = matrix.shape
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, rows, dim))
        fh.write(np.ascontiguousarray(matrix, dtype="<f4").tobytes())


def load_embeddings(path: str | Path) -> np.ndarray:
    data = Path(path).read_bytes()
    if len(data) < _HEADER.size:
        raise EmbeddingFormatError(f"{path}: file too short for header ({len(data)} bytes)")
    magic, rows, dim = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise EmbeddingFormatError(f"{path}: bad magic {magic!r}, expected {MAGIC!r}")
    expected = _HEADER.size + 4 * rows * dim
    if len(data) != expected:
        raise EmbeddingFormatError(f"{path}: expected {expected} bytes for {rows}x{dim}, got {len(data)}")
    values = np.frombuffer(data, dtype="<f4", offset=_HEADER.size).reshape(rows, dim)
    return values.astype(np.float32)


def export_text(matrix: np.ndarray, path: str | Path) -> None:
    np.savetxt(path, np.asarray(matrix), fmt="%.9g", delimiter=" ")
