"""Word-vector loading in the standard text format: ``token v1 ... v300``.

Tokens not found in the vocabulary map to the ``unk`` row; a zero ``unk``
row is appended when the file ships without one, so that every narrative
token maps to exactly one row. Desk-scale fixture files are generated by
:func:`build_embedding_file`; a full pretrained file in the same format is
a drop-in replacement.
"""

from __future__ import annotations

from collections.abc import Iterable
from pathlib import Path

import numpy as np

UNK = "unk"


class VocabError(ValueError):
    """Malformed embedding file."""


class VocabMap:
    def __init__(self, tokens: list[str], matrix: np.ndarray):
        if len(tokens) != matrix.shape[0]:
            raise VocabError("token list and matrix rows disagree")
        if UNK not in tokens:
            raise VocabError("vocabulary must contain the unk token")
        self.tokens = list(tokens)
        self.matrix = matrix.astype(np.float32)
        self._index = {t: i for i, t in enumerate(self.tokens)}
        self.unk_index = self._index[UNK]

    def __len__(self) -> int:
        return len(self.tokens)

    @property
    def dim(self) -> int:
        return self.matrix.shape[1]

    def index(self, token: str) -> int:
        return self._index.get(token, self.unk_index)

    def indices(self, tokens: Iterable[str]) -> list[int]:
        return [self.index(t) for t in tokens]


def load_embeddings(path: str | Path) -> VocabMap:
    tokens: list[str] = []
    rows: list[np.ndarray] = []
    dim: int | None = None
    with Path(path).open("r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            parts = line.rstrip("\n").split(" ")
            if len(parts) < 2:
                raise VocabError(f"{path}:{lineno}: expected token followed by values")
            if dim is None:
                dim = len(parts) - 1
            elif len(parts) - 1 != dim:
                raise VocabError(f"{path}:{lineno}: inconsistent vector width")
            tokens.append(parts[0])
            rows.append(np.asarray([float(v) for v in parts[1:]], dtype=np.float32))
    if not tokens:
        raise VocabError(f"{path}: empty embedding file")
    matrix = np.stack(rows)
    if UNK not in tokens:
        tokens.append(UNK)
        matrix = np.vstack([matrix, np.zeros((1, matrix.shape[1]), dtype=np.float32)])
    return VocabMap(tokens, matrix)


def build_embedding_file(
    vocabulary: Iterable[str], path: str | Path, dim: int = 300, seed: int = 0
) -> Path:
    """Write a desk-scale embedding file with seeded gaussian vectors."""
    rng = np.random.default_rng(seed)
    tokens = sorted(set(vocabulary) | {UNK})
    path = Path(path)
    with path.open("w", encoding="utf-8") as fh:
        for token in tokens:
            vec = rng.normal(0.0, 0.3, size=dim)
            values = " ".join(f"{v:.5f}" for v in vec)
            fh.write(f"{token} {values}\n")
    return path
