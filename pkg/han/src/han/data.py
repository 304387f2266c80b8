"""File-boundary contracts with the weaving pipeline.

The classifier consumes:

* ``narrative.json`` files (one per session per fold) with
  ``{"session_id","coarse_text","fine_turns":[{"turn_index","speaker","text"}]}``
* ``folds.json``   ``{"seed","k","assignment":{session_id: fold}}``
* ``labels.csv``   header ``session_id,label``

A narrative becomes a two-level document: the coarse summary's sentences
act as leading pseudo-turns, followed by the fine talk-turns. Documents
are truncated to at most 400 turns and 60 tokens per turn; truncation
counts are reported so heavy clipping is visible in logs.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

from .config import MAX_TOKENS, MAX_TURNS


@dataclass
class Doc:
    session_id: str
    turns: list[list[str]]      # token lists, coarse pseudo-turns first
    n_coarse: int               # leading turns that came from the coarse text
    fine_token_counts: list[int]  # untruncated token counts of the fine turns
    label: bool | None = None


@dataclass
class TruncationLog:
    turns_clipped: int = 0
    tokens_clipped: int = 0

    def merge(self, other: "TruncationLog") -> None:
        self.turns_clipped += other.turns_clipped
        self.tokens_clipped += other.tokens_clipped


def narrative_to_doc(
    narrative: dict, log: TruncationLog | None = None
) -> Doc:
    turns: list[list[str]] = []
    coarse = narrative.get("coarse_text", "")
    if coarse:
        for sentence in coarse.split(". "):
            tokens = sentence.split()
            if tokens:
                turns.append(tokens)
    n_coarse = len(turns)
    fine_token_counts = []
    for fine in narrative.get("fine_turns", []):
        tokens = fine["text"].split()
        fine_token_counts.append(len(tokens))
        turns.append(tokens)
    clipped = TruncationLog()
    for i, tokens in enumerate(turns):
        if len(tokens) > MAX_TOKENS:
            turns[i] = tokens[:MAX_TOKENS]
            clipped.tokens_clipped += 1
    if len(turns) > MAX_TURNS:
        clipped.turns_clipped += 1
        turns = turns[:MAX_TURNS]
    if not turns:
        turns = [["unk"]]
    if log is not None:
        log.merge(clipped)
    return Doc(
        session_id=narrative["session_id"],
        turns=turns,
        n_coarse=n_coarse,
        fine_token_counts=fine_token_counts,
    )


def read_narrative_file(path: str | Path) -> dict:
    return json.loads(Path(path).read_text("utf-8"))


def load_fold_docs(
    narratives_root: str | Path,
    fold: int,
    labels: dict[str, bool],
    log: TruncationLog | None = None,
) -> dict[str, Doc]:
    """All session docs for one fold directory, labelled."""
    fold_dir = Path(narratives_root) / f"fold{fold}"
    docs: dict[str, Doc] = {}
    for path in sorted(fold_dir.glob("*.json")):
        doc = narrative_to_doc(read_narrative_file(path), log)
        doc.label = labels.get(doc.session_id)
        docs[doc.session_id] = doc
    if not docs:
        raise FileNotFoundError(f"no narrative files under {fold_dir}")
    return docs


def read_folds(path: str | Path) -> tuple[dict[str, int], int]:
    obj = json.loads(Path(path).read_text("utf-8"))
    return {sid: int(f) for sid, f in obj["assignment"].items()}, int(obj["k"])


def read_labels(path: str | Path) -> dict[str, bool]:
    out: dict[str, bool] = {}
    with Path(path).open("r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        next(reader)
        for row in reader:
            if row:
                out[row[0]] = bool(int(row[1]))
    return out


def vocabulary_of(narratives_root: str | Path) -> set[str]:
    """Every token appearing in any narrative under the root (all folds)."""
    vocab: set[str] = set()
    for path in sorted(Path(narratives_root).rglob("*.json")):
        doc = narrative_to_doc(read_narrative_file(path))
        for turn in doc.turns:
            vocab.update(turn)
    return vocab
