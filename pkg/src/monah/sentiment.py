"""Lexicon-based per-turn sentiment and a word-list question heuristic.

Sentiment uses a valence lexicon (word -> real in [-4, 4]). The composite
score for a turn is ``clamp(S / sqrt(S^2 + 15), -1, 1)`` where S is the sum
of hit valences; positive/negative fractions are the share of hit tokens
and neutral is the remainder, so the three fractions always sum to 1.

A turn counts as an open question if its first token is an interrogative
opener, and as a closed question if it leads with an auxiliary. ASR output
carries no punctuation, so the leading token is all we key on.
"""

from __future__ import annotations

import math
from collections.abc import Mapping, Sequence
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

OPEN_LEADS = frozenset(
    {"what", "how", "why", "when", "where", "who", "which", "tell", "describe"}
)
CLOSED_LEADS = frozenset(
    {
        "do", "does", "did", "is", "are", "was", "were", "have", "has", "had",
        "can", "could", "would", "will", "shall", "may", "any",
    }
)


@dataclass(frozen=True)
class TurnSentiment:
    composite: float  # in [-1, 1]
    positive: float
    neutral: float
    negative: float


def load_lexicon(path: str | Path | None = None) -> dict[str, float]:
    """Load word<TAB>valence pairs; ``None`` loads the shipped default."""
    if path is None:
        text = resources.files("monah.data").joinpath("lexicon.tsv").read_text("utf-8")
    else:
        text = Path(path).read_text("utf-8")
    lexicon: dict[str, float] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 2:
            raise ValueError(f"lexicon line {lineno}: expected word<TAB>valence")
        lexicon[parts[0].lower()] = float(parts[1])
    return lexicon


def score_turn(tokens: Sequence[str], lexicon: Mapping[str, float]) -> TurnSentiment:
    if not tokens:
        return TurnSentiment(0.0, 0.0, 1.0, 0.0)
    total = 0.0
    n_pos = 0
    n_neg = 0
    for token in tokens:
        valence = lexicon.get(token)
        if valence is None:
            continue
        total += valence
        if valence > 0:
            n_pos += 1
        elif valence < 0:
            n_neg += 1
    composite = total / math.sqrt(total * total + 15.0)
    composite = max(-1.0, min(1.0, composite))
    positive = n_pos / len(tokens)
    negative = n_neg / len(tokens)
    return TurnSentiment(composite, positive, 1.0 - positive - negative, negative)


def question_type(tokens: Sequence[str]) -> str | None:
    """Classify a turn as ``"open"``, ``"closed"`` or not a question."""
    if not tokens:
        return None
    lead = tokens[0]
    if lead in OPEN_LEADS:
        return "open"
    if lead in CLOSED_LEADS:
        return "closed"
    return None
