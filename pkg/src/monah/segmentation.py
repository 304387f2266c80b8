"""Talk-turn construction from a merged, time-ordered word stream.

A talk-turn is the maximal run of consecutive words by one speaker; it ends
exactly where the other speaker's first word appears in the merged stream.
Interruption is defined purely by token order, not acoustic overlap.
"""

from __future__ import annotations

from collections.abc import Sequence

from .model import TalkTurn, WordToken


class UnorderedInput(ValueError):
    """Input tokens violate (start_ms, end_ms) ordering."""


def segment(tokens: Sequence[WordToken]) -> tuple[TalkTurn, ...]:
    """Cut the ordered token stream into speaker-alternating talk-turns.

    The concatenation of all turns' words equals the input, and boundaries
    occur exactly at speaker changes. Empty input yields empty output.
    """
    for prev, cur in zip(tokens, tokens[1:]):
        if (cur.start_ms, cur.end_ms) < (prev.start_ms, prev.end_ms):
            raise UnorderedInput(
                f"token {cur.text!r} at {cur.start_ms} breaks (start_ms, end_ms) order"
            )
    turns: list[TalkTurn] = []
    run: list[WordToken] = []
    for token in tokens:
        if run and token.speaker is not run[-1].speaker:
            turns.append(_turn(run))
            run = []
        run.append(token)
    if run:
        turns.append(_turn(run))
    return tuple(turns)


def _turn(words: list[WordToken]) -> TalkTurn:
    return TalkTurn(
        speaker=words[0].speaker,
        words=tuple(words),
        start_ms=words[0].start_ms,
        end_ms=words[-1].end_ms,
    )


def compute_delays(turns: Sequence[TalkTurn]) -> tuple[TalkTurn, ...]:
    """Fill ``delay_before_ms`` for every turn after the first.

    The gap is ``max(0, start - previous end)``: the recordings come from
    physically separated speakers, so small overlaps occur after merging
    and a negative delay is meaningless.
    """
    out: list[TalkTurn] = []
    for i, turn in enumerate(turns):
        if i == 0:
            out.append(
                turn if turn.delay_before_ms is None
                else TalkTurn(turn.speaker, turn.words, turn.start_ms, turn.end_ms, None)
            )
        else:
            gap = max(0, turn.start_ms - turns[i - 1].end_ms)
            out.append(TalkTurn(turn.speaker, turn.words, turn.start_ms, turn.end_ms, gap))
    return tuple(out)


def speech_rate(turn: TalkTurn) -> float | None:
    """Words per second over the turn span; absent for zero-duration turns."""
    span_ms = turn.end_ms - turn.start_ms
    if span_ms <= 0:
        return None
    return len(turn.words) / (span_ms / 1000.0)
