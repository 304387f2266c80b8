"""Core domain types for dyadic consultation sessions.

All values are immutable. Invariant checking is data-producing
(:func:`validate_session` returns violation strings) rather than
constructor-enforced, so malformed corpora can be loaded, inspected and
reported on instead of blowing up mid-ingest.

Time is integer milliseconds everywhere.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from datetime import datetime


class SpeakerRole(enum.Enum):
    DOCTOR = "doctor"
    PATIENT = "patient"

    @property
    def other(self) -> "SpeakerRole":
        return SpeakerRole.PATIENT if self is SpeakerRole.DOCTOR else SpeakerRole.DOCTOR


class Gender(enum.Enum):
    MALE = "male"
    FEMALE = "female"


class RapportScore(enum.Enum):
    """Four-level rating; only the top level counts as the positive class."""

    FAIL = "fail"
    PASS_MINUS = "pass-"
    PASS = "pass"
    PASS_PLUS = "pass+"


class EventKind(enum.Enum):
    LAUGHTER = "laughter"
    NOD = "nod"
    LEAN_FORWARD = "lean_forward"
    SMILE = "smile"
    POSIFACE_POSITIVE = "posiface_positive"
    POSIFACE_NEGATIVE = "posiface_negative"


class AuId(enum.Enum):
    AU05 = "05"
    AU17 = "17"
    AU20 = "20"
    AU25 = "25"


PERSONALITY_TRAITS = (
    "openness",
    "conscientiousness",
    "extraversion",
    "agreeableness",
    "neuroticism",
)


@dataclass(frozen=True)
class WordToken:
    text: str
    start_ms: int
    end_ms: int
    speaker: SpeakerRole


@dataclass(frozen=True)
class FeatureEvent:
    kind: EventKind
    speaker: SpeakerRole
    start_ms: int
    end_ms: int


@dataclass(frozen=True)
class AuFrame:
    speaker: SpeakerRole
    timestamp_ms: int
    au_id: AuId
    intensity: float  # in [0, 5]
    present: bool


@dataclass(frozen=True)
class ToneFrame:
    speaker: SpeakerRole
    start_ms: int
    end_ms: int
    happy: float
    sad: float
    angry: float


@dataclass(frozen=True)
class Personality:
    """Big-five percentile scores, each in [0, 100]."""

    openness: float
    conscientiousness: float
    extraversion: float
    agreeableness: float
    neuroticism: float

    def as_dict(self) -> dict[str, float]:
        return {t: getattr(self, t) for t in PERSONALITY_TRAITS}


@dataclass(frozen=True)
class SessionMeta:
    session_id: str
    assessor_id: str
    assessed_at: datetime
    doctor_gender: Gender
    patient_gender: Gender
    doctor_personality: Personality
    patient_personality: Personality
    rapport_score: RapportScore

    def gender(self, speaker: SpeakerRole) -> Gender:
        return self.doctor_gender if speaker is SpeakerRole.DOCTOR else self.patient_gender

    def personality(self, speaker: SpeakerRole) -> Personality:
        if speaker is SpeakerRole.DOCTOR:
            return self.doctor_personality
        return self.patient_personality


@dataclass(frozen=True)
class TalkTurn:
    """Maximal run of one speaker's words, ended by the other speaker.

    ``delay_before_ms`` is the (clamped, non-negative) gap to the previous
    turn; it is absent on the first turn and before delays are computed.
    """

    speaker: SpeakerRole
    words: tuple[WordToken, ...]
    start_ms: int
    end_ms: int
    delay_before_ms: int | None = None


@dataclass(frozen=True)
class Session:
    meta: SessionMeta
    turns: tuple[TalkTurn, ...]
    events: tuple[FeatureEvent, ...] = ()
    au_frames: tuple[AuFrame, ...] = ()
    tone_frames: tuple[ToneFrame, ...] = ()


def binarize_label(score: RapportScore) -> bool:
    """True exactly for the top rating; all lower ratings are negative."""
    return score is RapportScore.PASS_PLUS


def _check_word(i: int, j: int, word: WordToken, out: list[str]) -> None:
    if not word.text:
        out.append(f"turn {i}: word {j} has empty text")
    elif any(c.isspace() for c in word.text):
        out.append(f"turn {i}: word {j} text contains whitespace")
    if word.start_ms < 0:
        out.append(f"turn {i}: word {j} start_ms negative")
    if word.end_ms < word.start_ms:
        out.append(f"turn {i}: word {j} end_ms before start_ms")


def validate_session(session: Session) -> list[str]:
    """Return all invariant violations, as human-readable strings.

    An empty list means the session is well-formed. The function is pure:
    two calls on the same value return identical lists.
    """
    out: list[str] = []
    meta = session.meta
    for role in SpeakerRole:
        pers = meta.personality(role)
        for trait in PERSONALITY_TRAITS:
            v = getattr(pers, trait)
            if not 0.0 <= v <= 100.0:
                out.append(f"meta: {role.value} {trait} percentile out of [0,100]")

    prev_turn: TalkTurn | None = None
    for i, turn in enumerate(session.turns):
        if not turn.words:
            out.append(f"turn {i}: no words")
        else:
            prev_start = None
            for j, word in enumerate(turn.words):
                _check_word(i, j, word, out)
                if word.speaker is not turn.speaker:
                    out.append(f"turn {i}: speaker mismatch at word {j}")
                if prev_start is not None and word.start_ms < prev_start:
                    out.append(f"turn {i}: word {j} start_ms out of order")
                prev_start = word.start_ms
            if turn.start_ms != turn.words[0].start_ms:
                out.append(f"turn {i}: start_ms does not match first word")
            if turn.end_ms != turn.words[-1].end_ms:
                out.append(f"turn {i}: end_ms does not match last word")
        if turn.delay_before_ms is not None:
            if i == 0:
                out.append("turn 0: first turn must not carry delay_before_ms")
            elif turn.delay_before_ms < 0:
                out.append(f"turn {i}: negative delay_before_ms")
        if prev_turn is not None:
            if turn.speaker is prev_turn.speaker:
                out.append(f"turn {i}: same speaker as previous turn")
            if turn.start_ms < prev_turn.start_ms:
                out.append(f"turn {i}: start_ms before previous turn")
        prev_turn = turn

    for i, ev in enumerate(session.events):
        if ev.end_ms < ev.start_ms:
            out.append(f"event {i}: end_ms before start_ms")
    for i, frame in enumerate(session.au_frames):
        if not 0.0 <= frame.intensity <= 5.0:
            out.append(f"au_frame {i}: intensity out of [0,5]")
    for i, frame in enumerate(session.tone_frames):
        if frame.end_ms < frame.start_ms:
            out.append(f"tone_frame {i}: end_ms before start_ms")
        for channel in ("happy", "sad", "angry"):
            if not 0.0 <= getattr(frame, channel) <= 1.0:
                out.append(f"tone_frame {i}: {channel} out of [0,1]")
    return out
