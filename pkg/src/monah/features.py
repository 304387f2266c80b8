"""Session-level coarse feature computation, one family at a time.

Six families: demographics, actions, prosody, semantics, mimicry, history.
Every computed name must exist in the registry; :func:`assemble` produces
the registry-ordered vector. Absent values are ``None`` and are never
conflated with zero — a missing tone stream yields absent tone features,
not zero tone.
"""

from __future__ import annotations

from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass

from .dtw import dtw_distance
from .model import (
    AuId,
    EventKind,
    Gender,
    PERSONALITY_TRAITS,
    Session,
    SessionMeta,
    SpeakerRole,
    TalkTurn,
    binarize_label,
)
from .registry import AU_KEYS, FeatureRegistry, TONE_CHANNELS, UnknownFeature, registry
from .segmentation import speech_rate
from .sentiment import question_type, score_turn

Part = dict[str, float]

_SPEAKERS = (SpeakerRole.DOCTOR, SpeakerRole.PATIENT)


@dataclass(frozen=True)
class CoarseFeatureVector:
    """Registry-ordered feature map for one session; absent values are None."""

    session_id: str
    values: Mapping[str, float | None]

    def __getitem__(self, name: str) -> float | None:
        return self.values[name]

    def row(self, names: Sequence[str]) -> list[float | None]:
        return [self.values[n] for n in names]


@dataclass(frozen=True)
class MimicrySeries:
    """Per-speaker, per-talk-turn prosodic series used for mimicry scoring.

    Series are indexed by each speaker's own turn order; lengths may differ
    (DTW aligns unequal lengths).
    """

    speech_rate: dict[SpeakerRole, list[float]]
    tone: dict[str, dict[SpeakerRole, list[float]]]  # channel -> speaker -> series


def _stats(values: Sequence[float]) -> dict[str, float]:
    n = len(values)
    mean = sum(values) / n
    return {
        "min": min(values),
        "max": max(values),
        "mean": mean,
        "variance": sum((v - mean) ** 2 for v in values) / n,  # population variance
    }


def compute_demographics(session: Session) -> Part:
    part: Part = {}
    counts = {sp: 0 for sp in _SPEAKERS}
    distinct: dict[SpeakerRole, set[str]] = {sp: set() for sp in _SPEAKERS}
    for turn in session.turns:
        counts[turn.speaker] += len(turn.words)
        distinct[turn.speaker].update(w.text for w in turn.words)
    total = sum(counts.values())
    for sp in _SPEAKERS:
        key = sp.value
        part[f"{key}_word_count"] = float(counts[sp])
        part[f"{key}_distinct_word_count"] = float(len(distinct[sp]))
        if total > 0:
            part[f"{key}_word_proportion"] = counts[sp] / total
        pers = session.meta.personality(sp)
        for trait in PERSONALITY_TRAITS:
            part[f"{key}_{trait}"] = float(getattr(pers, trait))
        part[f"{key}_gender"] = 1.0 if session.meta.gender(sp) is Gender.FEMALE else 0.0
    return part


_EVENT_FEATURES = {
    EventKind.LAUGHTER: "laughter_count",
    EventKind.NOD: "nod_count",
    EventKind.LEAN_FORWARD: "lean_forward_count",
    EventKind.SMILE: "smile_count",
    EventKind.POSIFACE_POSITIVE: "posiface_positive_count",
    EventKind.POSIFACE_NEGATIVE: "posiface_negative_count",
}

_AU_BY_KEY = {f"au{au.value}": au for au in AuId}


def compute_actions(session: Session) -> Part:
    part: Part = {}
    for sp in _SPEAKERS:
        for kind, feature in _EVENT_FEATURES.items():
            n = sum(1 for e in session.events if e.speaker is sp and e.kind is kind)
            part[f"{sp.value}_{feature}"] = float(n)
        for au_key in AU_KEYS:
            au = _AU_BY_KEY[au_key]
            # only frames where the unit was actually detected contribute
            intensities = [
                f.intensity
                for f in session.au_frames
                if f.speaker is sp and f.au_id is au and f.present
            ]
            if intensities:
                for stat, v in _stats(intensities).items():
                    part[f"{sp.value}_{au_key}_{stat}"] = v
    return part


def compute_prosody(session: Session) -> Part:
    part: Part = {}
    for sp in _SPEAKERS:
        key = sp.value
        delays = [
            float(t.delay_before_ms)
            for t in session.turns
            if t.speaker is sp and t.delay_before_ms is not None
        ]
        if delays:
            for stat, v in _stats(delays).items():
                part[f"{key}_delay_{stat}"] = v
        rates = [r for t in session.turns if t.speaker is sp
                 for r in [speech_rate(t)] if r is not None]
        if rates:
            part[f"{key}_speech_rate_mean"] = sum(rates) / len(rates)
        frames = [f for f in session.tone_frames if f.speaker is sp]
        if frames:
            for channel in TONE_CHANNELS:
                vals = [getattr(f, channel) for f in frames]
                part[f"{key}_tone_{channel}_mean"] = sum(vals) / len(vals)
    return part


def compute_semantics(session: Session, lexicon: Mapping[str, float]) -> Part:
    part: Part = {}
    for sp in _SPEAKERS:
        turns = [t for t in session.turns if t.speaker is sp]
        if not turns:
            continue
        key = sp.value
        scores = [score_turn([w.text for w in t.words], lexicon) for t in turns]
        n = len(scores)
        part[f"{key}_sentiment_composite_mean"] = sum(s.composite for s in scores) / n
        part[f"{key}_sentiment_positive_mean"] = sum(s.positive for s in scores) / n
        part[f"{key}_sentiment_neutral_mean"] = sum(s.neutral for s in scores) / n
        part[f"{key}_sentiment_negative_mean"] = sum(s.negative for s in scores) / n
        kinds = [question_type([w.text for w in t.words]) for t in turns]
        part[f"{key}_open_question_proportion"] = kinds.count("open") / n
        part[f"{key}_closed_question_proportion"] = kinds.count("closed") / n
    return part


def _turn_tone_means(
    turn: TalkTurn, frames_by_speaker: Mapping[SpeakerRole, list]
) -> dict[str, float] | None:
    """Mean tone per channel over the turn speaker's frames overlapping the turn."""
    overlapping = [
        f
        for f in frames_by_speaker.get(turn.speaker, [])
        if f.start_ms <= turn.end_ms and f.end_ms >= turn.start_ms
    ]
    if not overlapping:
        return None
    return {
        ch: sum(getattr(f, ch) for f in overlapping) / len(overlapping)
        for ch in TONE_CHANNELS
    }


def mimicry_series(session: Session) -> MimicrySeries:
    rates: dict[SpeakerRole, list[float]] = {sp: [] for sp in _SPEAKERS}
    tone: dict[str, dict[SpeakerRole, list[float]]] = {
        ch: {sp: [] for sp in _SPEAKERS} for ch in TONE_CHANNELS
    }
    frames_by_speaker: dict[SpeakerRole, list] = {sp: [] for sp in _SPEAKERS}
    for f in session.tone_frames:
        frames_by_speaker[f.speaker].append(f)
    for turn in session.turns:
        r = speech_rate(turn)
        if r is not None:
            rates[turn.speaker].append(r)
        means = _turn_tone_means(turn, frames_by_speaker)
        if means is not None:
            for ch in TONE_CHANNELS:
                tone[ch][turn.speaker].append(means[ch])
    return MimicrySeries(speech_rate=rates, tone=tone)


def compute_mimicry(session: Session) -> Part:
    part: Part = {}
    series = mimicry_series(session)
    d, p = SpeakerRole.DOCTOR, SpeakerRole.PATIENT
    if series.speech_rate[d] and series.speech_rate[p]:
        part["mimicry_speech_rate_dtw"] = dtw_distance(
            series.speech_rate[d], series.speech_rate[p]
        )
    channel_values = []
    for ch in TONE_CHANNELS:
        if series.tone[ch][d] and series.tone[ch][p]:
            v = dtw_distance(series.tone[ch][d], series.tone[ch][p])
            part[f"mimicry_tone_{ch}_dtw"] = v
            channel_values.append(v)
    if len(channel_values) == len(TONE_CHANNELS):
        part["mimicry_tone_dtw"] = sum(channel_values)
    return part


def compute_history(all_meta: Iterable[SessionMeta], target_id: str) -> Part:
    """Assessor leniency features from strictly earlier sessions.

    Two sessions with the same timestamp do not count each other as prior.
    The proportion is absent (not zero) for an assessor's first session.
    """
    metas = list(all_meta)
    target = next(m for m in metas if m.session_id == target_id)
    prior = [
        m
        for m in metas
        if m.assessor_id == target.assessor_id and m.assessed_at < target.assessed_at
    ]
    part: Part = {"assessor_prior_session_count": float(len(prior))}
    if prior:
        extreme = sum(1 for m in prior if binarize_label(m.rapport_score))
        part["assessor_prior_extreme_proportion"] = extreme / len(prior)
    return part


def assemble(
    session: Session, parts: Iterable[Part], reg: FeatureRegistry | None = None
) -> CoarseFeatureVector:
    """Merge family parts into one registry-ordered vector.

    Every registry name is present (possibly None). A part emitting a name
    outside the registry raises :class:`UnknownFeature`.
    """
    reg = reg or registry()
    values: dict[str, float | None] = {name: None for name in reg.names}
    for part in parts:
        for name, value in part.items():
            if name not in reg:
                raise UnknownFeature(name)
            values[name] = value
    return CoarseFeatureVector(session_id=session.meta.session_id, values=values)


def compute_vector(
    session: Session,
    lexicon: Mapping[str, float],
    all_meta: Iterable[SessionMeta] | None = None,
    reg: FeatureRegistry | None = None,
) -> CoarseFeatureVector:
    """Convenience wrapper running all six families for one session."""
    parts = [
        compute_demographics(session),
        compute_actions(session),
        compute_prosody(session),
        compute_semantics(session, lexicon),
        compute_mimicry(session),
    ]
    if all_meta is not None:
        parts.append(compute_history(all_meta, session.meta.session_id))
    return assemble(session, parts, reg)
