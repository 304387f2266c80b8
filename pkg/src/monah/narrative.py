"""Narrative weaving: training statistics, z-score bucketing and templates.

The coarse narrative turns each session-level feature into a short clause
("doctor number of words high") via z-scores against training-set statistics
bucketed into very low / low / high / very high; midrange values emit
nothing. The fine narrative annotates each talk-turn with delay, speech
rate, tone and action clauses woven around the verbatim words.

All emitted text is lowercase and free of within-word symbols so it stays
friendly to pretrained word embeddings.
"""

from __future__ import annotations

import enum
import math
from collections.abc import Iterable, Sequence
from dataclasses import dataclass

from .features import CoarseFeatureVector, _turn_tone_means
from .model import Session, SpeakerRole, TalkTurn
from .registry import AU_KEYS, AU_NAMES, TONE_CHANNELS
from .segmentation import speech_rate


class InsufficientData(ValueError):
    """Too few training vectors to fit statistics."""


class MissingStats(KeyError):
    """No fitted statistics for the requested feature."""


class ConfigError(ValueError):
    """Malformed weave-config string or inconsistent toggles."""


@dataclass(frozen=True)
class StatsEntry:
    mean: float
    sd: float  # population standard deviation
    n: int


CorpusStats = dict[str, StatsEntry]

# turn-level statistics used by the fine templates, fitted on training
# sessions and stored in the same stats map as the coarse features
FINE_SPEECH_RATE = "fine_speech_rate"
FINE_TONE = {ch: f"fine_tone_{ch}" for ch in TONE_CHANNELS}


def fit_stats(vectors: Sequence[CoarseFeatureVector]) -> CorpusStats:
    """Per-feature mean and population sd over non-absent training values.

    Features with fewer than two non-absent values get no entry.
    """
    if len(vectors) < 2:
        raise InsufficientData("need at least 2 training vectors")
    stats: CorpusStats = {}
    names = vectors[0].values.keys()
    for name in names:
        values = [v.values[name] for v in vectors if v.values[name] is not None]
        if len(values) < 2:
            continue
        stats[name] = _fit_entry(values)
    return stats


def _fit_entry(values: Sequence[float]) -> StatsEntry:
    n = len(values)
    mean = sum(values) / n
    var = sum((v - mean) ** 2 for v in values) / n
    return StatsEntry(mean=mean, sd=math.sqrt(var), n=n)


def fit_fine_stats(sessions: Iterable[Session]) -> CorpusStats:
    """Turn-level speech-rate and tone statistics over training sessions."""
    rates: list[float] = []
    tones: dict[str, list[float]] = {ch: [] for ch in TONE_CHANNELS}
    for session in sessions:
        frames_by_speaker: dict[SpeakerRole, list] = {sp: [] for sp in SpeakerRole}
        for f in session.tone_frames:
            frames_by_speaker[f.speaker].append(f)
        for turn in session.turns:
            r = speech_rate(turn)
            if r is not None:
                rates.append(r)
            means = _turn_tone_means(turn, frames_by_speaker)
            if means is not None:
                for ch in TONE_CHANNELS:
                    tones[ch].append(means[ch])
    stats: CorpusStats = {}
    if len(rates) >= 2:
        stats[FINE_SPEECH_RATE] = _fit_entry(rates)
    for ch in TONE_CHANNELS:
        if len(tones[ch]) >= 2:
            stats[FINE_TONE[ch]] = _fit_entry(tones[ch])
    return stats


def z_score(x: float, entry: StatsEntry | None) -> float:
    """Training-standardized value; a zero-sd feature z-scores to 0."""
    if entry is None:
        raise MissingStats("no statistics entry")
    if entry.sd == 0:
        return 0.0
    return (x - entry.mean) / entry.sd


class Bucket(enum.IntEnum):
    VERY_LOW = 0
    LOW = 1
    NEUTRAL = 2
    HIGH = 3
    VERY_HIGH = 4


BUCKET_WORDS = {
    Bucket.VERY_LOW: "very low",
    Bucket.LOW: "low",
    Bucket.HIGH: "high",
    Bucket.VERY_HIGH: "very high",
}


def bucket(z: float) -> Bucket:
    """Verbal bucket for a z-score; the midrange [-1, 1] is neutral."""
    if z < -2:
        return Bucket.VERY_LOW
    if z < -1:
        return Bucket.LOW
    if z <= 1:
        return Bucket.NEUTRAL
    if z <= 2:
        return Bucket.HIGH
    return Bucket.VERY_HIGH


# --------------------------------------------------------------------------
# weave configuration
# --------------------------------------------------------------------------

COARSE_ORDER = "DAPSMH"
FINE_ORDER = "vpa"
_MODES = ("off", "prime", "full")


@dataclass(frozen=True)
class WeaveConfig:
    """Family toggles; "prime" selects only the pre-existing feature subset."""

    demographics: str = "off"
    actions: str = "off"
    prosody: str = "off"
    semantics: str = "off"
    mimicry: str = "off"
    history: str = "off"
    verbatim: bool = False
    fine_prosody: str = "off"
    fine_actions: str = "off"

    def __post_init__(self) -> None:
        for name in (
            "demographics", "actions", "prosody", "semantics", "mimicry",
            "history", "fine_prosody", "fine_actions",
        ):
            if getattr(self, name) not in _MODES:
                raise ConfigError(f"{name} must be one of {_MODES}")
        if (self.fine_prosody != "off" or self.fine_actions != "off") and not self.verbatim:
            raise ConfigError("fine families require verbatim to be enabled")

    @property
    def coarse_modes(self) -> dict[str, str]:
        return {
            "D": self.demographics,
            "A": self.actions,
            "P": self.prosody,
            "S": self.semantics,
            "M": self.mimicry,
            "H": self.history,
        }

    def any_coarse(self) -> bool:
        return any(m != "off" for m in self.coarse_modes.values())

    def any_fine(self) -> bool:
        return self.verbatim or self.fine_prosody != "off" or self.fine_actions != "off"


_COARSE_FIELDS = {
    "D": "demographics",
    "A": "actions",
    "P": "prosody",
    "S": "semantics",
    "M": "mimicry",
    "H": "history",
}


def _parse_letters(part: str, letters: str, upper: bool) -> dict[str, str]:
    modes: dict[str, str] = {}
    i = 0
    while i < len(part):
        letter = part[i]
        if letter not in letters:
            raise ConfigError(f"unexpected {'coarse' if upper else 'fine'} letter {letter!r}")
        if letter in modes:
            raise ConfigError(f"duplicate family letter {letter!r}")
        i += 1
        if i < len(part) and part[i] == "'":
            modes[letter] = "prime"
            i += 1
        else:
            modes[letter] = "full"
    return modes


def parse_config(text: str) -> WeaveConfig:
    """Parse a config string like ``DAPSMH-vpa``, ``D'A'P'`` or ``vpa``.

    Coarse families are uppercase, fine families lowercase, joined by a
    single ``-``; an ASCII apostrophe marks the prime (pre-existing) subset.
    """
    if not text:
        raise ConfigError("empty config string")
    if text.count("-") > 1:
        raise ConfigError("at most one '-' separator allowed")
    if "-" in text:
        coarse_part, fine_part = text.split("-")
    elif text[0].isupper():
        coarse_part, fine_part = text, ""
    else:
        coarse_part, fine_part = "", text
    kwargs: dict[str, object] = {}
    for letter, mode in _parse_letters(coarse_part, COARSE_ORDER, upper=True).items():
        kwargs[_COARSE_FIELDS[letter]] = mode
    fine_modes = _parse_letters(fine_part, FINE_ORDER, upper=False)
    if "v" in fine_modes:
        if fine_modes["v"] == "prime":
            raise ConfigError("verbatim has no prime variant")
        kwargs["verbatim"] = True
    if "p" in fine_modes:
        kwargs["fine_prosody"] = fine_modes["p"]
    if "a" in fine_modes:
        kwargs["fine_actions"] = fine_modes["a"]
    return WeaveConfig(**kwargs)


def format_config(config: WeaveConfig) -> str:
    coarse = ""
    for letter in COARSE_ORDER:
        mode = config.coarse_modes[letter]
        if mode == "full":
            coarse += letter
        elif mode == "prime":
            coarse += letter + "'"
    fine = ""
    if config.verbatim:
        fine += "v"
    for letter, mode in (("p", config.fine_prosody), ("a", config.fine_actions)):
        if mode == "full":
            fine += letter
        elif mode == "prime":
            fine += letter + "'"
    if coarse and fine:
        return f"{coarse}-{fine}"
    return coarse or fine


def config_slug(text: str) -> str:
    """Filesystem-friendly name for a config string (prime mark -> ``p``)."""
    return text.replace("'", "p")


# --------------------------------------------------------------------------
# narrative data types
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class FineTurn:
    turn_index: int
    speaker: SpeakerRole
    text: str


@dataclass(frozen=True)
class Narrative:
    session_id: str
    coarse_text: str
    fine_turns: tuple[FineTurn, ...]


# --------------------------------------------------------------------------
# coarse templates
#
# Each instance is (family letter, prime, speaker, lead, clauses) where
# clauses are (feature name, clause text with "{b}" for the bucket word).
# ``lead`` is prefixed to the first emitted clause; single-clause templates
# carry the speaker inline instead. Only non-neutral buckets emit, except
# gender which is categorical and always stated.
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class _Instance:
    family: str
    prime: bool
    clauses: tuple[tuple[str, str], ...]
    lead: str = ""
    gender_of: SpeakerRole | None = None


def _speaker_instances(sp: SpeakerRole) -> list[_Instance]:
    s = sp.value
    out = [
        _Instance("D", True, (
            (f"{s}_word_count", f"{s} number of words {{b}}"),
            (f"{s}_distinct_word_count", f"{s} number of distinct words {{b}}"),
            (f"{s}_word_proportion", f"{s} proportion of words {{b}}"),
        )),
    ]
    from .model import PERSONALITY_TRAITS

    for trait in PERSONALITY_TRAITS:
        out.append(_Instance("D", True, ((f"{s}_{trait}", f"{s} {trait} {{b}}"),)))
    out.append(_Instance("D", True, (), gender_of=sp))
    out.append(_Instance("A", True, ((f"{s}_laughter_count", f"{s} laughter counts {{b}}"),)))
    out.append(_Instance("A", False, ((f"{s}_nod_count", f"{s} head nod counts {{b}}"),)))
    out.append(_Instance("A", False, (
        (f"{s}_lean_forward_count", f"{s} forward trunk leaning {{b}}"),
    )))
    out.append(_Instance("A", False, ((f"{s}_smile_count", f"{s} smiling counts {{b}}"),)))
    out.append(_Instance("A", False, (
        (f"{s}_posiface_positive_count", "positive face expression counts {b}"),
        (f"{s}_posiface_negative_count", "negative face expression counts {b}"),
    ), lead=f"{s} "))
    for au in AU_KEYS:
        name = AU_NAMES[au]
        out.append(_Instance("A", True, (
            (f"{s}_{au}_min", f"minimum {name} {{b}}"),
            (f"{s}_{au}_max", f"maximum {name} {{b}}"),
            (f"{s}_{au}_mean", f"average {name} {{b}}"),
            (f"{s}_{au}_variance", f"variance {name} {{b}}"),
        ), lead=f"{s} "))
    out.append(_Instance("P", True, (
        (f"{s}_delay_min", "minimum delay {b}"),
        (f"{s}_delay_max", "maximum delay {b}"),
        (f"{s}_delay_mean", "average delay {b}"),
        (f"{s}_delay_variance", "variance delay {b}"),
    ), lead=f"{s} "))
    out.append(_Instance("P", True, ((f"{s}_speech_rate_mean", f"{s} speech rate {{b}}"),)))
    out.append(_Instance("P", False, tuple(
        (f"{s}_tone_{ch}_mean", f"{ch} tone {{b}}") for ch in TONE_CHANNELS
    ), lead=f"{s} "))
    out.append(_Instance("S", False, (
        (f"{s}_sentiment_composite_mean", "composite sentiment {b}"),
        (f"{s}_sentiment_positive_mean", "positive sentiment {b}"),
        (f"{s}_sentiment_neutral_mean", "neutral sentiment {b}"),
        (f"{s}_sentiment_negative_mean", "negative sentiment {b}"),
    ), lead=f"{s} "))
    out.append(_Instance("S", False, (
        (f"{s}_open_question_proportion", "open questions {b}"),
        (f"{s}_closed_question_proportion", "closed questions {b}"),
    ), lead=f"{s} "))
    return out


_SESSION_INSTANCES = (
    _Instance("M", False, (("mimicry_speech_rate_dtw", "speech rate mimicry {b}"),)),
    _Instance("M", False, (("mimicry_tone_dtw", "tone mimicry {b}"),)),
    _Instance("H", False, (
        ("assessor_prior_session_count", "patient number of sessions before this {b}"),
    )),
    _Instance("H", False, (
        ("assessor_prior_extreme_proportion",
         "patient question four proportion given maximum marks {b}"),
    )),
)


def _coarse_instances() -> list[_Instance]:
    """All template instances in emission order: family, speaker, child."""
    per_speaker = {
        sp: _speaker_instances(sp) for sp in (SpeakerRole.DOCTOR, SpeakerRole.PATIENT)
    }
    out: list[_Instance] = []
    for letter in COARSE_ORDER:
        for sp in (SpeakerRole.DOCTOR, SpeakerRole.PATIENT):
            out.extend(i for i in per_speaker[sp] if i.family == letter)
        out.extend(i for i in _SESSION_INSTANCES if i.family == letter)
    return out


_INSTANCES = None


def _instances() -> list[_Instance]:
    global _INSTANCES
    if _INSTANCES is None:
        _INSTANCES = _coarse_instances()
    return _INSTANCES


def weave_coarse(
    vector: CoarseFeatureVector,
    stats: CorpusStats,
    config: WeaveConfig,
) -> tuple[str, list[str]]:
    """Render the session-level summary; returns (text, warnings).

    A feature with an absent value is skipped silently (expected for missing
    streams); a present value without fitted statistics is skipped with a
    warning.
    """
    warnings: list[str] = []
    rendered: list[str] = []
    modes = config.coarse_modes
    for inst in _instances():
        mode = modes[inst.family]
        if mode == "off" or (mode == "prime" and not inst.prime):
            continue
        if inst.gender_of is not None:
            sp = inst.gender_of
            value = vector.values.get(f"{sp.value}_gender")
            if value is None:
                continue
            word = "female" if value >= 0.5 else "male"
            rendered.append(f"the {sp.value} is {word}")
            continue
        clauses: list[str] = []
        for feature, template in inst.clauses:
            value = vector.values.get(feature)
            if value is None:
                continue
            entry = stats.get(feature)
            if entry is None:
                warnings.append(f"no stats for {feature}; clause skipped")
                continue
            b = bucket(z_score(value, entry))
            if b is Bucket.NEUTRAL:
                continue
            clauses.append(template.format(b=BUCKET_WORDS[b]))
        if not clauses:
            continue
        clauses[0] = inst.lead + clauses[0]
        rendered.append(", ".join(clauses))
    return ". ".join(rendered), warnings


# --------------------------------------------------------------------------
# fine templates
# --------------------------------------------------------------------------

_HUNDREDS_WORDS = {
    2: "two", 3: "three", 4: "four", 5: "five", 6: "six", 7: "seven",
    8: "eight", 9: "nine", 10: "ten", 11: "eleven", 12: "twelve",
}

_ACTION_VERBS = (
    ("laughter", True, "laughed"),
    ("nod", False, "nodded"),
    ("lean_forward", False, "leaned forward"),
    ("smile", False, "smiled"),
    ("posiface_positive", False, "displayed positive facial expression"),
    ("posiface_negative", False, "displayed negative facial expression"),
)


def delay_hundreds_word(delay_ms: int) -> str:
    """Spelled-out hundreds of milliseconds, clamped to the 200-1200 range."""
    hundreds = max(2, min(12, delay_ms // 100))
    return _HUNDREDS_WORDS[hundreds]


def _session_delay_stats(turns: Sequence[TalkTurn]) -> StatsEntry | None:
    delays = [float(t.delay_before_ms) for t in turns if t.delay_before_ms is not None]
    if not delays:
        return None
    return _fit_entry(delays)


def _delay_word(z: float) -> str:
    if z >= 2:
        return "significantly long"
    if z >= 1:
        return "long"
    return "short"


def _speed_adverb(z: float) -> str | None:
    if z >= 2:
        return "very quickly"
    if z > 1:
        return "quickly"
    return None


_TONE_ADVERBS = {"happy": "happily", "sad": "sadly", "angry": "angrily"}


def weave_fine(
    session: Session,
    stats: CorpusStats,
    config: WeaveConfig,
) -> tuple[tuple[FineTurn, ...], list[str]]:
    """Per-turn annotations in temporal order; returns (turns, warnings).

    Clause order inside a turn reads chronologically: delay, the speaker
    clause with speed/tone adverbs, action clauses, facial action units,
    then the verbatim words.
    """
    if not config.any_fine():
        return (), []
    warnings: list[str] = []
    warned: set[str] = set()

    def stat(name: str) -> StatsEntry | None:
        entry = stats.get(name)
        if entry is None and name not in warned:
            warned.add(name)
            warnings.append(f"no stats for {name}; fine clause skipped")
        return entry

    p_mode = config.fine_prosody
    a_mode = config.fine_actions
    delay_stats = _session_delay_stats(session.turns)
    frames_by_speaker: dict[SpeakerRole, list] = {sp: [] for sp in SpeakerRole}
    for f in session.tone_frames:
        frames_by_speaker[f.speaker].append(f)

    out: list[FineTurn] = []
    for i, turn in enumerate(session.turns):
        parts: list[str] = []
        if p_mode != "off":
            delay = turn.delay_before_ms
            if delay is not None and delay >= 200 and delay_stats is not None:
                parts.append(f"after {delay_hundreds_word(delay)} hundred milliseconds")
                dz = z_score(float(delay), delay_stats)
                parts.append(f"a {_delay_word(dz)} delay")
            adverb = None
            rate = speech_rate(turn)
            if rate is not None:
                entry = stat(FINE_SPEECH_RATE)
                if entry is not None:
                    adverb = _speed_adverb(z_score(rate, entry))
            tone_adverb = None
            if p_mode == "full":
                means = _turn_tone_means(turn, frames_by_speaker)
                if means is not None:
                    zs = []
                    for ch in TONE_CHANNELS:
                        entry = stat(FINE_TONE[ch])
                        if entry is not None:
                            zs.append((z_score(means[ch], entry), ch))
                    if zs:
                        best_z, best_ch = max(zs, key=lambda t: t[0])
                        if best_z > 1:
                            tone_adverb = _TONE_ADVERBS[best_ch]
            clause = f"the {turn.speaker.value}"
            if adverb:
                clause += f" {adverb}"
            clause += " said"
            if tone_adverb:
                clause += f" {tone_adverb}"
            parts.append(clause)
        if a_mode != "off":
            for kind_value, prime, verb in _ACTION_VERBS:
                if a_mode == "prime" and not prime:
                    continue
                for sp in (SpeakerRole.DOCTOR, SpeakerRole.PATIENT):
                    if any(
                        e.kind.value == kind_value
                        and e.speaker is sp
                        and e.start_ms <= turn.end_ms
                        and e.end_ms >= turn.start_ms
                        for e in session.events
                    ):
                        parts.append(f"the {sp.value} {verb}")
            for sp in (SpeakerRole.DOCTOR, SpeakerRole.PATIENT):
                for au_key in AU_KEYS:
                    if _au_covers_turn(session, sp, au_key, turn):
                        parts.append(f"the {sp.value} exhibited {AU_NAMES[au_key]}")
        if config.verbatim:
            parts.append(" ".join(w.text for w in turn.words))
        out.append(FineTurn(turn_index=i, speaker=turn.speaker, text=", ".join(parts)))
    return tuple(out), warnings


def _au_covers_turn(session: Session, sp: SpeakerRole, au_key: str, turn: TalkTurn) -> bool:
    """True when the unit is detected throughout the whole turn.

    All frames of that id inside the turn span must be present, and the
    frames must span at least 90% of the turn (sampling-gap tolerance).
    """
    au_value = au_key.removeprefix("au")
    ts = [
        f.timestamp_ms
        for f in session.au_frames
        if f.speaker is sp
        and f.au_id.value == au_value
        and turn.start_ms <= f.timestamp_ms <= turn.end_ms
    ]
    if not ts:
        return False
    if any(
        not f.present
        for f in session.au_frames
        if f.speaker is sp
        and f.au_id.value == au_value
        and turn.start_ms <= f.timestamp_ms <= turn.end_ms
    ):
        return False
    return (max(ts) - min(ts)) >= 0.9 * (turn.end_ms - turn.start_ms)


def weave(
    session: Session,
    vector: CoarseFeatureVector,
    stats: CorpusStats,
    config: WeaveConfig,
) -> tuple[Narrative, list[str]]:
    """Combine enabled coarse text and fine turns into one narrative."""
    warnings: list[str] = []
    coarse_text = ""
    if config.any_coarse():
        coarse_text, w = weave_coarse(vector, stats, config)
        warnings.extend(w)
    fine_turns, w = weave_fine(session, stats, config)
    warnings.extend(w)
    return (
        Narrative(
            session_id=session.meta.session_id,
            coarse_text=coarse_text,
            fine_turns=fine_turns,
        ),
        warnings,
    )
