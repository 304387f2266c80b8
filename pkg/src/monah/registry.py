"""The canonical session-level feature registry.

Every coarse feature the pipeline can emit is enumerated here with its
family, child, speaker scope and whether it belongs to the pre-existing
("prime") feature set. The checked-in ``data/registry.json`` is the source
of truth consumed at runtime; :func:`build_entries` reconstructs the same
list and exists so the JSON can be regenerated (see
``scripts/build_registry.py``) and so tests can assert the file matches.

Feature vectors are ordered exactly as the registry is ordered:
family -> speaker (doctor first) -> child -> sub-feature.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources

from .model import PERSONALITY_TRAITS

FAMILIES = ("demographics", "actions", "prosody", "semantics", "mimicry", "history")
FAMILY_LETTERS = {
    "demographics": "D",
    "actions": "A",
    "prosody": "P",
    "semantics": "S",
    "mimicry": "M",
    "history": "H",
}
LETTER_FAMILIES = {v: k for k, v in FAMILY_LETTERS.items()}

AU_KEYS = ("au05", "au17", "au20", "au25")
AU_NAMES = {
    "au05": "upper lid raiser",
    "au17": "chin raiser",
    "au20": "lip stretcher",
    "au25": "lips part",
}
STAT_KEYS = ("min", "max", "mean", "variance")
TONE_CHANNELS = ("happy", "sad", "angry")

# Table-1 children; the structural test checks each has >= 1 registry entry.
CHILDREN = (
    "talkativeness",
    "big5",
    "gender",
    "laughter",
    "nod",
    "lean_forward",
    "smile",
    "posiface",
    "au",
    "delay",
    "speech_rate",
    "tone",
    "sentiment",
    "questions",
    "mimicry_speech_rate",
    "mimicry_tone",
    "history_sessions",
    "history_extreme",
)


@dataclass(frozen=True)
class RegistryEntry:
    name: str
    family: str
    child: str
    speaker: str  # "doctor" | "patient" | "session"
    prime: bool  # True if part of the pre-existing feature set


class UnknownFeature(KeyError):
    """A computed feature name is not in the registry."""


def build_entries() -> list[RegistryEntry]:
    entries: list[RegistryEntry] = []

    def add(name: str, family: str, child: str, speaker: str, prime: bool) -> None:
        entries.append(RegistryEntry(name, family, child, speaker, prime))

    for sp in ("doctor", "patient"):
        add(f"{sp}_word_count", "demographics", "talkativeness", sp, True)
        add(f"{sp}_distinct_word_count", "demographics", "talkativeness", sp, True)
        add(f"{sp}_word_proportion", "demographics", "talkativeness", sp, True)
        for trait in PERSONALITY_TRAITS:
            add(f"{sp}_{trait}", "demographics", "big5", sp, True)
        add(f"{sp}_gender", "demographics", "gender", sp, True)
    for sp in ("doctor", "patient"):
        add(f"{sp}_laughter_count", "actions", "laughter", sp, True)
        add(f"{sp}_nod_count", "actions", "nod", sp, False)
        add(f"{sp}_lean_forward_count", "actions", "lean_forward", sp, False)
        add(f"{sp}_smile_count", "actions", "smile", sp, False)
        add(f"{sp}_posiface_positive_count", "actions", "posiface", sp, False)
        add(f"{sp}_posiface_negative_count", "actions", "posiface", sp, False)
        for au in AU_KEYS:
            for stat in STAT_KEYS:
                add(f"{sp}_{au}_{stat}", "actions", "au", sp, True)
    for sp in ("doctor", "patient"):
        for stat in STAT_KEYS:
            add(f"{sp}_delay_{stat}", "prosody", "delay", sp, True)
        add(f"{sp}_speech_rate_mean", "prosody", "speech_rate", sp, True)
        for channel in TONE_CHANNELS:
            add(f"{sp}_tone_{channel}_mean", "prosody", "tone", sp, False)
    for sp in ("doctor", "patient"):
        for part in ("composite", "positive", "neutral", "negative"):
            add(f"{sp}_sentiment_{part}_mean", "semantics", "sentiment", sp, False)
        add(f"{sp}_open_question_proportion", "semantics", "questions", sp, False)
        add(f"{sp}_closed_question_proportion", "semantics", "questions", sp, False)
    add("mimicry_speech_rate_dtw", "mimicry", "mimicry_speech_rate", "session", False)
    for channel in TONE_CHANNELS:
        add(f"mimicry_tone_{channel}_dtw", "mimicry", "mimicry_tone", "session", False)
    add("mimicry_tone_dtw", "mimicry", "mimicry_tone", "session", False)
    add("assessor_prior_session_count", "history", "history_sessions", "session", False)
    add("assessor_prior_extreme_proportion", "history", "history_extreme", "session", False)
    return entries


class FeatureRegistry:
    def __init__(self, entries: list[RegistryEntry]):
        names = [e.name for e in entries]
        if len(set(names)) != len(names):
            raise ValueError("registry names are not unique")
        self.entries = tuple(entries)
        self.names = tuple(names)
        self.index = {name: i for i, name in enumerate(names)}
        self.by_name = {e.name: e for e in entries}

    def __len__(self) -> int:
        return len(self.entries)

    def __contains__(self, name: str) -> bool:
        return name in self.index

    def select(self, family_modes: dict[str, str]) -> list[str]:
        """Feature names enabled by a coarse config.

        ``family_modes`` maps family letter -> "off" | "prime" | "full".
        """
        out = []
        for e in self.entries:
            mode = family_modes.get(FAMILY_LETTERS[e.family], "off")
            if mode == "full" or (mode == "prime" and e.prime):
                out.append(e.name)
        return out


def load_registry() -> FeatureRegistry:
    """Load the checked-in registry file."""
    raw = json.loads(
        resources.files("monah.data").joinpath("registry.json").read_text("utf-8")
    )
    return FeatureRegistry([RegistryEntry(**entry) for entry in raw])


_cached: FeatureRegistry | None = None


def registry() -> FeatureRegistry:
    global _cached
    if _cached is None:
        _cached = load_registry()
    return _cached
