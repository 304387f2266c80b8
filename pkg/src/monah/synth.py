"""Synthetic corpus generator exercising the full pipeline end to end.

This stands in for the private clinical recordings: it makes no claim about
their distributions. Positive-labeled sessions receive elevated smile, nod
and laughter rates, more positive-valence word draws, and lower cross-
speaker DTW divergence; the per-family effect sizes are the signal
strengths, and strength 0 makes the classes statistically
indistinguishable.

Sessions are generated from per-session derived seeds, so output is
deterministic for a given config regardless of generation order.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from datetime import datetime, timedelta
from pathlib import Path

import numpy as np

POSITIVE_WORDS = (
    "good", "great", "thanks", "happy", "glad", "nice", "better", "helpful",
    "comfortable", "relieved", "fine", "okay", "excellent", "wonderful",
    "appreciate", "care", "friendly", "improve", "healthy", "safe",
)
NEGATIVE_WORDS = (
    "pain", "bad", "worse", "sick", "tired", "worried", "sad", "hurt",
    "anxious", "problem", "trouble", "difficult", "severe", "stress",
    "upset", "scared", "dizzy", "weak", "ache", "unwell",
)
NEUTRAL_WORDS = (
    "the", "a", "i", "you", "we", "it", "that", "this", "so", "then", "just",
    "about", "um", "uh", "to", "of", "in", "on", "at", "for", "with", "your",
    "my", "been", "going", "week", "day", "time", "doctor", "here", "there",
    "see", "think", "know", "feel", "get", "got", "take", "medication",
    "appointment", "symptoms", "since", "also", "maybe", "little", "bit",
    "quite", "today", "now", "when", "started", "still",
)

AU_IDS = ("05", "17", "20", "25")


@dataclass(frozen=True)
class SignalStrengths:
    actions: float = 1.0
    semantics: float = 1.0
    tone: float = 1.0
    mimicry: float = 1.0

    @classmethod
    def uniform(cls, strength: float) -> "SignalStrengths":
        return cls(actions=strength, semantics=strength, tone=strength, mimicry=strength)


@dataclass(frozen=True)
class SynthConfig:
    n_sessions: int = 200
    positive_rate: float = 0.38
    mean_turns: float = 296.0
    sd_turns: float = 126.0
    mean_words_per_turn: float = 7.62
    sd_words_per_turn: float = 12.2
    signal: SignalStrengths = field(default_factory=SignalStrengths)
    n_assessors: int = 12
    seed: int = 0

    def __post_init__(self) -> None:
        if not 0.0 < self.positive_rate < 1.0:
            raise ValueError("positive_rate must be in (0, 1)")


def _draw_word(rng: np.random.Generator, p_pos: float, p_neg: float) -> str:
    r = rng.random()
    if r < p_pos:
        return POSITIVE_WORDS[rng.integers(len(POSITIVE_WORDS))]
    if r < p_pos + p_neg:
        return NEGATIVE_WORDS[rng.integers(len(NEGATIVE_WORDS))]
    return NEUTRAL_WORDS[rng.integers(len(NEUTRAL_WORDS))]


def _clip01(x: float) -> float:
    return float(min(1.0, max(0.0, x)))


def generate_session(config: SynthConfig, index: int) -> dict:
    """Build one session's raw records; deterministic in (config.seed, index)."""
    rng = np.random.default_rng([config.seed, index])
    sig = config.signal
    positive = bool(rng.random() < config.positive_rate)
    label_f = 1.0 if positive else 0.0
    sid = f"s{index:04d}"

    n_turns = max(2, int(round(rng.normal(config.mean_turns, config.sd_turns))))
    p_pos_word = 0.05 + 0.05 * sig.semantics * label_f
    p_neg_word = max(0.005, 0.07 - 0.02 * sig.semantics * label_f)

    doctor_base_rate = rng.normal(2.6, 0.25)
    mimicry_noise = max(0.12, 0.55 - 0.30 * sig.mimicry * label_f)

    words = {"doctor": [], "patient": []}
    cursor = 0
    last_doctor_rate = doctor_base_rate
    for t in range(n_turns):
        speaker = "doctor" if t % 2 == 0 else "patient"
        n_words = int(np.clip(round(rng.normal(
            config.mean_words_per_turn, config.sd_words_per_turn)), 1, 60))
        if speaker == "doctor":
            rate = max(0.8, doctor_base_rate + rng.normal(0.0, 0.25))
            last_doctor_rate = rate
        else:
            # the patient tracks the doctor's recent pace; positives track closer
            rate = max(0.8, last_doctor_rate + rng.normal(0.0, mimicry_noise))
        span_ms = max(200, int(round(n_words / rate * 1000)))
        if t == 0:
            start = 0
        else:
            if rng.random() < 0.1:
                gap = -int(rng.integers(0, 80))  # slight overlap after merging
            else:
                gap = max(0, int(round(rng.normal(350, 250))))
            start = cursor + gap
        slot = span_ms / n_words
        for w in range(n_words):
            w_start = start + int(round(w * slot))
            w_end = start + span_ms if w == n_words - 1 else min(
                start + span_ms, w_start + max(80, int(round(slot * 0.8)))
            )
            words[speaker].append(
                {
                    "session_id": sid,
                    "speaker": speaker,
                    "word": _draw_word(rng, p_pos_word, p_neg_word),
                    "start_ms": w_start,
                    "end_ms": w_end,
                }
            )
        cursor = start + span_ms
    session_end = cursor

    event_rates = {
        "smile": 6.0 + 4.5 * sig.actions * label_f,
        "nod": 8.0 + 4.0 * sig.actions * label_f,
        "laughter": 3.0 + 2.0 * sig.actions * label_f,
        "lean_forward": 4.0 + 2.0 * sig.actions * label_f,
        "posiface_positive": 5.0 + 3.0 * sig.actions * label_f,
        "posiface_negative": max(0.3, 5.0 - 2.0 * sig.actions * label_f),
    }
    events = []
    for speaker in ("doctor", "patient"):
        for kind, lam in event_rates.items():
            for _ in range(int(rng.poisson(lam))):
                start = int(rng.integers(0, max(1, session_end - 1500)))
                events.append(
                    {
                        "session_id": sid,
                        "speaker": speaker,
                        "kind": kind,
                        "start_ms": start,
                        "end_ms": start + int(rng.integers(200, 1500)),
                    }
                )
    events.sort(key=lambda e: (e["start_ms"], e["end_ms"], e["speaker"], e["kind"]))

    au_rows = []
    for speaker in ("doctor", "patient"):
        for _ in range(int(rng.poisson(15))):
            au = AU_IDS[rng.integers(len(AU_IDS))]
            seg_start = int(rng.integers(0, max(1, session_end)))
            seg_len = int(rng.integers(1000, 5000))
            for ts in range(seg_start, seg_start + seg_len, 500):
                au_rows.append(
                    {
                        "session_id": sid,
                        "speaker": speaker,
                        "timestamp_ms": ts,
                        "au_id": au,
                        "intensity": round(float(rng.uniform(0.5, 4.5)), 3),
                        "present": rng.random() < 0.85,
                    }
                )
    au_rows.sort(key=lambda r: (r["timestamp_ms"], r["speaker"], r["au_id"]))

    happy_base = {
        "doctor": 0.35 + 0.08 * sig.tone * label_f,
        "patient": 0.35 + 0.08 * sig.tone * label_f,
    }
    tone_rows = []
    for speaker in ("doctor", "patient"):
        for start in range(0, session_end, 3000):
            tone_rows.append(
                {
                    "session_id": sid,
                    "speaker": speaker,
                    "start_ms": start,
                    "end_ms": min(start + 3000, session_end),
                    "happy": round(_clip01(rng.normal(happy_base[speaker], 0.08)), 4),
                    "sad": round(_clip01(rng.normal(0.25 - 0.05 * sig.tone * label_f, 0.06)), 4),
                    "angry": round(_clip01(rng.normal(0.20 - 0.04 * sig.tone * label_f, 0.06)), 4),
                }
            )

    if positive:
        score = "pass+"
    else:
        score = ("fail", "pass-", "pass")[rng.integers(3)]
    meta = {
        "session_id": sid,
        "assessor_id": f"a{index % config.n_assessors:02d}",
        "assessed_at": (datetime(2024, 1, 1, 8) + timedelta(hours=index)).isoformat(),
        "gender": {
            "doctor": ("male", "female")[rng.integers(2)],
            "patient": ("male", "female")[rng.integers(2)],
        },
        "personality": {
            role: {
                trait: round(float(rng.uniform(0, 100)), 2)
                for trait in (
                    "openness", "conscientiousness", "extraversion",
                    "agreeableness", "neuroticism",
                )
            }
            for role in ("doctor", "patient")
        },
        "rapport_score": score,
    }
    return {
        "session_id": sid,
        "words": words,
        "events": events,
        "au": au_rows,
        "tone": tone_rows,
        "meta": meta,
        "label": positive,
    }


def _write_jsonl(rows, path: Path) -> None:
    with path.open("w", encoding="utf-8") as fh:
        for row in rows:
            fh.write(json.dumps(row, ensure_ascii=False) + "\n")


def synth_corpus(config: SynthConfig, out_dir: str | Path) -> Path:
    """Generate a corpus on disk in the ingest formats; returns the manifest path."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    manifest_sessions = []
    for i in range(config.n_sessions):
        data = generate_session(config, i)
        sid = data["session_id"]
        sdir = out / sid
        sdir.mkdir(exist_ok=True)
        _write_jsonl(data["words"]["doctor"], sdir / "words_doctor.jsonl")
        _write_jsonl(data["words"]["patient"], sdir / "words_patient.jsonl")
        _write_jsonl(data["events"], sdir / "events.jsonl")
        _write_jsonl(data["tone"], sdir / "tone.jsonl")
        with (sdir / "au.csv").open("w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(
                ["session_id", "speaker", "timestamp_ms", "au_id", "intensity", "present"]
            )
            for row in data["au"]:
                writer.writerow(
                    [
                        row["session_id"], row["speaker"], row["timestamp_ms"],
                        row["au_id"], row["intensity"],
                        "true" if row["present"] else "false",
                    ]
                )
        (sdir / "meta.json").write_text(
            json.dumps(data["meta"], indent=2) + "\n", encoding="utf-8"
        )
        manifest_sessions.append(
            {
                "session_id": sid,
                "words": [f"{sid}/words_doctor.jsonl", f"{sid}/words_patient.jsonl"],
                "events": f"{sid}/events.jsonl",
                "au": f"{sid}/au.csv",
                "tone": f"{sid}/tone.jsonl",
                "meta": f"{sid}/meta.json",
            }
        )
    manifest_path = out / "manifest.json"
    manifest_path.write_text(
        json.dumps({"root": ".", "sessions": manifest_sessions}, indent=2) + "\n",
        encoding="utf-8",
    )
    return manifest_path
