"""On-disk corpus formats: parsing, validation and serialization.

A corpus is a manifest plus per-session files:

* ``words*.jsonl``  one token per line:
  ``{"session_id","speaker","word","start_ms","end_ms"}``
* ``events.jsonl``  ``{"session_id","speaker","kind","start_ms","end_ms"}``
* ``au.csv``        header ``session_id,speaker,timestamp_ms,au_id,intensity,present``
* ``tone.jsonl``    ``{"session_id","speaker","start_ms","end_ms","happy","sad","angry"}``
* ``meta.json``     one object with the session metadata
* ``manifest.json`` the corpus index

Word text is lowercased at load (ASR output is caseless and the downstream
embedding vocabulary is lowercase). Tokens from the per-speaker word files
are merged and ordered by (start_ms, end_ms, doctor-first, file order) so
loading is fully deterministic.
"""

from __future__ import annotations

import csv
import json
from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from datetime import datetime
from pathlib import Path

from .model import (
    AuFrame,
    AuId,
    EventKind,
    FeatureEvent,
    Gender,
    PERSONALITY_TRAITS,
    Personality,
    RapportScore,
    Session,
    SessionMeta,
    SpeakerRole,
    ToneFrame,
    WordToken,
    validate_session,
)
from .narrative import CorpusStats, FineTurn, Narrative, StatsEntry
from .segmentation import compute_delays, segment


class ParseError(ValueError):
    """Malformed line or file; the message carries the location."""


class SchemaError(ValueError):
    """A required field is missing or has the wrong shape."""


class ValidationError(ValueError):
    """The loaded session violates domain invariants."""

    def __init__(self, session_id: str, violations: list[str]):
        super().__init__(f"session {session_id}: " + "; ".join(violations))
        self.session_id = session_id
        self.violations = violations


@dataclass(frozen=True)
class ManifestEntry:
    session_id: str
    words: tuple[Path, ...]
    meta: Path
    events: Path | None = None
    au: Path | None = None
    tone: Path | None = None


@dataclass(frozen=True)
class CorpusManifest:
    root: Path
    entries: tuple[ManifestEntry, ...]

    def __iter__(self):
        return iter(self.entries)

    def __len__(self) -> int:
        return len(self.entries)

    def session_ids(self) -> list[str]:
        return [e.session_id for e in self.entries]


def load_manifest(path: str | Path) -> CorpusManifest:
    path = Path(path)
    if path.is_dir():
        path = path / "manifest.json"
    try:
        raw = json.loads(path.read_text("utf-8"))
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: {exc}") from exc
    base = path.parent / raw.get("root", ".")
    entries: list[ManifestEntry] = []
    seen: set[str] = set()
    for item in _require(raw, "sessions", path):
        sid = _require(item, "session_id", path)
        if sid in seen:
            raise SchemaError(f"{path}: duplicate session_id {sid!r}")
        seen.add(sid)
        words_raw = _require(item, "words", path)
        if isinstance(words_raw, str):
            words_raw = [words_raw]
        entry = ManifestEntry(
            session_id=sid,
            words=tuple(base / w for w in words_raw),
            meta=base / _require(item, "meta", path),
            events=base / item["events"] if item.get("events") else None,
            au=base / item["au"] if item.get("au") else None,
            tone=base / item["tone"] if item.get("tone") else None,
        )
        for p in (*entry.words, entry.meta, entry.events, entry.au, entry.tone):
            if p is not None and not p.exists():
                raise SchemaError(f"{path}: listed file does not exist: {p}")
        entries.append(entry)
    return CorpusManifest(root=base, entries=tuple(entries))


def _require(obj, key: str, where) -> object:
    if not isinstance(obj, dict) or key not in obj:
        raise SchemaError(f"{where}: missing field {key!r}")
    return obj[key]


def _jsonl(path: Path) -> Iterable[tuple[int, dict]]:
    with path.open("r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(f"{path}:{lineno}: {exc}") from exc
            if not isinstance(obj, dict):
                raise ParseError(f"{path}:{lineno}: expected an object")
            yield lineno, obj


def _speaker(value: object, where: str) -> SpeakerRole:
    try:
        return SpeakerRole(value)
    except ValueError:
        raise SchemaError(f"{where}: unknown speaker {value!r}") from None


def _int_field(obj: dict, key: str, where: str) -> int:
    v = _require(obj, key, where)
    if isinstance(v, bool) or not isinstance(v, int):
        raise SchemaError(f"{where}: field {key!r} must be an integer")
    return v


def _load_words(paths: Sequence[Path], session_id: str) -> list[WordToken]:
    tokens: list[tuple[tuple, WordToken]] = []
    for file_idx, path in enumerate(paths):
        for lineno, obj in _jsonl(path):
            where = f"{path}:{lineno}"
            if _require(obj, "session_id", where) != session_id:
                raise SchemaError(f"{where}: session_id mismatch")
            speaker = _speaker(_require(obj, "speaker", where), where)
            word = _require(obj, "word", where)
            if not isinstance(word, str):
                raise SchemaError(f"{where}: field 'word' must be a string")
            token = WordToken(
                text=word.lower(),
                start_ms=_int_field(obj, "start_ms", where),
                end_ms=_int_field(obj, "end_ms", where),
                speaker=speaker,
            )
            # doctor-first, then file order, keeps equal-timestamp merges stable
            sort_key = (
                token.start_ms,
                token.end_ms,
                0 if speaker is SpeakerRole.DOCTOR else 1,
                file_idx,
                lineno,
            )
            tokens.append((sort_key, token))
    tokens.sort(key=lambda t: t[0])
    return [t for _, t in tokens]


def _load_events(path: Path, session_id: str) -> list[FeatureEvent]:
    out = []
    for lineno, obj in _jsonl(path):
        where = f"{path}:{lineno}"
        if _require(obj, "session_id", where) != session_id:
            raise SchemaError(f"{where}: session_id mismatch")
        kind_raw = _require(obj, "kind", where)
        try:
            kind = EventKind(kind_raw)
        except ValueError:
            raise SchemaError(f"{where}: unknown event kind {kind_raw!r}") from None
        out.append(
            FeatureEvent(
                kind=kind,
                speaker=_speaker(_require(obj, "speaker", where), where),
                start_ms=_int_field(obj, "start_ms", where),
                end_ms=_int_field(obj, "end_ms", where),
            )
        )
    return out


_AU_HEADER = ["session_id", "speaker", "timestamp_ms", "au_id", "intensity", "present"]


def _load_au(path: Path, session_id: str) -> list[AuFrame]:
    out = []
    with path.open("r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError(f"{path}:1: empty au file") from None
        if header != _AU_HEADER:
            raise SchemaError(f"{path}: expected header {','.join(_AU_HEADER)}")
        for lineno, row in enumerate(reader, start=2):
            where = f"{path}:{lineno}"
            if len(row) != len(_AU_HEADER):
                raise ParseError(f"{where}: expected {len(_AU_HEADER)} columns")
            sid, speaker_raw, ts_raw, au_raw, intensity_raw, present_raw = row
            if sid != session_id:
                raise SchemaError(f"{where}: session_id mismatch")
            try:
                au = AuId(au_raw)
            except ValueError:
                raise SchemaError(f"{where}: unknown au_id {au_raw!r}") from None
            if present_raw not in ("true", "false"):
                raise ParseError(f"{where}: present must be 'true' or 'false'")
            try:
                ts = int(ts_raw)
                intensity = float(intensity_raw)
            except ValueError as exc:
                raise ParseError(f"{where}: {exc}") from None
            out.append(
                AuFrame(
                    speaker=_speaker(speaker_raw, where),
                    timestamp_ms=ts,
                    au_id=au,
                    intensity=intensity,
                    present=present_raw == "true",
                )
            )
    return out


def _load_tone(path: Path, session_id: str) -> list[ToneFrame]:
    out = []
    for lineno, obj in _jsonl(path):
        where = f"{path}:{lineno}"
        if _require(obj, "session_id", where) != session_id:
            raise SchemaError(f"{where}: session_id mismatch")
        channels = {}
        for ch in ("happy", "sad", "angry"):
            v = _require(obj, ch, where)
            if not isinstance(v, (int, float)) or isinstance(v, bool):
                raise SchemaError(f"{where}: field {ch!r} must be a number")
            channels[ch] = float(v)
        out.append(
            ToneFrame(
                speaker=_speaker(_require(obj, "speaker", where), where),
                start_ms=_int_field(obj, "start_ms", where),
                end_ms=_int_field(obj, "end_ms", where),
                **channels,
            )
        )
    return out


def _load_meta(path: Path, session_id: str) -> SessionMeta:
    try:
        obj = json.loads(path.read_text("utf-8"))
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: {exc}") from exc
    where = str(path)
    if _require(obj, "session_id", where) != session_id:
        raise SchemaError(f"{where}: session_id mismatch")
    genders = _require(obj, "gender", where)
    personalities = _require(obj, "personality", where)

    def gender_of(role: str) -> Gender:
        try:
            return Gender(_require(genders, role, f"{where}: gender"))
        except ValueError:
            raise SchemaError(f"{where}: unknown gender for {role}") from None

    def personality_of(role: str) -> Personality:
        raw = _require(personalities, role, f"{where}: personality")
        values = {}
        for trait in PERSONALITY_TRAITS:
            v = _require(raw, trait, f"{where}: personality.{role}")
            if not isinstance(v, (int, float)) or isinstance(v, bool):
                raise SchemaError(f"{where}: personality.{role}.{trait} must be a number")
            values[trait] = float(v)
        return Personality(**values)

    score_raw = _require(obj, "rapport_score", where)
    try:
        score = RapportScore(score_raw)
    except ValueError:
        raise SchemaError(f"{where}: unknown rapport_score {score_raw!r}") from None
    assessed_raw = _require(obj, "assessed_at", where)
    try:
        assessed_at = datetime.fromisoformat(assessed_raw)
    except (TypeError, ValueError):
        raise SchemaError(f"{where}: assessed_at must be ISO-8601") from None
    return SessionMeta(
        session_id=session_id,
        assessor_id=str(_require(obj, "assessor_id", where)),
        assessed_at=assessed_at,
        doctor_gender=gender_of("doctor"),
        patient_gender=gender_of("patient"),
        doctor_personality=personality_of("doctor"),
        patient_personality=personality_of("patient"),
        rapport_score=score,
    )


def load_session(entry: ManifestEntry) -> Session:
    """Load, segment and validate one session.

    Raises :class:`ParseError` / :class:`SchemaError` for malformed files
    and :class:`ValidationError` when the assembled session violates the
    domain invariants.
    """
    tokens = _load_words(entry.words, entry.session_id)
    turns = compute_delays(segment(tokens))
    session = Session(
        meta=_load_meta(entry.meta, entry.session_id),
        turns=turns,
        events=tuple(_load_events(entry.events, entry.session_id)) if entry.events else (),
        au_frames=tuple(_load_au(entry.au, entry.session_id)) if entry.au else (),
        tone_frames=tuple(_load_tone(entry.tone, entry.session_id)) if entry.tone else (),
    )
    violations = validate_session(session)
    if violations:
        raise ValidationError(entry.session_id, violations)
    return session


def load_corpus(path: str | Path) -> list[Session]:
    manifest = load_manifest(path)
    return [load_session(entry) for entry in manifest]


# --------------------------------------------------------------------------
# narrative serialization (canonical bytes: round-trips are bit-exact)
# --------------------------------------------------------------------------


def narrative_to_json(narrative: Narrative) -> str:
    payload = {
        "session_id": narrative.session_id,
        "coarse_text": narrative.coarse_text,
        "fine_turns": [
            {"turn_index": t.turn_index, "speaker": t.speaker.value, "text": t.text}
            for t in narrative.fine_turns
        ],
    }
    return json.dumps(payload, ensure_ascii=False, indent=2) + "\n"


def write_narrative(narrative: Narrative, path: str | Path) -> None:
    Path(path).write_text(narrative_to_json(narrative), encoding="utf-8")


def read_narrative(path: str | Path) -> Narrative:
    path = Path(path)
    try:
        obj = json.loads(path.read_text("utf-8"))
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: {exc}") from exc
    where = str(path)
    turns = []
    for raw in _require(obj, "fine_turns", where):
        turns.append(
            FineTurn(
                turn_index=_int_field(raw, "turn_index", where),
                speaker=_speaker(_require(raw, "speaker", where), where),
                text=str(_require(raw, "text", where)),
            )
        )
    return Narrative(
        session_id=str(_require(obj, "session_id", where)),
        coarse_text=str(_require(obj, "coarse_text", where)),
        fine_turns=tuple(turns),
    )


def write_narrative_txt(narrative: Narrative, path: str | Path) -> None:
    """The printable transcript: coarse text, blank line, one fine turn per line."""
    lines = [narrative.coarse_text, ""]
    lines.extend(t.text for t in narrative.fine_turns)
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


# --------------------------------------------------------------------------
# stats / folds / labels / features files
# --------------------------------------------------------------------------


def write_stats(stats: CorpusStats, path: str | Path) -> None:
    payload = {
        name: {"mean": e.mean, "sd": e.sd, "n": e.n}
        for name, e in sorted(stats.items())
    }
    Path(path).write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")


def read_stats(path: str | Path) -> CorpusStats:
    obj = json.loads(Path(path).read_text("utf-8"))
    return {
        name: StatsEntry(mean=float(e["mean"]), sd=float(e["sd"]), n=int(e["n"]))
        for name, e in obj.items()
    }


def write_features_csv(vectors, names: Sequence[str], path: str | Path) -> None:
    with Path(path).open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["session_id", *names])
        for vec in vectors:
            writer.writerow(
                [vec.session_id]
                + ["" if vec.values[n] is None else repr(vec.values[n]) for n in names]
            )


def read_features_csv(path: str | Path):
    """Rows of (session_id, {name: value-or-None}) from a features export."""
    from .features import CoarseFeatureVector

    out = []
    with Path(path).open("r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if not header or header[0] != "session_id":
            raise SchemaError(f"{path}: first column must be session_id")
        names = header[1:]
        for row in reader:
            values = {
                name: (None if cell == "" else float(cell))
                for name, cell in zip(names, row[1:])
            }
            out.append(CoarseFeatureVector(session_id=row[0], values=values))
    return out


def write_labels_csv(labels: dict[str, bool], path: str | Path) -> None:
    with Path(path).open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["session_id", "label"])
        for sid in sorted(labels):
            writer.writerow([sid, int(labels[sid])])


def read_labels_csv(path: str | Path) -> dict[str, bool]:
    out: dict[str, bool] = {}
    with Path(path).open("r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        next(reader)
        for row in reader:
            out[row[0]] = bool(int(row[1]))
    return out
