import json
from pathlib import Path

import pytest

from monah import ingest
from monah.model import SpeakerRole
from monah.narrative import FineTurn, Narrative
from monah.synth import SynthConfig, synth_corpus


def _write(path: Path, lines):
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def _meta_obj(sid):
    return {
        "session_id": sid,
        "assessor_id": "a01",
        "assessed_at": "2024-01-05T10:00:00",
        "gender": {"doctor": "male", "patient": "female"},
        "personality": {
            role: {
                "openness": 50, "conscientiousness": 50, "extraversion": 50,
                "agreeableness": 50, "neuroticism": 50,
            }
            for role in ("doctor", "patient")
        },
        "rapport_score": "pass+",
    }


def _word_line(sid, speaker, word, start, end):
    return json.dumps(
        {"session_id": sid, "speaker": speaker, "word": word,
         "start_ms": start, "end_ms": end}
    )


@pytest.fixture
def tiny_corpus(tmp_path):
    sid = "s0001"
    sdir = tmp_path / sid
    sdir.mkdir()
    _write(sdir / "words_doctor.jsonl", [
        _word_line(sid, "doctor", "Hello", 0, 400),
        _word_line(sid, "doctor", "SO", 1500, 1800),
    ])
    _write(sdir / "words_patient.jsonl", [
        _word_line(sid, "patient", "hi", 500, 900),
    ])
    (sdir / "meta.json").write_text(json.dumps(_meta_obj(sid)), encoding="utf-8")
    manifest = {
        "root": ".",
        "sessions": [
            {
                "session_id": sid,
                "words": [f"{sid}/words_doctor.jsonl", f"{sid}/words_patient.jsonl"],
                "meta": f"{sid}/meta.json",
            }
        ],
    }
    (tmp_path / "manifest.json").write_text(json.dumps(manifest), encoding="utf-8")
    return tmp_path


def test_load_merges_and_orders_two_speaker_files(tiny_corpus):
    session = ingest.load_corpus(tiny_corpus)[0]
    texts = [w.text for t in session.turns for w in t.words]
    assert texts == ["hello", "hi", "so"]  # lowercased, time-merged
    assert [t.speaker for t in session.turns] == [
        SpeakerRole.DOCTOR, SpeakerRole.PATIENT, SpeakerRole.DOCTOR,
    ]
    assert session.turns[1].delay_before_ms == 100
    assert session.events == () and session.tone_frames == ()


def test_load_is_deterministic(tiny_corpus):
    a = ingest.load_corpus(tiny_corpus)[0]
    b = ingest.load_corpus(tiny_corpus)[0]
    assert a == b


def test_merge_preserves_token_multiset(tiny_corpus):
    sid = "s0001"
    doctor_lines = (tiny_corpus / sid / "words_doctor.jsonl").read_text().splitlines()
    patient_lines = (tiny_corpus / sid / "words_patient.jsonl").read_text().splitlines()
    session = ingest.load_corpus(tiny_corpus)[0]
    loaded = sorted(
        (w.text, w.start_ms, w.end_ms, w.speaker.value)
        for t in session.turns for w in t.words
    )
    raw = sorted(
        (json.loads(l)["word"].lower(), json.loads(l)["start_ms"],
         json.loads(l)["end_ms"], json.loads(l)["speaker"])
        for l in doctor_lines + patient_lines
    )
    assert loaded == raw


def test_equal_start_ties_doctor_first(tmp_path):
    sid = "s0002"
    sdir = tmp_path / sid
    sdir.mkdir()
    _write(sdir / "words.jsonl", [
        _word_line(sid, "patient", "b", 100, 200),
        _word_line(sid, "doctor", "a", 100, 200),
    ])
    (sdir / "meta.json").write_text(json.dumps(_meta_obj(sid)), encoding="utf-8")
    (tmp_path / "manifest.json").write_text(json.dumps({
        "root": ".",
        "sessions": [{"session_id": sid, "words": f"{sid}/words.jsonl",
                      "meta": f"{sid}/meta.json"}],
    }), encoding="utf-8")
    session = ingest.load_corpus(tmp_path)[0]
    first = session.turns[0].words[0]
    assert first.speaker is SpeakerRole.DOCTOR and first.text == "a"


def test_negative_start_is_validation_error(tiny_corpus):
    sid = "s0001"
    path = tiny_corpus / sid / "words_doctor.jsonl"
    _write(path, [_word_line(sid, "doctor", "bad", -5, 100)])
    with pytest.raises(ingest.ValidationError) as err:
        ingest.load_corpus(tiny_corpus)
    assert any("start_ms negative" in v for v in err.value.violations)


def test_missing_assessor_is_schema_error(tiny_corpus):
    sid = "s0001"
    meta = _meta_obj(sid)
    del meta["assessor_id"]
    (tiny_corpus / sid / "meta.json").write_text(json.dumps(meta), encoding="utf-8")
    with pytest.raises(ingest.SchemaError) as err:
        ingest.load_corpus(tiny_corpus)
    assert "assessor_id" in str(err.value)


def test_malformed_line_is_parse_error_with_line_number(tiny_corpus):
    sid = "s0001"
    path = tiny_corpus / sid / "words_doctor.jsonl"
    path.write_text(_word_line(sid, "doctor", "x", 0, 10) + "\n{oops\n", encoding="utf-8")
    with pytest.raises(ingest.ParseError) as err:
        ingest.load_corpus(tiny_corpus)
    assert ":2:" in str(err.value)


def test_manifest_missing_file_is_schema_error(tiny_corpus):
    (tiny_corpus / "s0001" / "words_patient.jsonl").unlink()
    with pytest.raises(ingest.SchemaError):
        ingest.load_manifest(tiny_corpus)


def test_manifest_duplicate_ids_rejected(tiny_corpus):
    manifest = json.loads((tiny_corpus / "manifest.json").read_text())
    manifest["sessions"].append(manifest["sessions"][0])
    (tiny_corpus / "manifest.json").write_text(json.dumps(manifest), encoding="utf-8")
    with pytest.raises(ingest.SchemaError):
        ingest.load_manifest(tiny_corpus)


# -- narrative round trips ----------------------------------------------------

def _narrative(sid="n-1", coarse="doctor number of words high", turns=2):
    return Narrative(
        session_id=sid,
        coarse_text=coarse,
        fine_turns=tuple(
            FineTurn(i, SpeakerRole.DOCTOR if i % 2 == 0 else SpeakerRole.PATIENT,
                     f"the doctor said, words {i}")
            for i in range(turns)
        ),
    )


def test_narrative_round_trip_bit_exact(tmp_path):
    narrative = _narrative()
    path = tmp_path / "n.json"
    ingest.write_narrative(narrative, path)
    loaded = ingest.read_narrative(path)
    assert loaded == narrative
    first_bytes = path.read_bytes()
    ingest.write_narrative(loaded, path)
    assert path.read_bytes() == first_bytes


def test_narrative_round_trip_empty_fine(tmp_path):
    narrative = _narrative(turns=0)
    path = tmp_path / "n.json"
    ingest.write_narrative(narrative, path)
    assert ingest.read_narrative(path) == narrative


def test_narrative_round_trip_unicode(tmp_path):
    narrative = Narrative(
        session_id="n-ü",
        coarse_text="the patient is female",
        fine_turns=(FineTurn(0, SpeakerRole.PATIENT, "naïve café 日本語"),),
    )
    path = tmp_path / "n.json"
    ingest.write_narrative(narrative, path)
    loaded = ingest.read_narrative(path)
    assert loaded == narrative
    first_bytes = path.read_bytes()
    ingest.write_narrative(loaded, path)
    assert path.read_bytes() == first_bytes


def test_narrative_txt_layout(tmp_path):
    narrative = _narrative(turns=2)
    path = tmp_path / "n.txt"
    ingest.write_narrative_txt(narrative, path)
    lines = path.read_text(encoding="utf-8").splitlines()
    assert lines[0] == narrative.coarse_text
    assert lines[1] == ""
    assert lines[2] == narrative.fine_turns[0].text


# -- generated corpus round trip ------------------------------------------------

def test_synth_corpus_loads_clean(tmp_path):
    synth_corpus(SynthConfig(n_sessions=3, mean_turns=12, sd_turns=3, seed=5), tmp_path)
    sessions = ingest.load_corpus(tmp_path)
    assert len(sessions) == 3
    for s in sessions:
        assert s.turns and s.events and s.au_frames and s.tone_frames


def test_corpus_reload_identity(tmp_path):
    synth_corpus(SynthConfig(n_sessions=2, mean_turns=10, sd_turns=2, seed=9), tmp_path)
    first = ingest.load_corpus(tmp_path)
    second = ingest.load_corpus(tmp_path)
    assert first == second


def test_stats_round_trip(tmp_path):
    from monah.narrative import StatsEntry

    stats = {"x": StatsEntry(mean=1.5, sd=0.25, n=4),
             "fine_speech_rate": StatsEntry(mean=2.603, sd=0.41, n=100)}
    path = tmp_path / "stats.json"
    ingest.write_stats(stats, path)
    assert ingest.read_stats(path) == stats


def test_features_csv_round_trip(tmp_path):
    from monah.features import CoarseFeatureVector

    vectors = [
        CoarseFeatureVector("s1", {"a": 1.25, "b": None}),
        CoarseFeatureVector("s2", {"a": None, "b": -0.5}),
    ]
    path = tmp_path / "features.csv"
    ingest.write_features_csv(vectors, ["a", "b"], path)
    loaded = ingest.read_features_csv(path)
    assert loaded == vectors
