"""Hand-built fixture session used by the golden-narrative tests.

The session has 7 alternating turns with inter-turn delays of
150 / 450 / 1900 / 100 / 250 / 0(clamped) ms, every event kind, one fully
covered facial action unit and one partially covered one, plus tone frames
chosen to trigger one happy and one angry adverb. The expected narrative
texts were derived by hand from the template rules and frozen in
tests/golden/.
"""

from __future__ import annotations

from datetime import datetime, timedelta

from monah.features import compute_history, compute_vector
from monah.model import (
    AuFrame,
    AuId,
    EventKind,
    FeatureEvent,
    Gender,
    Personality,
    RapportScore,
    Session,
    SessionMeta,
    SpeakerRole,
    ToneFrame,
    WordToken,
)
from monah.narrative import CorpusStats, StatsEntry
from monah.segmentation import compute_delays, segment
from monah.sentiment import load_lexicon

D = SpeakerRole.DOCTOR
P = SpeakerRole.PATIENT

_NEUTRAL_PERSONALITY = Personality(50.0, 50.0, 50.0, 50.0, 50.0)

# (speaker, [(word, start, end), ...]) — delays between turns:
# None, 150, 450, 1900, 100, 250, clamped 0
FIXTURE_TURNS = [
    (D, [("hello", 0, 400), ("there", 500, 900)]),
    (P, [("hi", 1050, 1300), ("doctor", 1350, 1700)]),
    (D, [("what", 2150, 2450), ("brings", 2500, 2800), ("you", 2850, 3000),
         ("here", 3050, 3300), ("today", 3350, 3700)]),
    (P, [("i", 5600, 5700), ("have", 5750, 6000), ("a", 6050, 6100),
         ("headache", 6150, 6800)]),
    (D, [("how", 6900, 7200), ("long", 7250, 7600)]),
    (P, [("two", 7850, 8100), ("weeks", 8150, 8600), ("now", 8650, 9000)]),
    (D, [("okay", 8950, 9300), ("thanks", 9350, 9800)]),
]

FIXTURE_EVENTS = [
    FeatureEvent(EventKind.SMILE, D, 2200, 2600),
    FeatureEvent(EventKind.LAUGHTER, P, 6000, 6400),
    FeatureEvent(EventKind.NOD, P, 7000, 7300),
    FeatureEvent(EventKind.LEAN_FORWARD, D, 6950, 7100),
    FeatureEvent(EventKind.POSIFACE_NEGATIVE, P, 8200, 8500),
    FeatureEvent(EventKind.POSIFACE_POSITIVE, D, 9050, 9400),
]

FIXTURE_AU_FRAMES = [
    # au25 covers the whole of turn 2 and stays present -> template fires
    AuFrame(D, 2150, AuId.AU25, 2.0, True),
    AuFrame(D, 2500, AuId.AU25, 2.5, True),
    AuFrame(D, 2900, AuId.AU25, 3.0, True),
    AuFrame(D, 3300, AuId.AU25, 2.5, True),
    AuFrame(D, 3700, AuId.AU25, 2.0, True),
    # au05 has a non-present frame inside turn 2 -> suppressed
    AuFrame(D, 2200, AuId.AU05, 1.5, True),
    AuFrame(D, 2400, AuId.AU05, 3.0, False),
    # au17 spans only half of turn 3 -> below the 90% coverage bar
    AuFrame(P, 5600, AuId.AU17, 1.0, True),
    AuFrame(P, 5900, AuId.AU17, 1.5, True),
    AuFrame(P, 6200, AuId.AU17, 2.0, True),
]

FIXTURE_TONE_FRAMES = [
    ToneFrame(D, 2150, 2800, happy=0.3, sad=0.2, angry=0.1),
    ToneFrame(D, 2900, 3700, happy=0.4, sad=0.2, angry=0.2),
    ToneFrame(P, 5600, 6200, happy=0.9, sad=0.05, angry=0.05),
    ToneFrame(P, 6200, 6800, happy=0.8, sad=0.1, angry=0.1),
    ToneFrame(D, 8950, 9800, happy=0.2, sad=0.2, angry=0.45),
]


def fixture_meta(session_id: str = "fixture-001") -> SessionMeta:
    return SessionMeta(
        session_id=session_id,
        assessor_id="assessor-01",
        assessed_at=datetime(2024, 3, 10, 9, 0),
        doctor_gender=Gender.MALE,
        patient_gender=Gender.FEMALE,
        doctor_personality=_NEUTRAL_PERSONALITY,
        patient_personality=_NEUTRAL_PERSONALITY,
        rapport_score=RapportScore.PASS_PLUS,
    )


def fixture_session() -> Session:
    tokens = [
        WordToken(text, start, end, sp)
        for sp, words in FIXTURE_TURNS
        for text, start, end in words
    ]
    turns = compute_delays(segment(tokens))
    return Session(
        meta=fixture_meta(),
        turns=turns,
        events=tuple(FIXTURE_EVENTS),
        au_frames=tuple(FIXTURE_AU_FRAMES),
        tone_frames=tuple(FIXTURE_TONE_FRAMES),
    )


def fixture_prior_meta() -> list[SessionMeta]:
    """Three earlier sessions by the same assessor: pass+, pass, pass+."""
    base = datetime(2024, 3, 1, 9, 0)
    scores = [RapportScore.PASS_PLUS, RapportScore.PASS, RapportScore.PASS_PLUS]
    priors = [
        SessionMeta(
            session_id=f"prior-{i}",
            assessor_id="assessor-01",
            assessed_at=base + timedelta(days=i),
            doctor_gender=Gender.FEMALE,
            patient_gender=Gender.MALE,
            doctor_personality=_NEUTRAL_PERSONALITY,
            patient_personality=_NEUTRAL_PERSONALITY,
            rapport_score=score,
        )
        for i, score in enumerate(scores)
    ]
    return priors


# z targets for the handful of features meant to emit coarse clauses; every
# other feature gets mean=value so it lands in the neutral bucket
GOLDEN_Z_TARGETS = {
    "doctor_word_count": 1.4,            # high
    "doctor_au25_mean": 2.5,             # very high
    "patient_smile_count": -1.2,         # low
    "patient_delay_variance": -1.5,      # low
    "patient_tone_angry_mean": 1.3,      # high
    "doctor_sentiment_positive_mean": 1.2,   # high
    "patient_open_question_proportion": -2.4,  # very low
    "mimicry_tone_dtw": 1.5,             # high
    "assessor_prior_session_count": 2.3,  # very high
}

GOLDEN_FINE_STATS = {
    "fine_speech_rate": StatsEntry(mean=2.6, sd=0.26, n=10),
    "fine_tone_happy": StatsEntry(mean=0.4, sd=0.2, n=10),
    "fine_tone_sad": StatsEntry(mean=0.2, sd=0.1, n=10),
    "fine_tone_angry": StatsEntry(mean=0.15, sd=0.1, n=10),
}


def fixture_vector_and_stats():
    """Feature vector plus stats engineered to hit the golden buckets."""
    session = fixture_session()
    all_meta = fixture_prior_meta() + [session.meta]
    vector = compute_vector(session, load_lexicon(), all_meta)
    stats: CorpusStats = {}
    for name, value in vector.values.items():
        if value is None:
            continue
        z = GOLDEN_Z_TARGETS.get(name, 0.0)
        stats[name] = StatsEntry(mean=value - z, sd=1.0, n=5)
    stats.update(GOLDEN_FINE_STATS)
    return session, vector, stats
