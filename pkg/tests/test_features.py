import dataclasses
import random

import pytest

from monah.dtw import dtw_distance
from monah.features import (
    assemble,
    compute_actions,
    compute_demographics,
    compute_history,
    compute_mimicry,
    compute_prosody,
    compute_semantics,
    compute_vector,
)
from monah.model import SpeakerRole
from monah.registry import UnknownFeature, build_entries, CHILDREN, registry
from monah.sentiment import load_lexicon, question_type, score_turn

from fixtures import fixture_prior_meta, fixture_session

D = SpeakerRole.DOCTOR
P = SpeakerRole.PATIENT


@pytest.fixture(scope="module")
def lexicon():
    return load_lexicon()


@pytest.fixture(scope="module")
def session():
    return fixture_session()


# -- registry ---------------------------------------------------------------

def test_registry_matches_checked_in_file():
    assert list(registry().entries) == build_entries()


def test_registry_names_unique_and_children_covered():
    reg = registry()
    assert len(set(reg.names)) == len(reg.names)
    covered = {e.child for e in reg.entries}
    for child in CHILDREN:
        assert child in covered, f"table child {child} has no registry entry"


def test_registry_prime_selection():
    reg = registry()
    prime = set(reg.select({"D": "prime", "A": "prime", "P": "prime"}))
    assert "doctor_word_count" in prime
    assert "doctor_laughter_count" in prime
    assert "doctor_au05_mean" in prime
    assert "doctor_delay_mean" in prime
    assert "doctor_speech_rate_mean" in prime
    # the newly added children are excluded from the prime subset
    assert "doctor_smile_count" not in prime
    assert "doctor_tone_happy_mean" not in prime
    full = set(reg.select({"D": "full", "A": "full", "P": "full"}))
    assert prime < full


# -- demographics -----------------------------------------------------------

def test_word_count_proportion(session):
    part = compute_demographics(session)
    # doctor speaks 11 of 20 words in the fixture
    assert part["doctor_word_count"] == 11
    assert part["patient_word_count"] == 9
    assert part["doctor_word_proportion"] == pytest.approx(11 / 20)
    assert part["patient_word_proportion"] == pytest.approx(9 / 20)
    assert part["doctor_word_proportion"] + part["patient_word_proportion"] == pytest.approx(1.0)


def test_distinct_counts_all_distinct(session):
    part = compute_demographics(session)
    assert part["doctor_distinct_word_count"] == 11


def test_repeated_words_counted_once(session):
    words = list(session.turns[0].words)
    repeated = tuple(dataclasses.replace(words[0], text="yes") for _ in range(2))
    turn0 = dataclasses.replace(session.turns[0], words=(repeated[0], repeated[1]))
    s = dataclasses.replace(session, turns=(turn0,) + session.turns[1:])
    part = compute_demographics(s)
    assert part["doctor_word_count"] == 11
    assert part["doctor_distinct_word_count"] == 10  # "yes" twice, 9 others


def test_gender_indicator(session):
    part = compute_demographics(session)
    assert part["doctor_gender"] == 0.0
    assert part["patient_gender"] == 1.0


# -- actions ----------------------------------------------------------------

def test_event_counts(session):
    part = compute_actions(session)
    assert part["patient_laughter_count"] == 1
    assert part["doctor_smile_count"] == 1
    assert part["patient_nod_count"] == 1
    assert part["doctor_posiface_positive_count"] == 1
    assert part["patient_posiface_negative_count"] == 1


def test_au_stats_constant_values(session):
    frames = [f for f in session.au_frames]
    from monah.model import AuFrame, AuId

    frames += [AuFrame(P, 100 + i, AuId.AU20, 1.0, True) for i in range(3)]
    s = dataclasses.replace(session, au_frames=tuple(frames))
    part = compute_actions(s)
    assert part["patient_au20_min"] == 1.0
    assert part["patient_au20_max"] == 1.0
    assert part["patient_au20_mean"] == 1.0
    assert part["patient_au20_variance"] == 0.0


def test_au_population_variance(session):
    from monah.model import AuFrame, AuId

    frames = list(session.au_frames) + [
        AuFrame(P, 10, AuId.AU05, 0.0, True),
        AuFrame(P, 20, AuId.AU05, 2.0, True),
        AuFrame(P, 30, AuId.AU05, 4.0, True),
    ]
    s = dataclasses.replace(session, au_frames=tuple(frames))
    part = compute_actions(s)
    assert part["patient_au05_mean"] == pytest.approx(2.0)
    assert part["patient_au05_variance"] == pytest.approx(8 / 3)


def test_au_ignores_non_present_frames(session):
    part = compute_actions(session)
    # doctor au05 has one present frame (1.5) and one non-present (3.0)
    assert part["doctor_au05_mean"] == 1.5
    assert part["doctor_au05_variance"] == 0.0


def test_au_absent_without_present_frames(session):
    part = compute_actions(session)
    assert "doctor_au17_min" not in part


# -- prosody ----------------------------------------------------------------

def test_delay_stats(session):
    part = compute_prosody(session)
    # doctor delays: 450, 100, 0; patient delays: 150, 1900, 250
    assert part["doctor_delay_mean"] == pytest.approx((450 + 100 + 0) / 3)
    assert part["patient_delay_min"] == 150
    assert part["patient_delay_max"] == 1900


def test_delay_absent_for_single_turn(session, lexicon):
    s = dataclasses.replace(session, turns=session.turns[:1])
    part = compute_prosody(s)
    assert "doctor_delay_mean" not in part


def test_tone_means(session):
    part = compute_prosody(session)
    assert part["patient_tone_happy_mean"] == pytest.approx((0.9 + 0.8) / 2)
    assert part["doctor_tone_happy_mean"] == pytest.approx((0.3 + 0.4 + 0.2) / 3)


# -- semantics ---------------------------------------------------------------

def test_sentiment_no_hits_neutral(lexicon):
    s = score_turn(["xylophone", "qqq"], lexicon)
    assert s.composite == 0.0
    assert s.neutral == 1.0
    assert s.positive == 0.0 and s.negative == 0.0


def test_sentiment_fractions_sum_to_one(lexicon):
    rng = random.Random(0)
    vocab = list(lexicon) + ["zzz", "qqq", "www"]
    for _ in range(50):
        tokens = [rng.choice(vocab) for _ in range(rng.randint(1, 12))]
        s = score_turn(tokens, lexicon)
        assert s.positive + s.neutral + s.negative == pytest.approx(1.0, abs=1e-9)
        assert -1.0 <= s.composite <= 1.0


def test_question_heuristic():
    assert question_type("what brings you here today".split()) == "open"
    assert question_type("do you smoke".split()) == "closed"
    assert question_type("i feel fine".split()) is None


def test_semantics_proportions(session, lexicon):
    part = compute_semantics(session, lexicon)
    # doctor turns: "what brings..." (open), "how long" (open), others not
    assert part["doctor_open_question_proportion"] == pytest.approx(2 / 4)
    assert part["doctor_closed_question_proportion"] == 0.0
    assert part["patient_open_question_proportion"] == 0.0


# -- mimicry ----------------------------------------------------------------

def test_mimicry_identical_series_zero(session):
    part = compute_mimicry(session)
    assert part["mimicry_speech_rate_dtw"] >= 0


def test_mimicry_matches_dtw_oracle(session):
    from monah.features import mimicry_series

    series = mimicry_series(session)
    part = compute_mimicry(session)
    expected = dtw_distance(series.speech_rate[D], series.speech_rate[P])
    assert part["mimicry_speech_rate_dtw"] == pytest.approx(expected)


def test_mimicry_absent_without_tone(session):
    s = dataclasses.replace(session, tone_frames=())
    part = compute_mimicry(s)
    assert "mimicry_tone_dtw" not in part
    assert "mimicry_tone_happy_dtw" not in part
    assert "mimicry_speech_rate_dtw" in part


def test_mimicry_tone_sum(session):
    part = compute_mimicry(session)
    total = sum(part[f"mimicry_tone_{ch}_dtw"] for ch in ("happy", "sad", "angry"))
    assert part["mimicry_tone_dtw"] == pytest.approx(total)


# -- history ----------------------------------------------------------------

def test_history_counts_and_proportion(session):
    metas = fixture_prior_meta() + [session.meta]
    part = compute_history(metas, session.meta.session_id)
    assert part["assessor_prior_session_count"] == 3
    assert part["assessor_prior_extreme_proportion"] == pytest.approx(2 / 3)


def test_history_first_session_absent_proportion(session):
    part = compute_history([session.meta], session.meta.session_id)
    assert part["assessor_prior_session_count"] == 0
    assert "assessor_prior_extreme_proportion" not in part


def test_history_same_timestamp_not_counted(session):
    other = dataclasses.replace(
        session.meta, session_id="other", assessed_at=session.meta.assessed_at
    )
    part = compute_history([session.meta, other], session.meta.session_id)
    assert part["assessor_prior_session_count"] == 0


# -- assemble ---------------------------------------------------------------

def test_assemble_registry_cardinality(session, lexicon):
    vec = compute_vector(session, lexicon, [session.meta])
    assert list(vec.values.keys()) == list(registry().names)


def test_assemble_missing_tone_absent_only(session, lexicon):
    bare = dataclasses.replace(session, tone_frames=())
    vec = compute_vector(bare, lexicon, [bare.meta])
    full = compute_vector(session, lexicon, [session.meta])
    assert vec.values["doctor_tone_happy_mean"] is None
    assert vec.values["doctor_word_count"] == full.values["doctor_word_count"]
    assert vec.values["doctor_delay_mean"] == full.values["doctor_delay_mean"]


def test_assemble_deterministic(session, lexicon):
    a = compute_vector(session, lexicon, [session.meta])
    b = compute_vector(session, lexicon, [session.meta])
    assert a == b


def test_assemble_rejects_unknown_feature(session):
    with pytest.raises(UnknownFeature):
        assemble(session, [{"not_a_feature": 1.0}])
