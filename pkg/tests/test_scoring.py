from datetime import datetime, timedelta

import pytest
from hypothesis import given
from hypothesis import strategies as st

from fraudwin.core import CardholderProfile, ErrorFlag, InvalidInput, update_profile
from fraudwin.scoring import (
    Intensity, ScoreCard, ScoreTable, classify_total, score_errors, score_gap, score_location, score_mcc,
    score_time, total_score,
)

from helpers import txn

T = ScoreTable()
NOW = datetime(2020, 5, 1, 12, 0)


def seasoned(hours=(12,) * 10, state="CA"):
    p = CardholderProfile("u1c0")
    for i, h in enumerate(hours):
        update_profile(p, txn(seq=i, state=state, when=datetime(2020, 1, 1 + i % 28, h)))
    return p


class TestGap:
    def test_first_transaction(self):
        assert score_gap(None, NOW, T) == 0

    def test_tiers(self):
        assert score_gap(NOW - timedelta(seconds=30), NOW, T) == 3
        assert score_gap(NOW - timedelta(seconds=60), NOW, T) == 3
        assert score_gap(NOW - timedelta(seconds=200), NOW, T) == 2
        assert score_gap(NOW - timedelta(seconds=900), NOW, T) == 1
        assert score_gap(NOW - timedelta(hours=2), NOW, T) == 0

    def test_backwards_time(self):
        with pytest.warns(UserWarning):
            assert score_gap(NOW + timedelta(minutes=5), NOW, T) == 3


class TestMcc:
    def test_quasi_cash(self):
        assert score_mcc(6051, T) == 3

    def test_grocery_default(self):
        assert score_mcc(5411, T) == 0

    def test_listed_score(self):
        assert score_mcc(5999, ScoreTable(mcc_risk={5999: 1})) == 1


class TestTime:
    def test_night_and_unseen(self):
        # night 00-05 -> 2, hour never seen (unusualness 1.0 >= 0.9) -> +1
        assert score_time(3, seasoned(), T) == 2 + 1

    def test_modal_daytime(self):
        assert score_time(12, seasoned(), T) == 0

    def test_warmup_halves(self):
        p = seasoned(hours=(12, 12))
        assert p.warming_up
        assert score_time(3, p, T) == 3 // 2 == 1


class TestLocation:
    def test_mismatch(self):
        assert score_location(txn(state="NY"), seasoned(), T) == 2

    def test_match(self):
        assert score_location(txn(state="CA"), seasoned(), T) == 0

    def test_online_neutral(self):
        assert score_location(txn(state="ONLINE"), seasoned(), T) == 0

    def test_warmup_halves(self):
        assert score_location(txn(state="NY"), seasoned(hours=(12,)), T) == 1


class TestErrors:
    def test_empty(self):
        assert score_errors(frozenset(), T) == 0

    def test_cvv(self):
        assert score_errors({ErrorFlag.BAD_CVV}, T) == 3

    def test_sum(self):
        assert score_errors({ErrorFlag.TECHNICAL_GLITCH, ErrorFlag.BAD_CVV}, T) == 2 + 3

    def test_unknown_text(self):
        assert score_errors(set(), T, {"Weird Decline"}) == 1


class TestTotal:
    def test_attack_start(self):
        # gap 30 s (3), quasi-cash (3), 03:00 unseen night hour (3), online (0), glitch + CVV (5)
        p = seasoned()
        t = txn(when=datetime(2020, 5, 1, 3, 0, 30), mcc=6051, state="ONLINE",
                errors={ErrorFlag.TECHNICAL_GLITCH, ErrorFlag.BAD_CVV})
        card = total_score(t, datetime(2020, 5, 1, 3, 0), p, T, 5, 10)
        assert (card.gap_score, card.mcc_score, card.time_score, card.location_score, card.error_score) == (3, 3, 3, 0, 5)
        assert card.total == 14
        assert card.intensity is Intensity.ATTACK_START

    def test_zero(self):
        card = total_score(txn(when=datetime(2020, 5, 1, 12)), None, seasoned(), T, 5, 10)
        assert card.total == 0 and card.intensity is Intensity.NORMAL

    def test_uncertain_band(self):
        assert classify_total(2 + 0 + 2 + 2 + 0, 5, 10) is Intensity.UNCERTAIN

    def test_bad_thresholds(self):
        with pytest.raises(InvalidInput):
            total_score(txn(), None, seasoned(), T, 10, 5)

    def test_all_zero_table_is_normal(self):
        t = txn(when=datetime(2020, 5, 1, 3), mcc=6051, state="NY", errors=set(ErrorFlag))
        card = total_score(t, datetime(2020, 5, 1, 2, 59, 50), seasoned(), ScoreTable.zeros(), 1, 2)
        assert card.total == 0 and card.intensity is Intensity.NORMAL

    def test_reasons(self):
        card = ScoreCard(3, 0, 2, 0, 5, 10, Intensity.ATTACK_START)
        assert card.reasons() == ["SMALL_GAP", "UNUSUAL_TIME", "ERROR_FLAGS"]


def test_table_validation():
    with pytest.raises(InvalidInput):
        ScoreTable(gap_tiers=((300, 2), (60, 3)))
    with pytest.raises(InvalidInput):
        ScoreTable(night_score=-1)


@given(
    gap_s=st.one_of(st.none(), st.integers(0, 5000)),
    hour=st.integers(0, 23),
    mcc=st.sampled_from([5411, 6051, 4829, 5812]),
    state=st.sampled_from(["CA", "NY", "ONLINE"]),
    errs=st.sets(st.sampled_from(list(ErrorFlag))),
    n_hist=st.integers(0, 12),
)
def test_total_is_sum_of_factors(gap_s, hour, mcc, state, errs, n_hist):
    p = seasoned(hours=(12,) * n_hist)
    now = datetime(2020, 6, 1, hour, 30)
    prev = None if gap_s is None else now - timedelta(seconds=gap_s)
    t = txn(when=now, mcc=mcc, state=state, errors=errs)
    card = total_score(t, prev, p, T, 5, 10)
    parts = (score_gap(prev, now, T), score_mcc(mcc, T), score_time(hour, p, T),
             score_location(t, p, T), score_errors(errs, T))
    assert (card.gap_score, card.mcc_score, card.time_score, card.location_score, card.error_score) == parts
    assert card.total == sum(parts)
    assert all(x >= 0 for x in parts)


@given(st.integers(0, 40), st.integers(0, 40))
def test_intensity_monotone_in_total(a, b):
    order = [Intensity.NORMAL, Intensity.UNCERTAIN, Intensity.ATTACK_START]
    lo, hi = sorted((a, b))
    assert order.index(classify_total(lo, 5, 10)) <= order.index(classify_total(hi, 5, 10))
