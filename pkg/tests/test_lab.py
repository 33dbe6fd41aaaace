import io
from collections import Counter
from datetime import timedelta

import numpy as np
import pytest

from fraudwin.controller import Action, Decision, Mode
from fraudwin.core import EngineConfig, InvalidInput
from fraudwin.engine import run
from fraudwin.io import write_transactions
from fraudwin.lab import (
    AttackParams, AttackSpec, GenParams, attack_at_fraction, attack_episodes, card_specs, evaluate, generate,
    inject_attacks, sweep,
)
from fraudwin.lab.sweep import count_outlier_blocks


def csv_text(stream):
    buf = io.StringIO()
    write_transactions(buf, stream)
    return buf.getvalue()


def test_generate_deterministic():
    g = GenParams(seed=7, n_cards=3, txns_per_card=50)
    assert csv_text(generate(g)) == csv_text(generate(g))
    assert csv_text(generate(g)) != csv_text(generate(GenParams(seed=8, n_cards=3, txns_per_card=50)))


def test_generate_counts():
    s = generate(GenParams(seed=1, n_cards=2, txns_per_card=100))
    assert len(s) == 200
    for cid in ("u0c0", "u1c0"):
        assert [t.seq_no for t in s if t.card_id == cid] == list(range(100))
    assert not any(t.fraud_label for t in s)


def test_generate_benign_shape():
    g = GenParams(seed=3, n_cards=5, txns_per_card=400)
    s = generate(g)
    specs = {c.card_id: c for c in card_specs(g)}
    for t in s:
        spec = specs[t.card_id]
        assert spec.first_hour <= t.timestamp.hour <= spec.last_hour
    assert sum(bool(t.errors) for t in s) / len(s) <= 0.01 + 0.005
    by_card = {}
    for t in s:
        by_card.setdefault(t.card_id, []).append(t.timestamp)
    for ts in by_card.values():
        assert ts == sorted(ts)


def test_amount_mean_law_of_large_numbers():
    g = GenParams(seed=9, n_cards=1, txns_per_card=10_000)
    spec = card_specs(g)[0]
    amounts = np.array([t.amount for t in generate(g)]) / 100
    assert abs(amounts.mean() - spec.spend_mean) <= 0.10 * spec.spend_mean


@pytest.fixture(scope="module")
def base():
    return generate(GenParams(seed=4, n_cards=2, txns_per_card=200))


def test_inject_defaults(base):
    s = inject_attacks(base, [attack_at_fraction(base, "u0c0", 0.5)], seed=1)
    fraud = [t for t in s if t.fraud_label]
    assert len(fraud) == 12
    assert all(t.amount <= 1000 for t in fraud[:3])
    assert all(0 <= t.timestamp.hour <= 5 for t in fraud)
    assert len(s) == len(base) + 12
    seqs = [t.seq_no for t in s if t.card_id == "u0c0"]
    assert seqs == list(range(len(seqs)))


def test_attack_amounts_after_onset(base):
    s = inject_attacks(base, [attack_at_fraction(base, "u0c0", 0.5)], seed=1)
    spend = sum(t.amount for t in base if t.card_id == "u0c0") / 200 / 100
    p = AttackParams()
    floor = 0.8 * p.high_amount_multiplier * spend
    fraud = [t for t in s if t.fraud_label]
    assert floor >= 2 * spend
    assert all(t.amount / 100 >= floor - 0.01 for t in fraud[p.n_low:])


def test_label_conservation(base):
    attacks = [attack_at_fraction(base, "u0c0", 0.2), attack_at_fraction(base, "u0c0", 0.7),
               attack_at_fraction(base, "u1c0", 0.5, AttackParams(duration_txns=5, n_low=1))]
    s = inject_attacks(base, attacks, seed=3)
    assert sum(t.fraud_label for t in s) == 12 + 12 + 5


def test_zero_attacks_identity(base):
    assert inject_attacks(base, [], seed=1) == list(base)


def test_overlap_rejected(base):
    a = attack_at_fraction(base, "u0c0", 0.5)
    with pytest.raises(InvalidInput):
        inject_attacks(base, [a, AttackSpec(a.card_id, a.start_time, a.params)], seed=1)


def test_start_outside_span_rejected(base):
    a = attack_at_fraction(base, "u0c0", 0.5)
    with pytest.raises(InvalidInput):
        inject_attacks(base, [AttackSpec("u0c0", a.start_time + timedelta(days=3650))], seed=1)


def test_attack_params_validation():
    with pytest.raises(InvalidInput):
        AttackParams(n_low=12, duration_txns=12)
    with pytest.raises(InvalidInput):
        AttackParams(high_amount_multiplier=1.5)


def dec(action, cap=None, reasons=()):
    return Decision("u0c0", 0, action, tuple(reasons), 0, None, Mode.MONITORING, cap, None)


def test_evaluate_degenerate_all_allow(base):
    rep = evaluate([dec(Action.ALLOW)] * len(base), base)
    assert rep.false_positive_rate == 0.0
    assert rep.precision == 1.0 and rep.zero_positives
    assert rep.detection_latency is None


def test_evaluate_perfect_blocking(base):
    s = inject_attacks(base, [attack_at_fraction(base, "u0c0", 0.5)], seed=1)
    ds = [dec(Action.BLOCK) if t.fraud_label else dec(Action.ALLOW) for t in s]
    rep = evaluate(ds, s)
    assert rep.recall == 1.0 and rep.precision == 1.0
    assert rep.detection_latency == 0
    assert rep.post_detection_block_rate == 1.0
    assert rep.loss_incurred == 0
    assert rep.loss_prevented == sum(t.amount for t in s if t.fraud_label)


def test_evaluate_length_mismatch(base):
    with pytest.raises(InvalidInput):
        evaluate([], base)


def _recount(decisions, stream):
    """Independent confusion-matrix recount."""
    positive = {"Block", "LimitAmount", "StepUpAuth", "DataEnrichment", "Flag"}
    c = Counter()
    for d, t in zip(decisions, stream):
        c[(bool(t.fraud_label), d.action.value in positive)] += 1
    return c[(True, True)], c[(False, True)], c[(False, False)], c[(True, False)]


def test_evaluate_matches_recount_and_loss_identity():
    g = GenParams(seed=12, n_cards=5, txns_per_card=300)
    b = generate(g)
    s = inject_attacks(b, [attack_at_fraction(b, f"u{i}c0", 0.3 + 0.1 * i) for i in range(5)], seed=12)
    _, ds = run(s)
    rep = evaluate(ds, s)
    assert (rep.tp, rep.fp, rep.tn, rep.fn) == _recount(ds, s)
    assert rep.loss_prevented + rep.loss_incurred == sum(t.amount for t in s if t.fraud_label)
    for r in (rep.precision, rep.recall, rep.false_positive_rate, rep.post_detection_block_rate):
        assert 0.0 <= r <= 1.0


def test_limit_amount_loss_split(base):
    s = inject_attacks(base, [attack_at_fraction(base, "u0c0", 0.5)], seed=1)
    ds = [dec(Action.LIMIT_AMOUNT, cap=5.0) if t.fraud_label else dec(Action.ALLOW) for t in s]
    rep = evaluate(ds, s)
    fraud = [t.amount for t in s if t.fraud_label]
    assert rep.loss_incurred == sum(min(a, 500) for a in fraud)
    assert rep.loss_prevented + rep.loss_incurred == sum(fraud)


def test_episodes_split_by_card_and_gap(base):
    attacks = [attack_at_fraction(base, "u0c0", 0.2), attack_at_fraction(base, "u0c0", 0.7),
               attack_at_fraction(base, "u1c0", 0.5)]
    s = inject_attacks(base, attacks, seed=3)
    eps = attack_episodes(s)
    assert sorted(len(e) for e in eps) == [12, 12, 12]


GEN = GenParams(seed=21, n_cards=3, txns_per_card=200)


def test_sweep_single_point_matches_manual():
    rows = sweep({"interval_multiplier": [3.0]}, GEN)
    assert len(rows) == 1
    _, ds = run(generate(GEN), EngineConfig(interval_multiplier=3.0))
    rep = evaluate(ds, generate(GEN))
    assert rows[0]["false_positive_rate"] == rep.false_positive_rate
    assert rows[0]["upper_outlier_blocks"] == count_outlier_blocks(ds)


def test_sweep_empty_grid():
    assert sweep({}, GEN) == []


def test_sweep_fpr_nonincreasing_in_c():
    rows = sweep({"interval_multiplier": [2.0, 3.0, 4.0, 5.0]}, GEN)
    rows.sort(key=lambda r: r["interval_multiplier"])
    fprs = [r["false_positive_rate"] for r in rows]
    assert fprs == sorted(fprs, reverse=True)


def test_sweep_sorted_and_skips_invalid():
    b = generate(GEN)
    atk = [attack_at_fraction(b, "u0c0", 0.5)]
    with pytest.warns(UserWarning):
        rows = sweep({"soft_threshold": [5, 12], "hard_threshold": [10]}, GEN, atk)
    assert len(rows) == 1
    rows = sweep({"interval_multiplier": [2.0, 4.0], "hard_threshold": [9, 11]}, GEN, atk)
    keys = [(-r["recall"], r["false_positive_rate"]) for r in rows]
    assert keys == sorted(keys)


def test_sweep_rejects_unknown_key():
    with pytest.raises(InvalidInput):
        sweep({"small_amount_cap": [10]}, GEN)
