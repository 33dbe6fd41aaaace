"""Synthetic card streams with injected fraud attacks.

Benign behaviour per card: lognormal amounts, purchases inside the card's
active hours, mostly in the home state, exponential gaps between purchases.
An attack is a short burst of online, high-risk-MCC transactions at night:
a few low-value probes followed by purchases at several times the card's
usual spend, often with authorization errors.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields, replace
from datetime import datetime, timedelta
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from ..core import Channel, ErrorFlag, InvalidInput, Transaction

STATES = ("CA", "NY", "TX", "FL", "IL", "PA", "OH", "GA", "WA", "MA")
CITIES = {
    "CA": ("Los Angeles", "San Diego", "Fresno"),
    "NY": ("New York", "Buffalo", "Albany"),
    "TX": ("Houston", "Austin", "Dallas"),
    "FL": ("Miami", "Orlando", "Tampa"),
    "IL": ("Chicago", "Peoria", "Naperville"),
    "PA": ("Philadelphia", "Pittsburgh", "Erie"),
    "OH": ("Columbus", "Cleveland", "Dayton"),
    "GA": ("Atlanta", "Savannah", "Macon"),
    "WA": ("Seattle", "Spokane", "Tacoma"),
    "MA": ("Boston", "Worcester", "Lowell"),
}
ZIP_BASE = {"CA": 90001, "NY": 10001, "TX": 73301, "FL": 32003, "IL": 60001,
            "PA": 15001, "OH": 43001, "GA": 30002, "WA": 98001, "MA": 1001}

DEFAULT_MCC_POOL = {
    5411: 0.25,  # grocery
    5812: 0.14,  # restaurants
    5814: 0.12,  # fast food
    5541: 0.12,  # fuel
    5912: 0.08,  # pharmacy
    5311: 0.08,  # department store
    5499: 0.08,  # misc food
    5300: 0.07,  # wholesale club
    4121: 0.06,  # taxi
}
BENIGN_ERRORS = (
    ErrorFlag.INSUFFICIENT_BALANCE, ErrorFlag.BAD_PIN, ErrorFlag.TECHNICAL_GLITCH,
    ErrorFlag.BAD_CVV, ErrorFlag.BAD_ZIP, ErrorFlag.BAD_EXPIRATION,
)


@dataclass
class GenParams:
    """Benign stream parameters.

    Per-card values (spend mean and CV, active hours, home state) are drawn
    from the given ranges; pass equal endpoints to pin them.
    """

    seed: int = 0
    n_cards: int = 10
    txns_per_card: int = 200
    spend_mean: Tuple[float, float] = (20.0, 120.0)
    spend_cv: Tuple[float, float] = (0.1, 0.25)
    # inclusive hour ranges for the first and last active hour of a day
    active_start: Tuple[int, int] = (6, 9)
    active_end: Tuple[int, int] = (20, 23)
    home_states: Tuple[str, ...] = STATES
    benign_gap_mean: float = 360.0  # minutes
    mcc_pool: Dict[int, float] = field(default_factory=lambda: dict(DEFAULT_MCC_POOL))
    online_prob: float = 0.1
    travel_prob: float = 0.02
    error_prob: float = 0.005
    start: datetime = datetime(2019, 1, 1, 8, 0)

    def __post_init__(self):
        self.spend_mean = tuple(self.spend_mean)
        self.spend_cv = tuple(self.spend_cv)
        self.active_start = tuple(self.active_start)
        self.active_end = tuple(self.active_end)
        self.home_states = tuple(self.home_states)
        self.mcc_pool = {int(k): float(v) for k, v in self.mcc_pool.items()}
        if self.n_cards < 0 or self.txns_per_card < 0:
            raise InvalidInput("n_cards and txns_per_card must be >= 0")
        if min(self.spend_mean) <= 0 or min(self.spend_cv) <= 0 or self.benign_gap_mean <= 0:
            raise InvalidInput("spend_mean, spend_cv and benign_gap_mean must be positive")
        if not 0 <= self.active_start[0] <= self.active_start[1] < self.active_end[0] <= self.active_end[1] <= 23:
            raise InvalidInput("active hours must satisfy start <= end within 0..23")
        if not 0 <= self.error_prob <= 0.01:
            raise InvalidInput("benign error_prob must lie in [0, 0.01]")
        for p in (self.online_prob, self.travel_prob):
            if not 0 <= p <= 1:
                raise InvalidInput("probabilities must lie in [0, 1]")
        if not self.mcc_pool or min(self.mcc_pool.values()) < 0:
            raise InvalidInput("mcc_pool needs nonnegative weights")

    @classmethod
    def from_dict(cls, d: dict) -> "GenParams":
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise InvalidInput(f"unknown generator keys: {sorted(unknown)}")
        d = dict(d)
        if "mcc_pool" in d:
            d["mcc_pool"] = {int(k): v for k, v in d["mcc_pool"].items()}
        if isinstance(d.get("start"), str):
            d["start"] = datetime.fromisoformat(d["start"])
        for key in ("spend_mean", "spend_cv"):
            if isinstance(d.get(key), (int, float)):
                d[key] = (float(d[key]), float(d[key]))
        return cls(**d)


@dataclass(frozen=True)
class CardSpec:
    card_id: str
    spend_mean: float
    spend_cv: float
    first_hour: int
    last_hour: int
    home_state: str


def card_id(i: int) -> str:
    return f"u{i}c0"


_EPOCH = datetime(1970, 1, 1)


def _rng(seed: int, *keys: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed & (2**64 - 1), *keys]))


def card_specs(gen: GenParams) -> List[CardSpec]:
    out = []
    for i in range(gen.n_cards):
        rng = _rng(gen.seed, 0, i)
        out.append(CardSpec(
            card_id=card_id(i),
            spend_mean=float(rng.uniform(*gen.spend_mean)),
            spend_cv=float(rng.uniform(*gen.spend_cv)),
            first_hour=int(rng.integers(gen.active_start[0], gen.active_start[1] + 1)),
            last_hour=int(rng.integers(gen.active_end[0], gen.active_end[1] + 1)),
            home_state=gen.home_states[int(rng.integers(len(gen.home_states)))],
        ))
    return out


def _card_stream(gen: GenParams, spec: CardSpec, index: int) -> List[Transaction]:
    n = gen.txns_per_card
    rng = _rng(gen.seed, 1, index)
    sigma2 = math.log1p(spec.spend_cv ** 2)
    mu = math.log(spec.spend_mean) - sigma2 / 2
    amounts = np.maximum(np.round(rng.lognormal(mu, math.sqrt(sigma2), n) * 100), 1).astype(np.int64)
    gaps = rng.exponential(gen.benign_gap_mean * 60.0, n)
    jitter = rng.uniform(0, 3600.0, n)
    mccs_keys = list(gen.mcc_pool)
    w = np.array([gen.mcc_pool[k] for k in mccs_keys], dtype=float)
    mccs = rng.choice(len(mccs_keys), size=n, p=w / w.sum())
    online = rng.random(n) < gen.online_prob
    travel = rng.random(n) < gen.travel_prob
    travel_state = rng.integers(len(STATES), size=n)
    city_pick = rng.integers(3, size=n)
    has_error = rng.random(n) < gen.error_prob
    error_pick = rng.integers(len(BENIGN_ERRORS), size=n)
    merchant = rng.integers(10**8, 10**9, size=n)

    home = spec.home_state
    t = gen.start
    out = []
    for k in range(n):
        t = t + timedelta(seconds=float(gaps[k]))
        # keep purchases inside the card's active hours
        if t.hour < spec.first_hour:
            t = t.replace(hour=spec.first_hour, minute=0, second=0, microsecond=0) + timedelta(seconds=float(jitter[k]))
        elif t.hour > spec.last_hour:
            nxt = (t + timedelta(days=1)).replace(hour=spec.first_hour, minute=0, second=0, microsecond=0)
            t = nxt + timedelta(seconds=float(jitter[k]))
        ts = t.replace(second=0, microsecond=0)
        if online[k]:
            channel, city, state, zipc = Channel.ONLINE, "ONLINE", "ONLINE", None
        else:
            state = STATES[int(travel_state[k])] if travel[k] else home
            city = CITIES.get(state, ("Springfield",) * 3)[int(city_pick[k])]
            zipc = f"{ZIP_BASE.get(state, 10000) + int(city_pick[k]) * 7:05d}"
            channel = Channel.CHIP if (merchant[k] & 3) else Channel.SWIPE
        errors = frozenset({BENIGN_ERRORS[int(error_pick[k])]}) if has_error[k] else frozenset()
        out.append(Transaction(
            card_id=spec.card_id, seq_no=k, timestamp=ts, amount=int(amounts[k]),
            mcc=mccs_keys[int(mccs[k])], merchant_city=city, merchant_state=state, zip=zipc,
            channel=channel, errors=errors, fraud_label=False, merchant_name=str(int(merchant[k])),
        ))
    return out


def generate(gen: GenParams) -> List[Transaction]:
    """Benign labelled stream, grouped by card and ordered by time."""
    out: List[Transaction] = []
    for i, spec in enumerate(card_specs(gen)):
        out.extend(_card_stream(gen, spec, i))
    return out


# -- attacks -------------------------------------------------------------------

@dataclass
class AttackParams:
    n_low: int = 3
    low_amount_range: Tuple[float, float] = (1.0, 10.0)
    high_amount_multiplier: float = 5.0
    attack_gap_range: Tuple[float, float] = (10.0, 120.0)  # seconds
    attack_mcc_pool: Tuple[int, ...] = (6051, 4829, 5967, 7995)
    error_prob: Dict[ErrorFlag, float] = field(
        default_factory=lambda: {ErrorFlag.TECHNICAL_GLITCH: 0.4, ErrorFlag.BAD_CVV: 0.4}
    )
    attack_hours: Tuple[int, int] = (0, 5)  # inclusive
    duration_txns: int = 12
    # defaults to the mean benign amount of the attacked card
    spend_mean: Optional[float] = None

    def __post_init__(self):
        self.low_amount_range = tuple(self.low_amount_range)
        self.attack_gap_range = tuple(self.attack_gap_range)
        self.attack_mcc_pool = tuple(self.attack_mcc_pool)
        self.attack_hours = tuple(self.attack_hours)
        self.error_prob = {ErrorFlag(k): float(v) for k, v in self.error_prob.items()}
        if not 0 <= self.n_low < self.duration_txns:
            raise InvalidInput("need 0 <= n_low < duration_txns")
        if self.high_amount_multiplier < 2:
            raise InvalidInput("high_amount_multiplier must be >= 2")
        if not 0 < self.low_amount_range[0] <= self.low_amount_range[1]:
            raise InvalidInput("bad low_amount_range")
        if not 0 <= self.attack_gap_range[0] <= self.attack_gap_range[1]:
            raise InvalidInput("bad attack_gap_range")
        if not 0 <= self.attack_hours[0] <= self.attack_hours[1] <= 23:
            raise InvalidInput("bad attack_hours")
        if not self.attack_mcc_pool:
            raise InvalidInput("attack_mcc_pool is empty")

    @classmethod
    def from_dict(cls, d: dict) -> "AttackParams":
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise InvalidInput(f"unknown attack keys: {sorted(unknown)}")
        return cls(**d)


@dataclass
class AttackSpec:
    card_id: str
    start_time: datetime
    params: AttackParams = field(default_factory=AttackParams)


def _attack_start(start: datetime, params: AttackParams, seed: int) -> datetime:
    # keyed on the requested start so equal specs snap to the same instant
    first, last = params.attack_hours
    if first <= start.hour <= last:
        return start
    day = start.replace(hour=0, minute=0, second=0, microsecond=0)
    if start.hour > last:
        day += timedelta(days=1)
    # leave room for the burst to finish inside the attack hours
    span = max((last - first + 1) * 3600.0 - 1800.0, 60.0)
    rng = _rng(seed, 3, int((start - _EPOCH).total_seconds()))
    return day + timedelta(hours=first, seconds=float(rng.uniform(0, span)))


def _attack_txns(spec: AttackSpec, spend_mean: float, seed: int, index: int) -> List[Transaction]:
    p = spec.params
    t = _attack_start(spec.start_time, p, seed)
    rng = _rng(seed, 2, index)
    out = []
    for k in range(p.duration_txns):
        if k:
            t = t + timedelta(seconds=float(rng.uniform(*p.attack_gap_range)))
        if k < p.n_low:
            dollars = rng.uniform(*p.low_amount_range)
        else:
            dollars = p.high_amount_multiplier * spend_mean * rng.uniform(0.8, 1.2)
        errors = frozenset(flag for flag, prob in p.error_prob.items() if rng.random() < prob)
        out.append(Transaction(
            card_id=spec.card_id, seq_no=0, timestamp=t.replace(second=0, microsecond=0),
            amount=max(int(round(dollars * 100)), 1),
            mcc=p.attack_mcc_pool[int(rng.integers(len(p.attack_mcc_pool)))],
            merchant_city="ONLINE", merchant_state="ONLINE", zip=None, channel=Channel.ONLINE,
            errors=errors, fraud_label=True, merchant_name=str(int(rng.integers(10**8, 10**9))),
        ))
    return out


def inject_attacks(stream: Sequence[Transaction], attacks: Sequence[AttackSpec], seed: int = 0) -> List[Transaction]:
    """Insert labelled attack bursts and renumber ``seq_no`` per card.

    The result is grouped by card (in order of first appearance) and sorted
    by time within a card; benign transactions precede attack transactions
    stamped with the same minute.
    """
    if not attacks:
        return list(stream)
    order: Dict[str, int] = {}
    by_card: Dict[str, List[Transaction]] = {}
    for txn in stream:
        order.setdefault(txn.card_id, len(order))
        by_card.setdefault(txn.card_id, []).append(txn)

    spans: Dict[str, List[Tuple[datetime, datetime]]] = {}
    injected: Dict[str, List[Transaction]] = {}
    for i, spec in enumerate(attacks):
        card = by_card.get(spec.card_id)
        if not card:
            raise InvalidInput(f"attack targets unknown card {spec.card_id!r}")
        first, last = card[0].timestamp, card[-1].timestamp
        if not first <= spec.start_time <= last:
            raise InvalidInput(f"attack {i} start {spec.start_time} outside card span {first}..{last}")
        spend = spec.params.spend_mean
        if spend is None:
            spend = sum(t.amount for t in card if not t.fraud_label) / 100.0 / max(
                1, sum(1 for t in card if not t.fraud_label))
        burst = _attack_txns(spec, spend, seed, i)
        lo, hi = burst[0].timestamp, burst[-1].timestamp
        for a, b in spans.get(spec.card_id, []):
            if lo <= b and a <= hi:
                raise InvalidInput(f"attack {i} overlaps an earlier attack on {spec.card_id}")
        spans.setdefault(spec.card_id, []).append((lo, hi))
        injected.setdefault(spec.card_id, []).extend(burst)

    out: List[Transaction] = []
    for cid in sorted(by_card, key=order.__getitem__):
        merged = by_card[cid] + injected.get(cid, [])
        merged.sort(key=lambda t: t.timestamp)
        out.extend(replace(t, seq_no=k) for k, t in enumerate(merged))
    return out


def attack_at_fraction(stream: Sequence[Transaction], cid: str, fraction: float,
                       params: Optional[AttackParams] = None) -> AttackSpec:
    """Attack spec starting ``fraction`` of the way through a card's time span."""
    times = [t.timestamp for t in stream if t.card_id == cid]
    if not times:
        raise InvalidInput(f"no transactions for card {cid!r}")
    start = times[0] + (times[-1] - times[0]) * fraction
    return AttackSpec(cid, start, params or AttackParams())
