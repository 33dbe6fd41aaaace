"""Domain types shared across the engine, and the cardholder profile."""

from __future__ import annotations

from dataclasses import dataclass, field
from datetime import datetime
from enum import Enum
from typing import TYPE_CHECKING, FrozenSet, Optional

if TYPE_CHECKING:
    from .scoring import ScoreTable


class InvalidInput(ValueError):
    """A transaction or state failed validation. ``key`` names the offending field, if any."""

    def __init__(self, msg: str, key: Optional[str] = None):
        super().__init__(msg)
        self.key = key


class Channel(str, Enum):
    CHIP = "Chip"
    SWIPE = "Swipe"
    ONLINE = "Online"


class ErrorFlag(str, Enum):
    BAD_CVV = "BadCVV"
    BAD_PIN = "BadPIN"
    BAD_ZIP = "BadZip"
    INSUFFICIENT_BALANCE = "InsufficientBalance"
    TECHNICAL_GLITCH = "TechnicalGlitch"
    BAD_EXPIRATION = "BadExpiration"
    BAD_CARD_NUMBER = "BadCardNumber"


@dataclass(frozen=True, slots=True)
class Transaction:
    """One card event. ``amount`` is in integer cents.

    ``other_errors`` keeps authorization error texts that do not map onto an
    :class:`ErrorFlag`, so they survive a CSV round trip.
    """

    card_id: str
    seq_no: int
    timestamp: datetime
    amount: int
    mcc: int
    merchant_city: str = ""
    merchant_state: str = ""
    zip: Optional[str] = None
    channel: Channel = Channel.CHIP
    errors: FrozenSet[ErrorFlag] = frozenset()
    fraud_label: Optional[bool] = None
    merchant_name: str = ""
    other_errors: FrozenSet[str] = frozenset()

    def validate(self) -> None:
        if not isinstance(self.amount, int) or self.amount < 0:
            raise InvalidInput(f"amount must be nonnegative integer cents, got {self.amount!r}")
        if not 0 <= self.mcc <= 9999:
            raise InvalidInput(f"mcc out of range: {self.mcc}")
        if self.seq_no < 0:
            raise InvalidInput(f"negative seq_no: {self.seq_no}")
        if not isinstance(self.timestamp, datetime):
            raise InvalidInput("timestamp must be a datetime")

    @property
    def dollars(self) -> float:
        return self.amount / 100.0


PROFILE_WARMUP_TXNS = 5


@dataclass(slots=True)
class CardholderProfile:
    """Behavioural profile of one card, fed only by accepted transactions."""

    card_id: str
    familiar_threshold: int = 3
    active_hour_hist: list = field(default_factory=lambda: [0] * 24)
    modal_state: Optional[str] = None
    state_counts: dict = field(default_factory=dict)
    mcc_counts: dict = field(default_factory=dict)
    familiar_mccs: set = field(default_factory=set)
    last_txn_time: Optional[datetime] = None
    txn_count: int = 0

    @property
    def warming_up(self) -> bool:
        return self.txn_count < PROFILE_WARMUP_TXNS

    def to_dict(self) -> dict:
        return {
            "card_id": self.card_id,
            "familiar_threshold": self.familiar_threshold,
            "active_hour_hist": list(self.active_hour_hist),
            "modal_state": self.modal_state,
            "state_counts": dict(self.state_counts),
            "mcc_counts": {str(k): v for k, v in self.mcc_counts.items()},
            "familiar_mccs": sorted(self.familiar_mccs),
            "last_txn_time": self.last_txn_time.isoformat() if self.last_txn_time else None,
            "txn_count": self.txn_count,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "CardholderProfile":
        last = d["last_txn_time"]
        return cls(
            card_id=d["card_id"],
            familiar_threshold=d["familiar_threshold"],
            active_hour_hist=list(d["active_hour_hist"]),
            modal_state=d["modal_state"],
            state_counts=dict(d["state_counts"]),
            mcc_counts={int(k): v for k, v in d["mcc_counts"].items()},
            familiar_mccs=set(d["familiar_mccs"]),
            last_txn_time=datetime.fromisoformat(last) if last else None,
            txn_count=d["txn_count"],
        )


def update_profile(profile: CardholderProfile, txn: Transaction) -> CardholderProfile:
    """Fold an accepted transaction into ``profile`` (in place) and return it.

    Modal-state ties go to the state of the most recent transaction.
    """
    if txn.card_id != profile.card_id:
        raise InvalidInput(f"profile for {profile.card_id!r} got txn for {txn.card_id!r}")
    profile.active_hour_hist[txn.timestamp.hour] += 1
    profile.txn_count += 1

    state = txn.merchant_state
    counts = profile.state_counts
    n = counts.get(state, 0) + 1
    counts[state] = n
    modal = profile.modal_state
    if modal is None or n >= counts[modal]:
        profile.modal_state = state

    m = profile.mcc_counts.get(txn.mcc, 0) + 1
    profile.mcc_counts[txn.mcc] = m
    if m >= profile.familiar_threshold:
        profile.familiar_mccs.add(txn.mcc)

    if profile.last_txn_time is None or txn.timestamp > profile.last_txn_time:
        profile.last_txn_time = txn.timestamp
    return profile


def hour_unusualness(profile: CardholderProfile, hour: int) -> float:
    """1 - hist[hour] / max(hist); 1.0 for never-seen hours and empty profiles."""
    if not 0 <= hour <= 23:
        raise InvalidInput(f"hour out of range: {hour}")
    hist = profile.active_hour_hist
    top = max(hist)
    if top == 0:
        return 1.0
    return 1.0 - hist[hour] / top


@dataclass
class EngineConfig:
    """Tunable parameters of the detection pipeline.

    Amounts are dollars here (``std_floor_abs``, ``small_amount_cap``); the
    engine converts from cents at the window boundary.
    """

    window_size: int = 20
    forgetting_factor: float = 0.9
    interval_multiplier: float = 3.0
    std_floor_rel: float = 0.1
    std_floor_abs: float = 1.0
    warmup_min: int = 3
    score_table: "ScoreTable" = None  # type: ignore[assignment]
    soft_threshold: int = 5
    hard_threshold: int = 10
    recovery_minutes: float = 30.0
    recovery_txns: int = 10
    small_amount_cap: float = 50.0
    mcc_blocklist: Optional[FrozenSet[int]] = None
    mcc_allowlist: Optional[FrozenSet[int]] = None
    familiar_mcc_min: int = 3

    def __post_init__(self):
        from .scoring import ScoreTable, DEFAULT_HIGH_RISK_MCCS

        if self.score_table is None:
            self.score_table = ScoreTable()
        if self.mcc_blocklist is None:
            self.mcc_blocklist = DEFAULT_HIGH_RISK_MCCS
        if self.mcc_allowlist is None:
            self.mcc_allowlist = DEFAULT_ALLOWLIST
        self.mcc_blocklist = frozenset(self.mcc_blocklist)
        self.mcc_allowlist = frozenset(self.mcc_allowlist)
        self.validate()

    def validate(self) -> None:
        if not (isinstance(self.window_size, int) and self.window_size >= 1):
            raise InvalidInput("window_size must be an integer >= 1", "window_size")
        if not 0.0 < self.forgetting_factor <= 1.0:
            raise InvalidInput("forgetting_factor must lie in (0, 1]", "forgetting_factor")
        if self.interval_multiplier <= 0:
            raise InvalidInput("interval_multiplier must be > 0", "interval_multiplier")
        if self.std_floor_rel < 0 or self.std_floor_abs < 0:
            raise InvalidInput("std floor parameters must be >= 0", "std_floor_rel")
        if not 0 < self.soft_threshold < self.hard_threshold:
            raise InvalidInput("need 0 < soft_threshold < hard_threshold", "hard_threshold")
        if self.recovery_minutes <= 0:
            raise InvalidInput("recovery_minutes must be > 0", "recovery_minutes")
        if self.recovery_txns < 0:
            raise InvalidInput("recovery_txns must be >= 0 (0 disables the count limit)", "recovery_txns")
        if self.small_amount_cap < 0:
            raise InvalidInput("small_amount_cap must be >= 0", "small_amount_cap")
        if self.warmup_min < 1:
            raise InvalidInput("warmup_min must be >= 1", "warmup_min")


# grocery, pharmacies, service stations
DEFAULT_ALLOWLIST = frozenset({5411, 5912, 5541})

