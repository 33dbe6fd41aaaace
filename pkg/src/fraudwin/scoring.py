"""Additive fraud-risk scoring.

Each transaction context gets a small integer score per factor (transaction
rate, merchant category, time of day, location, authorization errors). The
sum estimates the intensity of fraudulent activity and is banded into
Normal / Uncertain / AttackStart by two thresholds.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from datetime import datetime
from enum import Enum
from typing import Dict, FrozenSet, Iterable, Optional, Tuple

from .core import CardholderProfile, ErrorFlag, InvalidInput, Transaction, hour_unusualness

ONLINE_STATE = "ONLINE"

# money transfer, quasi-cash/crypto, stored value, direct marketing, gambling
DEFAULT_HIGH_RISK_MCCS = frozenset({4829, 6051, 6540, 5960, 5964, 5966, 5967, 5968, 5969, 7800, 7801, 7802, 7995})


class Intensity(str, Enum):
    NORMAL = "Normal"
    UNCERTAIN = "Uncertain"
    ATTACK_START = "AttackStart"


def _default_error_scores() -> Dict[ErrorFlag, int]:
    return {
        ErrorFlag.BAD_CVV: 3,
        ErrorFlag.BAD_PIN: 3,
        ErrorFlag.BAD_ZIP: 2,
        ErrorFlag.INSUFFICIENT_BALANCE: 2,
        ErrorFlag.TECHNICAL_GLITCH: 2,
        ErrorFlag.BAD_EXPIRATION: 1,
        ErrorFlag.BAD_CARD_NUMBER: 1,
    }


@dataclass
class ScoreTable:
    """Per-factor score lookup. All scores are nonnegative integers."""

    gap_tiers: Tuple[Tuple[float, int], ...] = ((60.0, 3), (300.0, 2), (900.0, 1))
    mcc_risk: Dict[int, int] = field(default_factory=lambda: dict.fromkeys(DEFAULT_HIGH_RISK_MCCS, 3))
    mcc_default: int = 0
    night_hours: FrozenSet[int] = frozenset(range(0, 6))
    night_score: int = 2
    unusualness_cutoff: float = 0.9
    unusualness_score: int = 1
    geo_mismatch_score: int = 2
    error_scores: Dict[ErrorFlag, int] = field(default_factory=_default_error_scores)
    # authorization errors that do not map onto an ErrorFlag
    other_error_score: int = 1

    def __post_init__(self):
        self.gap_tiers = tuple((float(g), int(s)) for g, s in self.gap_tiers)
        self.night_hours = frozenset(self.night_hours)
        self.validate()

    def validate(self) -> None:
        gaps = [g for g, _ in self.gap_tiers]
        if gaps != sorted(gaps):
            raise InvalidInput("gap_tiers must be sorted by ascending max gap")
        scores = [s for _, s in self.gap_tiers]
        scores += list(self.mcc_risk.values()) + list(self.error_scores.values())
        scores += [self.mcc_default, self.night_score, self.unusualness_score,
                   self.geo_mismatch_score, self.other_error_score]
        if any(s < 0 for s in scores):
            raise InvalidInput("scores must be nonnegative")
        if any(not 0 <= h <= 23 for h in self.night_hours):
            raise InvalidInput("night_hours must lie in 0..23")

    @classmethod
    def zeros(cls) -> "ScoreTable":
        return cls(
            gap_tiers=((60.0, 0), (300.0, 0), (900.0, 0)),
            mcc_risk={},
            night_score=0,
            unusualness_score=0,
            geo_mismatch_score=0,
            error_scores=dict.fromkeys(ErrorFlag, 0),
            other_error_score=0,
        )


@dataclass(frozen=True, slots=True)
class ScoreCard:
    gap_score: int
    mcc_score: int
    time_score: int
    location_score: int
    error_score: int
    total: int
    intensity: Intensity

    def reasons(self) -> list:
        out = []
        if self.gap_score:
            out.append("SMALL_GAP")
        if self.mcc_score:
            out.append("HIGH_RISK_MCC")
        if self.time_score:
            out.append("UNUSUAL_TIME")
        if self.location_score:
            out.append("GEO_MISMATCH")
        if self.error_score:
            out.append("ERROR_FLAGS")
        return out


def score_gap(prev_time: Optional[datetime], now: datetime, table: ScoreTable) -> int:
    if prev_time is None:
        return 0
    gap = (now - prev_time).total_seconds()
    if gap < 0:
        warnings.warn(f"timestamp went backwards ({prev_time} -> {now}); treating gap as 0", stacklevel=2)
        gap = 0.0
    for max_gap, score in table.gap_tiers:
        if gap <= max_gap:
            return score
    return 0


def score_mcc(mcc: int, table: ScoreTable) -> int:
    return table.mcc_risk.get(mcc, table.mcc_default)


def score_time(hour: int, profile: CardholderProfile, table: ScoreTable) -> int:
    """Night-hour score plus a bonus for hours the card rarely uses.

    Halved (rounding down) while the profile is warming up.
    """
    score = table.night_score if hour in table.night_hours else 0
    if hour_unusualness(profile, hour) >= table.unusualness_cutoff:
        score += table.unusualness_score
    if profile.warming_up:
        score //= 2
    return score


def score_location(txn: Transaction, profile: CardholderProfile, table: ScoreTable) -> int:
    # ONLINE alone is location-neutral: every online purchase carries it
    state = txn.merchant_state
    if state == ONLINE_STATE or profile.modal_state is None or state == profile.modal_state:
        return 0
    score = table.geo_mismatch_score
    if profile.warming_up:
        score //= 2
    return score


def score_errors(errors: Iterable[ErrorFlag], table: ScoreTable, other_errors: Iterable[str] = ()) -> int:
    total = 0
    for e in errors:
        total += table.error_scores.get(e, table.other_error_score)
    for _ in other_errors:
        total += table.other_error_score
    return total


def classify_total(total: int, soft: int, hard: int) -> Intensity:
    if total >= hard:
        return Intensity.ATTACK_START
    if total >= soft:
        return Intensity.UNCERTAIN
    return Intensity.NORMAL


def total_score(
    txn: Transaction,
    prev_time: Optional[datetime],
    profile: CardholderProfile,
    table: ScoreTable,
    soft: int,
    hard: int,
) -> ScoreCard:
    if not 0 < soft < hard:
        raise InvalidInput(f"need 0 < soft < hard, got soft={soft} hard={hard}")
    gap = score_gap(prev_time, txn.timestamp, table)
    mcc = score_mcc(txn.mcc, table)
    tod = score_time(txn.timestamp.hour, profile, table)
    loc = score_location(txn, profile, table)
    err = score_errors(txn.errors, table, txn.other_errors)
    total = gap + mcc + tod + loc + err
    return ScoreCard(gap, mcc, tod, loc, err, total, classify_total(total, soft, hard))
