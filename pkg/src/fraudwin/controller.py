"""Per-card attack control state machine.

Monitoring -> UnderAttack when the risk score reaches the hard threshold: the
window is collapsed so every positive amount exceeds the threshold and is
blocked. After the recovery horizon the pre-attack window is restored and the
card returns to Monitoring. Uncertain scores get softer mitigations (amount
limits, step-up authentication, data enrichment).
"""

from __future__ import annotations

from dataclasses import dataclass
from datetime import datetime, timedelta
from enum import Enum
from typing import Optional, Tuple

from .core import EngineConfig, InvalidInput, Transaction
from .scoring import Intensity, ScoreCard
from .window import NoEstimate, Verdict, WindowState, classify, collapse, interval, observe, reset, weighted_mean


class Mode(str, Enum):
    MONITORING = "Monitoring"
    UNDER_ATTACK = "UnderAttack"
    # transient: only exists inside a single step
    RECOVERING = "Recovering"


class Action(str, Enum):
    ALLOW = "Allow"
    FLAG = "Flag"
    BLOCK = "Block"
    LIMIT_AMOUNT = "LimitAmount"
    STEP_UP_AUTH = "StepUpAuth"
    DATA_ENRICHMENT = "DataEnrichment"


ACCEPTED = frozenset({Action.ALLOW, Action.FLAG, Action.LIMIT_AMOUNT})
POSITIVE = frozenset(Action) - {Action.ALLOW}


@dataclass(slots=True)
class ControllerState:
    card_id: str = ""
    mode: Mode = Mode.MONITORING
    attack_started_at: Optional[datetime] = None
    txns_since_attack: int = 0
    recovery_deadline: Optional[datetime] = None
    uncertain_streak: int = 0

    def to_dict(self) -> dict:
        return {
            "card_id": self.card_id,
            "mode": self.mode.value,
            "attack_started_at": _iso(self.attack_started_at),
            "txns_since_attack": self.txns_since_attack,
            "recovery_deadline": _iso(self.recovery_deadline),
            "uncertain_streak": self.uncertain_streak,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ControllerState":
        return cls(
            card_id=d["card_id"],
            mode=Mode(d["mode"]),
            attack_started_at=_dt(d["attack_started_at"]),
            txns_since_attack=d["txns_since_attack"],
            recovery_deadline=_dt(d["recovery_deadline"]),
            uncertain_streak=d["uncertain_streak"],
        )


def _iso(t):
    return None if t is None else t.isoformat()


def _dt(s):
    return None if s is None else datetime.fromisoformat(s)


@dataclass(frozen=True, slots=True)
class Decision:
    card_id: str
    seq_no: int
    action: Action
    reasons: Tuple[str, ...]
    score_total: int
    interval: Optional[Tuple[float, float]]
    mode_after: Mode
    cap: Optional[float] = None
    weighted_mean: Optional[float] = None

    @property
    def accepted(self) -> bool:
        return self.action in ACCEPTED


def step(
    cstate: ControllerState,
    wstate: WindowState,
    card: ScoreCard,
    txn: Transaction,
    cfg: EngineConfig,
    now: datetime,
) -> Tuple[ControllerState, WindowState, Decision]:
    """Advance one card by one transaction.

    ``cstate`` and ``wstate`` are updated in place and returned. Accepted
    outcomes (Allow, Flag, LimitAmount) are fed into the window; the caller
    is responsible for the matching profile update.
    """
    if cstate.card_id and cstate.card_id != txn.card_id:
        raise InvalidInput(f"controller for {cstate.card_id!r} got txn for {txn.card_id!r}")

    dollars = txn.amount / 100.0
    reasons = []
    cap = None
    recovered = False

    if cstate.mode is Mode.UNDER_ATTACK and (
        now >= cstate.recovery_deadline
        or (cfg.recovery_txns > 0 and cstate.txns_since_attack >= cfg.recovery_txns)
    ):
        cstate.mode = Mode.RECOVERING
        reset(wstate)
        cstate.mode = Mode.MONITORING
        cstate.attack_started_at = None
        cstate.recovery_deadline = None
        cstate.txns_since_attack = 0
        recovered = True

    intensity = card.intensity
    if cstate.mode is Mode.MONITORING and intensity is Intensity.ATTACK_START:
        collapse(wstate)
        cstate.mode = Mode.UNDER_ATTACK
        cstate.attack_started_at = now
        cstate.recovery_deadline = now + timedelta(minutes=cfg.recovery_minutes)
        cstate.txns_since_attack = 0
        cstate.uncertain_streak = 0
        action = Action.BLOCK
        reasons.append("ATTACK_START")
        reasons.extend(card.reasons())
    elif cstate.mode is Mode.UNDER_ATTACK:
        if classify(wstate, dollars) is Verdict.UPPER_OUTLIER:
            if txn.mcc in cfg.mcc_allowlist and dollars <= cfg.small_amount_cap:
                action = Action.LIMIT_AMOUNT
                cap = cfg.small_amount_cap
                reasons += ["UNDER_ATTACK", "ALLOWLISTED_MCC"]
            else:
                action = Action.BLOCK
                reasons += ["UNDER_ATTACK", "UPPER_OUTLIER"]
        else:
            # only a zero amount sits inside the collapsed interval
            action = Action.ALLOW
            reasons.append("UNDER_ATTACK")
    elif intensity is Intensity.UNCERTAIN:
        reasons.append("UNCERTAIN_SCORE")
        if txn.mcc in cfg.mcc_blocklist:
            action = Action.LIMIT_AMOUNT
            cap = cfg.small_amount_cap
            reasons.append("BLOCKLISTED_MCC")
        elif cstate.uncertain_streak == 0:
            action = Action.STEP_UP_AUTH
        else:
            action = Action.DATA_ENRICHMENT
        reasons.extend(card.reasons())
        cstate.uncertain_streak += 1
    else:
        cstate.uncertain_streak = 0
        try:
            verdict = classify(wstate, dollars, cfg.warmup_min)
        except NoEstimate:
            action = Action.ALLOW
            reasons.append("WARMUP")
        else:
            if verdict is Verdict.UPPER_OUTLIER:
                action = Action.BLOCK
                reasons.append("UPPER_OUTLIER")
            else:
                action = Action.ALLOW

    if recovered:
        reasons.append("RECOVERED")

    try:
        bounds = interval(wstate, cfg.warmup_min)
        mean = weighted_mean(wstate)
    except NoEstimate:
        bounds = None
        mean = None

    if action in ACCEPTED:
        observe(wstate, min(dollars, cap) if cap is not None else dollars)
        if cstate.mode is Mode.UNDER_ATTACK:
            cstate.txns_since_attack += 1

    decision = Decision(
        card_id=txn.card_id,
        seq_no=txn.seq_no,
        action=action,
        reasons=tuple(reasons),
        score_total=card.total,
        interval=bounds,
        mode_after=cstate.mode,
        cap=cap,
        weighted_mean=mean,
    )
    return cstate, wstate, decision
