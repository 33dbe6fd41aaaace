"""Detection quality metrics over a labelled stream."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from datetime import timedelta
from typing import Dict, List, Optional, Sequence

from ..controller import Action, Decision, POSITIVE
from ..core import InvalidInput, Transaction

# fraud transactions of one card further apart than this belong to different attacks
EPISODE_GAP = timedelta(hours=1)

_PREVENTING = frozenset({Action.BLOCK, Action.STEP_UP_AUTH, Action.DATA_ENRICHMENT})


@dataclass
class EvalReport:
    precision: float
    recall: float
    false_positive_rate: float
    detection_latency: Optional[float]
    post_detection_block_rate: float
    loss_prevented: int  # cents
    loss_incurred: int  # cents
    tp: int = 0
    fp: int = 0
    tn: int = 0
    fn: int = 0
    attacks: int = 0
    attacks_detected: int = 0
    # precision/recall were undefined and reported as 1.0
    zero_positives: bool = False
    zero_fraud: bool = False
    latencies: List[int] = field(default_factory=list)

    def to_dict(self) -> Dict:
        d = asdict(self)
        d["loss_prevented"] = f"{self.loss_prevented / 100:.2f}"
        d["loss_incurred"] = f"{self.loss_incurred / 100:.2f}"
        return d


def is_positive(d: Decision) -> bool:
    return d.action in POSITIVE


def is_detection(d: Decision) -> bool:
    return d.action is Action.BLOCK or "ATTACK_START" in d.reasons


def attack_episodes(stream: Sequence[Transaction], gap: timedelta = EPISODE_GAP) -> List[List[int]]:
    """Group indices of fraud-labelled transactions into attacks, per card."""
    open_: Dict[str, List[int]] = {}
    episodes: List[List[int]] = []
    for i, txn in enumerate(stream):
        if not txn.fraud_label:
            continue
        cur = open_.get(txn.card_id)
        if cur is not None and txn.timestamp - stream[cur[-1]].timestamp <= gap:
            cur.append(i)
        else:
            cur = [i]
            open_[txn.card_id] = cur
            episodes.append(cur)
    return episodes


class Evaluator:
    """Incremental form of :func:`evaluate`; keeps only fraud-labelled rows."""

    def __init__(self, gap: timedelta = EPISODE_GAP):
        self.gap = gap
        self.tp = self.fp = self.tn = self.fn = 0
        self.prevented = self.incurred = 0
        self._fraud: List[Transaction] = []
        self._fraud_decisions: List[Decision] = []

    def add(self, d: Decision, txn: Transaction) -> None:
        pos = d.action in POSITIVE
        if not txn.fraud_label:
            if pos:
                self.fp += 1
            else:
                self.tn += 1
            return
        if pos:
            self.tp += 1
        else:
            self.fn += 1
        act = d.action
        if act in _PREVENTING:
            self.prevented += txn.amount
        elif act is Action.LIMIT_AMOUNT:
            authorized = min(txn.amount, round(d.cap * 100)) if d.cap is not None else txn.amount
            self.incurred += authorized
            self.prevented += txn.amount - authorized
        else:
            self.incurred += txn.amount
        self._fraud.append(txn)
        self._fraud_decisions.append(d)

    def report(self) -> EvalReport:
        tp, fp, tn, fn = self.tp, self.fp, self.tn, self.fn
        decisions = self._fraud_decisions
        latencies = []
        after = after_blocked = 0
        episodes = attack_episodes(self._fraud, self.gap)
        for ep in episodes:
            det = next((k for k, i in enumerate(ep) if is_detection(decisions[i])), None)
            if det is None:
                continue
            latencies.append(det)
            for i in ep[det + 1:]:
                after += 1
                if decisions[i].action in (Action.BLOCK, Action.LIMIT_AMOUNT):
                    after_blocked += 1
        return EvalReport(
            precision=tp / (tp + fp) if tp + fp else 1.0,
            recall=tp / (tp + fn) if tp + fn else 1.0,
            false_positive_rate=fp / (fp + tn) if fp + tn else 0.0,
            detection_latency=sum(latencies) / len(latencies) if latencies else None,
            post_detection_block_rate=after_blocked / after if after else 1.0,
            loss_prevented=self.prevented,
            loss_incurred=self.incurred,
            tp=tp, fp=fp, tn=tn, fn=fn,
            attacks=len(episodes),
            attacks_detected=len(latencies),
            zero_positives=tp + fp == 0,
            zero_fraud=tp + fn == 0,
            latencies=latencies,
        )


def evaluate(decisions: Sequence[Decision], stream: Sequence[Transaction],
             gap: timedelta = EPISODE_GAP) -> EvalReport:
    if len(decisions) != len(stream):
        raise InvalidInput(f"{len(decisions)} decisions for {len(stream)} transactions")
    ev = Evaluator(gap)
    for d, txn in zip(decisions, stream):
        ev.add(d, txn)
    return ev.report()
