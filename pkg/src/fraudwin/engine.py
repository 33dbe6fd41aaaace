"""Multi-card detection pipeline: profile -> score -> window -> controller."""

from __future__ import annotations

import hashlib
import json
import zlib
from dataclasses import dataclass
from datetime import datetime
from typing import Dict, Iterable, Iterator, List, Optional, Tuple

from .config import config_from_dict, config_to_dict
from .controller import Action, ControllerState, Decision, step
from .core import CardholderProfile, EngineConfig, InvalidInput, Transaction, update_profile
from .scoring import total_score
from .window import WindowState


class OrderingError(InvalidInput):
    def __init__(self, index: int, txn: Transaction, last_seq: int):
        super().__init__(
            f"record {index}: card {txn.card_id} seq_no {txn.seq_no} does not follow {last_seq}"
        )
        self.index = index
        self.txn = txn


class CheckpointError(ValueError):
    """Checkpoint bytes are corrupt, truncated, or from another format version."""


CHECKPOINT_MAGIC = b"FRAUDWIN-CKPT"
CHECKPOINT_VERSION = 1


@dataclass(slots=True)
class CardState:
    profile: CardholderProfile
    window: WindowState
    controller: ControllerState
    last_seen: Optional[datetime] = None
    last_seq: int = -1

    def to_dict(self) -> dict:
        return {
            "profile": self.profile.to_dict(),
            "window": self.window.to_dict(),
            "controller": self.controller.to_dict(),
            "last_seen": None if self.last_seen is None else self.last_seen.isoformat(),
            "last_seq": self.last_seq,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "CardState":
        return cls(
            profile=CardholderProfile.from_dict(d["profile"]),
            window=WindowState.from_dict(d["window"]),
            controller=ControllerState.from_dict(d["controller"]),
            last_seen=None if d["last_seen"] is None else datetime.fromisoformat(d["last_seen"]),
            last_seq=d["last_seq"],
        )


class Engine:
    """Per-card state plus counters.

    Cards are independent: a stream may be split by ``card_id`` and the parts
    run on separate engines, as long as each card's transactions stay in
    order within its part.
    """

    def __init__(self, cfg: Optional[EngineConfig] = None):
        self.cfg = cfg if cfg is not None else EngineConfig()
        self.cards: Dict[str, CardState] = {}
        self.counters: Dict[str, int] = _zero_counters()

    def card(self, card_id: str) -> CardState:
        st = self.cards.get(card_id)
        if st is None:
            st = CardState(
                CardholderProfile(card_id, familiar_threshold=self.cfg.familiar_mcc_min),
                WindowState.from_config(self.cfg),
                ControllerState(card_id),
            )
            self.cards[card_id] = st
        return st

    def process(self, txn: Transaction) -> Decision:
        txn.validate()
        st = self.cards.get(txn.card_id)
        if st is not None and txn.seq_no <= st.last_seq:
            raise OrderingError(-1, txn, st.last_seq)
        st = st or self.card(txn.card_id)
        cfg = self.cfg
        card = total_score(txn, st.last_seen, st.profile, cfg.score_table, cfg.soft_threshold, cfg.hard_threshold)
        _, _, decision = step(st.controller, st.window, card, txn, cfg, txn.timestamp)
        if decision.action in _PROFILE_UPDATING:
            update_profile(st.profile, txn)
        if st.last_seen is None or txn.timestamp > st.last_seen:
            st.last_seen = txn.timestamp
        st.last_seq = txn.seq_no
        c = self.counters
        c["processed"] += 1
        c[_COUNTER[decision.action]] += 1
        return decision

    def process_stream(self, txns: Iterable[Transaction]) -> Iterator[Decision]:
        """Lazily process ``txns`` in order, yielding one decision each."""
        for i, txn in enumerate(txns):
            try:
                yield self.process(txn)
            except OrderingError as exc:
                raise OrderingError(i, txn, self.cards[txn.card_id].last_seq) from exc

    def checkpoint(self) -> bytes:
        doc = {
            "version": CHECKPOINT_VERSION,
            "config": config_to_dict(self.cfg),
            "counters": self.counters,
            "cards": {k: v.to_dict() for k, v in self.cards.items()},
        }
        payload = zlib.compress(json.dumps(doc, sort_keys=True).encode())
        digest = hashlib.sha256(payload).digest()
        return CHECKPOINT_MAGIC + bytes([CHECKPOINT_VERSION]) + digest + payload

    @classmethod
    def restore(cls, blob: bytes) -> "Engine":
        head = len(CHECKPOINT_MAGIC)
        if len(blob) < head + 33 or not blob.startswith(CHECKPOINT_MAGIC):
            raise CheckpointError("not a checkpoint (bad magic or truncated header)")
        version = blob[head]
        if version != CHECKPOINT_VERSION:
            raise CheckpointError(f"unsupported checkpoint version {version}")
        digest, payload = blob[head + 1:head + 33], blob[head + 33:]
        if hashlib.sha256(payload).digest() != digest:
            raise CheckpointError("checkpoint payload corrupt or truncated")
        try:
            doc = json.loads(zlib.decompress(payload))
            eng = cls(config_from_dict(doc["config"]))
            eng.counters = dict(doc["counters"])
            eng.cards = {k: CardState.from_dict(v) for k, v in doc["cards"].items()}
        except (ValueError, KeyError, TypeError, zlib.error) as exc:
            raise CheckpointError(f"checkpoint payload unreadable: {exc}") from None
        return eng


_PROFILE_UPDATING = frozenset({Action.ALLOW, Action.FLAG, Action.LIMIT_AMOUNT})

_COUNTER = {
    Action.ALLOW: "allowed",
    Action.FLAG: "flagged",
    Action.BLOCK: "blocked",
    Action.LIMIT_AMOUNT: "limited",
    Action.STEP_UP_AUTH: "stepup",
    Action.DATA_ENRICHMENT: "enrichment",
}


def _zero_counters() -> Dict[str, int]:
    return {"processed": 0, **{name: 0 for name in _COUNTER.values()}}


def run(txns: Iterable[Transaction], cfg: Optional[EngineConfig] = None) -> Tuple[Engine, List[Decision]]:
    eng = Engine(cfg)
    return eng, list(eng.process_stream(txns))
