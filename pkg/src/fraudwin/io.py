"""CSV transaction files and JSONL decision records.

The CSV layout follows the circulated IBM synthetic credit-card dataset::

    User,Card,Year,Month,Day,Time,Amount,Use Chip,Merchant Name,Merchant City,
    Merchant State,Zip,MCC,Errors?,Is Fraud?

``Is Fraud?`` is optional. Files with differently named columns can be read
through a header remap (canonical name -> name used in the file).
"""

from __future__ import annotations

import csv
import json
import re
import warnings
from dataclasses import dataclass
from datetime import datetime
from typing import IO, Dict, Iterable, Iterator, List, Optional, Sequence

from .controller import Action, Decision, Mode
from .core import Channel, ErrorFlag, InvalidInput, Transaction

COLUMNS = (
    "User", "Card", "Year", "Month", "Day", "Time", "Amount", "Use Chip",
    "Merchant Name", "Merchant City", "Merchant State", "Zip", "MCC",
    "Errors?", "Is Fraud?",
)
REQUIRED = COLUMNS[:-1]

CHANNEL_TEXT = {
    "Chip Transaction": Channel.CHIP,
    "Swipe Transaction": Channel.SWIPE,
    "Online Transaction": Channel.ONLINE,
}
_CHANNEL_OUT = {v: k for k, v in CHANNEL_TEXT.items()}

ERROR_TEXT = {
    "Bad CVV": ErrorFlag.BAD_CVV,
    "Bad PIN": ErrorFlag.BAD_PIN,
    "Bad Zipcode": ErrorFlag.BAD_ZIP,
    "Insufficient Balance": ErrorFlag.INSUFFICIENT_BALANCE,
    "Technical Glitch": ErrorFlag.TECHNICAL_GLITCH,
    "Bad Expiration": ErrorFlag.BAD_EXPIRATION,
    "Bad Card Number": ErrorFlag.BAD_CARD_NUMBER,
}
_ERROR_OUT = {v: k for k, v in ERROR_TEXT.items()}
# fixed output order keeps written files deterministic
_ERROR_ORDER = {flag: i for i, flag in enumerate(ErrorFlag)}

_CARD_ID = re.compile(r"u(.+)c([^c]+)$")


class SchemaError(InvalidInput):
    pass


class RowError(InvalidInput):
    def __init__(self, line: int, msg: str):
        super().__init__(f"line {line}: {msg}")
        self.line = line


def parse_amount(text: str) -> int:
    """``"$57.40"`` -> ``5740`` cents. Negative amounts are rejected."""
    # fast path for the canonical "$d.dd" form
    if text[:1] == "$" and text[-3:-2] == "." and text[1:-3].isdigit() and text[-2:].isdigit():
        return int(text[1:-3]) * 100 + int(text[-2:])
    s = text.strip()
    if s.startswith("$"):
        s = s[1:]
    whole, dot, frac = s.partition(".")
    if not whole.isdigit() or (dot and not (frac.isdigit() and len(frac) <= 2)):
        raise ValueError(f"bad amount {text!r}")
    return int(whole) * 100 + (int(frac.ljust(2, "0")) if dot else 0)


def format_amount(cents: int) -> str:
    return f"${cents // 100}.{cents % 100:02d}"


def format_money(x: Optional[float]) -> Optional[str]:
    return None if x is None else f"{x:.2f}"


def card_id_for(user, card) -> str:
    return f"u{user}c{card}"


def split_card_id(card_id: str):
    m = _CARD_ID.match(card_id)
    if m is None:
        raise InvalidInput(f"card id {card_id!r} is not of the form u<User>c<Card>")
    return m.group(1), m.group(2)


@dataclass
class ReadStats:
    accepted: int = 0
    skipped: int = 0
    unknown_errors: int = 0

    @property
    def rows(self) -> int:
        return self.accepted + self.skipped


class TransactionReader:
    """Iterate transactions from a CSV file object.

    In strict mode the first bad row raises :class:`RowError`; otherwise bad
    rows are skipped and counted in :attr:`stats`. ``seq_no`` is assigned per
    card in file order, continuing after ``last_seq`` when given (resuming
    from a checkpoint).
    """

    def __init__(self, fh: IO[str], strict: bool = True, remap: Optional[Dict[str, str]] = None,
                 last_seq: Optional[Dict[str, int]] = None):
        self.fh = fh
        self.strict = strict
        self.remap = remap or {}
        self.stats = ReadStats()
        self.errors: List[RowError] = []
        self._seq: Dict[str, int] = dict(last_seq or {})

    def _index(self, header: Sequence[str]) -> Dict[str, int]:
        pos = {name: i for i, name in enumerate(header)}
        idx = {}
        for col in COLUMNS:
            name = self.remap.get(col, col)
            if name in pos:
                idx[col] = pos[name]
            elif col in REQUIRED:
                raise SchemaError(f"missing column {name!r} (header: {list(header)})")
        return idx

    def __iter__(self) -> Iterator[Transaction]:
        reader = csv.reader(self.fh)
        try:
            header = next(reader)
        except StopIteration:
            return
        idx = self._index(header)
        cols = [idx[c] for c in REQUIRED]
        fraud_col = idx.get("Is Fraud?")
        seq = self._seq
        stats = self.stats
        for line, row in enumerate(reader, start=2):
            try:
                user, card, year, month, day, hhmm, amount, chip, name, city, state, zipc, mcc, errs = (
                    row[i] for i in cols
                )
                hh, _, mm = hhmm.partition(":")
                ts = datetime(int(year), int(month), int(day), int(hh), int(mm))
                cents = parse_amount(amount)
                channel = CHANNEL_TEXT[chip]
                mcc_i = int(mcc)
                if not 0 <= mcc_i <= 9999:
                    raise ValueError(f"MCC out of range: {mcc}")
                flags, other = _parse_errors(errs)
                label = None
                if fraud_col is not None:
                    lab = row[fraud_col]
                    if lab == "Yes":
                        label = True
                    elif lab == "No":
                        label = False
                    elif lab != "":
                        raise ValueError(f"bad fraud label {lab!r}")
            except (ValueError, KeyError, IndexError) as exc:
                err = RowError(line, str(exc) or type(exc).__name__)
                if self.strict:
                    raise err from None
                stats.skipped += 1
                self.errors.append(err)
                continue
            if other:
                stats.unknown_errors += 1
                warnings.warn(f"line {line}: unknown error text {sorted(other)}", stacklevel=2)
            if not state and channel is Channel.ONLINE:
                state = "ONLINE"
            zipc = _norm_zip(zipc)
            cid = f"u{user}c{card}"
            n = seq.get(cid, -1) + 1
            seq[cid] = n
            stats.accepted += 1
            yield Transaction(cid, n, ts, cents, mcc_i, city, state, zipc, channel, flags, label, name, other)


def _parse_errors(text: str):
    if not text:
        return frozenset(), frozenset()
    flags = []
    other = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        flag = ERROR_TEXT.get(part)
        if flag is None:
            other.append(part)
        else:
            flags.append(flag)
    return frozenset(flags), frozenset(other)


def _norm_zip(z: str) -> Optional[str]:
    if not z:
        return None
    if z.endswith(".0"):
        z = z[:-2]
    return z.zfill(5) if z.isdigit() else z


def read_transactions(path, strict: bool = True, remap: Optional[Dict[str, str]] = None) -> List[Transaction]:
    with open(path, newline="") as fh:
        return list(TransactionReader(fh, strict, remap))


def transaction_row(txn: Transaction, with_label: bool = True) -> list:
    user, card = split_card_id(txn.card_id)
    ts = txn.timestamp
    errs = sorted(txn.errors, key=_ERROR_ORDER.__getitem__)
    err_text = ",".join([_ERROR_OUT[e] for e in errs] + sorted(txn.other_errors))
    row = [
        user, card, ts.year, ts.month, ts.day, f"{ts.hour:02d}:{ts.minute:02d}",
        format_amount(txn.amount), _CHANNEL_OUT[txn.channel], txn.merchant_name,
        txn.merchant_city, txn.merchant_state, txn.zip or "", txn.mcc, err_text,
    ]
    if with_label:
        row.append("" if txn.fraud_label is None else ("Yes" if txn.fraud_label else "No"))
    return row


def write_transactions(fh: IO[str], txns: Iterable[Transaction], with_label: bool = True) -> int:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(COLUMNS if with_label else REQUIRED)
    n = 0
    for txn in txns:
        w.writerow(transaction_row(txn, with_label))
        n += 1
    return n


# -- decisions ---------------------------------------------------------------

def decision_record(d: Decision) -> dict:
    lo, hi = d.interval if d.interval is not None else (None, None)
    return {
        "card_id": d.card_id,
        "seq_no": d.seq_no,
        "action": d.action.value,
        "reasons": list(d.reasons),
        "score_total": d.score_total,
        "interval_lo": format_money(lo),
        "interval_hi": format_money(hi),
        "mode_after": d.mode_after.value,
        "cap": format_money(d.cap),
        "weighted_mean": format_money(d.weighted_mean),
    }


_ENCODER = json.JSONEncoder(separators=(",", ":"))


def decision_line(d: Decision) -> str:
    return _ENCODER.encode(decision_record(d))


def write_decisions(fh: IO[str], decisions: Iterable[Decision]) -> int:
    n = 0
    try:
        for d in decisions:
            fh.write(decision_line(d))
            fh.write("\n")
            n += 1
    except OSError as exc:
        raise IOError(f"decision sink write failed after {n} records: {exc}") from exc
    return n


def _money(s):
    return None if s is None else float(s)


def parse_decision(line: str) -> Decision:
    r = json.loads(line)
    lo, hi = _money(r["interval_lo"]), _money(r["interval_hi"])
    return Decision(
        card_id=r["card_id"],
        seq_no=r["seq_no"],
        action=Action(r["action"]),
        reasons=tuple(r["reasons"]),
        score_total=r["score_total"],
        interval=None if lo is None else (lo, hi),
        mode_after=Mode(r["mode_after"]),
        cap=_money(r.get("cap")),
        weighted_mean=_money(r.get("weighted_mean")),
    )


def read_decisions(path) -> List[Decision]:
    with open(path) as fh:
        return [parse_decision(line) for line in fh if line.strip()]
