from datetime import datetime

from fraudwin.core import Channel, Transaction


def txn(card="u1c0", seq=0, when=datetime(2020, 3, 1, 14, 5), cents=1000, mcc=5411,
        state="CA", city="Fresno", errors=(), channel=Channel.CHIP, label=None, **kw):
    return Transaction(card, seq, when, cents, mcc, city, state, kw.pop("zip", "93650"), channel,
                       frozenset(errors), label, **kw)
