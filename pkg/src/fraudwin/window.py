"""Per-card sliding window with exponential forgetting.

The window keeps the last ``size`` accepted amounts (dollars, oldest first).
Weights are ``lam**(k - i)`` for buffer position ``i`` with ``k`` the newest
position, normalized by their sum. The detection threshold is the upper end
of ``mean +/- c * max(std, rho * mean + a0)``.

While an attack is being controlled the window is *collapsed*: mean and both
interval endpoints read as zero, so every positive amount is an outlier. The
pre-attack statistics are kept in a snapshot and restored by :func:`reset`.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional, Tuple

from . import kernels
from .core import InvalidInput


class NoEstimate(ValueError):
    """The window holds too few amounts to produce statistics."""


class Verdict(str, Enum):
    INLIER = "Inlier"
    UPPER_OUTLIER = "UpperOutlier"


@dataclass(frozen=True, slots=True)
class Snapshot:
    mean: Optional[float]
    std: Optional[float]
    amounts: Tuple[float, ...]


@dataclass(slots=True)
class WindowState:
    size: int = 20
    lam: float = 0.9
    c: float = 3.0
    rho: float = 0.1
    a0: float = 1.0
    amounts: List[float] = field(default_factory=list)
    collapsed: bool = False
    snapshot: Optional[Snapshot] = None
    # cached (mean, std); None when stale
    _stats: Optional[Tuple[float, float]] = None

    def __post_init__(self):
        if self.size < 1:
            raise InvalidInput("window size must be >= 1")
        if not 0.0 < self.lam <= 1.0:
            raise InvalidInput("forgetting factor must lie in (0, 1]")
        if self.c <= 0:
            raise InvalidInput("interval multiplier must be > 0")

    @classmethod
    def from_config(cls, cfg) -> "WindowState":
        return cls(
            size=cfg.window_size,
            lam=cfg.forgetting_factor,
            c=cfg.interval_multiplier,
            rho=cfg.std_floor_rel,
            a0=cfg.std_floor_abs,
        )

    def copy(self) -> "WindowState":
        return WindowState(
            self.size, self.lam, self.c, self.rho, self.a0,
            list(self.amounts), self.collapsed, self.snapshot, self._stats,
        )

    def __eq__(self, other):
        if not isinstance(other, WindowState):
            return NotImplemented
        return (
            self.size == other.size and self.lam == other.lam and self.c == other.c
            and self.rho == other.rho and self.a0 == other.a0
            and self.amounts == other.amounts and self.collapsed == other.collapsed
            and self.snapshot == other.snapshot
        )

    def stats(self) -> Tuple[float, float]:
        if self._stats is None:
            if not self.amounts:
                raise NoEstimate("empty window")
            self._stats = kernels.weighted_stats(self.amounts, self.lam)
        return self._stats

    def to_dict(self) -> dict:
        snap = None
        if self.snapshot is not None:
            snap = {
                "mean": self.snapshot.mean,
                "std": self.snapshot.std,
                "amounts": list(self.snapshot.amounts),
            }
        return {
            "size": self.size, "lam": self.lam, "c": self.c,
            "rho": self.rho, "a0": self.a0,
            "amounts": list(self.amounts),
            "collapsed": self.collapsed,
            "snapshot": snap,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "WindowState":
        snap = d["snapshot"]
        return cls(
            size=d["size"], lam=d["lam"], c=d["c"], rho=d["rho"], a0=d["a0"],
            amounts=list(d["amounts"]),
            collapsed=d["collapsed"],
            snapshot=None if snap is None else Snapshot(snap["mean"], snap["std"], tuple(snap["amounts"])),
        )


def observe(state: WindowState, amount: float) -> WindowState:
    """Append ``amount``, evicting the oldest entry once the window is full."""
    if amount < 0:
        raise InvalidInput(f"negative amount: {amount}")
    buf = state.amounts
    buf.append(float(amount))
    if len(buf) > state.size:
        del buf[0]
    state._stats = None
    return state


def weighted_mean(state: WindowState) -> float:
    """Exponentially weighted mean of the buffer; zero while collapsed."""
    if state.collapsed:
        return 0.0
    return state.stats()[0]


def weighted_std(state: WindowState) -> float:
    """Weighted population standard deviation around :func:`weighted_mean`."""
    if state.collapsed:
        return 0.0
    return state.stats()[1]


def interval(state: WindowState, min_count: int = 1) -> Tuple[float, float]:
    """Lower and upper detection thresholds; ``(0, 0)`` while collapsed.

    Raises :class:`NoEstimate` when fewer than ``min_count`` amounts are
    buffered.
    """
    if state.collapsed:
        return 0.0, 0.0
    if len(state.amounts) < max(min_count, 1):
        raise NoEstimate(f"{len(state.amounts)} amounts buffered, need {min_count}")
    m, s = state.stats()
    return kernels.interval_bounds(m, s, state.c, state.rho, state.a0)


def classify(state: WindowState, amount: float, min_count: int = 1) -> Verdict:
    # only the upper endpoint flags; the lower one is diagnostic
    hi = interval(state, min_count)[1]
    return Verdict.UPPER_OUTLIER if amount > hi else Verdict.INLIER


def collapse(state: WindowState) -> WindowState:
    """Zero the mean and thresholds, remembering the current statistics."""
    if state.collapsed:
        warnings.warn("collapse on an already collapsed window ignored", stacklevel=2)
        return state
    if state.amounts:
        m, s = state.stats()
    else:
        m = s = None
    state.snapshot = Snapshot(m, s, tuple(state.amounts))
    state.collapsed = True
    return state


def reset(state: WindowState) -> WindowState:
    """Restore the pre-collapse buffer and statistics exactly."""
    if not state.collapsed:
        raise InvalidInput("reset on a window that is not collapsed")
    snap = state.snapshot
    state.amounts = list(snap.amounts)
    state._stats = None if snap.mean is None else (snap.mean, snap.std)
    state.collapsed = False
    state.snapshot = None
    return state

