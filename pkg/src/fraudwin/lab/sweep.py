"""Grid sweeps over window and threshold parameters on one seeded stream."""

from __future__ import annotations

import csv
import itertools
import json
import warnings
from dataclasses import replace
from typing import IO, Dict, List, Optional, Sequence

from ..core import EngineConfig, InvalidInput, Transaction
from ..engine import run
from .evaluate import evaluate
from .generator import AttackSpec, GenParams, generate, inject_attacks

SWEEP_KEYS = ("window_size", "forgetting_factor", "interval_multiplier", "soft_threshold", "hard_threshold")


def grid_points(grid: Dict[str, Sequence]) -> List[Dict]:
    for key in grid:
        if key not in SWEEP_KEYS:
            raise InvalidInput(f"cannot sweep {key!r}; choose from {SWEEP_KEYS}")
    if not grid or any(len(v) == 0 for v in grid.values()):
        return []
    keys = list(grid)
    return [dict(zip(keys, combo)) for combo in itertools.product(*(grid[k] for k in keys))]


def count_outlier_blocks(decisions) -> int:
    """Blocks raised by the amount threshold outside attack control."""
    return sum(1 for d in decisions if "UPPER_OUTLIER" in d.reasons and "UNDER_ATTACK" not in d.reasons)


def count_attack_starts(decisions) -> int:
    return sum(1 for d in decisions if "ATTACK_START" in d.reasons)


def run_point(stream: Sequence[Transaction], cfg: EngineConfig) -> Dict:
    _, decisions = run(stream, cfg)
    rep = evaluate(decisions, stream)
    row = rep.to_dict()
    del row["latencies"]
    row["upper_outlier_blocks"] = count_outlier_blocks(decisions)
    row["attack_starts"] = count_attack_starts(decisions)
    return row


def sweep(grid: Dict[str, Sequence], gen: GenParams, attacks: Sequence[AttackSpec] = (),
          base: Optional[EngineConfig] = None, stream: Optional[Sequence[Transaction]] = None) -> List[Dict]:
    """One detect+evaluate run per grid point, all on the same stream.

    Rows are sorted by recall (descending) then false-positive rate
    (ascending); ties keep grid order. Points that make an invalid config
    (e.g. soft >= hard) are skipped with a warning.
    """
    base = base or EngineConfig()
    if stream is None:
        stream = inject_attacks(generate(gen), attacks, gen.seed)
    rows = []
    for point in grid_points(grid):
        try:
            cfg = replace(base, **point)
        except InvalidInput as exc:
            warnings.warn(f"skipping grid point {point}: {exc}", stacklevel=2)
            continue
        rows.append({**point, **run_point(stream, cfg)})
    rows.sort(key=lambda r: (-r["recall"], r["false_positive_rate"]))
    return rows


def write_table_csv(fh: IO[str], rows: List[Dict]) -> None:
    if not rows:
        return
    w = csv.DictWriter(fh, fieldnames=list(rows[0]), lineterminator="\n")
    w.writeheader()
    w.writerows(rows)


def write_table_json(fh: IO[str], rows: List[Dict]) -> None:
    json.dump(rows, fh, indent=1)
    fh.write("\n")
