"""Command-line interface.

Subcommands: detect, simulate, evaluate, sweep, plotdata. Failures exit
nonzero and print a one-line JSON error object on stderr.
"""

from __future__ import annotations

import argparse
import collections
import csv
import json
import sys
from datetime import datetime
from pathlib import Path
from typing import List, Optional

from .config import ConfigError, default_config_path, load_config, read_toml
from .core import InvalidInput
from .engine import CheckpointError, Engine
from .io import (
    RowError, SchemaError, TransactionReader, decision_line, format_money, read_decisions,
    read_transactions, write_transactions,
)
from .lab.evaluate import Evaluator, evaluate
from .lab.generator import AttackParams, AttackSpec, GenParams, attack_at_fraction, generate, inject_attacks
from .lab.sweep import SWEEP_KEYS, sweep, write_table_csv, write_table_json


class CliError(Exception):
    def __init__(self, kind: str, message: str, key: Optional[str] = None):
        super().__init__(message)
        self.kind = kind
        self.key = key


def _load_remap(path) -> dict:
    if path is None:
        return {}
    doc = read_toml(path)
    return {str(k): str(v) for k, v in doc.get("columns", doc).items()}


def cmd_detect(args) -> dict:
    if args.resume:
        if args.config:
            raise CliError("UsageError", "--resume uses the checkpoint's config; drop --config", "config")
        eng = Engine.restore(Path(args.resume).read_bytes())
    else:
        eng = Engine(load_config(args.config or default_config_path()))
    reasons = collections.Counter()
    ev = Evaluator()
    labelled = 0
    with open(args.input, newline="") as fin, open(args.out, "w") as fout:
        reader = TransactionReader(fin, strict=args.strict, remap=_load_remap(args.remap),
                                   last_seq={cid: st.last_seq for cid, st in eng.cards.items()})
        write = fout.write
        for txn in reader:
            d = eng.process(txn)
            write(decision_line(d))
            write("\n")
            reasons.update(d.reasons)
            if txn.fraud_label is not None:
                labelled += 1
                ev.add(d, txn)
    if args.checkpoint:
        Path(args.checkpoint).write_bytes(eng.checkpoint())
    summary = {
        "counters": eng.counters,
        "reasons": dict(sorted(reasons.items())),
        "rows": {"accepted": reader.stats.accepted, "skipped": reader.stats.skipped},
    }
    if labelled and labelled == reader.stats.accepted:
        summary["eval"] = ev.report().to_dict()
    return summary


def load_gen_params(path, seed: Optional[int]) -> GenParams:
    doc = read_toml(path) if path else {}
    doc = dict(doc.get("generator", doc))
    if seed is not None:
        doc["seed"] = seed
    return GenParams.from_dict(doc)


def load_attacks(path, stream) -> List[AttackSpec]:
    if path is None:
        return []
    doc = read_toml(path)
    specs = []
    for i, a in enumerate(doc.get("attack", [])):
        a = dict(a)
        params = AttackParams.from_dict(a.pop("params", {}))
        cid = a.pop("card_id")
        if "start" in a:
            start = a.pop("start")
            if isinstance(start, str):
                start = datetime.fromisoformat(start)
            specs.append(AttackSpec(cid, start, params))
        elif "at_fraction" in a:
            specs.append(attack_at_fraction(stream, cid, float(a.pop("at_fraction")), params))
        else:
            raise CliError("ConfigError", f"attack {i} needs 'start' or 'at_fraction'", f"attack[{i}]")
        if a:
            raise CliError("ConfigError", f"attack {i}: unknown keys {sorted(a)}", f"attack[{i}].{next(iter(a))}")
    return specs


def build_stream(params_path, attacks_path, seed):
    gen = load_gen_params(params_path, seed)
    stream = generate(gen)
    return gen, inject_attacks(stream, load_attacks(attacks_path, stream), gen.seed)


def cmd_simulate(args) -> dict:
    gen, stream = build_stream(args.params, args.attacks, args.seed)
    with open(args.out, "w", newline="") as fh:
        n = write_transactions(fh, stream)
    return {"transactions": n, "fraud": sum(1 for t in stream if t.fraud_label), "seed": gen.seed}


def cmd_evaluate(args) -> dict:
    decisions = read_decisions(args.decisions)
    truth = read_transactions(args.truth, strict=True)
    return evaluate(decisions, truth).to_dict()


def cmd_sweep(args) -> dict:
    grid = read_toml(args.grid)
    grid = dict(grid.get("grid", grid))
    for k, v in grid.items():
        if k not in SWEEP_KEYS:
            raise CliError("ConfigError", f"cannot sweep {k!r}", k)
        if not isinstance(v, list):
            grid[k] = [v]
    gen, stream = build_stream(args.params, args.attacks, args.seed)
    base = load_config(args.config or default_config_path())
    rows = sweep(grid, gen, base=base, stream=stream)
    with open(args.out, "w", newline="") as fh:
        write_table_csv(fh, rows)
    json_out = Path(args.out).with_suffix(".json")
    with open(json_out, "w") as fh:
        write_table_json(fh, rows)
    return {"rows": len(rows), "csv": str(args.out), "json": str(json_out)}


def cmd_plotdata(args) -> dict:
    decisions = read_decisions(args.decisions)
    truth = read_transactions(args.truth, strict=True)
    if len(decisions) != len(truth):
        raise CliError("InvalidInput", f"{len(decisions)} decisions for {len(truth)} transactions")
    n = 0
    with open(args.out, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["seq_no", "amount", "weighted_mean", "lo", "hi", "action", "fraud_label"])
        for d, t in zip(decisions, truth):
            if t.card_id != args.card:
                continue
            lo, hi = d.interval if d.interval is not None else (None, None)
            label = "" if t.fraud_label is None else int(t.fraud_label)
            w.writerow([t.seq_no, f"{t.amount / 100:.2f}", format_money(d.weighted_mean) or "",
                        format_money(lo) or "", format_money(hi) or "", d.action.value, label])
            n += 1
    if n == 0:
        raise CliError("InvalidInput", f"no transactions for card {args.card!r}", "card")
    return {"rows": n}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fraudwin", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    d = sub.add_parser("detect", help="run detection over a transaction CSV")
    d.add_argument("--input", required=True)
    d.add_argument("--config")
    d.add_argument("--out", required=True)
    d.add_argument("--checkpoint", help="write engine state here when done")
    d.add_argument("--resume", help="start from a checkpoint written by --checkpoint")
    d.add_argument("--strict", action="store_true", help="abort on the first malformed row")
    d.add_argument("--remap", help="TOML mapping canonical column names to file column names")
    d.set_defaults(func=cmd_detect)

    s = sub.add_parser("simulate", help="generate a labelled synthetic stream")
    s.add_argument("--params")
    s.add_argument("--attacks")
    s.add_argument("--seed", type=int)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_simulate)

    e = sub.add_parser("evaluate", help="score decisions against labelled transactions")
    e.add_argument("--decisions", required=True)
    e.add_argument("--truth", required=True)
    e.set_defaults(func=cmd_evaluate)

    w = sub.add_parser("sweep", help="grid sweep over window/threshold parameters")
    w.add_argument("--grid", required=True)
    w.add_argument("--params")
    w.add_argument("--attacks")
    w.add_argument("--seed", type=int)
    w.add_argument("--config")
    w.add_argument("--out", required=True)
    w.set_defaults(func=cmd_sweep)

    g = sub.add_parser("plotdata", help="per-transaction series for one card")
    g.add_argument("--decisions", required=True)
    g.add_argument("--truth", required=True)
    g.add_argument("--card", required=True)
    g.add_argument("--out", required=True)
    g.set_defaults(func=cmd_plotdata)
    return p


def _fail(kind: str, message: str, key: Optional[str] = None) -> int:
    err = {"error": kind, "message": message}
    if key is not None:
        err["key"] = key
    print(json.dumps(err), file=sys.stderr)
    return 1


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        result = args.func(args)
    except CliError as exc:
        return _fail(exc.kind, str(exc), exc.key)
    except ConfigError as exc:
        return _fail("ConfigError", str(exc), exc.key)
    except (RowError, SchemaError, CheckpointError, InvalidInput) as exc:
        return _fail(type(exc).__name__, str(exc), getattr(exc, "key", None))
    except KeyError as exc:
        return _fail("ConfigError", f"missing key {exc}", str(exc.args[0]))
    except FileNotFoundError as exc:
        return _fail("FileNotFound", str(exc), exc.filename)
    except OSError as exc:
        return _fail("IOError", str(exc))
    except ValueError as exc:
        return _fail("InvalidInput", str(exc))
    print(json.dumps(result, indent=1, sort_keys=True))
    return 0


if __name__ == "__main__":
    sys.exit(main())
