"""Engine configuration files.

Configs are TOML documents. Top-level keys map one-to-one onto
:class:`~fraudwin.core.EngineConfig` fields; score-table entries live in the
``[scores]``, ``[mcc_scores]`` and ``[error_scores]`` tables. Every key is
optional and falls back to the built-in default. Unknown keys are rejected so
typos surface instead of silently using defaults.
"""

from __future__ import annotations

import sys
from importlib import resources
from pathlib import Path
from typing import Any, Dict

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .core import EngineConfig, ErrorFlag, InvalidInput
from .scoring import ScoreTable


class ConfigError(InvalidInput):
    def __init__(self, key: str, msg: str):
        super().__init__(f"config key {key!r}: {msg}", key)


_ENGINE_KEYS = {
    "window_size": int,
    "forgetting_factor": float,
    "interval_multiplier": float,
    "std_floor_rel": float,
    "std_floor_abs": float,
    "warmup_min": int,
    "soft_threshold": int,
    "hard_threshold": int,
    "recovery_minutes": float,
    "recovery_txns": int,
    "small_amount_cap": float,
    "familiar_mcc_min": int,
}
_SET_KEYS = ("mcc_blocklist", "mcc_allowlist")
_SCORE_KEYS = {
    "mcc_default": int,
    "night_score": int,
    "unusualness_cutoff": float,
    "unusualness_score": int,
    "geo_mismatch_score": int,
    "other_error_score": int,
}


def _coerce(key, value, typ):
    if typ is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(key, f"expected integer, got {value!r}")
        return value
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(key, f"expected number, got {value!r}")
    return float(value)


def _int_list(key, value):
    if not isinstance(value, list) or not all(isinstance(v, int) and not isinstance(v, bool) for v in value):
        raise ConfigError(key, "expected a list of integers")
    return value


def config_from_dict(doc: Dict[str, Any]) -> EngineConfig:
    doc = dict(doc)
    kwargs = {}
    for key, typ in _ENGINE_KEYS.items():
        if key in doc:
            kwargs[key] = _coerce(key, doc.pop(key), typ)
    for key in _SET_KEYS:
        if key in doc:
            kwargs[key] = frozenset(_int_list(key, doc.pop(key)))

    table_kwargs = {}
    scores = dict(doc.pop("scores", {}))
    for key, typ in _SCORE_KEYS.items():
        if key in scores:
            table_kwargs[key] = _coerce(f"scores.{key}", scores.pop(key), typ)
    if "night_hours" in scores:
        table_kwargs["night_hours"] = frozenset(_int_list("scores.night_hours", scores.pop("night_hours")))
    if "gap_tiers" in scores:
        tiers = scores.pop("gap_tiers")
        try:
            table_kwargs["gap_tiers"] = tuple((float(g), int(s)) for g, s in tiers)
        except (TypeError, ValueError):
            raise ConfigError("scores.gap_tiers", "expected a list of [max_gap_seconds, score] pairs") from None
    if scores:
        raise ConfigError(f"scores.{next(iter(scores))}", "unknown key")

    if "mcc_scores" in doc:
        raw = doc.pop("mcc_scores")
        mcc_risk = {}
        for k, v in raw.items():
            try:
                mcc = int(k)
            except ValueError:
                raise ConfigError(f"mcc_scores.{k}", "MCC keys must be integers") from None
            mcc_risk[mcc] = _coerce(f"mcc_scores.{k}", v, int)
        table_kwargs["mcc_risk"] = mcc_risk
    if "error_scores" in doc:
        raw = doc.pop("error_scores")
        err = ScoreTable().error_scores
        for k, v in raw.items():
            try:
                flag = ErrorFlag(k)
            except ValueError:
                raise ConfigError(f"error_scores.{k}", "unknown error flag") from None
            err[flag] = _coerce(f"error_scores.{k}", v, int)
        table_kwargs["error_scores"] = err
    if doc:
        raise ConfigError(next(iter(doc)), "unknown key")

    try:
        kwargs["score_table"] = ScoreTable(**table_kwargs)
        return EngineConfig(**kwargs)
    except ConfigError:
        raise
    except InvalidInput as exc:
        raise ConfigError(exc.key or "<config>", str(exc)) from None


def config_to_dict(cfg: EngineConfig) -> Dict[str, Any]:
    out: Dict[str, Any] = {key: getattr(cfg, key) for key in _ENGINE_KEYS}
    for key in _SET_KEYS:
        out[key] = sorted(getattr(cfg, key))
    t = cfg.score_table
    out["scores"] = {key: getattr(t, key) for key in _SCORE_KEYS}
    out["scores"]["night_hours"] = sorted(t.night_hours)
    out["scores"]["gap_tiers"] = [[g, s] for g, s in t.gap_tiers]
    out["mcc_scores"] = {str(k): v for k, v in sorted(t.mcc_risk.items())}
    out["error_scores"] = {k.value: v for k, v in t.error_scores.items()}
    return out


def load_config(path) -> EngineConfig:
    path = Path(path)
    try:
        with path.open("rb") as fh:
            doc = tomllib.load(fh)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError("<file>", f"{path}: {exc}") from None
    return config_from_dict(doc)


def default_config_path() -> Path:
    return Path(str(resources.files("fraudwin") / "data" / "default_config.toml"))


def read_toml(path) -> Dict[str, Any]:
    with open(path, "rb") as fh:
        return tomllib.load(fh)
