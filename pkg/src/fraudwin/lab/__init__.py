"""Synthetic streams, attack injection, metrics and parameter sweeps."""

from .evaluate import EvalReport, Evaluator, attack_episodes, evaluate
from .generator import AttackParams, AttackSpec, GenParams, attack_at_fraction, card_specs, generate, inject_attacks
from .sweep import sweep

__all__ = [
    "AttackParams", "AttackSpec", "EvalReport", "Evaluator", "GenParams", "attack_at_fraction",
    "attack_episodes", "card_specs", "evaluate", "generate", "inject_attacks", "sweep",
]
