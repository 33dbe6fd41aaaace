"""Streaming detection and control of credit-card fraud attacks.

Per-card sliding window with exponential forgetting for amount outliers,
additive risk scoring for attack onset, and a collapse/recover controller.
"""

from .controller import Action, ControllerState, Decision, Mode, step
from .core import CardholderProfile, Channel, EngineConfig, ErrorFlag, InvalidInput, Transaction
from .engine import CheckpointError, Engine, OrderingError
from .kernels import BACKEND
from .scoring import Intensity, ScoreCard, ScoreTable, total_score
from .window import NoEstimate, Verdict, WindowState

__version__ = "0.1.0"

__all__ = [
    "Action", "BACKEND", "CardholderProfile", "Channel", "CheckpointError", "ControllerState",
    "Decision", "Engine", "EngineConfig", "ErrorFlag", "Intensity", "InvalidInput", "Mode",
    "NoEstimate", "OrderingError", "ScoreCard", "ScoreTable", "Transaction", "Verdict",
    "WindowState", "step", "total_score",
]
