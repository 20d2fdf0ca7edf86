"""Python bindings for the ledgerml engine."""
import json as _json

from ._core import (
    Chain,
    ContractSyntaxError,
    LedgerError,
    ModelError,
    SimError,
    describe_model,
    det_exp,
    det_ln,
    dump_contract,
    format_contract,
    logit,
    score,
    softmax,
)
from ._core import run_simulation as _run_simulation

__all__ = [
    "Chain",
    "ContractSyntaxError",
    "LedgerError",
    "ModelError",
    "SimError",
    "describe_model",
    "det_exp",
    "det_ln",
    "dump_contract",
    "format_contract",
    "logit",
    "score",
    "simulate",
    "softmax",
]


def simulate(config, base_dir=""):
    """Run a simulation from a config dict or JSON string; returns the report as a dict."""
    text = config if isinstance(config, str) else _json.dumps(config)
    return _json.loads(_run_simulation(text, str(base_dir)))
