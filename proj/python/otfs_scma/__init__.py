"""OTFS-SCMA link-level simulator."""

import json

from ._core import (
    ComplexityError,
    Error,
    NumericalError,
    ValidationError,
    codebook_summary,
    coefficient_matrix,
    factor_matrix,
    isfft,
    lmmse_detect,
    noise_from_snr,
    parse_snr_range,
    sfft,
)
from . import _core

__all__ = [
    "ComplexityError",
    "Error",
    "NumericalError",
    "ValidationError",
    "codebook_summary",
    "coefficient_matrix",
    "factor_matrix",
    "isfft",
    "lmmse_detect",
    "noise_from_snr",
    "parse_snr_range",
    "run_ber",
    "run_csv",
    "sfft",
]


def run_ber(config):
    """Run a BER sweep. `config` is a dict using the JSON config keys."""
    return _core.run_ber(json.dumps(config))


def run_csv(config):
    """Same as run_ber, returning the CSV text the CLI would write."""
    return _core.run_csv(json.dumps(config))
