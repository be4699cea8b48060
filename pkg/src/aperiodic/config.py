"""Numeric defaults and parameter ranges shared by the command line."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

from .apfunctions import DEFAULT_STEP, DEFAULT_ZOO_TERMS
from .diffraction import BIN_TOLERANCE, BRAGG_L, NEGATIVE_TOLERANCE, PEAK_THRESHOLD_FRACTION
from .pointsets import InputError
from .seminorms import REFINE_TOL, WEYL_TRANSLATE_STEP


@dataclass(frozen=True)
class Param:
    default: object
    lo: float
    hi: float
    help: str
    integer: bool = False


INF = math.inf

DEFAULTS: dict[str, Param] = {
    "iterations": Param(12, 0, 40, "substitution steps for the Fibonacci word", integer=True),
    "N": Param(1000, 0, 10**8, "half-range of integer-based point sets", integer=True),
    "n": Param(None, 0, INF, "averaging half-width; default: largest [-n, n] inside the input window"),
    "grid_step": Param(DEFAULT_STEP, 0, 10, "sampling step of tabulated functions"),
    "zoo_terms": Param(DEFAULT_ZOO_TERMS, 1, 10**4, "truncation of the zoo series", integer=True),
    "half_width": Param(0.4, 0, 100, "test function half-width (tent or raised cosine)"),
    "y_step": Param(1e-3, 0, 1, "frequency grid step of the peak scan"),
    "threshold_fraction": Param(PEAK_THRESHOLD_FRACTION, 0, 1, "peak threshold as a fraction of the density"),
    "L": Param(BRAGG_L, 0, INF, "autocorrelation cutoff for Bragg intensities"),
    "bin_tolerance": Param(BIN_TOLERANCE, 0, 1, "pair-difference bin tolerance"),
    "negative_tolerance": Param(NEGATIVE_TOLERANCE, 0, 1, "raw intensity below -tol raises a warning"),
    "weyl_step": Param(WEYL_TRANSLATE_STEP, 0, INF, "translate step of the Weyl supremum"),
    "refine_tol": Param(REFINE_TOL, 0, 1, "golden-section tolerance of almost-period refinement"),
    "epsilon": Param(0.1, 0, INF, "almost-period threshold (strict <)"),
    "internal_radius": Param(0.2, 0, 10, "|m + n phi'| bound for Fibonacci candidate translates"),
    "K": Param(20, 1, 10**5, "number of peaks kept in a reconstruction", integer=True),
}


def default(name: str):
    return DEFAULTS[name].default


def check(name: str, value):
    """Validate ``value`` against the documented range of ``name``."""
    p = DEFAULTS[name]
    if value is None:
        return None
    if p.integer and int(value) != value:
        raise InputError(f"--{name.replace('_', '-')} must be an integer")
    # integer ranges are closed, real ones open at the bottom
    lower_ok = value >= p.lo if p.integer else value > p.lo
    if not lower_ok or value > p.hi:
        left = "[" if p.integer else "("
        raise InputError(f"--{name.replace('_', '-')}={value} outside the allowed range {left}{p.lo:g}, {p.hi:g}]")
    return value


def defaults_table() -> str:
    width = max(len(k) for k in DEFAULTS)
    rows = []
    for k, p in DEFAULTS.items():
        d = "auto" if p.default is None else f"{p.default:g}"
        rows.append(f"  {k:<{width}}  {d:>8}  {p.help}")
    return "defaults:\n" + "\n".join(rows)


@dataclass
class ExperimentConfig:
    """One CLI invocation: subcommand, its parameters and output path."""

    command: str
    params: dict = field(default_factory=dict)
    output: str | None = None

    def validate(self) -> "ExperimentConfig":
        for k, v in self.params.items():
            if k in DEFAULTS:
                check(k, v)
        return self

    def get(self, name: str):
        v = self.params.get(name)
        return default(name) if v is None else v
