"""Aperiodic point sets, their diffraction, and almost periodicity diagnostics."""
from .apfunctions import Grid, SampledFunction, TestFunction, TrigPolynomial
from .diffraction import Autocorrelation, Spectrum
from .pointsets import PHI, InputError, PointSet
from .seminorms import AlmostPeriodReport, SeminormKind

__all__ = [
    "PHI",
    "AlmostPeriodReport",
    "Autocorrelation",
    "Grid",
    "InputError",
    "PointSet",
    "SampledFunction",
    "SeminormKind",
    "Spectrum",
    "TestFunction",
    "TrigPolynomial",
]
__version__ = "0.1.0"
