"""Finite-size estimators for the sup, Besicovitch and Weyl seminorms.

The seminorms are limits (or limsups) over growing windows; here every
estimator works at one explicit half-width ``n`` and says so in its
output.  Averages integrate the piecewise-linear interpolant of ``|f|``
exactly, which makes ``besicovitch <= weyl <= sup`` hold sample by sample.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._util import golden_section, parallel_map
from .apfunctions import SampledFunction, TrigPolynomial
from .pointsets import PHI, PHI_CONJ, InputError

WEYL_TRANSLATE_STEP = 0.1
REFINE_TOL = 1e-6
_ALIGN_TOL = 1e-9
_SUP_CHUNK = 4096


@dataclass(frozen=True)
class SeminormKind:
    """Which seminorm to estimate, with its finite-size parameters.

    ``sup`` takes the maximum over the whole usable grid unless ``n`` is
    given.  ``weyl`` takes the largest window average over the translates
    ``translate_range`` (default ``[0, 2n]``) sampled at ``translate_step``,
    plus any ``extra_translates``.
    """

    tag: str
    n: float | None = None
    translate_step: float = WEYL_TRANSLATE_STEP
    translate_range: tuple[float, float] | None = None
    extra_translates: tuple[float, ...] = ()

    def __post_init__(self):
        if self.tag not in ("sup", "besicovitch", "weyl"):
            raise InputError(f"unknown seminorm {self.tag!r}")
        if self.tag != "sup" and (self.n is None or not self.n > 0):
            raise InputError(f"{self.tag} seminorm needs n > 0")
        if self.n is not None and not self.n > 0:
            raise InputError("n must be positive")
        if not self.translate_step > 0:
            raise InputError("translate_step must be positive")

    @classmethod
    def sup(cls, n: float | None = None) -> "SeminormKind":
        return cls("sup", n)

    @classmethod
    def besicovitch(cls, n: float) -> "SeminormKind":
        return cls("besicovitch", n)

    @classmethod
    def weyl(cls, n: float, step: float = WEYL_TRANSLATE_STEP, translate_range=None, extra=()) -> "SeminormKind":
        return cls("weyl", n, step, None if translate_range is None else tuple(translate_range), tuple(extra))

    def translates(self) -> np.ndarray:
        """Translates ``t`` entering the Weyl supremum (always includes 0)."""
        if self.tag != "weyl":
            return np.zeros(1)
        lo, hi = self.translate_range or (0.0, 2.0 * self.n)
        count = int(math.floor((hi - lo) / self.translate_step + 1e-9)) + 1
        ts = lo + self.translate_step * np.arange(count)
        return np.unique(np.concatenate([ts, [0.0], np.asarray(self.extra_translates, dtype=float)]))

    def support(self) -> tuple[float, float] | None:
        """Interval the function must cover, or None for the whole grid."""
        if self.tag == "sup":
            return None if self.n is None else (-self.n, self.n)
        ts = self.translates()
        # tau_t f on [-n, n] reads f on [-n - t, n - t]
        return (-self.n - ts.max(), self.n - ts.min())

    def describe(self) -> str:
        if self.tag == "sup":
            return "sup" if self.n is None else f"sup(n={self.n:g})"
        if self.tag == "besicovitch":
            return f"besicovitch(n={self.n:g})"
        lo, hi = self.translate_range or (0.0, 2.0 * self.n)
        extra = f", +{len(self.extra_translates)} extra" if self.extra_translates else ""
        return f"weyl(n={self.n:g}, t in [{lo:g}, {hi:g}] step {self.translate_step:g}{extra})"


def _cumulative_abs(f: SampledFunction):
    g = np.abs(f.values)
    h = f.grid_step
    cum = np.concatenate([[0.0], np.cumsum(0.5 * h * (g[1:] + g[:-1]))])
    return g, cum


def _integral_to(f: SampledFunction, g: np.ndarray, cum: np.ndarray, x: np.ndarray) -> np.ndarray:
    # exact integral of the linear interpolant of g from grid_start to x
    h = f.grid_step
    pos = (np.asarray(x, dtype=float) - f.grid_start) / h
    i = np.clip(np.floor(pos).astype(np.int64), 0, g.size - 2)
    u = pos - i
    return cum[i] + h * (g[i] * u + 0.5 * (g[i + 1] - g[i]) * u * u)


def window_means(f: SampledFunction, centers, n: float) -> np.ndarray:
    """Averages of ``|f|`` over ``[c - n, c + n]`` for each center ``c``."""
    centers = np.atleast_1d(np.asarray(centers, dtype=float))
    f.require(centers.min() - n, centers.max() + n, "window average")
    if f.values.size < 2:
        return np.full(centers.shape, float(np.abs(f.values[0])))
    g, cum = _cumulative_abs(f)
    return (_integral_to(f, g, cum, centers + n) - _integral_to(f, g, cum, centers - n)) / (2.0 * n)


def seminorm_estimate(f: SampledFunction, kind: SeminormKind) -> float:
    """Finite-``n`` estimate of the seminorm ``kind`` of ``f``."""
    if kind.tag == "sup":
        if kind.n is None:
            return float(np.abs(f.values).max())
        f.require(-kind.n, kind.n, "sup estimate")
        x = f.x
        inside = np.abs(f.values[(x >= -kind.n) & (x <= kind.n)])
        ends = np.abs(f(np.array([-kind.n, kind.n])))
        return float(max(inside.max(initial=0.0), ends.max()))
    if kind.tag == "besicovitch":
        return float(window_means(f, [0.0], kind.n)[0])
    # tau_t f averaged over [-n, n] is the average of f over [-n - t, n - t]
    lo, hi = kind.support()
    f.require(lo, hi, kind.describe())
    return float(window_means(f, -kind.translates(), kind.n).max())


def convergence(f: SampledFunction, kind: SeminormKind, factors=(1, 2)) -> list[tuple[float, float]]:
    """Estimates at ``n * factor`` for every factor the grid still covers."""
    if kind.n is None:
        return [(math.inf, seminorm_estimate(f, kind))]
    out = []
    for k in factors:
        scaled = SeminormKind(
            kind.tag,
            kind.n * k,
            kind.translate_step,
            None if kind.translate_range is None else tuple(v * k for v in kind.translate_range),
            kind.extra_translates,
        )
        lo_hi = scaled.support()
        if lo_hi is None or f.covers(*lo_hi):
            out.append((scaled.n, seminorm_estimate(f, scaled)))
    return out


def _shifted_values(f: SampledFunction, t: float) -> tuple[int, int, np.ndarray]:
    """Nodes ``i0:i1`` where ``f(x - t)`` is defined, and those values."""
    h = f.grid_step
    size = f.values.size
    k = t / h
    if abs(k - round(k)) <= _ALIGN_TOL * max(1.0, abs(k)):
        k = int(round(k))
        i0, i1 = max(0, k), min(size, size + k)
        if i0 >= i1:
            raise InputError(f"shift {t:g} leaves no overlap on the grid")
        return i0, i1, f.values[i0 - k : i1 - k]
    x = f.x
    lo, hi = f.grid_start + t, f.grid_end + t
    i0 = int(np.searchsorted(x, lo - 1e-12 * max(1.0, abs(lo)), side="left"))
    i1 = int(np.searchsorted(x, hi + 1e-12 * max(1.0, abs(hi)), side="right"))
    if i0 >= i1:
        raise InputError(f"shift {t:g} leaves no overlap on the grid")
    return i0, i1, f(x[i0:i1] - t)


def difference_function(f: SampledFunction, t: float) -> SampledFunction:
    """``f - tau_t f`` on the part of the grid where both are known."""
    i0, i1, shifted = _shifted_values(f, t)
    return SampledFunction(f.grid_start + i0 * f.grid_step, f.grid_step, f.values[i0:i1] - shifted)


def _check_difference_coverage(f: SampledFunction, t: float, kind: SeminormKind) -> None:
    support = kind.support()
    if support is None:
        return
    lo, hi = support
    f.require(min(lo, lo - t), max(hi, hi - t), f"{kind.describe()} of f - tau_{t:g} f")


def seminorm_of_difference(f: SampledFunction, t: float, kind: SeminormKind) -> float:
    """Estimate of ``||f - tau_t f||`` with ``tau_t f(x) = f(x - t)``."""
    if t == 0:
        return 0.0
    _check_difference_coverage(f, t, kind)
    return seminorm_estimate(difference_function(f, t), kind)


def _sup_difference_until(f: SampledFunction, t: float, threshold: float) -> float:
    """Sup of ``|f - tau_t f|``, stopping once ``threshold`` is reached.

    Chunks are visited from the middle of the grid outwards.  A returned
    value ``>= threshold`` is only a lower bound for the true sup.
    """
    if t == 0:
        return 0.0
    h = f.grid_step
    k = t / h
    aligned = abs(k - round(k)) <= _ALIGN_TOL * max(1.0, abs(k))
    size = f.values.size
    if aligned:
        k = int(round(k))
        i0, i1 = max(0, k), min(size, size + k)
    else:
        x_lo, x_hi = f.grid_start + t, f.grid_end + t
        i0 = max(0, int(math.ceil((x_lo - f.grid_start) / h - 1e-9)))
        i1 = min(size, int(math.floor((x_hi - f.grid_start) / h + 1e-9)) + 1)
    if i0 >= i1:
        raise InputError(f"shift {t:g} leaves no overlap on the grid")
    mid = (i0 + i1) // 2
    starts = sorted(range(i0, i1, _SUP_CHUNK), key=lambda s: abs(s + _SUP_CHUNK // 2 - mid))
    best = 0.0
    for s in starts:
        e = min(s + _SUP_CHUNK, i1)
        if aligned:
            shifted = f.values[s - k : e - k]
        else:
            shifted = f(f.grid_start + h * np.arange(s, e) - t)
        best = max(best, float(np.abs(f.values[s:e] - shifted).max()))
        if best >= threshold:
            break
    return best


@dataclass
class AlmostPeriodReport:
    """Outcome of an epsilon-almost-period scan."""

    epsilon: float
    kind: SeminormKind
    periods: np.ndarray
    values: np.ndarray
    scan_range: tuple[float, float]
    scan_step: float | None
    max_gap: float
    evaluated: int = 0
    notes: list[str] = field(default_factory=list)

    @property
    def found(self) -> bool:
        return self.periods.size > 0


def max_gap(S, scan_range: tuple[float, float]) -> float:
    """Largest gap in ``S`` with the range ends acting as sentinels.

    Infinite when ``S`` is empty.
    """
    S = np.sort(np.asarray(S, dtype=float))
    lo, hi = scan_range
    S = S[(S >= lo) & (S <= hi)]
    if S.size == 0:
        return math.inf
    return float(np.diff(np.concatenate([[lo], S, [hi]])).max())


def fibonacci_translate_candidates(t_range: tuple[float, float], internal_radius: float = 0.2) -> np.ndarray:
    """Translates ``m + n phi`` in ``t_range`` whose conjugate ``m + n phi'`` is within ``internal_radius`` of 0."""
    lo, hi = t_range
    # t - r = n (phi - phi') = n sqrt(5)
    r5 = PHI - PHI_CONJ
    ns = np.arange(math.floor((lo - internal_radius) / r5) - 1, math.ceil((hi + internal_radius) / r5) + 2)
    out = []
    for n in ns:
        for m in range(math.floor(-internal_radius - n * PHI_CONJ), math.ceil(internal_radius - n * PHI_CONJ) + 1):
            r = m + n * PHI_CONJ
            t = m + n * PHI
            if abs(r) < internal_radius and lo <= t <= hi:
                out.append(t)
    return np.unique(np.array(out, dtype=float))


def scan_almost_periods(
    f: SampledFunction,
    epsilon: float,
    kind: SeminormKind,
    scan_range: tuple[float, float],
    scan_step: float | None = None,
    candidates=None,
    refine: bool | None = None,
    refine_tol: float = REFINE_TOL,
) -> AlmostPeriodReport:
    """Find ``t`` in ``scan_range`` with ``||f - tau_t f|| < epsilon``.

    Either every node of the ``scan_step`` grid or an explicit
    ``candidates`` list is evaluated.  With ``refine`` (the default for
    grid scans) a golden-section search between the neighbours of each
    sub-epsilon node adds the local minimiser.
    """
    if not epsilon > 0:
        raise InputError("epsilon must be positive")
    lo, hi = map(float, scan_range)
    if lo > hi:
        raise InputError("empty scan range")
    if candidates is None:
        if scan_step is None or not scan_step > 0:
            raise InputError("scan_step must be positive")
        count = int(math.floor((hi - lo) / scan_step + 1e-9)) + 1
        ts = lo + scan_step * np.arange(count)
        refine = True if refine is None else refine
    else:
        ts = np.asarray(candidates, dtype=float)
        ts = np.unique(ts[(ts >= lo) & (ts <= hi)])
        refine = False if refine is None else refine

    report = AlmostPeriodReport(epsilon, kind, np.empty(0), np.empty(0), (lo, hi), scan_step, math.inf)
    if ts.size == 0:
        report.notes.append("no translates to evaluate")
        return report
    for t in (ts[0], ts[-1]):
        _check_difference_coverage(f, t, kind)

    if kind.tag == "sup" and kind.n is None:
        def evaluate(t):
            return _sup_difference_until(f, t, epsilon)
    else:
        def evaluate(t):
            return seminorm_of_difference(f, t, kind)

    profile = np.array(parallel_map(evaluate, ts.tolist()))
    report.evaluated = ts.size
    hits = np.flatnonzero(profile < epsilon)
    found = {float(ts[i]): float(profile[i]) for i in hits}

    if refine and hits.size:
        def refine_at(i):
            a = ts[max(i - 1, 0)]
            b = ts[min(i + 1, ts.size - 1)]
            return golden_section(evaluate, a, b, tol=refine_tol)
        for t_star, v in parallel_map(refine_at, hits.tolist()):
            if v < epsilon:
                found[float(t_star)] = float(v)
        report.notes.append(f"golden-section refinement around {hits.size} nodes, tol {refine_tol:g}")

    periods = np.array(sorted(found))
    report.periods = periods
    report.values = np.array([found[t] for t in periods])
    report.max_gap = math.inf if periods.size < 2 else max_gap(periods, (lo, hi))
    return report


def approximation_error(f: SampledFunction, P: TrigPolynomial, kind: SeminormKind) -> float:
    """Seminorm of ``f - P`` with ``P`` tabulated on the grid of ``f``."""
    return seminorm_estimate(f - P.sample(f.grid).values, kind)
