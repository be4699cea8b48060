"""Sampled functions, trigonometric polynomials and the almost periodic zoo.

Functions live on uniform grids.  Off-grid evaluation is linear
interpolation, so every estimator built on top of a
:class:`SampledFunction` is deterministic.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable

import numpy as np

from .pointsets import PHI, InputError, PointSet

DEFAULT_STEP = 0.01
DEFAULT_ZOO_TERMS = 30
_CHUNK = 1 << 20
_GRID_TOL = 1e-9


@dataclass(frozen=True)
class Grid:
    """Uniform grid ``start + step * arange(count)``."""

    start: float
    step: float
    count: int

    def __post_init__(self):
        if not self.step > 0:
            raise InputError("grid step must be positive")
        if self.count < 1:
            raise InputError("grid needs at least one point")

    @classmethod
    def covering(cls, lo: float, hi: float, step: float = DEFAULT_STEP) -> "Grid":
        """Smallest grid starting at ``lo`` whose last node is ``>= hi``."""
        count = int(math.ceil((hi - lo) / step - _GRID_TOL)) + 1
        return cls(float(lo), float(step), max(count, 1))

    @property
    def stop(self) -> float:
        return self.start + self.step * (self.count - 1)

    @property
    def x(self) -> np.ndarray:
        return self.start + self.step * np.arange(self.count)


@dataclass(frozen=True)
class SampledFunction:
    """Real or complex function tabulated on a uniform grid."""

    grid_start: float
    grid_step: float
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values)
        if not np.iscomplexobj(vals):
            vals = vals.astype(float)
        vals = vals.ravel()
        if not self.grid_step > 0:
            raise InputError("grid_step must be positive")
        if vals.size == 0:
            raise InputError("values must be nonempty")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "grid_start", float(self.grid_start))
        object.__setattr__(self, "grid_step", float(self.grid_step))

    @classmethod
    def from_callable(cls, fn: Callable[[np.ndarray], np.ndarray], grid: Grid) -> "SampledFunction":
        return cls(grid.start, grid.step, fn(grid.x))

    @property
    def grid(self) -> Grid:
        return Grid(self.grid_start, self.grid_step, self.values.size)

    @property
    def x(self) -> np.ndarray:
        return self.grid.x

    @property
    def grid_end(self) -> float:
        return self.grid.stop

    def covers(self, lo: float, hi: float) -> bool:
        tol = _GRID_TOL * max(1.0, abs(lo), abs(hi))
        return self.grid_start <= lo + tol and hi <= self.grid_end + tol

    def require(self, lo: float, hi: float, what: str = "operation") -> None:
        if not self.covers(lo, hi):
            raise InputError(
                f"{what} needs the grid to cover [{lo:g}, {hi:g}], "
                f"have [{self.grid_start:g}, {self.grid_end:g}]"
            )

    def __call__(self, x) -> np.ndarray:
        """Linear interpolation between grid nodes (clamped at the ends)."""
        x = np.asarray(x, dtype=float)
        pos = (x - self.grid_start) / self.grid_step
        i = np.clip(np.floor(pos).astype(np.int64), 0, max(self.values.size - 2, 0))
        if self.values.size == 1:
            return np.broadcast_to(self.values[0], x.shape).copy()
        frac = np.clip(pos - i, 0.0, 1.0)
        return self.values[i] * (1.0 - frac) + self.values[i + 1] * frac

    def _same_grid(self, other: "SampledFunction") -> None:
        if (
            other.values.size != self.values.size
            or abs(other.grid_start - self.grid_start) > _GRID_TOL
            or abs(other.grid_step - self.grid_step) > _GRID_TOL * self.grid_step
        ):
            raise InputError("sampled functions live on different grids")

    def with_values(self, values) -> "SampledFunction":
        return SampledFunction(self.grid_start, self.grid_step, values)

    def __add__(self, other):
        if isinstance(other, SampledFunction):
            self._same_grid(other)
            return self.with_values(self.values + other.values)
        return self.with_values(self.values + other)

    def __sub__(self, other):
        if isinstance(other, SampledFunction):
            self._same_grid(other)
            return self.with_values(self.values - other.values)
        return self.with_values(self.values - other)

    def __mul__(self, c):
        return self.with_values(self.values * c)

    __rmul__ = __mul__

    def __neg__(self):
        return self.with_values(-self.values)


class TrigPolynomial:
    """Finite sum ``sum_k c_k exp(2 pi i y_k x)``.

    Frequencies closer than ``merge_tol`` are merged by adding their
    coefficients, keeping the first frequency of each cluster.
    """

    def __init__(self, terms: Iterable[tuple[complex, float]], merge_tol: float = 1e-12):
        terms = sorted(((complex(c), float(y)) for c, y in terms), key=lambda t: t[1])
        coeffs: list[complex] = []
        freqs: list[float] = []
        for c, y in terms:
            if freqs and abs(y - freqs[-1]) <= merge_tol:
                coeffs[-1] += c
            else:
                coeffs.append(c)
                freqs.append(y)
        self.coefficients = np.array(coeffs, dtype=complex)
        self.frequencies = np.array(freqs, dtype=float)

    @property
    def terms(self) -> list[tuple[complex, float]]:
        return list(zip(self.coefficients.tolist(), self.frequencies.tolist()))

    def __len__(self) -> int:
        return self.frequencies.size

    def __repr__(self) -> str:
        return f"TrigPolynomial({self.terms!r})"

    def __add__(self, other: "TrigPolynomial") -> "TrigPolynomial":
        return TrigPolynomial(self.terms + other.terms)

    def coefficient(self, y: float, tol: float = 1e-12) -> complex:
        hit = np.abs(self.frequencies - y) <= tol
        return complex(self.coefficients[hit].sum())

    def __call__(self, x) -> np.ndarray:
        return eval_trig_poly(self, x)

    def sample(self, grid: Grid) -> SampledFunction:
        return SampledFunction(grid.start, grid.step, self(grid.x))


def eval_trig_poly(P: TrigPolynomial, x) -> np.ndarray | complex:
    """Evaluate ``P`` at a scalar or an array of points."""
    xa = np.asarray(x, dtype=float)
    flat = xa.ravel()
    out = np.zeros(flat.size, dtype=complex)
    if len(P):
        per = max(1, _CHUNK // len(P))
        for s in range(0, flat.size, per):
            xs = flat[s : s + per]
            out[s : s + per] = np.exp(2j * np.pi * np.outer(xs, P.frequencies)) @ P.coefficients
    if xa.ndim == 0:
        return complex(out[0])
    return out.reshape(xa.shape)


@dataclass(frozen=True)
class TestFunction:
    """Compactly supported bump: ``tent`` or ``raised_cosine``."""

    kind: str = "tent"
    center: float = 0.0
    half_width: float = 0.4
    height: float = 1.0

    __test__ = False  # not a pytest class

    def __post_init__(self):
        if self.kind not in ("tent", "raised_cosine"):
            raise InputError(f"unknown test function kind {self.kind!r}")
        if not self.half_width > 0 or not self.height > 0:
            raise InputError("half_width and height must be positive")

    @property
    def area(self) -> float:
        return self.height * self.half_width

    def __call__(self, x) -> np.ndarray:
        u = np.abs(np.asarray(x, dtype=float) - self.center) / self.half_width
        if self.kind == "tent":
            return self.height * np.clip(1.0 - u, 0.0, None)
        return np.where(u <= 1.0, 0.5 * self.height * (1.0 + np.cos(np.pi * np.minimum(u, 1.0))), 0.0)

    def fourier_transform(self, y):
        return fourier_transform_testfn(self, y)


def fourier_transform_testfn(phi: TestFunction, y):
    """Closed-form ``int exp(-2 pi i x y) phi(x) dx``."""
    y = np.asarray(y, dtype=float)
    w, h = phi.half_width, phi.height
    if phi.kind == "tent":
        core = h * w * np.sinc(w * y) ** 2
    else:
        u = 2.0 * w * y
        core = h * w * (np.sinc(u) + 0.5 * np.sinc(u - 1.0) + 0.5 * np.sinc(u + 1.0))
    out = core * np.exp(-2j * np.pi * y * phi.center)
    return complex(out) if out.ndim == 0 else out


def comb_convolve(ps: PointSet, phi: TestFunction, grid: Grid) -> SampledFunction:
    """Tabulate ``N(x) = sum_{p in ps} phi(x - p)`` on ``grid``.

    The grid has to stay ``half_width`` inside the window of ``ps``;
    otherwise points missing beyond the window would silently drop out.
    """
    hw = phi.half_width
    reach = hw + abs(phi.center)
    a, b = ps.window
    if grid.start < a + reach - _GRID_TOL or grid.stop > b - reach + _GRID_TOL:
        raise InputError(
            f"grid [{grid.start:g}, {grid.stop:g}] exceeds the safe window "
            f"[{a + reach:g}, {b - reach:g}]"
        )
    pts = ps.in_interval(grid.start - reach, grid.stop + reach)
    out = np.zeros(grid.count)
    if pts.size == 0:
        return SampledFunction(grid.start, grid.step, out)
    span = int(math.ceil(2 * reach / grid.step)) + 2
    offs = np.arange(span)
    per = max(1, _CHUNK // span)
    for s in range(0, pts.size, per):
        p = pts[s : s + per]
        first = np.floor((p - reach - grid.start) / grid.step).astype(np.int64)
        idx = first[:, None] + offs[None, :]
        ok = (idx >= 0) & (idx < grid.count)
        idx = np.where(ok, idx, 0)
        vals = np.where(ok, phi(grid.start + grid.step * idx - p[:, None]), 0.0)
        out += np.bincount(idx.ravel(), weights=vals.ravel(), minlength=grid.count)
    return SampledFunction(grid.start, grid.step, out)


def triangle_function(tiling: PointSet, grid: Grid, heights: dict[float, float], tol: float = 1e-9) -> SampledFunction:
    """Isosceles triangle on every tile, height chosen by tile length."""
    pts = tiling.points
    if pts.size < 2 or grid.start < pts[0] - _GRID_TOL or grid.stop > pts[-1] + _GRID_TOL:
        raise InputError("tiling does not cover the grid")
    lengths = np.diff(pts)
    h = np.full(lengths.size, np.nan)
    for length, height in heights.items():
        h[np.abs(lengths - length) <= tol] = height
    if np.isnan(h).any():
        bad = np.unique(np.round(lengths[np.isnan(h)], 9))
        raise InputError(f"tile lengths without a height: {bad[:5]}")
    x = grid.x
    k = np.clip(np.searchsorted(pts, x, side="right") - 1, 0, lengths.size - 1)
    half = lengths[k] / 2.0
    u = np.abs(x - (pts[k] + half)) / half
    return SampledFunction(grid.start, grid.step, h[k] * np.clip(1.0 - u, 0.0, None))


def fibonacci_triangle(tiling: PointSet, grid: Grid) -> SampledFunction:
    """Height 1 over long tiles, height 1/2 over short tiles."""
    return triangle_function(tiling, grid, {PHI: 1.0, 1.0: 0.5})


def trapezoid_mean(f: SampledFunction, lo: float, hi: float, weight: Callable | None = None) -> complex:
    """Trapezoidal average of ``f`` (optionally times ``weight(x)``) over ``[lo, hi]``.

    Interior grid nodes are used as they are; the two ends are added with
    interpolated values.
    """
    f.require(lo, hi, "averaging")
    x = f.x
    i = np.searchsorted(x, lo, side="right")
    j = np.searchsorted(x, hi, side="left")
    xs = np.concatenate([[lo], x[i:j], [hi]])
    vs = np.concatenate([np.atleast_1d(f(lo)), f.values[i:j], np.atleast_1d(f(hi))])
    if weight is not None:
        vs = vs * weight(xs)
    return np.trapezoid(vs, xs) / (hi - lo)


def fourier_bohr_coefficient(f: SampledFunction, k: float, T: float) -> complex:
    """Truncated Fourier-Bohr coefficient ``(1/2T) int_{-T}^{T} e^{-2 pi i k x} f(x) dx``."""
    if not T > 0:
        raise InputError("T must be positive")
    if k == 0:
        return complex(trapezoid_mean(f, -T, T))
    return complex(trapezoid_mean(f, -T, T, weight=lambda xs: np.exp(-2j * np.pi * k * xs)))


# The almost periodic zoo


def quasiperiodic_polynomial() -> TrigPolynomial:
    """``cos(2 pi x) + cos(2 pi sqrt(2) x)`` as four exponentials."""
    r2 = math.sqrt(2.0)
    return TrigPolynomial([(0.5, -r2), (0.5, -1.0), (0.5, 1.0), (0.5, r2)])


def _sine(amplitude: float, freq: float) -> list[tuple[complex, float]]:
    # a sin(2 pi f x) = (a / 2i) e^{2 pi i f x} - (a / 2i) e^{-2 pi i f x}
    c = amplitude / 2j
    return [(c, freq), (-c, -freq)]


def limit_periodic_polynomial(n_terms: int = DEFAULT_ZOO_TERMS) -> TrigPolynomial:
    terms = []
    for n in range(1, n_terms + 1):
        terms += _sine(1.0 / n**2, 2.0**-n)
    return TrigPolynomial(terms)


def limit_quasiperiodic_polynomial(n_terms: int = DEFAULT_ZOO_TERMS) -> TrigPolynomial:
    r5 = math.sqrt(5.0)
    terms = []
    for n in range(1, n_terms + 1):
        terms += _sine(1.0 / n**3, 2.0**-n)
        terms += _sine(1.0 / n**3, r5 * 2.0**-n)
    return TrigPolynomial(terms)


def zoo_quasiperiodic(grid: Grid) -> SampledFunction:
    x = grid.x
    return SampledFunction(grid.start, grid.step, np.cos(2 * np.pi * x) + np.cos(2 * np.pi * math.sqrt(2.0) * x))


def zoo_limit_periodic(grid: Grid, n_terms: int = DEFAULT_ZOO_TERMS) -> SampledFunction:
    if n_terms < 1:
        raise InputError("n_terms must be >= 1")
    x = grid.x
    out = np.zeros_like(x)
    for n in range(1, n_terms + 1):
        out += np.sin(2 * np.pi * x / 2.0**n) / n**2
    return SampledFunction(grid.start, grid.step, out)


def zoo_limit_quasiperiodic(grid: Grid, n_terms: int = DEFAULT_ZOO_TERMS) -> SampledFunction:
    if n_terms < 1:
        raise InputError("n_terms must be >= 1")
    x = grid.x
    r5 = math.sqrt(5.0)
    out = np.zeros_like(x)
    for n in range(1, n_terms + 1):
        out += (np.sin(2 * np.pi * x / 2.0**n) + np.sin(2 * np.pi * r5 * x / 2.0**n)) / n**3
    return SampledFunction(grid.start, grid.step, out)


def zoo_tail_bound(name: str, n_terms: int) -> float:
    """Sup-norm bound on the series left out after ``n_terms`` terms.

    Uses ``sum_{n>N} n^-p < int_N^inf t^-p dt``.
    """
    if name == "limit_periodic":
        return 1.0 / n_terms
    if name == "limit_quasiperiodic":
        return 2.0 / (2.0 * n_terms**2)
    raise InputError(f"no series named {name!r}")
