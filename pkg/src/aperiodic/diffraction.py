"""Autocorrelation, amplitudes, Bragg intensities and Fourier-Bohr series.

Two intensity estimators are kept apart on purpose.  ``bragg_intensity``
extracts the atom of the diffraction measure from the autocorrelation
(pair statistics), while ``amplitude`` is the averaged exponential sum
over the points themselves.  Comparing ``|A_y|^2`` with the pair-based
intensity is what makes a failure of the consistent phase property
visible.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._util import golden_section, parallel_map
from .apfunctions import Grid, SampledFunction, TestFunction, TrigPolynomial, comb_convolve
from .pointsets import InputError, PointSet
from .seminorms import AlmostPeriodReport, SeminormKind, scan_almost_periods

BIN_TOLERANCE = 1e-9
BRAGG_L = 100.0
PEAK_THRESHOLD_FRACTION = 0.05
NEGATIVE_TOLERANCE = 0.02
_ELEMS = 1 << 22


@dataclass
class Autocorrelation:
    """Binned pair-difference densities ``eta(z)`` of ``ps`` on ``[-n, n]``.

    ``z`` is sorted and symmetric; ``eta[z == 0]`` is the point density.
    """

    z: np.ndarray
    eta: np.ndarray
    n: float
    bin_tolerance: float
    max_difference: float
    warnings: list[str] = field(default_factory=list)

    def __len__(self) -> int:
        return self.z.size

    def at(self, z: float, tol: float | None = None) -> float:
        tol = self.bin_tolerance if tol is None else tol
        i = np.searchsorted(self.z, z - tol)
        if i < self.z.size and abs(self.z[i] - z) <= tol:
            return float(self.eta[i])
        return 0.0

    def pair_counts(self) -> np.ndarray:
        return self.eta * (2.0 * self.n)


def _positive_differences(pts: np.ndarray, max_difference: float, tol: float) -> np.ndarray:
    out = []
    for k in range(1, pts.size):
        d = pts[k:] - pts[:-k]
        # d grows with k for sorted points, so once all exceed the cap we are done
        keep = d <= max_difference + tol
        if not keep.any():
            break
        out.append(d[keep])
    return np.sort(np.concatenate(out)) if out else np.empty(0)


def _integer_pair_counts(pts: np.ndarray, max_difference: float):
    ints = np.round(pts).astype(np.int64)
    lo = ints[0]
    ind = np.zeros(ints[-1] - lo + 1, dtype=bool)
    ind[ints - lo] = True
    zmax = min(int(math.floor(max_difference + 1e-9)), ind.size - 1)
    zs = np.arange(1, zmax + 1)
    counts = np.array([np.count_nonzero(ind[:-z] & ind[z:]) for z in zs], dtype=float)
    keep = counts > 0
    return zs[keep].astype(float), counts[keep]


def autocorrelation(
    ps: PointSet,
    n: float,
    bin_tolerance: float = BIN_TOLERANCE,
    max_difference: float | None = None,
) -> Autocorrelation:
    """Pair-difference densities of ``ps`` restricted to ``[-n, n]``.

    ``eta(z)`` counts ordered pairs ``(x, x')`` with ``x - x'`` within
    ``bin_tolerance`` of ``z``, divided by ``2n``.  Integer point sets are
    counted through shifted indicator overlaps; everything else walks the
    sorted points with a sliding window of width ``max_difference``.
    """
    if not n > 0:
        raise InputError("n must be positive")
    max_difference = 2.0 * n if max_difference is None else float(max_difference)
    if not 0 < max_difference <= 2.0 * n + 1e-9:
        raise InputError("max_difference must lie in (0, 2n]")
    if not ps.covers(-n, n):
        raise InputError(f"point set window {ps.window} does not contain [-{n:g}, {n:g}]")
    pts = ps.in_interval(-n, n)
    warnings: list[str] = []
    if pts.size == 0:
        return Autocorrelation(np.zeros(1), np.zeros(1), n, bin_tolerance, max_difference, warnings)

    if ps.is_integral():
        z_pos, counts = _integer_pair_counts(pts, max_difference)
    else:
        diffs = _positive_differences(pts, max_difference, bin_tolerance)
        if diffs.size:
            starts = np.concatenate([[0], np.flatnonzero(np.diff(diffs) > bin_tolerance) + 1])
            counts = np.diff(np.concatenate([starts, [diffs.size]])).astype(float)
            z_pos = np.add.reduceat(diffs, starts) / counts
            spans = np.maximum.reduceat(diffs, starts) - diffs[starts]
            crowded = int(np.sum(spans > 2.0 * bin_tolerance)) + int(np.sum(np.diff(z_pos) < 2.0 * bin_tolerance))
            if crowded:
                warnings.append(
                    f"{crowded} bins span or sit within 2*bin_tolerance; "
                    "distinct differences may have been merged"
                )
        else:
            z_pos, counts = np.empty(0), np.empty(0)

    z = np.concatenate([-z_pos[::-1], [0.0], z_pos])
    eta = np.concatenate([counts[::-1], [float(pts.size)], counts]) / (2.0 * n)
    return Autocorrelation(z, eta, float(n), bin_tolerance, max_difference, warnings)


def amplitudes(ps: PointSet, ys, n: float, center: float = 0.0) -> np.ndarray:
    """``(1/2n) sum_{x in ps, |x - center| <= n} exp(-2 pi i x y)`` for every ``y``."""
    if not n > 0:
        raise InputError("n must be positive")
    if not ps.covers(center - n, center + n):
        raise InputError(f"point set window {ps.window} does not contain [{center - n:g}, {center + n:g}]")
    ys = np.atleast_1d(np.asarray(ys, dtype=float))
    pts = ps.in_interval(center - n, center + n)
    out = np.empty(ys.size, dtype=complex)
    if pts.size == 0:
        out[:] = 0
        return out
    rows = max(1, _ELEMS // pts.size)
    for s in range(0, ys.size, rows):
        phase = np.outer(ys[s : s + rows], pts)
        # reduce the phase mod 1 before scaling: keeps large |x y| accurate
        phase -= np.round(phase)
        out[s : s + rows] = np.exp(-2j * np.pi * phase).sum(axis=1)
    # complex / real in numpy is not correctly rounded; scale the parts
    out.real /= 2.0 * n
    out.imag /= 2.0 * n
    return out


def amplitude(ps: PointSet, y: float, n: float) -> complex:
    return complex(amplitudes(ps, [y], n)[0])


def bragg_intensities(gamma: Autocorrelation, ys, L: float, clamp: bool = True) -> np.ndarray:
    """Atom of the diffraction measure at each ``y`` from the autocorrelation.

    Computes ``Re (1/2L) sum_{|z| <= L} eta(z) / (1 - |z|/2n) e^{-2 pi i z y}``;
    the division removes the triangular weight that a finite window puts
    on pair counts.
    """
    if not 0 < L <= gamma.max_difference + 1e-9:
        raise InputError(f"L must lie in (0, {gamma.max_difference:g}]")
    ys = np.atleast_1d(np.asarray(ys, dtype=float))
    mask = np.abs(gamma.z) <= L + gamma.bin_tolerance
    z = gamma.z[mask]
    w = gamma.eta[mask] / (1.0 - np.abs(z) / (2.0 * gamma.n))
    out = np.empty(ys.size)
    rows = max(1, _ELEMS // max(z.size, 1))
    for s in range(0, ys.size, rows):
        phase = np.outer(ys[s : s + rows], z)
        phase -= np.round(phase)
        out[s : s + rows] = np.cos(2.0 * np.pi * phase) @ w
    out /= 2.0 * L
    return np.maximum(out, 0.0) if clamp else out


def bragg_intensity(gamma: Autocorrelation, y: float, L: float, clamp: bool = True) -> float:
    return float(bragg_intensities(gamma, [y], L, clamp)[0])


@dataclass(frozen=True)
class CPPRecord:
    y: float
    intensity: float
    amplitude: complex
    raw_intensity: float

    @property
    def amplitude_sq(self) -> float:
        return abs(self.amplitude) ** 2

    @property
    def discrepancy(self) -> float:
        return abs(self.intensity - self.amplitude_sq)


def cpp_check(
    ps: PointSet,
    ys,
    n: float,
    L: float = BRAGG_L,
    gamma: Autocorrelation | None = None,
) -> list[CPPRecord]:
    """Compare pair-based Bragg intensities with ``|A_y|^2`` at each ``y``."""
    ys = np.atleast_1d(np.asarray(ys, dtype=float))
    if gamma is None:
        gamma = autocorrelation(ps, n, max_difference=L)
    raw = bragg_intensities(gamma, ys, L, clamp=False)
    amps = amplitudes(ps, ys, n)
    return [CPPRecord(float(y), max(float(r), 0.0), complex(a), float(r)) for y, r, a in zip(ys, raw, amps)]


@dataclass
class Spectrum:
    """Bragg peaks with amplitudes and pair-based intensities."""

    y: np.ndarray
    amplitude: np.ndarray
    intensity: np.ndarray
    n: float
    metadata: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return self.y.size

    def __post_init__(self):
        order = np.argsort(self.y, kind="stable")
        self.y = np.asarray(self.y, dtype=float)[order]
        self.amplitude = np.asarray(self.amplitude, dtype=complex)[order]
        self.intensity = np.asarray(self.intensity, dtype=float)[order]

    def subset(self, idx) -> "Spectrum":
        idx = np.asarray(idx, dtype=np.int64)
        return Spectrum(self.y[idx], self.amplitude[idx], self.intensity[idx], self.n, dict(self.metadata))

    def symmetrized(self, tol: float = 1e-9) -> "Spectrum":
        """Add ``-y`` with the conjugate amplitude for every ``y > tol`` lacking a partner."""
        ys, amps, ints = list(self.y), list(self.amplitude), list(self.intensity)
        for y, a, i in zip(self.y, self.amplitude, self.intensity):
            if y > tol and not np.any(np.abs(self.y + y) <= tol):
                ys.append(-y)
                amps.append(np.conj(a))
                ints.append(i)
        return Spectrum(np.array(ys), np.array(amps), np.array(ints), self.n, dict(self.metadata))

    def top(self, K: int, phi: TestFunction | None = None, pair_tol: float = 1e-6) -> "Spectrum":
        """The ``K`` strongest peaks, plus the partner ``-y`` of any selected ``y``.

        Peaks rank by ``|A_y|``, or by the reconstruction weight
        ``|A_y phi_hat(y)|`` when ``phi`` is given.
        """
        key = np.abs(self.amplitude)
        if phi is not None:
            key = key * np.abs(phi.fourier_transform(self.y))
        order = np.lexsort((self.y, np.abs(self.y), -np.round(key, 12)))
        chosen = list(order[:K])
        for i in list(chosen):
            partner = np.flatnonzero(np.abs(self.y + self.y[i]) <= pair_tol)
            for j in partner:
                if j not in chosen:
                    chosen.append(j)
        return self.subset(sorted(chosen))

    def trig_polynomial(self, phi: TestFunction | None = None) -> TrigPolynomial:
        coeffs = self.amplitude if phi is None else self.amplitude * phi.fourier_transform(self.y)
        return TrigPolynomial(zip(coeffs.tolist(), self.y.tolist()))


def _refine_peak(ps: PointSet, y0: float, half_bracket: float, n_start: float, n_final: float, lo: float, hi: float,
                 floor: float):
    # successively longer windows: the main lobe narrows with each level and
    # a coarse estimate at one level brackets the maximum at the next.  Only
    # the last level is refined tightly; seeds that fade below ``floor`` are
    # leakage and get dropped early.
    y, n_level = y0, n_start
    bracket = half_bracket
    while True:
        last = n_level >= n_final
        a, b = max(lo, y - bracket), min(hi, y + bracket)
        tol = (1e-2 if last else 5e-2) / n_level
        y, val = golden_section(lambda v: abs(amplitude(ps, v, n_level)), a, b, tol=tol, maximize=True)
        if last or val < floor:
            return y, val
        n_level = min(4.0 * n_level, n_final)
        bracket = 0.5 / n_level


def peak_scan(
    ps: PointSet,
    y_range: tuple[float, float],
    y_step: float,
    n: float,
    threshold: float | None = None,
    L: float | None = BRAGG_L,
) -> Spectrum:
    """Locate Bragg peaks with ``|A_y| >= threshold`` in ``y_range``.

    The grid scan runs at half-width ``min(n, 1/(2 y_step))``, where the
    main lobe of every peak is at least one grid step wide, so no peak
    falls between nodes.  Each local maximum above ``threshold/2`` is then
    refined by golden-section search while the half-width doubles up to
    ``n``.  When ``L`` is given, the pair-based intensity of every peak is
    recorded as well.
    """
    lo, hi = map(float, y_range)
    if not y_step > 0:
        raise InputError("y_step must be positive")
    if lo > hi:
        raise InputError("empty frequency range")
    if threshold is None:
        threshold = PEAK_THRESHOLD_FRACTION * ps.density(-n, n)
    if not threshold > 0:
        raise InputError("threshold must be positive")

    n0 = min(float(n), 0.5 / y_step)
    count = int(math.floor((hi - lo) / y_step + 1e-9)) + 1
    grid = lo + y_step * np.arange(count)
    mags = np.abs(amplitudes(ps, grid, n0))
    padded = np.concatenate([[-np.inf], mags, [-np.inf]])
    is_max = (padded[1:-1] >= padded[:-2]) & (padded[1:-1] >= padded[2:]) & (mags >= 0.5 * threshold)
    seeds = np.flatnonzero(is_max)

    def refine(i):
        return _refine_peak(ps, grid[i], y_step, n0, float(n), lo, hi, 0.5 * threshold)

    found = parallel_map(refine, seeds.tolist())
    peaks: list[float] = []
    for y, val in sorted(found, key=lambda p: -p[1]):
        if val >= threshold and all(abs(y - q) > 0.5 / n for q in peaks):
            peaks.append(y)
    ys = np.sort(np.array(peaks, dtype=float))
    amps = amplitudes(ps, ys, n) if ys.size else np.empty(0, dtype=complex)
    meta = {
        "method": "grid scan + golden-section refinement",
        "y_range": (lo, hi),
        "y_step": y_step,
        "scan_n": n0,
        "threshold": threshold,
        "seeds": int(seeds.size),
    }
    if L is not None and ys.size:
        gamma = autocorrelation(ps, n, max_difference=L)
        raw = bragg_intensities(gamma, ys, L, clamp=False)
        meta["L"] = L
        meta["raw_intensity"] = raw.tolist()
        meta["warnings"] = gamma.warnings
        meta["intensity_source"] = "autocorrelation"
        intensity = np.maximum(raw, 0.0)
    else:
        meta["intensity_source"] = "amplitude"
        intensity = np.abs(amps) ** 2
    return Spectrum(ys, amps, intensity, float(n), meta)


@dataclass
class StabilityReport:
    """Amplitude estimates over a family of windows ``[c - n, c + n]``."""

    y: float
    n_sequence: np.ndarray
    centers: np.ndarray
    estimates: np.ndarray  # shape (len(n_sequence), len(centers))

    @staticmethod
    def _spread(values: np.ndarray) -> float:
        if values.size < 2:
            return 0.0
        return float(np.abs(values[:, None] - values[None, :]).max())

    @property
    def n_spread(self) -> float:
        """Largest spread over window sizes at a fixed center."""
        return max(self._spread(self.estimates[:, j]) for j in range(self.centers.size))

    @property
    def center_spread(self) -> float:
        """Largest spread over centers at a fixed window size."""
        return max(self._spread(self.estimates[i, :]) for i in range(self.n_sequence.size))


def amplitude_stability(ps: PointSet, y: float, n_sequence, centers=(0.0,)) -> StabilityReport:
    """Amplitude at ``y`` for every window size and center."""
    ns = np.asarray(n_sequence, dtype=float)
    cs = np.asarray(centers, dtype=float)
    est = np.empty((ns.size, cs.size), dtype=complex)
    for i, n in enumerate(ns):
        for j, c in enumerate(cs):
            est[i, j] = amplitudes(ps, [y], n, center=c)[0]
    return StabilityReport(float(y), ns, cs, est)


def sparsest_window(ps: PointSet, n: float, step: float = 1.0) -> tuple[float, int]:
    """Center ``c`` (on a ``step`` grid) whose window ``[c - n, c + n]`` holds fewest points.

    Scans every admissible center inside the window of ``ps``; ties go to
    the leftmost center.
    """
    a, b = ps.window
    if b - a < 2 * n:
        raise InputError("point set window is shorter than 2n")
    lo = math.ceil((a + n) / step - 1e-9) * step
    count = int(math.floor((b - n - lo) / step + 1e-9)) + 1
    centers = lo + step * np.arange(count)
    counts = np.searchsorted(ps.points, centers + n, side="right") - np.searchsorted(ps.points, centers - n, side="left")
    i = int(np.argmin(counts))
    return float(centers[i]), int(counts[i])


def largest_gap(ps: PointSet) -> tuple[float, float]:
    """Midpoint and length of the largest gap between consecutive points."""
    g = ps.gaps()
    i = int(np.argmax(g))
    return float(0.5 * (ps.points[i] + ps.points[i + 1])), float(g[i])


@dataclass
class Reconstruction:
    function: SampledFunction
    imaginary_residue: float
    peaks: Spectrum


def fourier_bohr_reconstruction(ps: PointSet, phi: TestFunction, peaks: Spectrum, grid: Grid) -> Reconstruction:
    """Tabulate ``sum_y A_y phi_hat(y) e^{2 pi i y x}`` over the given peaks."""
    if len(peaks) == 0:
        raise InputError("no peaks to reconstruct from")
    reach = phi.half_width + abs(phi.center)
    a, b = ps.window
    if grid.start < a + reach - 1e-9 or grid.stop > b - reach + 1e-9:
        raise InputError("reconstruction grid leaves the safe window of the point set")
    values = peaks.trig_polynomial(phi)(grid.x)
    return Reconstruction(SampledFunction(grid.start, grid.step, values), float(np.abs(values.imag).max()), peaks)


def mean_ap_certificate(
    ps: PointSet,
    phi: TestFunction,
    t_candidates,
    epsilon: float,
    n: float,
    step: float = 0.01,
) -> AlmostPeriodReport:
    """Besicovitch almost-period test of ``N_phi = delta_ps * phi`` over explicit translates."""
    ts = np.asarray(t_candidates, dtype=float)
    if ts.size == 0:
        raise InputError("no candidate translates")
    # two spare nodes: off-grid translates interpolate between neighbours
    lo = min(-n, -n - ts.max()) - 2 * step
    hi = max(n, n - ts.min()) + 2 * step
    comb = comb_convolve(ps, phi, Grid.covering(lo, hi, step))
    report = scan_almost_periods(
        comb, epsilon, SeminormKind.besicovitch(n), (float(ts.min()), float(ts.max())), candidates=ts
    )
    report.notes.append(f"N_phi from {phi.kind} half_width={phi.half_width:g} on grid step {step:g}")
    return report


def wiener_check(ps: PointSet, ys, n: float) -> tuple[np.ndarray, np.ndarray]:
    """Both halves of the finite Wiener diagram at each ``y``.

    Returns the periodogram ``(1/2n)|sum_x e^{-2 pi i x y}|^2`` and the
    Fourier transform of the full binned autocorrelation.
    """
    ys = np.atleast_1d(np.asarray(ys, dtype=float))
    periodogram = 2.0 * n * np.abs(amplitudes(ps, ys, n)) ** 2
    gamma = autocorrelation(ps, n, max_difference=2.0 * n)
    phase = np.outer(ys, gamma.z)
    pair_sum = (np.exp(-2j * np.pi * phase) @ gamma.eta).real
    return periodogram, pair_sum
