"""Acceptance criteria 1-10, one test each.

Every test records its checks in ``RESULTS``; the terminal summary prints
one PASS/FAIL line per criterion.  Run alone with

    python3 -m pytest tests/test_acceptance.py -v
"""
import cmath
import math
import sys
import time

import numpy as np
import pytest

from aperiodic import apfunctions as apf
from aperiodic import diffraction as dif
from aperiodic import pointsets as pts
from aperiodic import seminorms as sem
from aperiodic.pointsets import PHI, HALF_SHIFT

RESULTS: dict[int, tuple[bool, str]] = {}
SQRT5 = math.sqrt(5.0)


class Criterion:
    """Collects named checks and a wall-clock budget for one criterion."""

    def __init__(self, number: int, title: str, budget: float | None = None):
        self.number, self.title, self.budget = number, title, budget
        self.checks: list[tuple[str, bool]] = []

    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def check(self, label: str, ok) -> None:
        self.checks.append((label, bool(ok)))

    def __exit__(self, exc_type, exc, tb):
        elapsed = time.perf_counter() - self.t0
        if self.budget is not None:
            self.check(f"runtime {elapsed:.1f}s < {self.budget:g}s", elapsed < self.budget)
        if exc_type is not None:
            self.checks.append((f"raised {exc_type.__name__}: {exc}", False))
        ok = all(c for _, c in self.checks)
        failed = [label for label, c in self.checks if not c]
        detail = "; ".join(label for label, _ in self.checks) if ok else "failed: " + "; ".join(failed)
        RESULTS[self.number] = (ok, f"{self.title} ({elapsed:.1f}s) {detail}")
        print(f"criterion {self.number:2d}: {'PASS' if ok else 'FAIL'}  {RESULTS[self.number][1]}")
        if exc_type is None:
            assert ok, RESULTS[self.number][1]
        return False


def test_criterion_01_fibonacci_structure():
    with Criterion(1, "Fibonacci structure", budget=5) as c:
        sub = pts.fibonacci_substitution_points(15)
        cps = pts.model_set(pts.FIBONACCI_CPS, sub.window)
        dev = np.abs(sub.points - cps.points).max() if len(sub) == len(cps) else math.inf
        c.check(f"{len(sub)} points agree to {dev:.1e}", len(sub) >= 1000 and dev <= 1e-9)
        g = sub.gaps()
        gap_err = np.minimum(np.abs(g - 1), np.abs(g - PHI)).max()
        c.check(f"gap error {gap_err:.1e}", gap_err <= 1e-12)
        d = pts.fibonacci_model_set(1e4).density(-1e4, 1e4)
        c.check(f"density {d:.6f}", abs(d - PHI / SQRT5) <= 1e-3)


def test_criterion_02_non_bohr_certificate():
    with Criterion(2, "non-Bohr certificate", budget=60) as c:
        tiling = pts.fibonacci_substitution_points(17)
        f = apf.fibonacci_triangle(tiling, apf.Grid.covering(-1200.0, 1100.0, 0.01))
        rep = sem.scan_almost_periods(f, 0.3, sem.SeminormKind.sup(), (0.5, 100.0), 0.01)
        c.check(f"{rep.evaluated} translates, {rep.periods.size} periods", rep.periods.size == 0)


def test_criterion_03_mean_almost_periods():
    with Criterion(3, "mean-AP certificate") as c:
        tiling = pts.fibonacci_substitution_points(17)
        f = apf.fibonacci_triangle(tiling, apf.Grid.covering(-1200.0, 1100.0, 0.01))
        cands = sem.fibonacci_translate_candidates((0.0, 100.0), 0.2)
        rep = sem.scan_almost_periods(f, 0.1, sem.SeminormKind.besicovitch(1000), (0.0, 100.0), candidates=cands)
        c.check(f"{rep.periods.size}/{cands.size} candidates, max_gap {rep.max_gap:.3f}",
                rep.found and rep.max_gap <= 10)


def test_criterion_04_shifted_halves_break_cpp():
    with Criterion(4, "shifted halves, CPP failure", budget=30) as c:
        n, L = 1e4, 100.0
        ps = pts.shifted_halves(10**4)
        g = dif.autocorrelation(ps, n, max_difference=L)
        eta_dev = max(abs(g.at(k) - 1) for k in range(-50, 51))
        c.check(f"max |eta(k) - 1| = {eta_dev:.4f}", eta_dev <= 0.02)
        recs = dif.cpp_check(ps, [1.0, 2.0, 3.0], n, L, gamma=g)
        I = [r.intensity for r in recs]
        c.check("I(1..3) = " + ", ".join(f"{v:.4f}" for v in I), all(abs(v - 1) <= 0.02 for v in I))
        oracle = [abs((1 + cmath.exp(-2j * math.pi * m * HALF_SHIFT)) / 2) ** 2 for m in (1, 2, 3)]
        dev = max(abs(r.amplitude_sq - o) for r, o in zip(recs, oracle))
        c.check(f"|A_m|^2 vs direct sum {dev:.1e}", dev <= 1e-3)
        c.check(f"I(1) - |A_1|^2 = {recs[0].discrepancy:.4f}", recs[0].discrepancy >= 0.3)


def test_criterion_05_digit_parity():
    with Criterion(5, "digit parity, no amplitude but mean AP") as c:
        ps = pts.digit_parity_points(2 * 4**9)
        ns = [m * 4**k for k in range(4, 9) for m in (1, 2)]
        est = dif.amplitude_stability(ps, 0.0, ns).estimates[:, 0].real
        spread = est.max() - est.min()
        c.check(f"A_0 spread {spread:.4f}", spread >= 0.25)
        c.check(f"n=4^k near 1/3 ({est[0::2].min():.4f}..{est[0::2].max():.4f})",
                np.abs(est[0::2] - 1 / 3).max() <= 0.01)
        c.check(f"n=2*4^k near 2/3 ({est[1::2].min():.4f}..{est[1::2].max():.4f})",
                np.abs(est[1::2] - 2 / 3).max() <= 0.01)
        ts = np.arange(1.0, 51.0)
        rep = dif.mean_ap_certificate(ps, apf.TestFunction(), ts, 0.1, 4**9, step=0.1)
        c.check(f"{rep.periods.size}/{ts.size} integer translates pass", rep.periods.size == ts.size)


def test_criterion_06_squarefree():
    with Criterion(6, "square-free integers", budget=120) as c:
        N = 10**6
        ps = pts.squarefree_points(N)
        d = ps.density(-N, N)
        c.check(f"density {d:.6f}", abs(d - 6 / math.pi**2) <= 5e-4)
        spec = dif.peak_scan(ps, (0.0, 1.0), 1e-3, N, 0.05 * d, L=None)
        recs = dif.cpp_check(ps, spec.y, N, 500)
        I0 = recs[0].intensity if spec.y[0] == 0 else math.nan
        c.check(f"I(0) = {I0:.5f}", abs(I0 - (6 / math.pi**2) ** 2) <= 0.005)
        worst = max(r.discrepancy for r in recs)
        c.check(f"CPP discrepancy {worst:.1e} over {len(recs)} peaks", worst <= 0.02)
        n = 1e4
        hole, _ = dif.sparsest_window(ps, n)
        probe = dif.amplitude_stability(ps, 0.0, [n], [0.0, hole]).center_spread
        base = dif.amplitude_stability(pts.integer_lattice(N), 0.0, [n], [0.0, hole]).center_spread
        c.check(f"hole at {hole:g}: spread {probe:.4f} vs lattice {base:.4f}", probe > base)


def battery():
    grid = apf.Grid.covering(-400.0, 400.0, 0.01)
    rng = np.random.default_rng(11)
    x = grid.x
    noise = apf.SampledFunction(grid.start, grid.step, rng.normal(size=x.size))
    comb = apf.comb_convolve(pts.fibonacci_model_set(500), apf.TestFunction(), grid)
    tiling = pts.fibonacci_substitution_points(14)
    return [
        apf.SampledFunction.from_callable(lambda x: np.cos(2 * np.pi * x), grid),
        apf.SampledFunction.from_callable(lambda x: np.sign(np.sin(x)), grid),
        apf.SampledFunction.from_callable(lambda x: np.exp(-x**2 / 50), grid),
        apf.SampledFunction.from_callable(lambda x: np.where(np.abs(x + 250) < 20, 3.0, 0.1), grid),
        apf.zoo_quasiperiodic(grid),
        apf.zoo_limit_periodic(grid),
        apf.zoo_limit_quasiperiodic(grid),
        apf.fibonacci_triangle(tiling, grid),
        comb,
        noise,
    ]


def test_criterion_07_seminorm_suite():
    with Criterion(7, "seminorm suite") as c:
        bes, weyl, sup = (sem.SeminormKind.besicovitch(100), sem.SeminormKind.weyl(100, 0.5), sem.SeminormKind.sup())
        worst = -math.inf
        for f in battery():
            b, w, s = (sem.seminorm_estimate(f, k) for k in (bes, weyl, sup))
            worst = max(worst, b - w, w - s)
        c.check(f"B <= W <= sup on 10 functions (worst excess {worst:.1e})", worst <= 1e-9)
        cosine = apf.SampledFunction.from_callable(lambda x: np.cos(2 * np.pi * x), apf.Grid.covering(-1000, 1000, 0.01))
        v = sem.seminorm_estimate(cosine, sem.SeminormKind.besicovitch(1000))
        c.check(f"||cos||_B = {v:.5f}", abs(v - 2 / math.pi) <= 1e-3)
        tent = apf.SampledFunction.from_callable(apf.TestFunction(), apf.Grid.covering(-1000, 1000, 0.01))
        v = sem.seminorm_estimate(tent, sem.SeminormKind.besicovitch(1000))
        c.check(f"||tent||_B = {v:.1e}", v <= 3e-4)


def test_criterion_08_reconstruction():
    with Criterion(8, "Fourier-Bohr reconstruction") as c:
        chain = pts.fibonacci_model_set(1.2e4)
        phi = apf.TestFunction("tent", 0.0, 1.0, 1.0)
        spec = dif.peak_scan(chain, (0.0, 4.0), 1e-3, 1e4, 0.01, L=None).symmetrized()
        grid = apf.Grid.covering(-2000, 2000, 0.01)
        target = apf.comb_convolve(chain, phi, grid)
        bes = sem.SeminormKind.besicovitch(2000)
        norm = sem.seminorm_estimate(target, bes)
        errs = [sem.approximation_error(target, spec.top(K, phi).trig_polynomial(phi), bes) for K in (5, 20, 80)]
        c.check("errors/norm at K=5,20,80: " + ", ".join(f"{e / norm:.3f}" for e in errs),
                errs[0] > errs[1] > errs[2] and errs[2] < 0.05 * norm)

        n = 1000
        lat = pts.integer_lattice(n)
        tent = apf.TestFunction()
        ks = np.arange(-3, 4, dtype=float)
        peaks = dif.Spectrum(ks, dif.amplitudes(lat, ks, n), np.ones(ks.size), n)
        g = apf.Grid.covering(-50, 50, 0.01)
        rec = dif.fourier_bohr_reconstruction(lat, tent, peaks, g)
        err = np.abs(apf.comb_convolve(lat, tent, g).values - rec.function.values.real).max()
        # closed form: coefficients 1 * phi_hat(k); what is cut off is the spectral tail
        far = np.arange(4, 200000, dtype=float)
        tail = 2 * np.sum(np.abs(apf.fourier_transform_testfn(tent, far))) + 1 / (math.pi**2 * tent.half_width * 2e5)
        leak = np.sum(np.abs(peaks.amplitude - 1) * np.abs(apf.fourier_transform_testfn(tent, ks)))
        c.check(f"lattice error {err:.2e} <= tail bound {tail + leak:.2e}", err <= tail + leak + 1e-9)


def test_criterion_09_wiener_identity():
    with Criterion(9, "Wiener identity") as c:
        rng = np.random.default_rng(5)
        sets = {
            "substitution": (pts.fibonacci_substitution_points(12), 250.0),
            "model-set": (pts.fibonacci_model_set(600), 500.0),
            "squarefree": (pts.squarefree_points(800), 700.0),
            "shifted-halves": (pts.shifted_halves(600), 500.0),
            "digit-parity": (pts.digit_parity_points(1200), 1024.0),
            "lattice": (pts.integer_lattice(600), 500.0),
        }
        for name, (ps, n) in sets.items():
            ys = rng.uniform(-5.0, 5.0, 100)
            per, pair = dif.wiener_check(ps, ys, n)
            count = ps.count_in(-n, n)
            dev = np.abs(per - pair).max()
            c.check(f"{name}: {dev / count:.1e}*N", dev <= 1e-6 * count)


def test_criterion_10_fourier_bohr_coefficients():
    with Criterion(10, "Fourier-Bohr coefficients") as c:
        f = apf.zoo_quasiperiodic(apf.Grid.covering(-1000, 1000, 0.01))
        a = apf.fourier_bohr_coefficient(f, math.sqrt(2), 1000)
        c.check(f"A_sqrt2 = {a.real:.4f}{a.imag:+.1e}i", abs(a - 0.5) <= 1e-2)
        P = apf.TrigPolynomial([(0.7, 0.0), (0.3 - 0.2j, 0.45), (-0.5j, -1.3), (0.25, 2.2)])
        g = P.sample(apf.Grid.covering(-1e4, 1e4, 0.01))
        worst = 0.0
        for cj, yj in P.terms:
            C = sum(abs(ck) / (2 * math.pi * abs(yk - yj)) for ck, yk in P.terms if yk != yj)
            for T in (1e2, 1e3, 1e4):
                worst = max(worst, abs(apf.fourier_bohr_coefficient(g, yj, T) - cj) / (C / T))
        c.check(f"error <= {worst:.1e} * C/T", worst <= 1.0)


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q"]))
