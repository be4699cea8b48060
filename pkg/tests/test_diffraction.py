import cmath
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from aperiodic.apfunctions import Grid, TestFunction, comb_convolve, fourier_transform_testfn
from aperiodic.diffraction import (
    amplitude,
    amplitude_stability,
    amplitudes,
    autocorrelation,
    bragg_intensities,
    bragg_intensity,
    cpp_check,
    fourier_bohr_reconstruction,
    largest_gap,
    mean_ap_certificate,
    peak_scan,
    sparsest_window,
    Spectrum,
    wiener_check,
)
from aperiodic.pointsets import (
    PHI,
    HALF_SHIFT,
    InputError,
    PointSet,
    digit_parity_points,
    integer_lattice,
    shifted_halves,
    squarefree_points,
    translate,
)
from aperiodic.seminorms import SeminormKind, approximation_error, fibonacci_translate_candidates, seminorm_estimate

SQRT5 = math.sqrt(5.0)
SHIFTED_ORACLE = (1 + cmath.exp(-2j * math.pi * HALF_SHIFT)) / 2


def pair_count_oracle(points, z, tol=1e-9):
    d = points[:, None] - points[None, :]
    return int(np.sum(np.abs(d - z) <= tol))


def dual_module_distance(y, M=40):
    # distance from y to the nearest (m + n phi)/sqrt5 with |m|, |n| <= M
    ns = np.arange(-M, M + 1)
    m = np.clip(np.round(y * SQRT5 - ns * PHI), -M, M)
    return float(np.min(np.abs(y - (m + ns * PHI) / SQRT5)))


@pytest.fixture(scope="module")
def fib_peaks(fib_chain):
    return peak_scan(fib_chain, (0.0, 3.0), 1e-3, 1e4, 0.1)


# -- autocorrelation --------------------------------------------------------------

def test_lattice_autocorrelation_is_exact():
    n = 1000
    g = autocorrelation(integer_lattice(n), n, max_difference=50)
    np.testing.assert_array_equal(g.z, np.arange(-50, 51))
    np.testing.assert_allclose(g.eta, (2 * n + 1 - np.abs(g.z)) / (2 * n), rtol=0, atol=1e-15)
    assert np.all(np.abs(g.eta - 1) <= 0.03)
    assert g.at(0.5) == 0.0


def test_single_point_autocorrelation():
    g = autocorrelation(PointSet([0.0], (-5, 5)), 5.0)
    assert g.z.tolist() == [0.0]
    assert g.eta.tolist() == [0.1]


def test_shifted_halves_autocorrelation():
    g = autocorrelation(shifted_halves(10**4), 1e4, max_difference=50)
    for k in range(-50, 51):
        assert abs(g.at(k) - 1) <= 0.02
    for m in range(-10, 10):
        assert g.at(HALF_SHIFT + m) <= 0.01
        assert g.at(-HALF_SHIFT - m) <= 0.01


def test_autocorrelation_matches_brute_force_pairs(fib_chain):
    n = 150.0
    pts = fib_chain.in_interval(-n, n)
    g = autocorrelation(fib_chain, n, max_difference=40)
    for z, eta in zip(g.z, g.eta):
        assert round(eta * 2 * n) == pair_count_oracle(pts, z)
    assert abs(g.at(0) - pts.size / (2 * n)) < 1e-15
    np.testing.assert_allclose(g.eta, g.eta[::-1], atol=1e-9)
    np.testing.assert_allclose(g.z, -g.z[::-1], atol=1e-9)
    assert np.all(g.eta >= 0)


def test_autocorrelation_checks_window():
    with pytest.raises(InputError):
        autocorrelation(integer_lattice(10), 20)
    with pytest.raises(InputError):
        autocorrelation(integer_lattice(10), 5, max_difference=11)


def test_crowded_bins_raise_a_warning():
    eps = 0.8e-9
    ps = PointSet([0, 1, 10, 11 + eps, 20, 21 + 2 * eps, 30, 31 + 3 * eps], (-40, 40))
    g = autocorrelation(ps, 40, bin_tolerance=1e-9, max_difference=5)
    assert g.warnings
    clean = autocorrelation(integer_lattice(40), 40, max_difference=5)
    assert not clean.warnings


# -- amplitudes ----------------------------------------------------------------------

def test_lattice_amplitude_at_zero():
    n = 500
    assert abs(amplitude(integer_lattice(n), 0.0, n) - (2 * n + 1) / (2 * n)) < 1e-15


def test_fibonacci_amplitude_at_zero(fib_chain):
    assert abs(amplitude(fib_chain, 0.0, 1e4) - PHI / SQRT5) < 1e-3


def test_shifted_halves_amplitude():
    ps = shifted_halves(10**4)
    for n in (1e3, 5e3, 1e4):
        assert abs(amplitude(ps, 1.0, n) - SHIFTED_ORACLE) < 1e-3
    assert abs(abs(SHIFTED_ORACLE) ** 2 - math.cos(math.pi * HALF_SHIFT) ** 2) < 1e-15


def test_amplitude_reduces_phase_for_large_coordinates():
    ps = PointSet([1e9 + 0.25], (1e9 - 1, 1e9 + 1))
    assert abs(amplitudes(ps, [1.0], 1.0, center=1e9)[0] - cmath.exp(-0.5j * math.pi) / 2) < 1e-6


# -- Bragg intensities ----------------------------------------------------------------

def test_lattice_intensities():
    g = autocorrelation(integer_lattice(1000), 1000, max_difference=100)
    for m in (0, 1, 2, -3):
        assert abs(bragg_intensity(g, m, 100) - 1) <= 0.02
    assert abs(bragg_intensity(g, 0.5, 100)) <= 0.02


def test_shifted_halves_intensity_is_that_of_the_lattice():
    ps = shifted_halves(10**4)
    g = autocorrelation(ps, 1e4, max_difference=100)
    for m in (1, 2, 3):
        assert abs(bragg_intensity(g, m, 100) - 1) <= 0.02
    assert abs(abs(amplitude(ps, 1.0, 1e4)) ** 2 - abs(SHIFTED_ORACLE) ** 2) < 1e-3


def test_intensity_cutoff_range():
    g = autocorrelation(integer_lattice(100), 100, max_difference=20)
    with pytest.raises(InputError):
        bragg_intensity(g, 0.0, 30)


def test_triangular_correction_matters():
    # without dividing out 1 - |z|/2n the lattice reads about 1 - L/4n
    n, L = 200, 200
    g = autocorrelation(integer_lattice(n), n, max_difference=L)
    corrected = bragg_intensity(g, 0.0, L)
    mask = np.abs(g.z) <= L
    raw = float(np.sum(g.eta[mask]) / (2 * L))
    assert abs(corrected - 1) < 0.01
    assert abs(raw - (1 - L / (4 * n))) < 0.01


# -- CPP -------------------------------------------------------------------------------------

def test_lattice_cpp():
    recs = cpp_check(integer_lattice(1000), [0, 1, 2], 1000, 100)
    assert max(r.discrepancy for r in recs) <= 0.03


def test_lattice_cpp_all_small_integers():
    recs = cpp_check(integer_lattice(2000), np.arange(0, 11), 2000, 200)
    assert max(r.discrepancy for r in recs) <= 0.03


def test_fibonacci_cpp_at_detected_peaks(fib_chain, fib_peaks):
    recs = cpp_check(fib_chain, fib_peaks.y, 1e4, 100)
    assert max(r.discrepancy for r in recs) <= 0.03


def test_shifted_halves_cpp_fails():
    (rec,) = cpp_check(shifted_halves(10**4), [1.0], 1e4, 100)
    assert rec.discrepancy >= 0.3


# -- peak scans -----------------------------------------------------------------------

def test_lattice_peaks():
    s = peak_scan(integer_lattice(1000), (-0.5, 3.5), 1e-3, 1000, 0.5)
    np.testing.assert_allclose(s.y, [0, 1, 2, 3], atol=1e-4)
    assert np.all(s.intensity >= 0)


def test_fibonacci_peaks_sit_on_the_dual_module(fib_peaks):
    assert len(fib_peaks) > 0
    assert max(dual_module_distance(y) for y in fib_peaks.y) < 1e-3
    assert np.all(np.diff(fib_peaks.y) > 1e-9)
    assert np.all(np.abs(fib_peaks.amplitude) >= 0.1)


def test_squarefree_peaks_small_sample():
    N = 10**5
    s = peak_scan(squarefree_points(N), (0.0, 1.0), 1e-3, N, 0.05, L=None)
    # strongest interior peaks at k/4, then k/9
    interior = s.subset(np.flatnonzero((s.y > 0.01) & (s.y < 0.99)))
    top = interior.y[np.argsort(-np.abs(interior.amplitude))][:3]
    np.testing.assert_allclose(np.sort(top), [0.25, 0.5, 0.75], atol=1e-6)
    assert abs(abs(s.amplitude[0]) ** 2 - (6 / math.pi**2) ** 2) < 0.005


def test_peak_scan_input_checks():
    with pytest.raises(InputError):
        peak_scan(integer_lattice(10), (0, 1), 0.0, 10)
    with pytest.raises(InputError):
        peak_scan(integer_lattice(10), (0, 1), 0.01, 10, threshold=-1)


def test_spectrum_top_keeps_conjugate_pairs(fib_peaks):
    sym = fib_peaks.symmetrized()
    top = sym.top(3)
    for y in top.y:
        assert np.any(np.abs(top.y + y) < 1e-9)


# -- stability ---------------------------------------------------------------------------

def test_lattice_is_stable():
    rep = amplitude_stability(integer_lattice(3000), 1.0, [500, 1000, 2000], [0.0, 37.0, 250.0])
    assert rep.n_spread <= 0.01 and rep.center_spread <= 0.01


def test_digit_parity_amplitude_oscillates():
    ns = [m * 4**k for k in range(4, 9) for m in (1, 2)]
    rep = amplitude_stability(digit_parity_points(2 * 4**8), 0.0, ns)
    est = rep.estimates[:, 0].real
    assert rep.n_spread >= 0.25
    np.testing.assert_allclose(est[0::2], 1 / 3, atol=0.01)  # n = 4^k
    np.testing.assert_allclose(est[1::2], 2 / 3, atol=0.01)  # n = 2*4^k


def test_squarefree_hole_probe():
    ps = squarefree_points(10**5)
    n = 1e3
    c, count = sparsest_window(ps, n)
    # the hole holds fewer points than any window the brute force finds
    centers = np.arange(-10**5 + n, 10**5 - n + 1, 1.0)
    brute = min(ps.count_in(x - n, x + n) for x in centers[::97])
    assert count <= brute
    rep = amplitude_stability(ps, 0.0, [n], [0.0, c])
    base = amplitude_stability(integer_lattice(10**5), 0.0, [n], [0.0, c])
    assert rep.center_spread > base.center_spread
    assert abs(rep.center_spread - abs(ps.count_in(-n, n) - count) / (2 * n)) < 1e-12


def test_largest_gap_of_squarefree():
    N = 1000
    mid, length = largest_gap(squarefree_points(N))
    sf = [m for m in range(-N, N + 1) if m and all(m % (p * p) for p in range(2, 32))]
    gaps = np.diff(sf)
    i = int(np.argmax(gaps))
    assert length == gaps[i] and mid == (sf[i] + sf[i + 1]) / 2


# -- reconstruction ----------------------------------------------------------------------

def test_lattice_reconstruction_within_tail_bound():
    n = 1000
    lat = integer_lattice(n)
    phi = TestFunction()
    ks = np.arange(-3, 4, dtype=float)
    spec = Spectrum(ks, amplitudes(lat, ks, n), np.ones(ks.size), n)
    grid = Grid.covering(-50, 50, 0.01)
    rec = fourier_bohr_reconstruction(lat, phi, spec, grid)
    target = comb_convolve(lat, phi, grid)
    far = np.arange(4, 200000, dtype=float)
    tail = 2 * np.sum(fourier_transform_testfn(phi, far)) + 2 * phi.half_width / (math.pi**2 * phi.half_width**2 * 2e5)
    leak = np.sum(np.abs(spec.amplitude - 1) * np.abs(fourier_transform_testfn(phi, ks)))
    err = np.abs(target.values - rec.function.values.real).max()
    assert err <= tail + leak + 1e-9
    assert err > 0.5 * tail  # the bound is not vacuous
    assert rec.imaginary_residue < 1e-9


def test_single_peak_reconstruction_is_constant():
    lat = integer_lattice(100)
    phi = TestFunction()
    spec = Spectrum(np.array([0.0]), amplitudes(lat, [0.0], 100), np.ones(1), 100)
    rec = fourier_bohr_reconstruction(lat, phi, spec, Grid.covering(-10, 10, 0.1))
    np.testing.assert_allclose(rec.function.values, spec.amplitude[0] * phi.area, atol=1e-15)


def test_reconstruction_errors():
    lat = integer_lattice(100)
    empty = Spectrum(np.empty(0), np.empty(0), np.empty(0), 100)
    with pytest.raises(InputError):
        fourier_bohr_reconstruction(lat, TestFunction(), empty, Grid.covering(-10, 10, 0.1))
    spec = Spectrum(np.array([0.0]), np.ones(1), np.ones(1), 100)
    with pytest.raises(InputError):
        fourier_bohr_reconstruction(lat, TestFunction(), spec, Grid.covering(-100, 100, 0.1))


def test_fibonacci_partial_series_improve_on_average(fib_chain):
    phi = TestFunction("tent", 0.0, 1.0, 1.0)
    spec = peak_scan(fib_chain, (0.0, 4.0), 1e-3, 1e4, 0.01, L=None).symmetrized()
    grid = Grid.covering(-2000, 2000, 0.01)
    target = comb_convolve(fib_chain, phi, grid)
    bes = SeminormKind.besicovitch(2000)
    errs = {}
    for K in (5, 20, 40, 80):
        P = spec.top(K, phi).trig_polynomial(phi)
        errs[K] = (approximation_error(target, P, bes), approximation_error(target, P, SeminormKind.sup()))
    assert errs[5][0] > errs[20][0] > errs[80][0]
    assert errs[40][0] < errs[40][1]


# -- mean almost periodicity -------------------------------------------------------------

def test_fibonacci_mean_ap(fib_chain):
    cands = fibonacci_translate_candidates((0.0, 100.0), 0.2)
    rep = mean_ap_certificate(fib_chain, TestFunction(), cands, 0.1, 1000)
    assert rep.found and rep.max_gap <= 10


def test_lattice_mean_ap():
    rep = mean_ap_certificate(integer_lattice(300), TestFunction(), np.arange(1, 101), 0.01, 100)
    assert rep.periods.tolist() == list(range(1, 101))
    assert rep.max_gap == 1


def test_digit_parity_mean_ap_small():
    rep = mean_ap_certificate(digit_parity_points(2 * 4**7), TestFunction(), np.arange(1, 51), 0.1, 4**7, step=0.05)
    assert rep.periods.size == 50


# -- properties ----------------------------------------------------------------------------

point_sets = st.lists(st.floats(-40, 40), min_size=1, max_size=60, unique=True).map(
    lambda xs: PointSet(np.unique(np.round(xs, 6)), (-40.0, 40.0))
)


@given(point_sets, st.lists(st.floats(-5, 5), min_size=1, max_size=5))
def test_wiener_identity(ps, ys):
    per, pair = wiener_check(ps, ys, 40.0)
    assert np.abs(per - pair).max() <= 1e-6 * max(len(ps), 1)


@given(point_sets, st.floats(-20, 20))
def test_amplitude_bound_and_conjugate_symmetry(ps, y):
    n = 40.0
    a, b = amplitudes(ps, [y, -y], n)
    assert abs(a) <= ps.count_in(-n, n) / (2 * n)
    assert abs(a - b.conjugate()) <= 1e-12


@given(st.floats(0, 5), st.floats(-3, 3))
def test_translation_covariance_of_amplitudes(t, y):
    ps = squarefree_points(10**4 + 10)
    a = abs(amplitude(ps, y, 1e4))
    b = abs(amplitude(translate(ps, t), y, 1e4))
    assert abs(a - b) <= 0.01


def test_intensity_negativity_away_from_strong_peaks(fib_chain, fib_peaks):
    L = 100
    g = autocorrelation(fib_chain, 1e4, max_difference=L)
    rng = np.random.default_rng(7)
    ys = rng.uniform(0.0, 3.0, 2000)
    strong = fib_peaks.y[fib_peaks.intensity >= 0.05]
    far = np.abs(ys[:, None] - strong[None, :]).min(axis=1) >= 10 / L
    ys = ys[far][:200]
    assert ys.size == 200
    assert bragg_intensities(g, ys, L, clamp=False).min() >= -0.02


@pytest.mark.xfail(strict=True, reason="box-window atom extraction has side lobes of -0.217*I next to every peak")
def test_intensity_negativity_at_random_frequencies(fib_chain):
    g = autocorrelation(fib_chain, 1e4, max_difference=100)
    ys = np.random.default_rng(2).uniform(-3.0, 3.0, 200)
    assert bragg_intensities(g, ys, 100, clamp=False).min() >= -0.02
