"""Point set generators for the one-dimensional examples.

Every generator returns a :class:`PointSet`: a sorted, finite sample of an
infinite point configuration together with the closed interval on which
the sample is complete.  Downstream code only trusts the point set inside
that window.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

PHI = (1.0 + math.sqrt(5.0)) / 2.0
PHI_CONJ = (1.0 - math.sqrt(5.0)) / 2.0
HALF_SHIFT = 1.0 / (2.0 * math.sqrt(2.0))

_DUP_TOL = 1e-12


class InputError(ValueError):
    """Raised when an operation receives arguments outside its contract."""


@dataclass(frozen=True)
class PointSet:
    """Finite sorted point configuration known to be complete on ``window``."""

    points: np.ndarray
    window: tuple[float, float]
    # (untranslated set, offset) for sets built by translate()
    _root: tuple["PointSet", float] | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float).ravel()
        a, b = float(self.window[0]), float(self.window[1])
        if not a <= b:
            raise InputError(f"window [{a}, {b}] is empty")
        if pts.size > 1 and np.any(np.diff(pts) <= _DUP_TOL):
            raise InputError("points must be strictly increasing")
        if pts.size and (pts[0] < a - _DUP_TOL or pts[-1] > b + _DUP_TOL):
            raise InputError("points lie outside the window")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "window", (a, b))

    def __len__(self) -> int:
        return self.points.size

    def __iter__(self):
        return iter(self.points.tolist())

    def count_in(self, lo: float, hi: float) -> int:
        i = np.searchsorted(self.points, lo, side="left")
        j = np.searchsorted(self.points, hi, side="right")
        return int(j - i)

    def in_interval(self, lo: float, hi: float) -> np.ndarray:
        i = np.searchsorted(self.points, lo, side="left")
        j = np.searchsorted(self.points, hi, side="right")
        return self.points[i:j]

    def covers(self, lo: float, hi: float) -> bool:
        a, b = self.window
        return a <= lo + _DUP_TOL and hi <= b + _DUP_TOL

    def density(self, lo: float | None = None, hi: float | None = None) -> float:
        lo = self.window[0] if lo is None else lo
        hi = self.window[1] if hi is None else hi
        return self.count_in(lo, hi) / (hi - lo)

    def gaps(self) -> np.ndarray:
        return np.diff(self.points)

    def is_integral(self, tol: float = 1e-12) -> bool:
        return bool(np.all(np.abs(self.points - np.round(self.points)) <= tol))


@dataclass(frozen=True)
class SubstitutionRule:
    """Letter substitution together with the tile length of each letter."""

    images: Mapping[str, str]
    lengths: Mapping[str, float]
    alphabet: tuple[str, ...] = field(default=())

    def __post_init__(self):
        alphabet = self.alphabet or tuple(sorted(self.images))
        object.__setattr__(self, "alphabet", tuple(alphabet))
        letters = set(alphabet)
        if set(self.images) != letters or set(self.lengths) != letters:
            raise InputError("images and lengths must be given for every letter")
        for letter, image in self.images.items():
            if not image:
                raise InputError(f"image of {letter!r} is empty")
            bad = set(image) - letters
            if bad:
                raise InputError(f"image of {letter!r} uses unknown letters {sorted(bad)}")
        for letter, length in self.lengths.items():
            if not length > 0:
                raise InputError(f"tile length of {letter!r} must be positive")


# l -> ls, s -> l with long tiles of length phi and short tiles of length 1
FIBONACCI = SubstitutionRule(
    images={"l": "ls", "s": "l"},
    lengths={"l": PHI, "s": 1.0},
    alphabet=("l", "s"),
)


@dataclass(frozen=True)
class CutProjectScheme:
    """Planar lattice spanned by ``basis`` with an internal-space window.

    Each basis vector is ``(physical, internal)``.  A lattice point
    ``m*b1 + n*b2`` is selected when its internal coordinate lies in the
    half-open window ``[w_lo, w_hi)``.
    """

    basis: tuple[tuple[float, float], tuple[float, float]]
    window: tuple[float, float]

    def __post_init__(self):
        (p1, i1), (p2, i2) = self.basis
        if abs(p1 * i2 - p2 * i1) < 1e-14:
            raise InputError("cut-and-project basis is degenerate")
        if self.window[0] > self.window[1]:
            raise InputError("internal window must satisfy w_lo <= w_hi")


FIBONACCI_CPS = CutProjectScheme(basis=((1.0, 1.0), (PHI, PHI_CONJ)), window=(-1.0, PHI - 1.0))


def _check_word(word: str, rule: SubstitutionRule) -> None:
    bad = set(word) - set(rule.alphabet)
    if bad:
        raise InputError(f"unknown letters {sorted(bad)}")


def substitute(word: str, rule: SubstitutionRule = FIBONACCI, iterations: int = 1) -> str:
    """Apply ``rule`` to ``word`` ``iterations`` times."""
    if iterations < 0:
        raise InputError("iterations must be nonnegative")
    _check_word(word, rule)
    table = str.maketrans(dict(rule.images))
    for _ in range(iterations):
        word = word.translate(table)
    return word


def _tile_offsets(word: str, rule: SubstitutionRule) -> np.ndarray:
    # positions as integer letter counts times lengths, so that no rounding
    # accumulates along long words
    codes = np.frombuffer(word.encode("utf-32-le"), dtype=np.uint32)
    offsets = np.zeros(len(word) + 1)
    for letter in rule.alphabet:
        counts = np.concatenate([[0], np.cumsum(codes == ord(letter))])
        offsets += counts * rule.lengths[letter]
    return offsets


def word_to_points(word: str, rule: SubstitutionRule = FIBONACCI, origin: float = 0.0) -> PointSet:
    """Tile endpoints of ``word`` laid out to the right of ``origin``.

    The result holds the left end of every tile plus the right end of the
    last one, so the window is exactly the tiled interval.
    """
    if not word:
        raise InputError("word must be nonempty")
    _check_word(word, rule)
    pts = origin + _tile_offsets(word, rule)
    return PointSet(pts, (pts[0], pts[-1]))


def fibonacci_word(iterations: int, seed: str = "l|l") -> tuple[str, str]:
    """Left and right halves of the iterated two-sided seed."""
    left, sep, right = seed.partition("|")
    if not sep or not left or not right:
        raise InputError("seed must look like 'a|b'")
    return substitute(left, FIBONACCI, iterations), substitute(right, FIBONACCI, iterations)


def fibonacci_substitution_points(iterations: int, seed: str = "l|l") -> PointSet:
    """Two-sided Fibonacci chain with the seed cut at 0.

    Both halves are images of the seed letters in their natural reading
    order; the left word ends at 0, the right word starts there.
    """
    if iterations < 0:
        raise InputError("iterations must be nonnegative")
    left, right = fibonacci_word(iterations, seed)
    left_off = _tile_offsets(left, FIBONACCI)
    right_off = _tile_offsets(right, FIBONACCI)
    pts = np.concatenate([left_off[:-1] - left_off[-1], right_off])
    return PointSet(pts, (pts[0], pts[-1]))


def _index_range(coef: float, offset: float, lo: float, hi: float) -> tuple[np.ndarray, np.ndarray]:
    # integer m with lo <= coef*m + offset <= hi, padded by one on each side
    a = (lo - offset) / coef
    b = (hi - offset) / coef
    return np.floor(np.minimum(a, b)) - 1, np.ceil(np.maximum(a, b)) + 1


def model_set(
    cps: CutProjectScheme,
    physical_window: tuple[float, float],
    m_range: tuple[int, int] | None = None,
    n_range: tuple[int, int] | None = None,
    boundary_tol: float = 1e-12,
) -> PointSet:
    """Cut-and-project set of ``cps`` restricted to ``physical_window``.

    Lattice indices are over-enumerated from the parallelogram spanned by
    the physical and internal windows and then filtered exactly.  Explicit
    ``m_range``/``n_range`` further restrict the enumeration.
    """
    (p1, i1), (p2, i2) = cps.basis
    w_lo, w_hi = cps.window
    x_lo, x_hi = physical_window
    if x_lo > x_hi:
        raise InputError("physical window is empty")
    if w_hi - w_lo <= boundary_tol:
        return PointSet(np.empty(0), (x_lo, x_hi))

    det = p1 * i2 - p2 * i1
    # n = (p1*r - i1*x)/det on the corners of [x_lo,x_hi] x [w_lo,w_hi]
    corners = [(x, r) for x in (x_lo, x_hi) for r in (w_lo, w_hi)]
    n_vals = [(p1 * r - i1 * x) / det for x, r in corners]
    n_lo, n_hi = math.floor(min(n_vals)) - 1, math.ceil(max(n_vals)) + 1
    if n_range is not None:
        n_lo, n_hi = max(n_lo, n_range[0]), min(n_hi, n_range[1])
    ns = np.arange(n_lo, n_hi + 1, dtype=np.int64)
    if ns.size == 0:
        return PointSet(np.empty(0), (x_lo, x_hi))

    # the window that pins m more tightly gives the per-n range
    if abs(i1) * (x_hi - x_lo) >= abs(p1) * (w_hi - w_lo) and i1 != 0:
        m_lo, m_hi = _index_range(i1, ns * i2, w_lo, w_hi)
    else:
        m_lo, m_hi = _index_range(p1, ns * p2, x_lo, x_hi)
    if m_range is not None:
        m_lo = np.maximum(m_lo, m_range[0])
        m_hi = np.minimum(m_hi, m_range[1])
    widths = np.maximum(m_hi - m_lo + 1, 0).astype(np.int64)
    n_all = np.repeat(ns, widths)
    starts = np.repeat(m_lo.astype(np.int64), widths)
    run = np.arange(widths.sum()) - np.repeat(np.cumsum(widths) - widths, widths)
    m_all = starts + run

    x = m_all * p1 + n_all * p2
    r = m_all * i1 + n_all * i2
    keep = (r >= w_lo - boundary_tol) & (r < w_hi - boundary_tol) & (x >= x_lo) & (x <= x_hi)
    return PointSet(np.unique(x[keep]), (x_lo, x_hi))


def fibonacci_model_set(n: float) -> PointSet:
    """Fibonacci model set on ``[-n, n]``."""
    return model_set(FIBONACCI_CPS, (-n, n))


def squarefree_points(N: int) -> PointSet:
    """Nonzero square-free integers ``m`` with ``|m| <= N``.

    Zero is divisible by every square and is therefore left out.
    """
    if N < 1:
        raise InputError("N must be >= 1")
    sieve = np.ones(N + 1, dtype=bool)
    sieve[0] = False
    r = math.isqrt(N)
    is_prime = np.ones(r + 1, dtype=bool)
    is_prime[:2] = False
    for p in range(2, math.isqrt(r) + 1):
        if is_prime[p]:
            is_prime[p * p :: p] = False
    for p in np.flatnonzero(is_prime):
        sieve[p * p :: p * p] = False
    pos = np.flatnonzero(sieve).astype(float)
    return PointSet(np.concatenate([-pos[::-1], pos]), (-float(N), float(N)))


def shifted_halves(N: int, shift: float = HALF_SHIFT) -> PointSet:
    """Nonpositive integers ``-N..0`` together with ``shift + 0..N``."""
    if N < 0:
        raise InputError("N must be >= 0")
    pts = np.concatenate([np.arange(-N, 1, dtype=float), shift + np.arange(N + 1)])
    return PointSet(pts, (-float(N), N + shift))


def digit_parity_points(N: int) -> PointSet:
    """Integers ``m`` with ``4**j <= |m| < 2 * 4**j`` for some ``j >= 0``.

    Equivalently, ``|m|`` has an odd number of binary digits.
    """
    if N < 1:
        raise InputError("N must be >= 1")
    blocks = []
    j = 1
    while j <= N:
        blocks.append(np.arange(j, min(2 * j, N + 1)))
        j *= 4
    pos = np.concatenate(blocks).astype(float)
    return PointSet(np.concatenate([-pos[::-1], pos]), (-float(N), float(N)))


def integer_lattice(N: int) -> PointSet:
    return PointSet(np.arange(-N, N + 1, dtype=float), (-float(N), float(N)))


def translate(ps: PointSet, t: float) -> PointSet:
    """The translate ``t + ps``; the window moves along.

    Translates are always computed from the untranslated root set, so
    undoing a translation returns the original points bit for bit.
    """
    root, offset = ps._root if ps._root is not None else (ps, 0.0)
    total = offset + t
    if total == 0:
        return root
    a, b = root.window
    return PointSet(root.points + total, (a + total, b + total), _root=(root, total))


def restrict(ps: PointSet, interval: Sequence[float]) -> PointSet:
    lo, hi = float(interval[0]), float(interval[1])
    a, b = ps.window
    lo, hi = max(lo, a), min(hi, b)
    if lo > hi:
        raise InputError("restriction interval misses the window")
    return PointSet(ps.in_interval(lo, hi), (lo, hi))


def union(*sets: PointSet) -> PointSet:
    """Union of point sets; the window is the intersection of the windows."""
    lo = max(s.window[0] for s in sets)
    hi = min(s.window[1] for s in sets)
    pts = np.unique(np.concatenate([s.in_interval(lo, hi) for s in sets]))
    return PointSet(pts, (lo, hi))
