from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, Sequence, TypeVar

T = TypeVar("T")
R = TypeVar("R")

THREADS_ENV = "APERIODIC_THREADS"
_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


def thread_count() -> int:
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


def parallel_map(fn: Callable[[T], R], items: Sequence[T] | Iterable[T]) -> list[R]:
    """``list(map(fn, items))``, spread over worker threads when configured.

    Results keep the input order, so output is identical for any thread count.
    """
    items = list(items)
    workers = thread_count()
    if workers == 1 or len(items) < 2:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def golden_section(fn: Callable[[float], float], a: float, b: float, tol: float = 1e-6, maximize: bool = False):
    """Golden-section search on ``[a, b]``; returns ``(x, fn(x))``.

    Assumes ``fn`` is unimodal on the bracket.  The best evaluated point is
    returned, so the result is never worse than the bracket ends.
    """
    sign = -1.0 if maximize else 1.0

    def g(x):
        return sign * fn(x)

    best = min(((a, g(a)), (b, g(b))), key=lambda p: p[1])
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    gc, gd = g(c), g(d)
    while b - a > tol:
        if gc < gd:
            b, d, gd = d, c, gc
            c = b - _INVPHI * (b - a)
            gc = g(c)
        else:
            a, c, gc = c, d, gd
            d = a + _INVPHI * (b - a)
            gd = g(d)
    for p in ((c, gc), (d, gd)):
        if p[1] < best[1]:
            best = p
    return best[0], sign * best[1]
