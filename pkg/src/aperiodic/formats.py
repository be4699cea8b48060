"""Text formats for point sets, sampled functions, spectra and reports.

Every float is written with 17 significant digits, so parsing a file and
writing it again reproduces it byte for byte.
"""
from __future__ import annotations

import json
import math
import os
import tempfile
from pathlib import Path

import numpy as np

from .apfunctions import SampledFunction, TrigPolynomial
from .diffraction import Autocorrelation, CPPRecord, Spectrum
from .pointsets import InputError, PointSet
from .seminorms import AlmostPeriodReport


def fmt(x: float) -> str:
    s = f"{float(x):.17g}"
    return "0" if s == "-0" else s


def write_atomic(path, text: str) -> None:
    """Write ``text`` to ``path`` through a temporary file and a rename."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        # mkstemp creates 0600; give the file the usual umask-derived mode
        mask = os.umask(0)
        os.umask(mask)
        os.chmod(tmp, 0o666 & ~mask)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def read_lines(path) -> list[str]:
    try:
        return Path(path).read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None


def _header(lines: list[str]) -> tuple[dict[str, str], list[str]]:
    meta: dict[str, str] = {}
    body = []
    for line in lines:
        if line.startswith("#"):
            key, sep, val = line[1:].strip().partition("=")
            if sep:
                meta[key.strip()] = val.strip()
        elif line.strip():
            body.append(line)
    return meta, body


def _floats(rows: list[str], ncols: int, path) -> np.ndarray:
    try:
        arr = np.array([[float(v) for v in r.split(",")] for r in rows], dtype=float)
    except ValueError as exc:
        raise InputError(f"{path}: malformed number ({exc})") from None
    if arr.size == 0:
        return np.empty((0, ncols))
    if arr.shape[1] != ncols:
        raise InputError(f"{path}: expected {ncols} columns, found {arr.shape[1]}")
    return arr


# -- point sets ---------------------------------------------------------------

def dumps_pointset(ps: PointSet) -> str:
    lines = [f"# window {fmt(ps.window[0])} {fmt(ps.window[1])}"]
    lines.extend(fmt(x) for x in ps.points)
    return "\n".join(lines) + "\n"


def loads_pointset(text: str, source: str = "<string>") -> PointSet:
    lines = text.splitlines()
    if not lines or not lines[0].startswith("# window"):
        raise InputError(f"{source}: missing '# window a b' header")
    try:
        a, b = (float(v) for v in lines[0].split()[2:4])
        pts = np.array([float(s) for s in lines[1:] if s.strip() and not s.startswith("#")], dtype=float)
    except ValueError as exc:
        raise InputError(f"{source}: malformed point file ({exc})") from None
    return PointSet(pts, (a, b))


def write_pointset(path, ps: PointSet) -> None:
    write_atomic(path, dumps_pointset(ps))


def read_pointset(path) -> PointSet:
    return loads_pointset("\n".join(read_lines(path)), str(path))


# -- sampled functions ----------------------------------------------------------

def dumps_function(f: SampledFunction, meta: dict | None = None) -> str:
    vals = np.asarray(f.values)
    dtype = "complex" if np.iscomplexobj(vals) else "real"
    lines = [
        f"# grid_start={fmt(f.grid_start)}",
        f"# grid_step={fmt(f.grid_step)}",
        f"# count={vals.size}",
        f"# dtype={dtype}",
    ]
    lines += [f"# {k}={json.dumps(v, sort_keys=True)}" for k, v in (meta or {}).items()]
    lines.append("x,re,im")
    x = f.x
    re, im = vals.real, (vals.imag if dtype == "complex" else np.zeros(vals.size))
    lines += [f"{fmt(a)},{fmt(b)},{fmt(c)}" for a, b, c in zip(x, re, im)]
    return "\n".join(lines) + "\n"


def loads_function(text: str, source: str = "<string>") -> SampledFunction:
    meta, body = _header(text.splitlines())
    for key in ("grid_start", "grid_step", "count"):
        if key not in meta:
            raise InputError(f"{source}: missing '# {key}=' header")
    if body and body[0].startswith("x,"):
        body = body[1:]
    arr = _floats(body, 3, source)
    if arr.shape[0] != int(meta["count"]):
        raise InputError(f"{source}: header count {meta['count']} but {arr.shape[0]} rows")
    values = arr[:, 1] + 1j * arr[:, 2] if meta.get("dtype") == "complex" else arr[:, 1]
    return SampledFunction(float(meta["grid_start"]), float(meta["grid_step"]), values)


def write_function(path, f: SampledFunction, meta: dict | None = None) -> None:
    write_atomic(path, dumps_function(f, meta))


def read_function(path) -> SampledFunction:
    return loads_function("\n".join(read_lines(path)), str(path))


# -- trigonometric polynomials --------------------------------------------------

def dumps_trig(P: TrigPolynomial) -> str:
    lines = ["re_coeff,im_coeff,frequency"]
    lines += [f"{fmt(c.real)},{fmt(c.imag)},{fmt(y)}" for c, y in P.terms]
    return "\n".join(lines) + "\n"


def loads_trig(text: str, source: str = "<string>") -> TrigPolynomial:
    _, body = _header(text.splitlines())
    if body and body[0].startswith("re_coeff"):
        body = body[1:]
    arr = _floats(body, 3, source)
    return TrigPolynomial((complex(r, i), y) for r, i, y in arr)


# -- diffraction outputs ----------------------------------------------------------

def _meta_lines(n: float, meta: dict) -> list[str]:
    lines = [f"# n={fmt(n)}"]
    lines += [f"# {k}={json.dumps(v, sort_keys=True)}" for k, v in sorted(meta.items())]
    return lines


def dumps_spectrum(s: Spectrum) -> str:
    lines = _meta_lines(s.n, s.metadata)
    lines.append("y,re_A,im_A,intensity")
    lines += [
        f"{fmt(y)},{fmt(a.real)},{fmt(a.imag)},{fmt(i)}"
        for y, a, i in zip(s.y, s.amplitude, s.intensity)
    ]
    return "\n".join(lines) + "\n"


def loads_spectrum(text: str, source: str = "<string>") -> Spectrum:
    meta, body = _header(text.splitlines())
    if "n" not in meta:
        raise InputError(f"{source}: missing '# n=' header")
    if body and body[0].startswith("y,"):
        body = body[1:]
    arr = _floats(body, 4, source)
    extra = {k: json.loads(v) for k, v in meta.items() if k != "n"}
    return Spectrum(arr[:, 0], arr[:, 1] + 1j * arr[:, 2], arr[:, 3], float(meta["n"]), extra)


def dumps_autocorrelation(g: Autocorrelation) -> str:
    meta = {"bin_tolerance": g.bin_tolerance, "max_difference": g.max_difference}
    if g.warnings:
        meta["warnings"] = g.warnings
    lines = _meta_lines(g.n, meta)
    lines.append("z,eta")
    lines += [f"{fmt(z)},{fmt(e)}" for z, e in zip(g.z, g.eta)]
    return "\n".join(lines) + "\n"


def dumps_cpp(records: list[CPPRecord], n: float, L: float) -> str:
    lines = [f"# n={fmt(n)}", f"# L={fmt(L)}", "y,intensity,amplitude_sq,discrepancy,raw_intensity"]
    lines += [
        f"{fmt(r.y)},{fmt(r.intensity)},{fmt(r.amplitude_sq)},{fmt(r.discrepancy)},{fmt(r.raw_intensity)}"
        for r in records
    ]
    return "\n".join(lines) + "\n"


# -- almost-period reports ----------------------------------------------------------

def dumps_report(r: AlmostPeriodReport) -> str:
    lines = [
        f"epsilon: {fmt(r.epsilon)}",
        f"kind: {r.kind.describe()}",
        f"scan_range: {fmt(r.scan_range[0])} {fmt(r.scan_range[1])}",
        f"scan_step: {'candidates' if r.scan_step is None else fmt(r.scan_step)}",
        f"evaluated: {r.evaluated}",
        f"count: {r.periods.size}",
        f"max_gap: {'inf' if math.isinf(r.max_gap) else fmt(r.max_gap)}",
    ]
    lines += [f"note: {note}" for note in r.notes]
    lines.append("---")
    lines += [f"{fmt(t)} {fmt(v)}" for t, v in zip(r.periods, r.values)]
    return "\n".join(lines) + "\n"
