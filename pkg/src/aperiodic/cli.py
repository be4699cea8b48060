"""Command line: generate point sets and functions, then analyse them.

Exit status is 0 on success, 2 when the run finished with numerical
warnings only, and 1 on errors.  The worker thread count comes from the
``APERIODIC_THREADS`` environment variable.
"""
from __future__ import annotations

import argparse
import math
import sys

import numpy as np

from . import apfunctions as apf
from . import diffraction as dif
from . import formats
from . import pointsets as pts
from . import seminorms as sem
from ._util import THREADS_ENV
from .config import ExperimentConfig, check, defaults_table
from .pointsets import InputError

POINT_GENERATORS = ("fibonacci", "model-set", "squarefree", "shifted-halves", "digit-parity", "lattice")
FUNCTION_GENERATORS = (
    "fibonacci-triangle",
    "comb",
    "zoo-quasiperiodic",
    "zoo-limit-periodic",
    "zoo-limit-quasiperiodic",
)


class Run:
    """Collects warnings and routes summaries away from data on stdout."""

    def __init__(self, output: str | None):
        self.output = output
        self.warnings: list[str] = []

    def say(self, msg: str) -> None:
        print(msg, file=sys.stderr if self.output in (None, "-") else sys.stdout)

    def warn(self, msg: str) -> None:
        self.warnings.append(msg)
        print(f"warning: {msg}", file=sys.stderr)

    def emit(self, text: str) -> None:
        if self.output in (None, "-"):
            sys.stdout.write(text)
        else:
            formats.write_atomic(self.output, text)

    @property
    def status(self) -> int:
        return 2 if self.warnings else 0


def _auto_n(ps: pts.PointSet, n: float | None) -> float:
    if n is not None:
        return n
    a, b = ps.window
    n = min(-a, b)
    if not n > 0:
        raise InputError(f"window {ps.window} does not contain a neighbourhood of 0; pass --n")
    return float(n)


def _auto_n_function(f: apf.SampledFunction, n: float | None) -> float:
    if n is not None:
        return n
    n = min(-f.grid_start, f.grid_end)
    if not n > 0:
        raise InputError("function grid does not contain a neighbourhood of 0; pass --n")
    return float(n)


def _load_any(path: str):
    text = "\n".join(formats.read_lines(path))
    if text.startswith("# window"):
        return formats.loads_pointset(text, path)
    return formats.loads_function(text, path)


def _phi(args) -> apf.TestFunction:
    return apf.TestFunction(args.phi, 0.0, args.half_width, 1.0)


def _kind(args, n: float | None) -> sem.SeminormKind:
    if args.kind == "sup":
        return sem.SeminormKind.sup(args.n)
    if args.kind == "besicovitch":
        return sem.SeminormKind.besicovitch(n)
    return sem.SeminormKind.weyl(n, args.weyl_step)


# -- subcommands ------------------------------------------------------------------

def cmd_generate(cfg: ExperimentConfig, args, run: Run) -> None:
    what = args.what
    if what in POINT_GENERATORS:
        if what == "fibonacci":
            ps = pts.fibonacci_substitution_points(cfg.get("iterations"), args.seed)
        elif what == "model-set":
            if args.n is None:
                raise InputError("model-set needs --n")
            ps = pts.fibonacci_model_set(args.n)
        else:
            # --n doubles as the half-range of the integer-based sets
            N = args.N if args.N is not None else args.n
            if N is None:
                N = cfg.get("N")
            N = check("N", N)
            ps = {
                "squarefree": pts.squarefree_points,
                "shifted-halves": pts.shifted_halves,
                "digit-parity": pts.digit_parity_points,
                "lattice": pts.integer_lattice,
            }[what](int(N))
        run.emit(formats.dumps_pointset(ps))
        a, b = ps.window
        run.say(f"{what}: {len(ps)} points in [{a:g}, {b:g}], density {ps.density():.6f}")
        return

    step = cfg.get("grid_step")
    meta = {"generator": what}
    if what == "fibonacci-triangle":
        tiling = pts.fibonacci_substitution_points(cfg.get("iterations"), args.seed)
        # Grid.covering rounds outward, so stay a step inside the outer tiles
        lo, hi = args.range or (tiling.points[0] + step, tiling.points[-1] - step)
        f = apf.fibonacci_triangle(tiling, apf.Grid.covering(lo, hi, step))
        meta["iterations"] = cfg.get("iterations")
    elif what == "comb":
        if args.input is None:
            raise InputError("comb needs --input POINTS")
        ps = formats.read_pointset(args.input)
        phi = _phi(args)
        lo, hi = args.range or (ps.window[0] + phi.half_width, ps.window[1] - phi.half_width)
        f = apf.comb_convolve(ps, phi, apf.Grid.covering(lo, hi, step))
        meta.update(phi=phi.kind, half_width=phi.half_width)
    else:
        if args.range is None:
            raise InputError(f"{what} needs --range LO HI")
        grid = apf.Grid.covering(*args.range, step)
        terms = cfg.get("zoo_terms")
        if what == "zoo-quasiperiodic":
            f = apf.zoo_quasiperiodic(grid)
        elif what == "zoo-limit-periodic":
            f = apf.zoo_limit_periodic(grid, terms)
            meta.update(terms=terms, tail_bound=apf.zoo_tail_bound("limit_periodic", terms))
        else:
            f = apf.zoo_limit_quasiperiodic(grid, terms)
            meta.update(terms=terms, tail_bound=apf.zoo_tail_bound("limit_quasiperiodic", terms))
    run.emit(formats.dumps_function(f, meta))
    run.say(f"{what}: {f.values.size} samples on [{f.grid_start:g}, {f.grid_end:g}] step {f.grid_step:g}")


def cmd_diffract(cfg: ExperimentConfig, args, run: Run) -> None:
    ps = formats.read_pointset(args.input)
    n = _auto_n(ps, args.n)
    threshold = args.threshold if args.threshold is not None else cfg.get("threshold_fraction") * ps.density(-n, n)
    L = cfg.get("L")
    spec = dif.peak_scan(ps, tuple(args.range), cfg.get("y_step"), n, threshold, L=min(L, 2 * n))
    for w in spec.metadata.get("warnings", []):
        run.warn(w)
    raw = np.asarray(spec.metadata.get("raw_intensity", []))
    neg = cfg.get("negative_tolerance")
    if raw.size and raw.min() < -neg:
        run.warn(f"raw intensity {raw.min():.4g} below -{neg:g} (clamped to 0)")
    run.emit(formats.dumps_spectrum(spec))
    if args.autocorrelation:
        gamma = dif.autocorrelation(ps, n, cfg.get("bin_tolerance"), max_difference=min(L, 2 * n))
        formats.write_atomic(args.autocorrelation, formats.dumps_autocorrelation(gamma))
    run.say(f"{len(spec)} peaks with |A| >= {threshold:.4g} in [{args.range[0]:g}, {args.range[1]:g}] at n={n:g}")


def cmd_cpp(cfg: ExperimentConfig, args, run: Run) -> None:
    ps = formats.read_pointset(args.input)
    n = _auto_n(ps, args.n)
    L = min(cfg.get("L"), 2 * n)
    gamma = dif.autocorrelation(ps, n, cfg.get("bin_tolerance"), max_difference=L)
    for w in gamma.warnings:
        run.warn(w)
    records = dif.cpp_check(ps, args.ys, n, L, gamma=gamma)
    run.emit(formats.dumps_cpp(records, n, L))
    worst = max(r.discrepancy for r in records)
    run.say(f"largest |I - |A|^2| = {worst:.6f} over {len(records)} frequencies")


def cmd_seminorm(cfg: ExperimentConfig, args, run: Run) -> None:
    f = formats.read_function(args.input)
    n = None if args.kind == "sup" and args.n is None else _auto_n_function(f, args.n)
    kind = _kind(args, n)
    g = f if args.translate is None else sem.difference_function(f, args.translate)
    value = sem.seminorm_estimate(g, kind)
    lines = [f"kind: {kind.describe()}"]
    if args.translate is not None:
        lines.append(f"translate: {formats.fmt(args.translate)}")
    lines.append(f"estimate: {formats.fmt(value)}")
    if kind.n is not None:
        for m, v in sem.convergence(g, kind):
            lines.append(f"at n={m:g}: {formats.fmt(v)}")
    run.emit("\n".join(lines) + "\n")


def cmd_aps(cfg: ExperimentConfig, args, run: Run) -> None:
    obj = _load_any(args.input)
    eps = cfg.get("epsilon")
    lo, hi = args.range
    if args.candidates == "fibonacci":
        cands = sem.fibonacci_translate_candidates((lo, hi), cfg.get("internal_radius"))
    elif args.candidates == "integers":
        cands = np.arange(math.ceil(lo), math.floor(hi) + 1, dtype=float)
    else:
        cands = None
    if isinstance(obj, pts.PointSet):
        if cands is None:
            raise InputError("point-set input needs --candidates")
        n = _auto_n(obj, args.n)
        report = dif.mean_ap_certificate(obj, _phi(args), cands, eps, n, cfg.get("grid_step"))
    else:
        n = None if args.kind == "sup" and args.n is None else _auto_n_function(obj, args.n)
        report = sem.scan_almost_periods(
            obj, eps, _kind(args, n), (lo, hi),
            scan_step=None if cands is not None else args.step, candidates=cands,
            refine=False if args.no_refine else None, refine_tol=cfg.get("refine_tol"),
        )
    if args.candidates == "fibonacci":
        report.notes.append(f"candidates m + n phi with |m + n phi'| < {cfg.get('internal_radius'):g} (calibration)")
    run.emit(formats.dumps_report(report))
    run.say(f"{report.periods.size} almost periods below {eps:g}, max_gap {report.max_gap:g}")


def cmd_reconstruct(cfg: ExperimentConfig, args, run: Run) -> None:
    ps = formats.read_pointset(args.input)
    n = _auto_n(ps, args.n)
    phi = _phi(args)
    step = cfg.get("grid_step")
    spec = dif.peak_scan(ps, (0.0, args.y_max), cfg.get("y_step"), n, args.threshold, L=None).symmetrized()
    half = args.grid_half_width or (n - phi.half_width)
    grid = apf.Grid.covering(-half, half, step)
    target = apf.comb_convolve(ps, phi, grid)
    bes, sup = sem.SeminormKind.besicovitch(half), sem.SeminormKind.sup()
    norm = sem.seminorm_estimate(target, bes)
    lines = [f"# n={formats.fmt(n)}", f"# norm_besicovitch={formats.fmt(norm)}", "K,peaks,besicovitch_error,sup_error"]
    recon = None
    for K in args.K:
        peaks = spec.top(K, phi if args.rank == "weight" else None)
        recon = dif.fourier_bohr_reconstruction(ps, phi, peaks, grid)
        diff = target - recon.function.values.real
        lines.append(f"{K},{len(peaks)},{formats.fmt(sem.seminorm_estimate(diff, bes))},"
                     f"{formats.fmt(sem.seminorm_estimate(diff, sup))}")
        if recon.imaginary_residue > 1e-6:
            run.warn(f"K={K}: imaginary residue {recon.imaginary_residue:.3g}")
    if args.function_output:
        formats.write_function(args.function_output, recon.function, {"K": args.K[-1], "phi": phi.kind})
    run.emit("\n".join(lines) + "\n")
    run.say(f"reconstructed from {len(spec)} peaks found in [-{args.y_max:g}, {args.y_max:g}]")


def cmd_stability(cfg: ExperimentConfig, args, run: Run) -> None:
    ps = formats.read_pointset(args.input)
    centers = list(args.centers)
    if args.hole_n is not None:
        c, count = dif.sparsest_window(ps, args.hole_n)
        centers.append(c)
        run.say(f"sparsest window of half-width {args.hole_n:g} centered at {c:g} holds {count} points")
    rep = dif.amplitude_stability(ps, args.y, args.n_sequence, centers)
    lines = [
        f"# y={formats.fmt(rep.y)}",
        f"# n_spread={formats.fmt(rep.n_spread)}",
        f"# center_spread={formats.fmt(rep.center_spread)}",
        "n,center,re_A,im_A",
    ]
    for i, n in enumerate(rep.n_sequence):
        for j, c in enumerate(rep.centers):
            a = rep.estimates[i, j]
            lines.append(f"{formats.fmt(n)},{formats.fmt(c)},{formats.fmt(a.real)},{formats.fmt(a.imag)}")
    run.emit("\n".join(lines) + "\n")
    run.say(f"spread over n: {rep.n_spread:.6f}, over centers: {rep.center_spread:.6f}")


COMMANDS = {
    "generate": cmd_generate,
    "diffract": cmd_diffract,
    "cpp": cmd_cpp,
    "seminorm": cmd_seminorm,
    "aps": cmd_aps,
    "reconstruct": cmd_reconstruct,
    "stability": cmd_stability,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="aperiodic",
        description="Aperiodic point sets, diffraction and almost periodicity diagnostics.",
        epilog=defaults_table() + f"\n\nthreads: set {THREADS_ENV} (default 1)",
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, help_):
        sp = sub.add_parser(name, help=help_, epilog=defaults_table(), formatter_class=argparse.RawDescriptionHelpFormatter)
        sp.add_argument("-o", "--output", help="output file (default: stdout)")
        return sp

    g = add("generate", "write a point set or a tabulated function")
    g.add_argument("what", choices=POINT_GENERATORS + FUNCTION_GENERATORS)
    g.add_argument("--iterations", type=int)
    g.add_argument("--seed", default="l|l", help="two-sided seed word (default l|l)")
    g.add_argument("--N", type=int, help="integer half-range")
    g.add_argument("--n", type=float, help="half-width of the model-set window")
    g.add_argument("--range", type=float, nargs=2, metavar=("LO", "HI"))
    g.add_argument("--grid-step", type=float)
    g.add_argument("--terms", dest="zoo_terms", type=int)
    g.add_argument("--input", help="point set for 'comb'")
    g.add_argument("--phi", choices=("tent", "raised_cosine"), default="tent")
    g.add_argument("--half-width", type=float, default=0.4)

    d = add("diffract", "Bragg peak scan with amplitudes and intensities")
    d.add_argument("--input", required=True)
    d.add_argument("--range", type=float, nargs=2, required=True, metavar=("LO", "HI"))
    d.add_argument("--step", dest="y_step", type=float)
    d.add_argument("--n", type=float)
    d.add_argument("--threshold", type=float, help="absolute |A| threshold")
    d.add_argument("--threshold-fraction", type=float)
    d.add_argument("--L", type=float)
    d.add_argument("--bin-tolerance", type=float)
    d.add_argument("--autocorrelation", help="also write z,eta to this file")

    c = add("cpp", "compare pair-based intensities with |A|^2")
    c.add_argument("--input", required=True)
    c.add_argument("--ys", type=float, nargs="+", required=True)
    c.add_argument("--n", type=float)
    c.add_argument("--L", type=float)
    c.add_argument("--bin-tolerance", type=float)

    s = add("seminorm", "sup, Besicovitch or Weyl estimate of a tabulated function")
    s.add_argument("--input", required=True)
    s.add_argument("--kind", choices=("sup", "besicovitch", "weyl"), required=True)
    s.add_argument("--n", type=float)
    s.add_argument("--weyl-step", type=float, default=sem.WEYL_TRANSLATE_STEP)
    s.add_argument("--translate", type=float, help="estimate ||f - f(. - t)|| instead")

    a = add("aps", "scan for epsilon-almost periods")
    a.add_argument("--input", required=True, help="function file, or a point set for the comb test")
    a.add_argument("--kind", choices=("sup", "besicovitch", "weyl"), default="sup")
    a.add_argument("--epsilon", type=float)
    a.add_argument("--range", type=float, nargs=2, required=True, metavar=("LO", "HI"))
    a.add_argument("--step", type=float, default=0.01)
    a.add_argument("--candidates", choices=("fibonacci", "integers"))
    a.add_argument("--internal-radius", type=float)
    a.add_argument("--n", type=float)
    a.add_argument("--weyl-step", type=float, default=sem.WEYL_TRANSLATE_STEP)
    a.add_argument("--no-refine", action="store_true")
    a.add_argument("--refine-tol", type=float)
    a.add_argument("--grid-step", type=float)
    a.add_argument("--phi", choices=("tent", "raised_cosine"), default="tent")
    a.add_argument("--half-width", type=float, default=0.4)

    r = add("reconstruct", "partial Fourier-Bohr series of the comb convolution")
    r.add_argument("--input", required=True)
    r.add_argument("--K", type=int, nargs="+", default=[5, 20, 80])
    r.add_argument("--y-max", type=float, default=4.0)
    r.add_argument("--step", dest="y_step", type=float)
    r.add_argument("--threshold", type=float, default=0.01)
    r.add_argument("--n", type=float)
    r.add_argument("--phi", choices=("tent", "raised_cosine"), default="tent")
    r.add_argument("--half-width", type=float, default=0.4)
    r.add_argument("--rank", choices=("amplitude", "weight"), default="amplitude",
                   help="order peaks by |A| or by |A phi_hat|")
    r.add_argument("--grid-half-width", type=float)
    r.add_argument("--grid-step", type=float)
    r.add_argument("--function-output", help="write the largest-K reconstruction here")

    t = add("stability", "amplitude over window sizes and centers")
    t.add_argument("--input", required=True)
    t.add_argument("--y", type=float, required=True)
    t.add_argument("--n-sequence", type=float, nargs="+", required=True)
    t.add_argument("--centers", type=float, nargs="+", default=[0.0])
    t.add_argument("--hole-n", type=float, help="add the center of the sparsest window of this half-width")
    return p


def _config(args) -> ExperimentConfig:
    keys = ("iterations", "N", "n", "grid_step", "zoo_terms", "half_width", "y_step", "threshold_fraction",
            "L", "bin_tolerance", "weyl_step", "refine_tol", "epsilon", "internal_radius")
    params = {k: getattr(args, k) for k in keys if getattr(args, k, None) is not None}
    if getattr(args, "K", None):
        for K in args.K:
            ExperimentConfig("reconstruct", {"K": K}).validate()
    return ExperimentConfig(args.command, params, args.output).validate()


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    run = Run(args.output)
    try:
        cfg = _config(args)
        COMMANDS[args.command](cfg, args, run)
    except (InputError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return run.status


if __name__ == "__main__":
    sys.exit(main())
