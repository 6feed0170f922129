"""Command-line front end.

Exit codes: 0 ok, 2 usage, 3 numerical failure, 4 validation failure.
"""
from __future__ import annotations

import argparse
import cmath
import math
import sys
import time
from dataclasses import asdict, dataclass
from fractions import Fraction

import numpy as np

from .checks import SUITES, run_suites
from .closed import InteractionPreset, mu_from_tilde, mu_tilde as to_mu_tilde
from .ensemble import EnsembleSpec, MatrixSpec, mc_average_charpoly, mc_report
from .fuss_catalan import (
    BranchPointError,
    HypergeometricError,
    density_P,
    fc_moment,
    fc_number,
    r_max,
    radial_cdf,
    rho_gurau,
    rho_radial,
    x_max,
)
from .grassmann import GrassmannError
from .output import (
    PALETTE,
    SVGCanvas,
    dumps,
    emit_histogram,
    ks_distance,
    meta_block,
    read_table,
    table_to_csv,
    table_to_json,
)
from .roots import RootFindingError, avg_roots
from .saddle import (
    THETA0,
    ActionQ,
    FlowError,
    classify_real,
    contributing_saddles,
    predict_zero_radii,
    zero_radius_deviation,
)

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC, EXIT_VALIDATION = 0, 2, 3, 4
FORMATS = ("csv", "json", "svg")


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    subcommand: str
    p: int | None = None
    n: int | None = None
    mu: str | None = None
    mu_tilde: str | None = None
    preset: str | None = None
    samples: int | None = None
    seed: int | None = None
    precision_bits: int | None = None
    tol: float | None = None
    grid: int | None = None
    out: str | None = None
    format: str | None = None

    @classmethod
    def from_args(cls, args) -> "RunConfig":
        d = vars(args)
        return cls(**{k: d.get(k) for k in cls.__dataclass_fields__ if k in d or k == "subcommand"})

    def echo(self, args) -> dict:
        out = {k: v for k, v in asdict(self).items() if v is not None}
        for k, v in sorted(vars(args).items()):
            if k not in out and v is not None and k != "func":
                out[k] = v
        return out


def parse_number(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}") from exc


def resolve_mu(args) -> tuple[Fraction, Fraction]:
    """``(μ, μ̃)`` from exactly one of ``--mu`` / ``--mu-tilde``."""
    if (args.mu is None) == (args.mu_tilde is None):
        raise UsageError("give exactly one of --mu and --mu-tilde")
    if args.mu is not None:
        mu = parse_number(args.mu)
        return mu, to_mu_tilde(mu, args.n, args.p)
    mt = parse_number(args.mu_tilde)
    return mu_from_tilde(mt, args.n, args.p), mt


def _fmt(args, default: str) -> str:
    f = args.format
    if f is None and args.out and "." in args.out:
        ext = args.out.rsplit(".", 1)[1].lower()
        f = ext if ext in FORMATS else None
    f = f or default
    if f not in FORMATS:
        raise UsageError(f"unknown format {f!r}")
    return f


def _emit(args, text: str, summary: dict) -> None:
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
        summary["out"] = args.out
        print(dumps(summary, indent=0).replace("\n", ""))
    else:
        sys.stdout.write(text)
        print(dumps(summary, indent=0).replace("\n", ""), file=sys.stderr)


def _table(args, fmt, cols, rows, meta, extra=None) -> str:
    if fmt == "csv":
        return table_to_csv(cols, rows)
    if extra and "summary" in extra:
        # wall-clock time stays out of files so reruns are byte-identical
        extra = dict(extra, summary={k: v for k, v in extra["summary"].items() if k != "seconds"})
    return table_to_json(cols, rows, meta, extra)


# --- subcommands -------------------------------------------------------------------

def cmd_roots(args) -> int:
    mu, mt = resolve_mu(args)
    fmt = _fmt(args, "csv")
    t0 = time.time()
    rs = avg_roots(args.n, args.p, mu, args.precision_bits, args.tol, init=args.init)
    lam = rs.roots
    order = np.lexsort((np.angle(lam), np.abs(lam)))
    lam, res = lam[order], rs.residual[order]
    cols = ("re", "im", "abs", "arg", "residual")
    rows = [(float(z.real), float(z.imag), float(abs(z)), float(cmath.phase(z)) if z != 0 else 0.0, float(e))
            for z, e in zip(lam, res)]
    meta = meta_block(RunConfig.from_args(args).echo(args))
    summary = {"command": "roots", "status": "ok", "count": len(rows), "precision_bits": rs.precision_bits,
               "max_residual": float(np.max(res)) if len(res) else 0.0, "seconds": round(time.time() - t0, 3)}
    if fmt == "svg":
        R = max(float(np.max(np.abs(lam))) if len(lam) else 1.0, r_max(args.p, float(mt)) if mt > 0 else 0.0) * 1.1
        cv = SVGCanvas((-R, R), (-R, R), 560, 560, title=f"roots p={args.p} N={args.n} mu~={float(mt):.4g}")
        if mt > 0:
            cv.circle(0, 0, r_max(args.p, float(mt)), stroke="#999", width=1)
        cv.scatter(lam.real, lam.imag, r=2.0, fill=PALETTE[2])
        cv.axes("Re λ", "Im λ")
        text = cv.to_string()
    else:
        text = _table(args, fmt, cols, rows, meta, {"summary": summary})
    _emit(args, text, summary)
    return EXIT_OK


def _density_curve(kind: str, p: int, mt: float, grid: int):
    if kind == "radial":
        rm = r_max(p, mt)
        xs = rm * (np.arange(grid) + 0.5) / grid
        return "r", xs, np.array([rho_radial(p, mt, x) for x in xs])
    if kind == "P":
        xm = x_max(p)
        xs = xm * (np.arange(grid) + 0.5) / grid
        return "x", xs, np.array([density_P(p, x) for x in xs])
    wc = math.sqrt(x_max(p))
    xs = wc * (2 * (np.arange(grid) + 0.5) / grid - 1)
    return "y", xs, np.array([rho_gurau(p, x) for x in xs])


def cmd_density(args) -> int:
    fmt = _fmt(args, "csv")
    mt = float(parse_number(args.mu_tilde))
    if mt <= 0:
        raise ValueError("the density needs μ̃ > 0")
    var, xs, ys = _density_curve(args.kind, args.p, mt, args.grid)
    rows = [(float(x), float(y)) for x, y in zip(xs, ys)]
    meta = meta_block(RunConfig.from_args(args).echo(args))
    summary = {"command": "density", "status": "ok", "points": len(rows), "kind": args.kind}
    if fmt == "svg":
        cv = SVGCanvas((min(0.0, xs[0]), xs[-1] * 1.02), (0, float(np.max(ys)) * 1.1),
                       title=f"{args.kind} density p={args.p}")
        cv.polyline(xs, ys, stroke=PALETTE[3], width=2)
        cv.axes(var, "density")
        text = cv.to_string()
    else:
        text = _table(args, fmt, (var, "density"), rows, meta)
    _emit(args, text, summary)
    return EXIT_OK


def cmd_moments(args) -> int:
    fmt = _fmt(args, "json")
    if fmt == "svg":
        raise UsageError("moments writes csv or json")
    rows = []
    worst = 0.0
    for k in range(args.kmax + 1):
        ex = fc_number(args.p, k)
        q = fc_moment(args.p, k)
        rel = abs(q - float(ex)) / float(ex)
        worst = max(worst, rel)
        rows.append((k, f"{ex.numerator}" if ex.denominator == 1 else f"{ex}", q, rel))
    meta = meta_block(RunConfig.from_args(args).echo(args))
    summary = {"command": "moments", "status": "ok", "max_rel_error": worst}
    _emit(args, _table(args, fmt, ("k", "exact", "quadrature", "rel_error"), rows, meta, {"summary": summary}),
          summary)
    return EXIT_OK


def _thin(pts: np.ndarray, k: int = 400) -> np.ndarray:
    if len(pts) <= k:
        return pts
    idx = np.unique(np.linspace(0, len(pts) - 1, k).round().astype(int))
    return pts[idx]


def cmd_thimble(args) -> int:
    fmt = _fmt(args, "svg")
    if fmt == "csv":
        raise UsageError("thimble writes svg or json")
    z = args.z_mod * cmath.exp(1j * args.z_arg)
    ss = contributing_saddles(args.p, z, args.contour_radius, with_descent=True)
    summary = {"command": "thimble", "status": "ok", "contributing": ss.n_contributing, "leading": ss.n_leading,
               "leading_with_real_z_action": classify_real(args.p, args.z_mod, args.z_arg).n_leading}
    if fmt == "json":
        data = {"meta": meta_block(RunConfig.from_args(args).echo(args)),
                "data": {"z": z, "contour_radius": ss.contour_radius,
                         "saddles": [{"q": s.q, "S": s.S, "residual": s.residual,
                                      "contributing": s.contributing, "leading": s.dominant}
                                     for s in ss.saddles],
                         "thimbles": [{"saddle": t.saddle_index, "direction": t.direction, "reason": t.reason,
                                       "arc_length": t.arc_length, "im_drift": t.im_drift,
                                       "points": [[float(w.real), float(w.imag)] for w in _thin(t.points)]}
                                      for t in ss.thimbles]},
                "summary": summary}
        _emit(args, dumps(data), summary)
        return EXIT_OK
    R = 1.5 * max(abs(s.q) for s in ss.saddles)
    cv = SVGCanvas((-R, R), (-R, R), 560, 560, title=f"p={args.p}  z={args.z_mod:g}·exp({args.z_arg:g}i)")
    act = ActionQ(args.p, z)
    g = args.grid
    step = 2 * R / g
    centers = -R + step * (np.arange(g) + 0.5)
    Q = centers[None, :] + 1j * centers[:, None]
    with np.errstate(all="ignore"):
        reS = np.real(act.S(Q))
    neg = reS < 0
    for i in range(g):
        # one rect per run of equal sign along the row
        j = 0
        while j < g:
            k = j
            while k + 1 < g and neg[i, k + 1] == neg[i, j]:
                k += 1
            col = "#add8e6" if neg[i, j] else "#c8a27a"
            cv.rect(centers[j] - step / 2, centers[i] - step / 2, centers[k] + step / 2, centers[i] + step / 2,
                    col, 0.6)
            j = k + 1
    for t in ss.thimbles:
        pts = _thin(t.points, 1200)
        keep = np.abs(pts) <= 1.2 * R
        pts = pts[keep]
        color = PALETTE[t.saddle_index % len(PALETTE)]
        cv.polyline(pts.real, pts.imag, stroke=color, width=2 if t.direction == "descent" else 1.2,
                    dash=None if t.direction == "descent" else "5,3")
    cv.circle(0, 0, ss.contour_radius, stroke="#000", width=1.2)
    cv.scatter([s.q.real for s in ss.saddles], [s.q.imag for s in ss.saddles], r=4, fill="#000")
    cv.axes("Re q", "Im q")
    _emit(args, cv.to_string(), summary)
    return EXIT_OK


def cmd_predict(args) -> int:
    fmt = _fmt(args, "csv")
    if fmt == "svg":
        raise UsageError("predict-zeros writes csv or json")
    mt = float(parse_number(args.mu_tilde))
    radii = predict_zero_radii(args.p, mt, args.n)
    rows = [(k, float(r)) for k, r in enumerate(radii[::-1])]
    summary = {"command": "predict-zeros", "status": "ok", "count": len(rows)}
    if args.compare:
        rs = avg_roots(args.n, args.p, mu_from_tilde(parse_number(args.mu_tilde), args.n, args.p))
        summary["mean_abs_deviation"] = zero_radius_deviation(radii, np.abs(rs.sroots) ** (1.0 / args.p))
    meta = meta_block(RunConfig.from_args(args).echo(args))
    _emit(args, _table(args, fmt, ("k", "r"), rows, meta, {"summary": summary}), summary)
    return EXIT_OK


def cmd_mc(args) -> int:
    if args.preset == "SymmetricMatrix":
        if args.p != 2:
            raise ValueError("the symmetric-matrix ensemble has p = 2")
        spec = MatrixSpec(args.n, args.sigma, args.samples, args.seed)
    else:
        preset = InteractionPreset.parse(args.preset, parse_number(args.alpha),
                                         parse_number(args.beta) if args.beta else None)
        spec = EnsembleSpec(args.n, args.p, args.kind, preset, args.samples, args.seed)
    t0 = time.time()
    res = mc_average_charpoly(spec, workers=args.workers)
    rep = mc_report(res)
    rows = [(k, float(res.mean[k].real), float(res.mean[k].imag), float(res.stderr_re[k]),
             float(res.stderr_im[k]), float(complex(res.reference[k]).real)) for k in range(args.n + 1)]
    summary = {"command": "mc", "status": "ok", "samples": res.count, "max_abs_z": rep["max_abs_z"],
               "seconds": round(time.time() - t0, 3)}
    extra = {"z": rep, "summary": summary}
    if isinstance(spec, EnsembleSpec):
        mh, se = res.mu_hat(args.n, args.p)
        mu = float(spec.mu())
        extra["mu_hat"] = {"estimate": mh, "stderr": se, "reference": mu, "z": (mh - mu) / se if se else 0.0}
    meta = meta_block(RunConfig.from_args(args).echo(args))
    fmt = _fmt(args, "json")
    if fmt == "svg":
        raise UsageError("mc writes json or csv")
    cols = ("power", "mean_re", "mean_im", "stderr_re", "stderr_im", "reference")
    _emit(args, _table(args, fmt, cols, rows, meta, extra), summary)
    return EXIT_OK


def cmd_hist(args) -> int:
    fmt = _fmt(args, "svg")
    tab = read_table(args.input)
    if args.column not in tab:
        raise ValueError(f"column {args.column!r} not in {sorted(tab)}")
    vals = tab[args.column]
    vals = vals[np.isfinite(vals)]
    h = emit_histogram(vals, args.bins)
    summary = {"command": "hist", "status": "ok", "count": int(vals.size), "bins": args.bins}
    curve = None
    if args.p is not None and args.mu_tilde is not None:
        mt = float(parse_number(args.mu_tilde))
        summary["ks"] = ks_distance(vals, lambda r: radial_cdf(args.p, mt, r))
        _, xs, ys = _density_curve("radial", args.p, mt, 200)
        curve = (xs, ys)
    meta = meta_block(RunConfig.from_args(args).echo(args))
    if fmt == "svg":
        top = float(np.max(h.density))
        if curve is not None:
            top = max(top, float(np.max(curve[1])))
        cv = SVGCanvas((float(h.edges[0]), float(h.edges[-1])), (0, 1.1 * top), title=f"histogram of {args.column}")
        for (a, b, _, d) in h.rows():
            cv.rect(a, 0, b, d, PALETTE[2], 0.5)
        if curve is not None:
            cv.polyline(curve[0], curve[1], stroke=PALETTE[3], width=2)
        cv.axes(args.column, "density")
        text = cv.to_string()
    else:
        text = _table(args, fmt, ("left", "right", "count", "density"), list(h.rows()), meta, {"summary": summary})
    _emit(args, text, summary)
    return EXIT_OK


def cmd_verify(args) -> int:
    if args.suite != "all" and args.suite not in SUITES:
        raise UsageError(f"unknown suite {args.suite!r}; choose from all, {', '.join(SUITES)}")
    results = run_suites(args.suite, quick=args.quick)
    for name, ok, detail in results:
        print(f"{'PASS' if ok else 'FAIL'} {name}: {detail}")
    failed = [r for r in results if not r[1]]
    print(dumps({"command": "verify", "status": "ok" if not failed else "fail",
                 "passed": len(results) - len(failed), "failed": len(failed)}, indent=0).replace("\n", ""))
    return EXIT_OK if not failed else EXIT_VALIDATION


# --- parser ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="tenspec", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="subcommand", required=True)

    def common(sp, fmt=True):
        sp.add_argument("--out", help="output file (stdout when omitted)")
        if fmt:
            sp.add_argument("--format", choices=FORMATS)

    sp = sub.add_parser("roots", help="roots of the averaged characteristic polynomial")
    sp.add_argument("--p", type=int, required=True)
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--mu")
    sp.add_argument("--mu-tilde")
    sp.add_argument("--precision-bits", type=int, default=64)
    sp.add_argument("--tol", type=float, default=1e-13)
    sp.add_argument("--init", choices=("polygon", "circle"), default="polygon")
    common(sp)
    sp.set_defaults(func=cmd_roots)

    sp = sub.add_parser("density", help="Fuss-Catalan / radial density samples")
    sp.add_argument("--p", type=int, required=True)
    sp.add_argument("--mu-tilde", default="1")
    sp.add_argument("--grid", type=int, default=200)
    sp.add_argument("--kind", choices=("radial", "P", "gurau"), default="radial")
    common(sp)
    sp.set_defaults(func=cmd_density)

    sp = sub.add_parser("moments", help="moment identity of the Fuss-Catalan density")
    sp.add_argument("--p", type=int, required=True)
    sp.add_argument("--kmax", type=int, default=5)
    common(sp)
    sp.set_defaults(func=cmd_moments)

    sp = sub.add_parser("thimble", help="saddles, flows and contributions in the q-plane")
    sp.add_argument("--p", type=int, required=True)
    sp.add_argument("--z-mod", type=float, required=True)
    sp.add_argument("--z-arg", type=float, default=THETA0)
    sp.add_argument("--contour-radius", type=float)
    sp.add_argument("--grid", type=int, default=100)
    common(sp)
    sp.set_defaults(func=cmd_thimble)

    sp = sub.add_parser("predict-zeros", help="zero radii from the phase condition")
    sp.add_argument("--p", type=int, required=True)
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--mu-tilde", required=True)
    sp.add_argument("--compare", action="store_true", help="also compute the roots and report the deviation")
    common(sp)
    sp.set_defaults(func=cmd_predict)

    sp = sub.add_parser("mc", help="Monte Carlo average of the characteristic polynomial")
    sp.add_argument("--p", type=int, required=True)
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--preset", default="PsiP_PsiBarP",
                    help="PsiP_PsiBarP, MixedK(k=K), SingleBarSum or SymmetricMatrix")
    sp.add_argument("--kind", choices=("real", "complex"), default="real")
    sp.add_argument("--samples", type=int, default=10000)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--alpha", default="1")
    sp.add_argument("--beta")
    sp.add_argument("--sigma", type=float, default=1.0)
    sp.add_argument("--workers", type=int)
    common(sp)
    sp.set_defaults(func=cmd_mc)

    sp = sub.add_parser("hist", help="histogram of a table column, optional density overlay and KS")
    sp.add_argument("--input", required=True)
    sp.add_argument("--column", default="abs")
    sp.add_argument("--bins", type=int, default=50)
    sp.add_argument("--p", type=int)
    sp.add_argument("--mu-tilde")
    common(sp)
    sp.set_defaults(func=cmd_hist)

    sp = sub.add_parser("verify", help="run the built-in invariant suites")
    sp.add_argument("--suite", default="all")
    sp.add_argument("--quick", action="store_true")
    sp.set_defaults(func=cmd_verify)
    return ap


def run(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        for name in ("p", "n", "grid", "kmax", "bins", "samples"):
            v = getattr(args, name, None)
            if v is not None and v < (2 if name == "p" else 1):
                raise ValueError(f"--{name} must be at least {2 if name == 'p' else 1}")
        return args.func(args)
    except (UsageError, argparse.ArgumentTypeError) as exc:
        ap.print_usage(sys.stderr)
        print(f"tenspec: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (RootFindingError, HypergeometricError, BranchPointError, FlowError, ArithmeticError) as exc:
        print(f"tenspec: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ValueError, GrassmannError, KeyError, OSError) as exc:
        print(f"tenspec: invalid input: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
