"""Command-line front end: ``zfcert {certify,counterexample,nyquist,iqc-test}``.

Exit codes are shared by all commands: 0 success (feasible / member / clear),
1 error, 2 negative outcome (infeasible at basis / non-member / intersects),
3 verification failed.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import tempfile
from pathlib import Path

import numpy as np

from . import config
from .classes import (
    LtiUncertainty,
    StaticNonlinearity,
    falsify_nonmonotone,
    falsify_noneven_odd,
    load_nonlinearity,
    lti_membership_test,
    membership_test_static,
)
from .counterexample import GAP_VERDICT, run_counterexample
from .errors import ZFError
from .lti import FrequencyGrid, RationalTF, interval_clearance, load_plant, nyquist_samples
from .multiplier import KernelBasis, SlopeBand
from .search import (
    FEASIBLE,
    INFEASIBLE_AT_BASIS,
    SearchProblem,
    constraint_table,
    synthesize,
)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_NEGATIVE = 2
EXIT_VERIFICATION_FAILED = 3

CSV_HELP = """\
CSV columns:
  certify   omega, re_G, im_G, re_M, im_M, condition   (M = 1 - Z; last row omega = inf)
  nyquist   omega, re, im                               (last row omega = inf)
"""


def write_atomic(path: str | Path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _finite(obj):
    # strict JSON has no Infinity/NaN
    if isinstance(obj, dict):
        return {k: _finite(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_finite(v) for v in obj]
    if isinstance(obj, (float, np.floating)) and not math.isfinite(obj):
        return "nan" if math.isnan(obj) else ("inf" if obj > 0 else "-inf")
    return obj


def _dump(obj) -> str:
    return json.dumps(_finite(obj), sort_keys=True, indent=2, default=_json_default,
                      allow_nan=False) + "\n"


def _json_default(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"not JSON serialisable: {type(o).__name__}")


def _band(args) -> SlopeBand:
    return SlopeBand(args.a, args.b)


def _grid(args) -> FrequencyGrid:
    return FrequencyGrid.logspace(config.grid_points(args.grid_points), *config.OMEGA_RANGE)


def _emit(text: str, out: str | None) -> None:
    if out:
        write_atomic(out, text)
    else:
        sys.stdout.write(text)


def cmd_certify(args) -> int:
    plant = load_plant(args.plant)
    grid = _grid(args)
    prob = SearchProblem(
        plant,
        band=_band(args),
        basis=KernelBasis.default(args.basis_size, *config.RATE_RANGE),
        mode=args.mode,
        grid=grid,
    )
    cert = synthesize(prob)
    _emit(cert.to_json(), args.out)
    csv_path = args.csv or (str(Path(args.out).with_suffix(".csv")) if args.out else None)
    if csv_path:
        cand = cert.candidate
        if cand is None:
            from .multiplier import MultiplierCandidate
            cand = MultiplierCandidate.zero(prob.basis, prob.mode)
        write_atomic(csv_path, constraint_table(prob, cand))
    if cert.status == FEASIBLE:
        return EXIT_OK
    if cert.status == INFEASIBLE_AT_BASIS:
        return EXIT_NEGATIVE
    return EXIT_VERIFICATION_FAILED


def cmd_counterexample(args) -> int:
    report = run_counterexample(
        args.name, xi=args.xi, eps=args.eps, a=args.a, b=args.b,
        max_basis=args.max_basis, grid=_grid(args),
    )
    _emit(_dump(report), args.out)
    return EXIT_OK if report["verdict"] == GAP_VERDICT else EXIT_NEGATIVE


def nyquist_svg(z: np.ndarray, lo: float, hi: float, clearance: float, size: int = 480) -> str:
    """Nyquist curve (both frequency halves) with the real segment ``[lo, hi]`` highlighted."""
    pts = np.concatenate((z, z[::-1].conj()))
    xs, ys = pts.real, pts.imag
    x_min, x_max = min(xs.min(), lo, 0.0), max(xs.max(), 0.0, lo if math.isinf(hi) else hi)
    y_min, y_max = min(ys.min(), 0.0), max(ys.max(), 0.0)
    span = max(x_max - x_min, y_max - y_min, 1e-9)
    pad = 0.08 * span
    x_min, x_max, y_min, y_max = x_min - pad, x_max + pad, y_min - pad, y_max + pad
    scale = (size - 40) / max(x_max - x_min, y_max - y_min)

    def px(x, y):
        return 20 + (x - x_min) * scale, 20 + (y_max - y) * scale

    def path(seq):
        coords = [px(float(p.real), float(p.imag)) for p in seq]
        return "M" + " L".join(f"{u:.3f},{v:.3f}" for u, v in coords)

    seg_hi = x_max if math.isinf(hi) else hi
    (sx0, sy0), (sx1, sy1) = px(lo, 0.0), px(seg_hi, 0.0)
    ax0, ay = px(x_min, 0.0)
    ax1, _ = px(x_max, 0.0)
    flag = "INTERSECTS" if clearance <= 0 else f"clearance = {clearance:.6g}"
    lines = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" viewBox="0 0 {size} {size}">',
        '<rect width="100%" height="100%" fill="white"/>',
        f'<line x1="{ax0:.3f}" y1="{ay:.3f}" x2="{ax1:.3f}" y2="{ay:.3f}" stroke="#999" stroke-width="0.8"/>',
        f'<line x1="{sx0:.3f}" y1="{sy0:.3f}" x2="{sx1:.3f}" y2="{sy1:.3f}" stroke="#c00" stroke-width="3"/>',
        f'<path d="{path(z)}" fill="none" stroke="#036" stroke-width="1.2"/>',
        f'<path d="{path(z[::-1].conj())}" fill="none" stroke="#036" stroke-width="1.2" stroke-dasharray="4,3"/>',
    ]
    if z.size == 1 or np.allclose(z, z[0]):
        cx, cy = px(float(z[0].real), float(z[0].imag))
        lines.append(f'<circle cx="{cx:.3f}" cy="{cy:.3f}" r="3" fill="#036"/>')
    lines += [
        f'<text x="24" y="{size - 12}" font-family="monospace" font-size="12">{flag}</text>',
        "</svg>",
    ]
    return "\n".join(lines) + "\n"


def cmd_nyquist(args) -> int:
    plant = load_plant(args.plant)
    grid = _grid(args)
    band = _band(args)
    lo = band.binv
    hi = math.inf if band.a == 0 else 1.0 / band.a
    z = nyquist_samples(plant, grid)
    clearance = interval_clearance(plant, grid, lo, hi)
    write_atomic(args.out, nyquist_svg(z, lo, hi, clearance))
    if args.csv:
        rows = ["omega,re,im"]
        for lab, v in zip(grid.labels(), z):
            rows.append(f"{lab!r},{float(v.real)!r},{float(v.imag)!r}" if isinstance(lab, float)
                        else f"{lab},{float(v.real)!r},{float(v.imag)!r}")
        write_atomic(args.csv, "\n".join(rows) + "\n")
    status = "INTERSECTS" if clearance <= 0 else "CLEAR"
    sys.stdout.write(_dump({"clearance": clearance, "status": status,
                            "interval": [lo, "inf" if math.isinf(hi) else hi]}))
    return EXIT_OK if clearance > 0 else EXIT_NEGATIVE


BUILTINS = {
    "sat": StaticNonlinearity.saturation,
    "neg-identity": lambda: StaticNonlinearity.linear(-1.0),
    "deadzone": StaticNonlinearity.deadzone,
    # monotone but not odd: x for x >= 0, 2x for x < 0
    "asym": lambda: StaticNonlinearity([-1.0, 0.0, 1.0], [-2.0, 0.0, 1.0]),
}


def cmd_iqc_test(args) -> int:
    if args.lti:
        if not _band(args).is_monotone:
            raise ValueError("the LTI test covers the monotone class only (omit --a/--b)")
        with open(args.lti, "r", encoding="utf-8") as fh:
            d = json.load(fh)
        u = LtiUncertainty(RationalTF(d["num"], d["den"]))
        rep = lti_membership_test(u, _grid(args), args.tau_samples)
        out = rep.to_dict()
        member = rep.member
    else:
        nl = BUILTINS[args.builtin]() if args.builtin else load_nonlinearity(args.nonlinearity)
        band = _band(args)
        rep = membership_test_static(nl, band, trials=args.trials, seed=args.seed)
        out = rep.to_dict()
        member = rep.member
        if not nl.is_monotone:
            w = falsify_nonmonotone(nl, max(args.blocks, 0))
            if w.excess <= 0:
                w = falsify_nonmonotone(nl, w.min_L, w.x1, w.x2)
            out["falsification"] = {
                "construction": f"alternating blocks {w.construction}",
                "x1": w.x1, "x2": w.x2, "L": w.L, "min_L": w.min_L,
                "shifted": w.shifted, "unshifted": w.unshifted, "excess": w.excess,
            }
            member = False
        elif args.odd:
            odd = falsify_noneven_odd(nl, args.blocks)
            out["odd_test"] = odd.to_dict()
            member = member and odd.member
        out["verdict"] = "member" if member else "non-member"
        out["member"] = member
    _emit(_dump(out), args.out)
    return EXIT_OK if member else EXIT_NEGATIVE


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="zfcert",
        description="Zames-Falb multiplier certification for Lur'e feedback loops.",
        epilog=CSV_HELP,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, band=True):
        if band:
            sp.add_argument("--a", type=float, default=0.0, help="lower slope bound (default 0)")
            sp.add_argument("--b", type=float, default=math.inf, help="upper slope bound (default inf)")
        sp.add_argument("--grid-points", type=int, default=None,
                        help=f"log-spaced grid size (default {config.GRID_POINTS}, env {config.GRID_POINTS_ENV})")
        sp.add_argument("--out", default=None, help="output path (JSON; stdout if omitted)")

    c = sub.add_parser("certify", help="synthesize and verify a multiplier", epilog=CSV_HELP,
                       formatter_class=argparse.RawDescriptionHelpFormatter)
    c.add_argument("--plant", required=True, help='JSON {"num": [...], "den": [...]}')
    c.add_argument("--basis-size", type=int, default=config.BASIS_SIZE)
    c.add_argument("--mode", choices=("nonneg", "signed"), default=config.MODE)
    c.add_argument("--csv", default=None, help="per-frequency constraint CSV (default: --out with .csv)")
    c.add_argument("--seed", type=int, default=config.SEED, help="accepted for uniformity; synthesis is deterministic")
    common(c)
    c.set_defaults(func=cmd_certify)

    x = sub.add_parser("counterexample", help="reproduce a stability gap plant (constant gains stabilised, no multiplier found)")
    x.add_argument("--name", required=True, choices=("oshea-monotone", "oshea-slope"))
    x.add_argument("--xi", type=float, default=config.XI)
    x.add_argument("--eps", type=float, default=config.EPS)
    x.add_argument("--max-basis", type=int, default=config.LADDER_MAX_BASIS)
    x.add_argument("--a", type=float, default=0.5)
    x.add_argument("--b", type=float, default=2.0)
    common(x, band=False)
    x.set_defaults(func=cmd_counterexample)

    n = sub.add_parser("nyquist", help="Nyquist SVG with the critical interval", epilog=CSV_HELP,
                       formatter_class=argparse.RawDescriptionHelpFormatter)
    n.add_argument("--plant", required=True)
    n.add_argument("--csv", default=None, help="CSV of omega, re, im")
    common(n)
    n.set_defaults(func=cmd_nyquist)

    q = sub.add_parser("iqc-test", help="class membership / falsification tests")
    src = q.add_mutually_exclusive_group(required=True)
    src.add_argument("--nonlinearity", help='JSON {"breakpoints": [...], "values": [...]}')
    src.add_argument("--builtin", choices=sorted(BUILTINS), help="named nonlinearity instead of a file")
    src.add_argument("--lti", help='LTI uncertainty as JSON {"num": [...], "den": [...]}')
    q.add_argument("--odd", action="store_true", help="also run the odd-class falsification")
    q.add_argument("--blocks", type=int, default=config.BLOCKS_L, help="block count L for proof signals")
    q.add_argument("--trials", type=int, default=config.TRIALS)
    q.add_argument("--tau-samples", type=int, default=config.TAU_SAMPLES)
    q.add_argument("--seed", type=int, default=config.SEED)
    common(q)
    q.set_defaults(func=cmd_iqc_test)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "out", None) is None and args.command == "nyquist":
        parser.error("nyquist requires --out for the SVG")
    try:
        return args.func(args)
    except (ZFError, ValueError, OSError, KeyError, TypeError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        sys.stderr.write(f"zfcert {args.command}: error: {msg}\n")
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
