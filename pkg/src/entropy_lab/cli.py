"""Command-line front end: ``entropy-lab <command> [flags]``.

Exit codes: 0 success, 1 usage, domain or I/O error, 2 non-convergence or a
failing property suite.
"""

from __future__ import annotations

import argparse
import csv
import datetime as _dt
import io
import math
import sys
from pathlib import Path

import numpy as np

from . import comb_construction as combs
from .oscillator_basis import CoefficientVector, Symmetry, basis_values, synthesize
from .functionals import sq_of
from .minimizer import MinimizeConfig, minimize_entropy
from .parallel import ordered_map
from .results import DocumentError, ResultDocument, load, save
from .property_suite import TIERS, run_suite

EXIT_OK, EXIT_USAGE, EXIT_FAIL = 0, 1, 2
SCAN_HEADER = ("a", "S_position", "S_momentum", "total", "norm2", "total_limit_gap")
SUBSPACES = {"full": Symmetry.FULL, "odd": Symmetry.ODD, "odd-fplus": Symmetry.ODD_FPLUS}
PRESETS = {"gaussian": 0, "phi1": 1}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """argparse exits with status 2 on bad flags; this tool reserves 2 for numerical failure."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def fmt(v: float) -> str:
    return format(float(v), ".9g")


def _positive_int(s: str) -> int:
    v = int(s)
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be a positive integer, got {s}")
    return v


def _positive_float(s: str) -> float:
    v = float(s)
    if not (v > 0 and math.isfinite(v)):
        raise argparse.ArgumentTypeError(f"must be a positive number, got {s}")
    return v


def _write_csv(path: str | None, header, rows) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    if path:
        Path(path).write_text(buf.getvalue(), encoding="utf-8", newline="\n")
    else:
        sys.stdout.write(buf.getvalue())


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_minimize(args) -> int:
    try:
        cfg = MinimizeConfig(args.basis_size, SUBSPACES[args.subspace], args.algorithm,
                             tol=args.tol, seed=args.seed)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    result = minimize_entropy(cfg)
    doc = ResultDocument.from_result(result)
    if args.out:
        save(doc, args.out)
    r = result.report
    print(f"total: {fmt(r.total)}")
    print(f"S_position: {fmt(r.S_position)}")
    print(f"S_momentum: {fmt(r.S_momentum)}")
    print(f"iterations: {result.iterations}")
    print(f"converged: {'true' if result.converged else 'false'}")
    return EXIT_OK if result.converged else EXIT_FAIL


def scan_values(a_min: float, a_max: float, steps: int) -> list[float]:
    """Descending a from ``a_max`` to ``a_min``; a single step uses ``a_max``."""
    if steps == 1:
        return [a_max]
    return [float(a) for a in np.linspace(a_max, a_min, steps)]


def cmd_scan_bigaussian(args) -> int:
    if args.a_min < combs.A_FLOOR:
        raise UsageError(f"--a-min must be >= {combs.A_FLOOR}, got {args.a_min}")
    if args.a_max > 1 or args.a_max < args.a_min:
        raise UsageError(f"--a-max must lie in [a-min, 1], got {args.a_max}")
    points = ordered_map(combs.bigaussian_point, scan_values(args.a_min, args.a_max, args.steps))
    rows = [[fmt(p.a), fmt(p.S_position), fmt(p.S_momentum), fmt(p.total), fmt(p.norm2),
             fmt(p.total_limit_gap)] for p in points]
    _write_csv(args.out, SCAN_HEADER, rows)
    if args.out:
        last = points[-1]
        print(f"rows: {len(points)}")
        print(f"last: a={fmt(last.a)} total={fmt(last.total)} total_limit_gap={fmt(last.total_limit_gap)}")
    return EXIT_OK


def cmd_verify(args) -> int:
    report = run_suite(args.tier, args.seed)
    stamp = _dt.datetime.now(_dt.timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")
    text = report.to_text(generated=stamp)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8", newline="\n")
    if args.kv_out:
        Path(args.kv_out).write_text(report.to_kv(), encoding="utf-8", newline="\n")
    for r in report.records:
        value = "" if r.measured is None else f" measured={fmt(r.measured)}"
        print(f"{r.status.upper():12s} {r.id}{value}")
    print(f"aggregate: {'pass' if report.passed else 'fail'}")
    return EXIT_OK if report.passed else EXIT_FAIL


def cmd_fit(args) -> int:
    doc = load(args.input)
    f = synthesize(doc.coeffs, doc.config.grid())
    fit = combs.fit_bigaussian(f)
    print(f"a_best: {fmt(fit.a)}")
    print(f"mu_best: {fmt(fit.mu)}")
    print(f"residual: {fmt(fit.residual)}")
    if fit.poor:
        print("note: residual above 0.1, the input is not close to any bi-Gaussian")
    return EXIT_OK


def cmd_export_grid(args) -> int:
    doc = load(args.input)
    n = int(math.floor(args.half_width / args.spacing + 1e-9))
    x = np.arange(-n, n + 1) * args.spacing
    top = doc.coeffs.highest_nonzero()
    psi = doc.coeffs.coeffs[: top + 1] @ basis_values(top, x)
    if np.all(psi.imag == 0):
        rows = [[fmt(xi), fmt(v)] for xi, v in zip(x, psi.real)]
        _write_csv(args.out, ("x", "psi"), rows)
    else:
        rows = [[fmt(xi), fmt(v.real), fmt(v.imag)] for xi, v in zip(x, psi)]
        _write_csv(args.out, ("x", "psi_re", "psi_im"), rows)
    return EXIT_OK


def cmd_sq(args) -> int:
    if not args.q >= 2:
        raise UsageError(f"--q must be >= 2, got {args.q}")
    if (args.input is None) == (args.preset is None):
        raise UsageError("give exactly one of --input and --preset")
    if args.preset is not None:
        c = CoefficientVector.single(PRESETS[args.preset])
        value = sq_of(c, args.q)
    else:
        doc = load(args.input)
        value = sq_of(doc.coeffs, args.q, doc.config.grid())
    print(f"S_q: {fmt(value)}")
    return EXIT_OK


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="entropy-lab", description="Entropic uncertainty numerics in the oscillator basis.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    m = sub.add_parser("minimize", help="minimize the total entropy over a truncated basis")
    m.add_argument("--basis-size", type=_positive_int, required=True)
    m.add_argument("--subspace", choices=sorted(SUBSPACES), default="odd-fplus")
    m.add_argument("--algorithm", choices=("lbfgs", "simplex"), default="lbfgs")
    m.add_argument("--seed", type=int, default=0)
    m.add_argument("--tol", type=_positive_float, default=1e-7)
    m.add_argument("--out")
    m.set_defaults(func=cmd_minimize)

    s = sub.add_parser("scan-bigaussian", help="entropies of the bi-Gaussian family over a range of a")
    s.add_argument("--a-min", type=float, required=True)
    s.add_argument("--a-max", type=float, required=True)
    s.add_argument("--steps", type=_positive_int, required=True)
    s.add_argument("--out")
    s.set_defaults(func=cmd_scan_bigaussian)

    v = sub.add_parser("verify", help="run the property suite")
    v.add_argument("--tier", choices=TIERS, default="fast")
    v.add_argument("--seed", type=int, default=7)
    v.add_argument("--out")
    v.add_argument("--kv-out")
    v.set_defaults(func=cmd_verify)

    f = sub.add_parser("fit", help="fit a bi-Gaussian to a stored minimizer")
    f.add_argument("--input", required=True)
    f.set_defaults(func=cmd_fit)

    e = sub.add_parser("export-grid", help="sample a stored expansion on a uniform grid")
    e.add_argument("--input", required=True)
    e.add_argument("--half-width", type=_positive_float, default=6.0)
    e.add_argument("--spacing", type=_positive_float, default=0.01)
    e.add_argument("--out")
    e.set_defaults(func=cmd_export_grid)

    q = sub.add_parser("sq", help="evaluate the q-entropy functional")
    q.add_argument("--input")
    q.add_argument("--preset", choices=sorted(PRESETS))
    q.add_argument("--q", type=float, required=True)
    q.set_defaults(func=cmd_sq)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"entropy-lab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DocumentError as exc:
        print(f"entropy-lab: I/O error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except combs.DomainError as exc:
        print(f"entropy-lab: domain error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, OSError) as exc:
        print(f"entropy-lab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
