"""Command-line front end: ``afinv oned | trees | invert | verify``.

Exit codes: 0 ok, 1 verification failure, 2 input error.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath
from mpmath import mpf

from . import __version__, acceptance, trees
from .arrangement import Arrangement, OnWallError, chamber_signature, norm
from .inverse import composition_residual, fit_loglog, g_t_eval, layer_gradients, newton_inverse
from .oned import (
    METHODS,
    OneDSystem,
    critical_points,
    isochronicity_report,
    lagrange_coefficients,
)
from .scalar import DEFAULT_DIGITS, parse_rational, to_real, working_digits
from .systemfile import SystemFileError, load


class InputError(ValueError):
    pass


# ---------------------------------------------------------------------------
# Reports


@dataclass
class Table:
    title: str
    columns: list
    rows: list = field(default_factory=list)


@dataclass
class Report:
    command: str
    inputs: dict
    digits: int
    tables: list = field(default_factory=list)
    results: dict = field(default_factory=dict)
    residuals: dict = field(default_factory=dict)
    warnings: list = field(default_factory=list)
    wall_time: float | None = None


def _fmt(x, digits: int) -> str:
    if isinstance(x, mpf):
        return mpmath.nstr(x, digits, min_fixed=-4, max_fixed=6)
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, float):
        return repr(x)
    if isinstance(x, (tuple, list)):
        return "(" + ", ".join(_fmt(c, digits) for c in x) + ")"
    return str(x)


def _plain(x, digits: int):
    if isinstance(x, bool) or x is None or isinstance(x, int):
        return x
    if isinstance(x, dict):
        return {k: _plain(v, digits) for k, v in x.items()}
    if isinstance(x, (tuple, list)):
        return [_plain(c, digits) for c in x]
    return _fmt(x, digits)


def render(report: Report, fmt: str) -> str:
    show = min(report.digits, 20)
    if fmt == "json":
        data = {
            "command": report.command,
            "inputs": _plain(report.inputs, report.digits),
            "digits": report.digits,
            "results": _plain(report.results, report.digits),
            "tables": [
                {
                    "title": t.title,
                    "columns": t.columns,
                    "rows": [_plain(r, report.digits) for r in t.rows],
                }
                for t in report.tables
            ],
            "residuals": _plain(report.residuals, report.digits),
            "warnings": report.warnings,
        }
        if report.wall_time is not None:
            data["wall_time"] = round(report.wall_time, 3)
        return json.dumps(data, indent=2) + "\n"
    lines = []
    sep = "\t" if fmt == "tsv" else None
    lines.append(f"# {report.command}  (afinv {__version__}, {report.digits} digits)")
    for k, v in report.inputs.items():
        lines.append(f"# input {k}: {_fmt(v, show)}")
    for t in report.tables:
        cells = [[_fmt(c, show) for c in row] for row in t.rows]
        lines.append("")
        lines.append(f"## {t.title}")
        if sep:
            lines.append(sep.join(t.columns))
            lines.extend(sep.join(r) for r in cells)
        else:
            widths = [max([len(h)] + [len(r[i]) for r in cells]) for i, h in enumerate(t.columns)]
            lines.append("  ".join(h.ljust(w) for h, w in zip(t.columns, widths)).rstrip())
            lines.extend("  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() for r in cells)
    for title, src in (("results", report.results), ("residuals", report.residuals)):
        if src:
            lines.append("")
            lines.append(f"## {title}")
            for k, v in src.items():
                lines.append(f"{k}{sep or ': '}{_fmt(v, show)}")
    for w in report.warnings:
        lines.append(f"# warning: {w}")
    if report.wall_time is not None:
        lines.append(f"# wall time: {report.wall_time:.3f}s")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Argument helpers


def parse_point(text: str) -> tuple:
    try:
        return tuple(parse_rational(c) for c in text.split(","))
    except (ValueError, ZeroDivisionError):
        raise InputError(f"--point: cannot parse {text!r}; expected comma-separated numbers") from None


def _int_root(n: int, k: int):
    try:
        r = round(n ** (1.0 / k)) if n else 0
    except OverflowError:
        return None
    for c in (r - 1, r, r + 1):
        if c >= 0 and c**k == n:
            return c
    return None


def _rational_root(q: Fraction, k: int):
    """Exact positive k-th root of ``q`` when it is rational."""
    num, den = _int_root(q.numerator, k), _int_root(q.denominator, k)
    if num is None or den is None:
        return None
    return Fraction(num, den)


def parse_t(text: str):
    """``"0.1"`` or ``"grid:a,b,k"`` (k geometric points from a to b)."""
    try:
        if text.startswith("grid:"):
            a, b, k = text[5:].split(",")
            a, b, k = parse_rational(a), parse_rational(b), int(k)
            if k < 2 or a <= 0 or b <= 0:
                raise ValueError
            step = _rational_root(b / a, k - 1)
            if step is not None:
                return [a * step**j for j in range(k)]
            ratio = to_real(b / a)
            return [a] + [to_real(a) * ratio ** (mpf(j) / (k - 1)) for j in range(1, k - 1)] + [b]
        return parse_rational(text)
    except (ValueError, ZeroDivisionError):
        raise InputError(f"--t: cannot parse {text!r}; expected a number or grid:a,b,k") from None


# ---------------------------------------------------------------------------
# Commands


def cmd_oned(args) -> Report:
    sys_ = load(args.file)
    if not isinstance(sys_, OneDSystem):
        raise InputError(f"{args.file}: expected a 1-D system file (poles, weights)")
    D, M = args.digits, args.order
    if M < 1:
        raise InputError("--order must be >= 1")
    cps = critical_points(sys_, D)
    if args.critical == "all":
        ks = list(range(len(cps)))
    else:
        try:
            ks = [int(args.critical)]
        except ValueError:
            raise InputError("--critical must be an index or 'all'") from None
        if not 0 <= ks[0] < len(cps):
            raise InputError(f"--critical: index {ks[0]} outside 0..{len(cps) - 1}")
    rep = Report(
        "oned",
        {"file": str(args.file), "poles": list(sys_.poles), "weights": list(sys_.weights), "order": M},
        D,
    )
    rep.tables.append(
        Table(
            "critical points",
            ["k", "band_lo", "band_hi", "b_k", "f'(b_k)"],
            [[cp.index, cp.band[0], cp.band[1], cp.location, cp.slope] for cp in cps],
        )
    )
    P = (M + 1) // 2
    for k in ks:
        g = {m: lagrange_coefficients(sys_, k, M, m, D, cps).values for m in METHODS}
        with working_digits(D):
            rows = []
            worst_fast = worst_rt = mpf(0)
            for i in range(M):
                a, b, c = g["reversion"][i], g["derivative_formula"][i], g["root_tracking"][i]
                dev = max(abs(a - b), abs(a - c))
                worst_fast = max(worst_fast, abs(a - b))
                worst_rt = max(worst_rt, abs(a - c))
                rows.append([i + 1, a, b, c, dev])
            rep.tables.append(Table(f"Lagrange coefficients g_i(b_{k})", ["i", *METHODS, "max_dev"], rows))
            rep.residuals[f"k={k} reversion vs derivative_formula"] = worst_fast
            rep.residuals[f"k={k} reversion vs root_tracking"] = worst_rt
        iso = isochronicity_report(sys_, k, P, None, D, cps)
        rep.tables.append(Table(f"action coefficients A_p (k={k})", ["p", "A_p"], [[p + 1, a] for p, a in enumerate(iso.coeffs)]))
        rep.results[f"k={k} verdict"] = iso.verdict
        if iso.witness:
            rep.results[f"k={k} witness"] = f"A_{iso.witness[0]} = {mpmath.nstr(iso.witness[1], 12)}"
    rep.warnings.append("action A(c) = sum_p A_p c^p with c the orbit energy (orbit radius sqrt(2c))")
    return rep


def tree_rows(m_max: int, only: bool = False) -> list:
    rows, _ = trees.coefficient_table(m_max)
    return [r for r in rows if not only or r.m == m_max]


def cmd_trees(args):
    m = args.max_order
    if m < 1:
        raise InputError("--max-order must be >= 1")
    if m > trees.ORDER_CAP:
        raise InputError(f"--max-order {m} exceeds the order cap {trees.ORDER_CAP}")
    rows = tree_rows(m, args.only)
    if args.format == "json":
        data = [
            {
                "m": r.m,
                "coeff": str(r.coefficient),
                "numerator": r.coefficient.numerator,
                "denominator": r.coefficient.denominator,
                "edges": [list(e) for e in r.edges],
            }
            for r in rows
        ]
        return json.dumps(data) + "\n"
    if args.format == "dot":
        out, count = [], {}
        for r in rows:
            count[r.m] = count.get(r.m, 0) + 1
            out.append(trees.shape_for_code(r.code).to_dot(f"Q{r.m}_{count[r.m]}", str(r.coefficient)))
        return "\n".join(out) + "\n"
    _, summary = trees.coefficient_table(m)
    rep = Report("trees", {"max_order": m}, args.digits)
    rep.tables.append(
        Table(
            "layer coefficients",
            ["m", "coefficient", "degrees", "edges", "code"],
            [[r.m, r.coefficient, "".join(map(str, r.degree_profile)), " ".join(f"{a}-{b}" for a, b in r.edges), r.code] for r in rows],
        )
    )
    rep.tables.append(
        Table(
            "layer summary",
            ["m", "shapes", "trees_on_m+1_vertices", "signed_sum"],
            [[s.m, s.shape_count, s.tree_count, s.signed_sum] for s in summary if not args.only or s.m == m],
        )
    )
    rep.warnings.append("Q^[2] = -1/2 sum lam_h lam_k lam_l <u_h,u_k><u_h,u_l> / (f_h^2 f_k f_l)")
    return rep


def cmd_invert(args) -> Report:
    arr = load(args.file)
    if not isinstance(arr, Arrangement):
        raise InputError(f"{args.file}: expected an arrangement file (n, hyperplanes)")
    if args.point is None:
        raise InputError("--point is required")
    z = parse_point(args.point)
    if len(z) != arr.n:
        raise InputError(f"--point: expected {arr.n} coordinates, got {len(z)}")
    D, M = args.digits, args.order
    if not 0 <= M <= trees.ORDER_CAP:
        raise InputError(f"--order must lie in 0..{trees.ORDER_CAP}")
    try:
        sig = chamber_signature(arr, z)
    except OnWallError as exc:
        raise InputError(f"--point: {exc}") from None
    t_arg = parse_t(args.t)
    rep = Report("invert", {"file": str(args.file), "point": list(z), "t": args.t, "order": M, "chamber": str(sig)}, D)
    with working_digits(D):
        arr_r = arr.real()
        z_r = tuple(to_real(c) for c in z)
        grads = layer_gradients(arr_r, z_r, M)
        if isinstance(t_arg, list):
            rows, res, gaps = [], [], []
            for t in t_arg:
                r = g_t_eval(arr_r, z_r, t, M, None, grads)
                row = [t, r.value, r.residual]
                res.append(r.residual)
                if args.oracle:
                    exact = newton_inverse(arr_r, z_r, t, seed=r.value, digits=D)
                    gap = norm(tuple(a - b for a, b in zip(r.value, exact)))
                    gaps.append(gap)
                    row.append(gap)
                rows.append(row)
            cols = ["t", "G_t(z)", "residual"] + (["oracle_gap"] if args.oracle else [])
            rep.tables.append(Table("series inverse on the t grid", cols, rows))
            rep.results["residual order (fitted)"] = fit_loglog(t_arg, res).slope
            rep.results["expected order"] = M + 2
            if args.oracle:
                rep.results["oracle gap order (fitted)"] = fit_loglog(t_arg, gaps).slope
        else:
            r = g_t_eval(arr_r, z_r, t_arg, M, None, grads)
            rep.results["G_t(z)"] = r.value
            rep.residuals["|F_t(G_t(z)) - z|"] = r.residual
            if args.oracle:
                exact = newton_inverse(arr_r, z_r, t_arg, seed=r.value if t_arg else None, digits=D)
                rep.results["newton"] = exact
                rep.residuals["|series - newton|"] = norm(tuple(a - b for a, b in zip(r.value, exact)))
                rep.residuals["newton |F_t(z) - w|"] = composition_residual(arr_r, z_r, to_real(t_arg), exact)
            rep.tables.append(
                Table("layer gradients grad Q^[m](z)", ["m", "gradient"], [[m, g] for m, g in enumerate(grads)])
            )
    return rep


def cmd_verify(args) -> tuple[Report, bool]:
    results = acceptance.run_suite(args.suite, args.seed)
    rep = Report("verify", {"suite": args.suite, "seed": args.seed}, args.digits)
    rep.tables.append(
        Table("acceptance criteria", ["#", "status", "criterion", "detail"], [[c.number, "PASS" if c.passed else "FAIL", c.name, c.detail] for c in results])
    )
    ok = all(c.passed for c in results)
    rep.results["overall"] = "PASS" if ok else "FAIL"
    return rep, ok


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--digits", type=int, default=DEFAULT_DIGITS, help="working precision in decimal digits")
    common.add_argument("--format", choices=("table", "tsv", "json", "dot"), default="table")
    common.add_argument("--out", help="write the report to this path instead of stdout")
    common.add_argument("--seed", type=int, default=0, help="seed for random test points")
    common.add_argument("--timing", action="store_true", help="append wall time (breaks byte-identical output)")

    parser = argparse.ArgumentParser(prog="afinv", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"afinv {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("oned", parents=[common], help="1-D critical points, Lagrange coefficients, action series")
    p.add_argument("file")
    p.add_argument("--order", type=int, default=10)
    p.add_argument("--critical", default="all", help="critical index k or 'all'")

    p = sub.add_parser("trees", parents=[common], help="exact tree coefficients of the layers Q^[m]")
    p.add_argument("--max-order", type=int, default=5)
    p.add_argument("--only", action="store_true", help="list only layer --max-order")

    p = sub.add_parser("invert", parents=[common], help="series inverse of F_t at a point")
    p.add_argument("file")
    p.add_argument("--point")
    p.add_argument("--t", default="1/10", help="scalar or grid:a,b,k")
    p.add_argument("--order", type=int, default=5)
    p.add_argument("--oracle", action="store_true", help="also solve F_t(z) = w by Newton")

    p = sub.add_parser("verify", parents=[common], help="run the acceptance suite")
    p.add_argument("--suite", choices=("all", "oned", "trees", "invert", "dynamics"), default="all")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.digits < 15:
        parser.error("--digits must be at least 15")
    if args.format == "dot" and args.command != "trees":
        parser.error("--format dot is only available for trees")
    start = time.perf_counter()
    status = 0
    try:
        with working_digits(args.digits):
            if args.command == "oned":
                out = cmd_oned(args)
            elif args.command == "trees":
                out = cmd_trees(args)
            elif args.command == "invert":
                out = cmd_invert(args)
            else:
                out, ok = cmd_verify(args)
                status = 0 if ok else 1
    except (SystemFileError, InputError) as exc:
        print(f"afinv: error: {exc}", file=sys.stderr)
        return 2
    if isinstance(out, Report):
        if args.timing:
            out.wall_time = time.perf_counter() - start
        text = render(out, "table" if args.format == "dot" else args.format)
    else:
        text = out
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return status


if __name__ == "__main__":
    sys.exit(main())
