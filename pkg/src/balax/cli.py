"""Command-line front end.

Every report embeds the run configuration, so identical inputs and flags
give byte-identical output. Exit codes: 0 yes/computed, 1 no,
2 inconclusive, 3 input error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from . import __version__
from .balayage import balayage_genus0, balayage_genus1, lindelof_preservation_check, mass_growth_check
from .conditions import (
    PiecewiseLinear,
    blaschke,
    kahane_outer_density,
    lindelof_genus1,
    mr_compare,
    separated_from_axis,
    weak_blaschke_genus1,
)
from .entire import CanonicalProduct, check_a1_bound, check_a3, check_b3_c3, growth_report
from .grids import IntervalGrid, Verdict, parse_grid_spec
from .logmetrics import block_density_report
from .measures import AtomicCharge, Divisor, InputError, as_charge, read_atoms

EXIT_INPUT_ERROR = 3
VARIANTS = ("limsup_log", "inf_log", "best_b")


@dataclass
class RunConfig:
    command: str
    inputs: list = field(default_factory=list)
    grid: str | None = None
    tol: float | None = None
    format: str = "json"
    seed: int = 0
    options: dict = field(default_factory=dict)


def parse_inputs(paths) -> list:
    """Read each path into a Divisor or AtomicCharge."""
    return [read_atoms(p) for p in paths]


def _divisor(obj, path) -> Divisor:
    if not isinstance(obj, Divisor):
        raise InputError(f"{path}: expected a divisor (positive integer multiplicities, no atom at 0)")
    return obj


def _clean(obj):
    """JSON-safe copy: numpy scalars to Python, non-finite floats to strings."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, Verdict):
        return obj.value
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        if math.isfinite(x):
            return x
        return "nan" if math.isnan(x) else ("inf" if x > 0 else "-inf")
    if isinstance(obj, complex):
        return [_clean(obj.real), _clean(obj.imag)]
    return obj


def emit_json(doc: dict, out) -> None:
    out.write(json.dumps(_clean(doc), sort_keys=True, indent=2))
    out.write("\n")


def emit_csv(header: list[str], rows, config: RunConfig, out) -> None:
    buf = io.StringIO()
    buf.write("# config: " + json.dumps(_clean(asdict(config)), sort_keys=True) + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([f"{float(v):.17g}" if isinstance(v, (float, np.floating)) else v for v in row])
    out.write(buf.getvalue())


def _grid_kwargs(spec: str | None) -> dict:
    if spec is None:
        return {}
    rmin, rmax, ratio = parse_grid_spec(spec)
    return {"rmin": rmin, "rmax": rmax, "ratio": ratio}


def _points(values) -> list[complex]:
    pts = []
    for s in values or []:
        try:
            re, im = (float(t) for t in s.split(","))
        except ValueError:
            raise InputError(f"point must be 're,im', got {s!r}") from None
        pts.append(complex(re, im))
    return pts


def _product(args) -> CanonicalProduct:
    if args.lattice:
        try:
            step, count = args.lattice.split(":")
            return CanonicalProduct.arithmetic(float(step), int(count))
        except ValueError:
            raise InputError(f"--lattice must be step:count, got {args.lattice!r}") from None
    if not args.input:
        raise InputError("need --input or --lattice")
    return CanonicalProduct(_divisor(read_atoms(args.input), args.input))


# ---------------------------------------------------------------------------
# subcommands: each returns (document, exit code)


def cmd_density(args, config):
    div = _divisor(read_atoms(args.input), args.input)
    variants = VARIANTS if args.variant == "all" else (args.variant,)
    kw = _grid_kwargs(args.grid)
    reports = {v: block_density_report(div, v, bar=args.bar, **kw) for v in variants}
    doc = {"densities": {v: r["value"] for v, r in reports.items()}, "reports": reports}
    return doc, 0


def cmd_check(args, config):
    cond = args.condition
    if cond == "mr":
        if not (args.z and args.w):
            raise InputError("mr needs --z and --w")
        Z, W = read_atoms(args.z), read_atoms(args.w)
        grid = IntervalGrid.from_spec(args.grid) if args.grid else None
        res = mr_compare(Z, W, grid, args.slack, b=args.b, eps=args.eps, bar=args.bar)
    else:
        if not args.input:
            raise InputError(f"{cond} needs --input")
        c = read_atoms(args.input)
        if cond == "blaschke":
            res = blaschke(c, args.r0, finite=args.finite)
        elif cond == "weak_blaschke":
            res = weak_blaschke_genus1(c, args.r0, finite=args.finite)
        elif cond == "lindelof":
            res = lindelof_genus1(c, args.r0, finite=args.finite)
        elif cond == "separation":
            res = separated_from_axis(c, args.r0)
        elif cond == "kahane":
            k = PiecewiseLinear.linear(args.k_slope, args.k_intercept)
            res = kahane_outer_density(c, k, r0=args.r0, tol=args.tol or 1e-8, finite=args.finite)
        elif cond == "lindelof_bal":
            res = lindelof_preservation_check(c, args.r0, finite=args.finite)
        else:
            raise InputError(f"unknown condition {cond!r}")
    return {"condition": cond, **res.to_dict()}, res.holds.exit_code


def _ordinates(spec: str) -> np.ndarray:
    try:
        lo, hi, n = spec.split(":")
        return np.linspace(float(lo), float(hi), int(n))
    except ValueError:
        raise InputError(f"--ys must be ymin:ymax:n, got {spec!r}") from None


def cmd_balayage(args, config):
    c = read_atoms(args.input)
    if args.genus == 0:
        res = balayage_genus0(c, finite=args.finite, check=not args.no_check)
    else:
        res = balayage_genus1(c, args.r0)
    ys = _ordinates(args.ys)
    vals = res.density(ys) if args.emit == "density" else res.distribution(ys)
    vals = np.atleast_1d(vals)
    if args.format == "csv":
        return (["y", args.emit], list(zip(ys.tolist(), vals.tolist()))), 0
    doc = {"result": res.to_dict(), "y": ys, args.emit: vals}
    if args.genus == 1 and args.growth:
        doc["mass_growth"] = mass_growth_check(res).to_dict()
    return doc, 0


def cmd_product(args, config):
    prod = _product(args)
    pts = _points(args.point)
    rows = []
    for z in pts:
        v = prod.evaluate(z)
        rows.append({"z": z, "log_abs": v.value, "error": v.error, "hit": v.hit})
    doc: dict[str, Any] = {"values": rows, "atoms": len(prod.divisor)}
    if args.growth:
        rmin, rmax, ratio = parse_grid_spec(args.grid or "10:1000:1.5")
        radii = np.geomspace(rmin, rmax, max(2, int(round(math.log(rmax / rmin) / math.log(ratio))) + 1))
        doc["growth"] = growth_report(prod, radii).to_dict()
    if args.format == "csv":
        return (["re", "im", "log_abs", "error"], [(r["z"].real, r["z"].imag, r["log_abs"], r["error"]) for r in rows]), 0
    return doc, 0


def cmd_verify(args, config):
    f = _product(args)
    M = CanonicalProduct(_divisor(read_atoms(args.m_input), args.m_input)) if args.m_input else f
    shift = args.shift
    Mv = (lambda z: M(z) + shift) if shift else M
    if shift:
        Mv.singular_points = M.singular_points
    tol = args.tol or 1e-6
    if args.check == "a3":
        res = check_a3(f, Mv, args.q, args.y0, y_max=args.y_max, tol=tol)
    elif args.check in ("b3", "c3"):
        res = check_b3_c3(f, Mv, None, args.check, args.eps_value, y0=args.y0, y_max=args.y_max, tol=tol)
    else:
        zero = lambda z: np.zeros(np.shape(z))
        res = check_a1_bound(zero, f, Mv, args.p, y_max=args.y_max, tol=tol)
    return {"check": args.check, **res.to_dict()}, res.verdict.exit_code


def cmd_report(args, config):
    c = read_atoms(args.input)
    ch = as_charge(c)
    doc: dict[str, Any] = {
        "atoms": len(ch),
        "total_mass": ch.total_mass(),
        "horizon": ch.horizon(),
        "conditions": {
            "blaschke": blaschke(ch, args.r0, finite=args.finite).to_dict(),
            "weak_blaschke": weak_blaschke_genus1(ch, args.r0, finite=args.finite).to_dict(),
            "lindelof": lindelof_genus1(ch, args.r0, finite=args.finite).to_dict(),
            "separation": separated_from_axis(ch, args.r0).to_dict(),
        },
    }
    if isinstance(c, Divisor) and ch.horizon() > 4:
        doc["densities"] = {v: block_density_report(c, v)["value"] for v in VARIANTS}
    if not ch.has_atom_at_zero():
        doc["mass_growth"] = mass_growth_check(balayage_genus1(ch, args.r0)).to_dict()
    return doc, 0


# ---------------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    # usage errors are input errors; exit code 2 means "inconclusive"
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT_ERROR, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="balax", description="Zero distributions, balayage and growth checks.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--output", "-o", help="write the report here instead of stdout")
    common.add_argument("--tol", type=float, help="quadrature / comparison tolerance")
    common.add_argument("--seed", type=int, default=0, help="recorded in the report")
    common.add_argument("--grid", help="rmin:rmax:ratio")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("density", parents=[common], help="logarithmic block densities of a divisor")
    p.add_argument("--input", required=True)
    p.add_argument("--variant", choices=(*VARIANTS, "all"), default="all")
    p.add_argument("--bar", action="store_true", help="use the barred interval function")
    p.set_defaults(func=cmd_density)

    p = sub.add_parser("check", parents=[common], help="decide one condition")
    p.add_argument("--condition", required=True, type=lambda s: s.replace("-", "_"),
                   choices=("blaschke", "weak_blaschke", "lindelof", "separation", "mr", "kahane", "lindelof_bal"))
    p.add_argument("--input")
    p.add_argument("--z", help="first sequence for mr")
    p.add_argument("--w", help="second sequence for mr")
    p.add_argument("--slack", choices=("none", "b_log", "eps", "vanishing"), default="none")
    p.add_argument("--b", type=float)
    p.add_argument("--eps", type=float, action="append")
    p.add_argument("--bar", action="store_true")
    p.add_argument("--r0", type=float, default=1.0)
    p.add_argument("--finite", action="store_true", help="the atoms are the whole charge, not a truncation")
    p.add_argument("--k-slope", type=float, default=0.0)
    p.add_argument("--k-intercept", type=float, default=0.0)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("balayage", parents=[common], help="sweep a charge onto the imaginary axis")
    p.add_argument("--input", required=True)
    p.add_argument("--genus", type=int, choices=(0, 1), default=1)
    p.add_argument("--r0", type=float, default=1.0)
    p.add_argument("--emit", choices=("density", "distribution"), default="distribution")
    p.add_argument("--ys", default="-5:5:11", help="ordinate grid ymin:ymax:n")
    p.add_argument("--finite", action="store_true")
    p.add_argument("--no-check", action="store_true", help="skip the Blaschke test (genus 0)")
    p.add_argument("--growth", action="store_true", help="add the mass growth check (genus 1)")
    p.set_defaults(func=cmd_balayage)

    for name, func, helptext in (
        ("product", cmd_product, "evaluate a genus-1 canonical product"),
        ("verify", cmd_verify, "growth-majorant checks a1/a3/b3/c3"),
    ):
        p = sub.add_parser(name, parents=[common], help=helptext)
        p.add_argument("--input", help="divisor file")
        p.add_argument("--lattice", help="step:count, zeros at +-step*k with tail correction")
        p.set_defaults(func=func)
        if name == "product":
            p.add_argument("--point", action="append", help="evaluation point re,im (repeatable)")
            p.add_argument("--growth", action="store_true")
        else:
            p.add_argument("--check", choices=("a1", "a3", "b3", "c3"), required=True)
            p.add_argument("--m-input", help="divisor of the majorant product (default: same)")
            p.add_argument("--shift", type=float, default=0.0, help="constant added to the majorant")
            p.add_argument("--q", type=float, default=1.0)
            p.add_argument("--eps-value", type=float, default=0.1)
            p.add_argument("--p", type=float, default=0.0)
            p.add_argument("--y0", type=float, default=1.0)
            p.add_argument("--y-max", type=float, default=50.0)

    p = sub.add_parser("report", parents=[common], help="summary of all conditions for one charge")
    p.add_argument("--input", required=True)
    p.add_argument("--r0", type=float, default=1.0)
    p.add_argument("--finite", action="store_true")
    p.set_defaults(func=cmd_report)
    return ap


def _config(args) -> RunConfig:
    skip = {"func", "command", "format", "output", "tol", "seed", "grid"}
    inputs = [getattr(args, k) for k in ("input", "z", "w", "m_input") if getattr(args, k, None)]
    options = {k: v for k, v in sorted(vars(args).items()) if k not in skip}
    return RunConfig(args.command, inputs, args.grid, args.tol, args.format, args.seed, options)


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    config = _config(args)
    try:
        doc, code = args.func(args, config)
    except (InputError, ValueError, OSError) as exc:
        print(f"balax: error: {exc}", file=sys.stderr)
        return EXIT_INPUT_ERROR
    out = io.StringIO()
    if isinstance(doc, tuple):
        emit_csv(*doc, config, out)
    elif args.format == "csv":
        print("balax: error: csv output is only available for balayage and product", file=sys.stderr)
        return EXIT_INPUT_ERROR
    else:
        doc["config"] = asdict(config)
        emit_json(doc, out)
    if args.output:
        Path(args.output).write_text(out.getvalue(), encoding="utf-8")
    else:
        sys.stdout.write(out.getvalue())
    return code


if __name__ == "__main__":
    raise SystemExit(main())
