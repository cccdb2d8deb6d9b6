"""Command-line front end: CSV data for the MABK, dilution and trade-off
curves, SOS bound reports and the invariant suite.

Exit codes: 0 success, 1 verification failure, 2 usage error,
3 resource limit, 4 solver failure.  The worker-pool size is read from the
BELLEXPAND_THREADS environment variable (default 1).
"""

from __future__ import annotations

import argparse
import ast
import math
import operator
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import __version__, analytic, bellexpr, dilution, qstate, reference, verify
from .errors import BellExpandError, InvalidArgument, ResourceLimit, SolverFailure
from .sosdp import program, sdpa

EXIT_OK = 0
EXIT_VERIFY = 1
EXIT_USAGE = 2
EXIT_RESOURCE = 3
EXIT_SOLVER = 4

THREADS_ENV = "BELLEXPAND_THREADS"
DEFAULT_GRID_POINTS = 401
DEFAULT_THETA_GRIDS = (("pi/4", "3*pi/4"), ("5*pi/4", "7*pi/4"))
REPORT_TOL = 1e-5
RATE_BISECT_TOL = 1e-6


# ---------------------------------------------------------------------------
# Grid parsing


_BINOPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul, ast.Div: operator.truediv,
           ast.Pow: operator.pow}
_UNOPS = {ast.UAdd: operator.pos, ast.USub: operator.neg}
_NAMES = {"pi": math.pi}
_FUNCS = {"sqrt": math.sqrt}


def eval_number(text: str) -> float:
    """Evaluate a numeric expression such as ``3*pi/4`` or ``sqrt(2)``."""

    def walk(node):
        if isinstance(node, ast.Expression):
            return walk(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            return float(node.value)
        if isinstance(node, ast.Name) and node.id in _NAMES:
            return _NAMES[node.id]
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            return _BINOPS[type(node.op)](walk(node.left), walk(node.right))
        if isinstance(node, ast.UnaryOp) and type(node.op) in _UNOPS:
            return _UNOPS[type(node.op)](walk(node.operand))
        if (
            isinstance(node, ast.Call)
            and isinstance(node.func, ast.Name)
            and node.func.id in _FUNCS
            and len(node.args) == 1
            and not node.keywords
        ):
            return _FUNCS[node.func.id](walk(node.args[0]))
        raise InvalidArgument(f"unsupported expression {text!r}")

    try:
        tree = ast.parse(text.strip(), mode="eval")
        value = walk(tree)
    except (SyntaxError, ZeroDivisionError, ValueError, OverflowError) as exc:
        raise InvalidArgument(f"cannot evaluate {text!r}: {exc}") from None
    if not math.isfinite(value):
        raise InvalidArgument(f"{text!r} is not finite")
    return value


@dataclass(frozen=True)
class Grid:
    start: float
    stop: float
    count: int
    text: str = ""

    def __post_init__(self):
        if self.count < 2:
            raise InvalidArgument(f"grid needs at least 2 points, got {self.count}")
        if not self.start < self.stop:
            raise InvalidArgument(f"grid start {self.start!r} must be below stop {self.stop!r}")

    def values(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, self.count)


def parse_grid(text: str) -> Grid:
    parts = text.split(":")
    if len(parts) != 3:
        raise InvalidArgument(f"grid must look like start:stop:count, got {text!r}")
    try:
        count = int(parts[2])
    except ValueError:
        raise InvalidArgument(f"grid count must be an integer, got {parts[2]!r}") from None
    return Grid(eval_number(parts[0]), eval_number(parts[1]), count, text)


def parse_n_list(text: str) -> list[int]:
    try:
        values = [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise InvalidArgument(f"--n expects comma-separated integers, got {text!r}") from None
    if not values:
        raise InvalidArgument("--n needs at least one value")
    return values


# ---------------------------------------------------------------------------
# Output


@dataclass
class RunConfig:
    command: str
    n_values: list[int]
    grids: list[Grid]
    out: str | None = None
    tol: float | None = None
    sdp: bool = False
    fmt: str = "csv"
    threads: int = 1
    extra: dict = field(default_factory=dict)

    def echo(self) -> list[str]:
        grids = ";".join(g.text or f"{g.start!r}:{g.stop!r}:{g.count}" for g in self.grids) or "-"
        lines = [
            f"bellexpand {__version__}",
            f"command={self.command}",
            f"n={','.join(map(str, self.n_values)) or '-'} grid={grids} sdp={'on' if self.sdp else 'off'}",
            f"tol={self.tol!r}" if self.tol is not None else "tol=default",
        ]
        lines += [f"{k}={v}" for k, v in sorted(self.extra.items())]
        return lines


def fmt_value(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    return str(value)


def render_csv(config: RunConfig, columns: list[str], rows: list[list]) -> str:
    lines = [f"# {line}" for line in config.echo()]
    lines.append(",".join(columns))
    lines += [",".join(fmt_value(v) for v in row) for row in rows]
    return "\n".join(lines) + "\n"


def emit(config: RunConfig, text: str) -> None:
    if config.out:
        with open(config.out, "w", encoding="utf-8") as handle:
            handle.write(text)
    else:
        sys.stdout.write(text)


def parallel_map(func, items, threads: int) -> list:
    """Apply ``func`` to ``items``; results stay in input order."""
    if threads <= 1:
        return [func(item) for item in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(func, items))


# ---------------------------------------------------------------------------
# Commands


def cmd_mabk_curve(config: RunConfig) -> int:
    rows = []
    for n in config.n_values:
        if n < 2:
            raise InvalidArgument(f"mabk-curve needs N >= 2, got {n}")
        top = analytic.max_quantum(n)
        for grid in config.grids:
            for theta in grid.values():
                value = analytic.mabk_curve_value(n, float(theta))
                rows.append([n, float(theta), value, value / top, analytic.in_G(float(theta))])
    emit(config, render_csv(config, ["N", "theta", "mabk", "mabk_normalized", "in_G"], rows))
    return EXIT_OK


def cmd_dilution_curve(config: RunConfig) -> int:
    rows = []
    for n in config.n_values:
        if n > dilution.VERTEX_MAX_PARTIES:
            raise ResourceLimit(f"dilution is limited to {dilution.VERTEX_MAX_PARTIES} parties, got {n}")
        thetas = [float(t) for grid in config.grids for t in grid.values()]

        def point(theta, n=n):
            return dilution.dilution(qstate.behavior(qstate.sigma_x_strategy(n, theta))).epsilon

        for theta, eps in zip(thetas, parallel_map(point, thetas, config.threads)):
            rows.append([n, theta, eps])
    emit(config, render_csv(config, ["N", "theta", "epsilon"], rows))
    return EXIT_OK


def anchor_rate(n: int) -> float:
    """Rate of the maximally violating point, where the SOS bound peaks."""
    return n - 1 + analytic.hbin((1 - math.sqrt(2) / 2) / 2)


def sdp_rate_upper(n: int, s: float, tol: float) -> float:
    """Largest rate compatible with MABK value s according to the SOS bound.

    The bound t(r) decreases on [anchor, N], so the answer is N when
    t(N) >= s and otherwise the crossing t(r) = s found by bisection.
    Values above the bound at the anchor yield nan.
    """
    expr = bellexpr.mabk(n)

    def bound(r):
        return program.sos_upper_bound(n, expr, r, tol=tol).value

    lo, hi = anchor_rate(n), float(n)
    if bound(hi) >= s:
        return hi
    if bound(lo) < s - 1e-7:
        return math.nan
    while hi - lo > RATE_BISECT_TOL:
        mid = 0.5 * (lo + hi)
        if bound(mid) >= s:
            lo = mid
        else:
            hi = mid
    return hi


def cmd_tradeoff(config: RunConfig) -> int:
    rows = []
    tol = config.tol or 1e-8
    for n in config.n_values:
        if n < 2 or n % 2:
            raise InvalidArgument(f"tradeoff is defined for even N >= 2, got {n}")
        top = analytic.max_quantum(n)
        grids = config.grids or [Grid(1.0, top, 101, f"1:{top!r}:101")]
        values = [float(s) for grid in grids for s in grid.values()]

        def point(s, n=n, top=top):
            if s <= 1.0 or s > top + 1e-9:
                r_low = math.nan
            else:
                r_low = analytic.conjectured_tradeoff(n, s).r
            r_up = sdp_rate_upper(n, s, tol) if config.sdp and s > 1.0 else math.nan
            return [n, s, s / top, r_low, r_up]

        rows += parallel_map(point, values, config.threads)
    emit(config, render_csv(config, ["N", "s", "s_normalized", "r_lower", "r_upper_sdp"], rows))
    return EXIT_OK


def _status(err: float, tol: float) -> str:
    return "pass" if err <= tol else "fail"


def cmd_sos_bound(config: RunConfig) -> int:
    tol = config.tol or REPORT_TOL
    if config.fmt == "sdpa":
        if len(config.n_values) != 1:
            raise InvalidArgument("--format sdpa writes one problem; give a single --n")
        n = config.n_values[0]
        emit(config, sdpa.export_sdpa(program.assemble(n, bellexpr.mabk(n), float(n))))
        return EXIT_OK
    rows = []
    failed = False
    for n in config.n_values:
        if n not in reference.SOS_UPPER_DECIMALS:
            raise InvalidArgument(f"no stored reference for N={n}; choose from {sorted(reference.SOS_UPPER_DECIMALS)}")
        lower = analytic.m_star(n)
        ref = reference.M_STAR_DECIMALS[n]
        err = abs(lower - ref)
        failed |= err > 1e-8
        rows.append(["m_star", n, lower, ref, err, 1e-8, _status(err, 1e-8)])
        if config.sdp:
            sol = program.solve(program.assemble(n, bellexpr.mabk(n), float(n)), tol=min(1e-8, tol))
            if not sol.ok:
                raise SolverFailure(f"SDP for N={n} ended with status {sol.status}")
            ref = reference.SOS_UPPER_DECIMALS[n]
            err = abs(sol.t_opt - ref)
            failed |= err > tol
            rows.append(["sos_upper", n, sol.t_opt, ref, err, tol, _status(err, tol)])
    emit(config, render_csv(config, ["item", "N", "computed", "reference", "abs_error", "tolerance", "status"], rows))
    return EXIT_VERIFY if failed else EXIT_OK


def cmd_facet_bound(config: RunConfig) -> int:
    tol = config.tol or REPORT_TOL
    rows = []
    failed = False
    for name in bellexpr.FACET_NAMES:
        expr = bellexpr.facet(name)
        ref = reference.FACET_TABLE[name]
        local = bellexpr.local_bound(expr).value
        ok = abs(local - ref["local"]) <= 1e-12
        s_star = math.nan
        if config.sdp:
            sol = program.solve(program.assemble(3, expr, 3.0), tol=min(1e-8, tol))
            if not sol.ok:
                raise SolverFailure(f"SDP for facet {name} ended with status {sol.status}")
            s_star = sol.t_opt
            ok &= abs(s_star - ref["s_star"]) <= tol
        violable = ref["quantum"] > ref["local"] + 1e-12
        failed |= not ok
        rows.append(
            [name, local, ref["quantum"], s_star, ref["s_star"], ref["rate"],
             "yes" if violable else "no", "pass" if ok else "fail"]
        )
    columns = ["facet", "local_bound", "quantum_bound", "s_star_sdp", "s_star_reference",
               "rate_at_max_violation", "violable", "status"]
    emit(config, render_csv(config, columns, rows))
    return EXIT_VERIFY if failed else EXIT_OK


def cmd_verify(config: RunConfig) -> int:
    results = verify.run_all(inject_fault=config.extra.get("inject_fault", False))
    text = "\n".join(f"# {line}" for line in config.echo()) + "\n" + verify.format_report(results) + "\n"
    emit(config, text)
    return EXIT_OK if all(r.passed for r in results) else EXIT_VERIFY


COMMANDS = {
    "mabk-curve": cmd_mabk_curve,
    "dilution-curve": cmd_dilution_curve,
    "tradeoff": cmd_tradeoff,
    "sos-bound": cmd_sos_bound,
    "facet-bound": cmd_facet_bound,
    "verify": cmd_verify,
}

DEFAULT_N = {
    "mabk-curve": "2,3,4,5",
    "dilution-curve": "2,3,4,5",
    "tradeoff": "2,4",
    "sos-bound": "2,4,6",
    "facet-bound": "3",
    "verify": "",
}

DEFAULT_SDP = {"tradeoff": "off", "sos-bound": "on", "facet-bound": "on"}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(EXIT_USAGE)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="bellexpand", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"bellexpand {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--n", default=DEFAULT_N[name], help="comma-separated party counts")
        p.add_argument("--grid", action="append", default=[], help="start:stop:count; repeatable")
        p.add_argument("--out", default=None, help="output file (default stdout)")
        p.add_argument("--tol", type=float, default=None, help="tolerance override")
        p.add_argument("--sdp", choices=("on", "off"), default=DEFAULT_SDP.get(name, "off"))
        p.add_argument("--format", dest="fmt", choices=("csv", "sdpa"), default="csv")
        if name == "verify":
            p.add_argument("--inject-fault", action="store_true", help=argparse.SUPPRESS)
    return parser


def _threads() -> int:
    raw = os.environ.get(THREADS_ENV, "1")
    try:
        value = int(raw)
    except ValueError:
        raise InvalidArgument(f"{THREADS_ENV} must be an integer, got {raw!r}") from None
    return max(1, value)


def make_config(args: argparse.Namespace) -> RunConfig:
    n_values = parse_n_list(args.n) if args.n else []
    grids = [parse_grid(g) for g in args.grid]
    if not grids and args.command in ("mabk-curve", "dilution-curve"):
        grids = [parse_grid(f"{a}:{b}:{DEFAULT_GRID_POINTS}") for a, b in DEFAULT_THETA_GRIDS]
    if args.tol is not None and not (args.tol > 0 and math.isfinite(args.tol)):
        raise InvalidArgument(f"--tol must be positive, got {args.tol!r}")
    if args.fmt == "sdpa" and args.command != "sos-bound":
        raise InvalidArgument("--format sdpa is only available for sos-bound")
    extra = {}
    if getattr(args, "inject_fault", False):
        extra["inject_fault"] = True
    return RunConfig(args.command, n_values, grids, args.out, args.tol, args.sdp == "on", args.fmt,
                     _threads(), extra)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = make_config(args)
        return COMMANDS[args.command](config)
    except ResourceLimit as exc:
        sys.stderr.write(f"bellexpand: resource limit: {exc}\n")
        return EXIT_RESOURCE
    except SolverFailure as exc:
        sys.stderr.write(f"bellexpand: solver failure: {exc}\n")
        return EXIT_SOLVER
    except (InvalidArgument, OSError) as exc:
        sys.stderr.write(f"bellexpand: {exc}\n")
        return EXIT_USAGE
    except BellExpandError as exc:
        sys.stderr.write(f"bellexpand: internal error: {exc}\n")
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
