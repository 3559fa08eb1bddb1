"""Command-line front end.

Every subcommand prints either a plain-text table or a JSON document.  JSON
documents carry ``schema_version`` and the resolved configuration, and are
written with sorted keys so identical flags give identical bytes.

Exit codes: 0 success, 1 numerical failure, 2 usage, parse or domain error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path
from typing import Optional

import numpy as np

from . import catalog
from .coderivative import coderivative_matrix, limsup_probe
from .coincidence import ConvergenceError, ParameterizedMapping, solve_coincidence
from .covering import EtaSchedule, covering_constant
from .expr import ExprSyntaxError, load_mapping, parse_mapping
from .frechet import DEFAULT_H, DEFAULT_RADII, check_frechet, fd_jacobian
from .linalg import DimensionError, Tolerances, adjoint_apply
from .mapping import EvaluationError, ExcludedPointError, MappingHandle

SCHEMA_VERSION = "1.0"
DEFAULT_SEED = 20240601
SEED_ENV = "COD_SEED"

EXIT_OK, EXIT_NUMERICAL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    """Bad flags or an unusable mapping argument."""


class NumericalFailure(Exception):
    """The computation ran but did not produce a trustworthy answer."""

    def __init__(self, message: str, document: Optional[dict] = None):
        super().__init__(message)
        self.document = document


# -- argument parsing ---------------------------------------------------------

def parse_point(text: str, name: str = "point") -> np.ndarray:
    """Comma-separated decimals, scientific notation allowed."""
    try:
        values = [float(part) for part in text.split(",")]
    except ValueError:
        raise UsageError(f"{name}: cannot parse {text!r} as comma-separated numbers") from None
    arr = np.array(values)
    if not np.all(np.isfinite(arr)):
        raise UsageError(f"{name}: entries must be finite, got {text!r}")
    return arr


def parse_grid(text: str) -> list[np.ndarray]:
    """Semicolon-separated points, e.g. ``0.1;0.2`` or ``0,1;1,0``."""
    return [parse_point(part, "p-grid") for part in text.split(";") if part.strip()]


def default_seed() -> int:
    raw = os.environ.get(SEED_ENV)
    if raw is None:
        return DEFAULT_SEED
    try:
        seed = int(raw)
    except ValueError:
        raise UsageError(f"{SEED_ENV} must be a non-negative integer, got {raw!r}") from None
    if seed < 0:
        raise UsageError(f"{SEED_ENV} must be non-negative, got {seed}")
    return seed


def resolve_mapping(spec: str, n: Optional[int], m: Optional[int], k: int, params) -> MappingHandle:
    """Turn ``catalog:<id>`` or ``expr:<file|inline>`` into a mapping handle."""
    kind, sep, body = spec.partition(":")
    if not sep or not body:
        raise UsageError(f"mapping argument must be catalog:<id> or expr:<file|inline>, got {spec!r}")
    if kind == "catalog":
        try:
            return catalog.get(body).handle
        except KeyError as exc:
            raise UsageError(exc.args[0]) from None
    if kind != "expr":
        raise UsageError(f"unknown mapping kind {kind!r}; use catalog: or expr:")
    path = Path(body)
    try:
        if path.suffix == ".json" and path.is_file():
            mapping = load_mapping(path)
        else:
            source = path.read_text() if path.is_file() else body
            if n is None:
                raise UsageError("--n is required for expr: mappings")
            mapping = parse_mapping(source, n=n, m=m, k=k)
    except (ExprSyntaxError, ValueError, OSError) as exc:
        raise UsageError(f"cannot load {spec!r}: {exc}") from None
    if mapping.k != len(params):
        raise UsageError(f"mapping expects {mapping.k} parameters, got {len(params)}")
    return mapping.to_handle(params=params, name=body if len(body) < 60 else "expr")


def _common_options() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("json", "table"), default="table")
    common.add_argument("--out", type=Path, help="also write the JSON document to this path")
    common.add_argument("--seed", type=int, help=f"default {DEFAULT_SEED}, or ${SEED_ENV}")
    common.add_argument("--abs-tol", type=float, default=Tolerances.abs_tol)
    common.add_argument("--rel-tol", type=float, default=Tolerances.rel_tol)
    common.add_argument("--singular-floor", type=float, default=Tolerances.singular_floor)
    return common


def _mapping_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("spec", help="catalog:<id> or expr:<file|inline>")
    p.add_argument("--at", required=True, help="base point, e.g. 1,2")
    p.add_argument("--n", type=int, help="input dimension for expr: mappings (default: size of --at)")
    p.add_argument("--m", type=int, help="output dimension for expr: mappings")
    p.add_argument("--params", default="", help="parameter values p1,...,pk for expr: mappings")


def build_parser() -> argparse.ArgumentParser:
    common = _common_options()
    parser = argparse.ArgumentParser(prog="coderiv", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    cat = sub.add_parser("catalog", help="list or show reference mappings")
    cat_sub = cat.add_subparsers(dest="action", required=True)
    cat_sub.add_parser("list", parents=[common])
    show = cat_sub.add_parser("show", parents=[common])
    show.add_argument("id", choices=catalog.CATALOG_IDS)
    show.add_argument("--at", help="also evaluate the Jacobian and reference constant here")

    jac = sub.add_parser("jacobian", parents=[common], help="analytic or AD Jacobian next to finite differences")
    _mapping_options(jac)
    jac.add_argument("--h", type=float, default=DEFAULT_H, help="finite-difference step")

    fre = sub.add_parser("frechet", parents=[common], help="shrinking-radius differentiability check")
    _mapping_options(fre)
    fre.add_argument("--jacobian", help="candidate J, rows separated by ';' (default: the computed one)")
    fre.add_argument("--probes", type=int, default=8)
    fre.add_argument("--tol", type=float, default=1e-3)

    cov = sub.add_parser("covering", parents=[common], help="estimate the covering constant")
    _mapping_options(cov)
    cov.add_argument("--eta0", type=float, default=EtaSchedule.eta0)
    cov.add_argument("--factor", type=float, default=EtaSchedule.factor)
    cov.add_argument("--count", type=int, default=EtaSchedule.count)
    cov.add_argument("--samples", type=int, default=256, help="samples per eta level")

    pro = sub.add_parser("probe", parents=[common], help="limsup probe of a coderivative candidate")
    _mapping_options(pro)
    pro.add_argument("--y", required=True, help="covector")
    pro.add_argument("--z", required=True, help="candidate point, or 'auto' for J^T y")
    pro.add_argument("--tol", type=float, default=1e-3)
    pro.add_argument("--random-count", type=int, default=16)

    sol = sub.add_parser("solve", parents=[common], help="solve F(x) = G(x, p) with a distance certificate")
    sol.add_argument("--F", dest="F", required=True, help="catalog:<id> or expr:<file|inline>")
    sol.add_argument("--G", dest="G", required=True, help="expression in x1..xn and p1..pk")
    sol.add_argument("--xbar", required=True)
    group = sol.add_mutually_exclusive_group(required=True)
    group.add_argument("--p", help="parameter point")
    group.add_argument("--p-grid", help="parameter points separated by ';'")
    sol.add_argument("--alpha", type=float, required=True)
    sol.add_argument("--beta", type=float, default=0.0)
    sol.add_argument("--max-iter", type=int, default=50)
    sol.add_argument("--tol", type=float, default=1e-10)
    sol.add_argument("--m", type=int, help="output dimension for an expr: F")
    return parser


# -- commands -----------------------------------------------------------------

def _config(args, tolerances: Tolerances, seed: int, **extra) -> dict:
    cfg = {
        "command": args.command,
        "seed": seed,
        "tolerances": {
            "abs_tol": tolerances.abs_tol,
            "rel_tol": tolerances.rel_tol,
            "singular_floor": tolerances.singular_floor,
        },
    }
    cfg.update(extra)
    return cfg


def _mapping_from_args(args) -> tuple[MappingHandle, np.ndarray]:
    point = parse_point(args.at, "--at")
    params = parse_point(args.params, "--params") if args.params else np.empty(0)
    n = args.n if args.n is not None else point.size
    f = resolve_mapping(args.spec, n, args.m, params.size, params)
    if point.size != f.n:
        raise UsageError(f"--at has {point.size} entries but the mapping takes {f.n}")
    return f, point


def cmd_catalog(args, tolerances, seed) -> dict:
    if args.action == "list":
        entries = [{"id": i, "title": catalog.get(i).title, "formula": catalog.get(i).formula}
                   for i in catalog.CATALOG_IDS]
        return {"config": _config(args, tolerances, seed, action="list"), "entries": entries}
    entry = catalog.get(args.id)
    out = {
        "config": _config(args, tolerances, seed, action="show"),
        "id": entry.id,
        "title": entry.title,
        "formula": entry.formula,
        "jacobian_formula": entry.jacobian_formula,
        "covering_formula": entry.covering_formula,
        "expression": entry.expression,
        "excluded_points": [list(p) for p in entry.handle.excluded_points],
    }
    if args.at:
        z = parse_point(args.at, "--at")
        if z.size != 2:
            raise UsageError("--at needs two entries")
        if entry.handle.is_excluded(z):
            raise ExcludedPointError(f"{z.tolist()} is an excluded point of {entry.id}")
        out["at"] = z.tolist()
        out["value"] = entry.handle(z).tolist()
        out["jacobian"] = coderivative_matrix(entry.handle, z).tolist()
        out["reference_covering"] = entry.reference_covering(z).to_dict()
    return out


def cmd_jacobian(args, tolerances, seed) -> dict:
    f, z = _mapping_from_args(args)
    if f.is_excluded(z):
        raise ExcludedPointError(f"{z.tolist()} is an excluded point of {f.name}")
    exact = f.analytic_jacobian(z)
    fd = fd_jacobian(f, z, args.h)
    deviation = None if exact is None else float(np.max(np.abs(exact - fd)))
    return {
        "config": _config(args, tolerances, seed, spec=args.spec, h=args.h),
        "point": z.tolist(),
        "jacobian": None if exact is None else exact.tolist(),
        "fd_jacobian": fd.tolist(),
        "max_deviation": deviation,
    }


def _parse_matrix(text: str, m: int, n: int) -> np.ndarray:
    rows = [parse_point(r, "--jacobian") for r in text.split(";")]
    if len(rows) != m or any(r.size != n for r in rows):
        raise UsageError(f"--jacobian must be {m} rows of {n} entries")
    return np.vstack(rows)


def cmd_frechet(args, tolerances, seed) -> dict:
    f, z = _mapping_from_args(args)
    J = _parse_matrix(args.jacobian, f.m, f.n) if args.jacobian else None
    report = check_frechet(f, z, J, probes_per_radius=args.probes, tol=args.tol, seed=seed)
    return {
        "config": _config(args, tolerances, seed, spec=args.spec, probes=args.probes, tol=args.tol,
                          radii=list(DEFAULT_RADII)),
        "report": report.to_dict(),
    }


def cmd_covering(args, tolerances, seed) -> dict:
    f, z = _mapping_from_args(args)
    try:
        schedule = EtaSchedule(args.eta0, args.factor, args.count)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if args.samples < 1:
        raise UsageError("--samples must be positive")
    f(z)  # an unevaluable base point is a domain error, not a numerical one
    try:
        report = covering_constant(f, z, schedule, args.samples, seed, tolerances)
    except EvaluationError as exc:
        raise NumericalFailure(str(exc)) from None
    return {
        "config": _config(args, tolerances, seed, spec=args.spec, schedule=schedule.to_dict(),
                          samples_per_eta=args.samples),
        "report": report.to_dict(),
    }


def cmd_probe(args, tolerances, seed) -> dict:
    f, x = _mapping_from_args(args)
    y = parse_point(args.y, "--y")
    if y.size != f.m:
        raise UsageError(f"--y has {y.size} entries but the mapping has {f.m} outputs")
    if args.z == "auto":
        z = adjoint_apply(coderivative_matrix(f, x), y)
    else:
        z = parse_point(args.z, "--z")
    report = limsup_probe(f, x, y, z, random_count=args.random_count, tol=args.tol, seed=seed)
    return {
        "config": _config(args, tolerances, seed, spec=args.spec, tol=args.tol,
                          random_count=args.random_count, candidate=args.z),
        "report": report.to_dict(),
    }


def cmd_solve(args, tolerances, seed) -> dict:
    xbar = parse_point(args.xbar, "--xbar")
    F = resolve_mapping(args.F, xbar.size, args.m, 0, np.empty(0))
    if F.n != xbar.size:
        raise UsageError(f"--xbar has {xbar.size} entries but F takes {F.n}")
    grid = parse_grid(args.p_grid) if args.p_grid else [parse_point(args.p, "--p")]
    if not grid or len({p.size for p in grid}) != 1:
        raise UsageError("parameter points must be non-empty and of equal length")
    k = grid[0].size
    try:
        G = ParameterizedMapping.from_expr(parse_mapping(args.G, n=F.n, m=F.m, k=k))
    except (ExprSyntaxError, ValueError) as exc:
        raise UsageError(f"cannot parse --G: {exc}") from None
    if not 0.0 <= args.beta < args.alpha:
        raise UsageError(f"need 0 <= beta < alpha, got beta={args.beta}, alpha={args.alpha}")
    certs = [
        solve_coincidence(F, G, xbar, p, args.alpha, args.beta, args.max_iter, args.tol,
                          tolerances=tolerances)
        for p in grid
    ]
    doc = {
        "config": _config(args, tolerances, seed, F=args.F, G=args.G, alpha=args.alpha, beta=args.beta,
                          max_iter=args.max_iter, tol=args.tol),
        "certificates": [c.to_dict() for c in certs],
    }
    bad = [c for c in certs if not (c.converged and c.bound_holds)]
    if bad:
        raise NumericalFailure(
            f"{len(bad)} of {len(certs)} solves did not converge within tol or broke the distance bound",
            doc,
        )
    return doc


COMMANDS = {
    "catalog": cmd_catalog,
    "jacobian": cmd_jacobian,
    "frechet": cmd_frechet,
    "covering": cmd_covering,
    "probe": cmd_probe,
    "solve": cmd_solve,
}


# -- rendering ----------------------------------------------------------------

def _fmt(v) -> str:
    if v is None:
        return "-"
    if isinstance(v, float):
        return f"{v:.10g}"
    if isinstance(v, (list, tuple)):
        return "(" + ", ".join(_fmt(x) for x in v) + ")"
    return str(v)


def _matrix_lines(name: str, M) -> list[str]:
    if M is None:
        return [f"{name}: -"]
    return [f"{name}:"] + ["  [" + ", ".join(f"{x: .10g}" for x in row) + "]" for row in M]


def render_table(command: str, doc: dict) -> str:
    lines = []
    if command == "catalog":
        if "entries" in doc:
            for e in doc["entries"]:
                lines.append(f"{e['id']:<14} {e['formula']}")
        else:
            for key in ("id", "title", "formula", "jacobian_formula", "covering_formula", "excluded_points"):
                lines.append(f"{key:<18} {_fmt(doc[key])}")
            if "at" in doc:
                lines.append(f"{'value':<18} {_fmt(doc['value'])}")
                lines += _matrix_lines("jacobian", doc["jacobian"])
                lines.append(f"{'reference':<18} {doc['reference_covering']}")
    elif command == "jacobian":
        lines += _matrix_lines("jacobian", doc["jacobian"])
        lines += _matrix_lines("fd_jacobian", doc["fd_jacobian"])
        lines.append(f"max_deviation: {_fmt(doc['max_deviation'])}")
    elif command == "frechet":
        r = doc["report"]
        lines.append(f"{'radius':>14} {'residual':>14}")
        for rad, res in zip(r["radii"], r["worst_residual_per_radius"]):
            lines.append(f"{rad:>14.6g} {res:>14.6g}")
        lines.append(f"verdict: {r['verdict']}")
    elif command == "covering":
        r = doc["report"]
        lines.append(f"{'eta':>12} {'inf':>16} {'samples':>8} {'accepted':>8}")
        for lvl in r["per_eta_inf"]:
            lines.append(f"{lvl['eta']:>12.6g} {_fmt(lvl['inf_estimate']):>16} "
                         f"{lvl['sample_count']:>8} {lvl['accepted_count']:>8}")
        lines.append(f"final_estimate: {_fmt(r['final_estimate'])}")
        lines.append(f"monotone: {r['monotone_flag']}")
    elif command == "probe":
        r = doc["report"]
        lines.append(f"{'direction':<34} {'limit estimate':>16}")
        for ray in r["probe_rays"]:
            lines.append(f"{_fmt(ray['direction']):<34} {ray['one_sided_limit_estimate']:>16.8g}")
        for skipped in r["skipped_rays"]:
            lines.append(f"skipped {_fmt(skipped['direction'])}: {skipped['reason']}")
        lines.append(f"random_probe_max: {_fmt(r['random_probe_max'])}")
        lines.append(f"verdict: {r['verdict']}")
    elif command == "solve":
        lines.append(f"{'p':<18} {'solution':<40} {'residual':>10} {'distance':>10} {'bound':>10} {'ok':>4}")
        for c in doc["certificates"]:
            ok = "yes" if c["converged"] and c["bound_holds"] else "no"
            lines.append(f"{_fmt(c['parameter']):<18} {_fmt(c['solution']):<40} {c['residual']:>10.3g} "
                         f"{c['distance']:>10.4g} {c['bound_rhs']:>10.4g} {ok:>4}")
    return "\n".join(lines)


def dump_json(doc: dict) -> str:
    return json.dumps(doc, sort_keys=True, indent=2, allow_nan=False)


# -- entry point --------------------------------------------------------------

def _emit(args, doc: dict) -> None:
    doc = {"schema_version": SCHEMA_VERSION, **doc}
    text = dump_json(doc)
    if args.out is not None:
        args.out.write_text(text + "\n")
    print(text if args.format == "json" else render_table(args.command, doc))


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        seed = args.seed if args.seed is not None else default_seed()
        if seed < 0:
            raise UsageError("--seed must be non-negative")
        try:
            tolerances = Tolerances(args.abs_tol, args.rel_tol, args.singular_floor)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        doc = COMMANDS[args.command](args, tolerances, seed)
    except ExcludedPointError as exc:
        print(f"error: excluded point: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (UsageError, EvaluationError, DimensionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NumericalFailure as exc:
        if exc.document is not None:
            _emit(args, exc.document)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ConvergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    _emit(args, doc)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
