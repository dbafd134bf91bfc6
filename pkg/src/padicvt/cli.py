"""``vt``: command line front end.

Exit codes: 0 all checks pass, 1 a check failed, 2 the configuration or an
input file is invalid, 3 the computation raised.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile
from fractions import Fraction
from pathlib import Path

import jsonschema
import numpy as np

from . import checks
from .core import decomposition_from_json
from .corpus import corpus_to_json, make_corpus
from .dirichlet import DirichletProblem, comparison_check, radial_step, solve_dirichlet
from .inequalities import rayleigh_sweep
from .operator import VTParams, apply_hypersingular, apply_spectral
from .regularity import (
    LambdaSequence,
    estimate_holder_exponent,
    fundamental_constant,
    make_punctured_disk,
    make_sphere_union_domain,
)
from .schwartz import (
    RadialKernel,
    StepFunction,
    domain_mask,
    fourier,
    inverse_fourier,
    step_function_from_json,
    step_function_to_json,
)

EXIT_OK, EXIT_CHECK, EXIT_SCHEMA, EXIT_COMPUTE = 0, 1, 2, 3


class SchemaError(Exception):
    pass


# --- output ------------------------------------------------------------------------------


def _plain(obj):
    """Convert numpy scalars, fractions and dataclass-ish values to JSON-ready data."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_plain(v) for v in obj.tolist()]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    return obj


def dumps(obj, indent: int = 2, _level: int = 0) -> str:
    """JSON text with floats fixed to 17 significant digits (byte-stable across runs)."""
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(k)}: {dumps(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, list):
        if not obj:
            return "[]"
        return "[\n" + ",\n".join(pad + dumps(v, indent, _level + 1) for v in obj) + "\n" + end + "]"
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, float):
        if not math.isfinite(obj):
            return json.dumps(str(obj))
        return format(obj, ".17g")
    return json.dumps(obj)


def write_atomic(path: Path, text: str):
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    with os.fdopen(fd, "w") as fh:
        fh.write(text)
    os.replace(tmp, path)


def write_json(path: Path, obj):
    write_atomic(path, dumps(_plain(obj)) + "\n")


def write_csv(path: Path, header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([format(x, ".17g") if isinstance(x, float) else x for x in row])
    write_atomic(path, buf.getvalue())


# --- schemas ------------------------------------------------------------------------------------

_NUM = {"type": "number"}
_INT = {"type": "integer"}

STEP_FUNCTION_SCHEMA = {
    "type": "object",
    "required": ["prime", "support_exp", "scale"],
    "properties": {
        "prime": {"type": "integer", "minimum": 2},
        "dimension": {"type": "integer", "minimum": 1},
        "support_exp": _INT,
        "scale": _INT,
        "terms": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["cell_center"],
                "properties": {"cell_center": {"type": "array"}, "cell_radius_exp": _INT, "re": _NUM, "im": _NUM},
            },
        },
        "tail": {
            "type": "object",
            "required": ["amplitude", "exponent"],
            "properties": {"amplitude": _NUM, "exponent": _NUM, "amplitude_im": _NUM},
        },
    },
}

DECOMPOSITION_SCHEMA = {
    "type": "object",
    "required": ["prime"],
    "properties": {
        "prime": {"type": "integer", "minimum": 2},
        "dimension": {"type": "integer", "minimum": 1},
        "family": {"enum": ["explicit", "punctured-disk", "sphere-union"]},
        "balls": {"type": "array"},
        "lambda": {"type": "array", "items": _INT},
        "depth": {"type": ["integer", "null"]},
        "hypothesis": {"enum": ["boundary", "translation-invariant"]},
    },
}

DIRICHLET_SCHEMA = {
    "type": "object",
    "required": ["domain", "alpha", "scale_m", "support_M"],
    "properties": {
        "domain": DECOMPOSITION_SCHEMA,
        "alpha": {"type": "number", "exclusiveMinimum": 0},
        "f": {"oneOf": [{"type": "null"}, STEP_FUNCTION_SCHEMA]},
        "g": {
            "oneOf": [
                {"type": "null"},
                STEP_FUNCTION_SCHEMA,
                {
                    "type": "object",
                    "required": ["radial"],
                    "properties": {
                        "radial": {"type": "object", "required": ["amplitude", "exponent"], "properties": {"amplitude": _NUM, "exponent": _NUM}}
                    },
                },
            ]
        },
        "scale_m": _INT,
        "support_M": _INT,
        "method": {"enum": ["spectral", "hypersingular"]},
    },
}

REGULARITY_SCHEMA = {
    "type": "object",
    "required": ["domain_family", "alpha"],
    "properties": {
        "domain_family": {"enum": ["sphere-union", "punctured-disk"]},
        "prime": {"type": "integer", "minimum": 2},
        "lambda": {
            "oneOf": [
                {"type": "array", "items": {"type": "integer", "minimum": 1}, "minItems": 2},
                {"type": "object", "required": ["ratio", "count"], "properties": {"ratio": _INT, "count": _INT}},
            ]
        },
        "alpha": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
        "delta": {"type": "number", "exclusiveMinimum": 0},
        "amplitude": _NUM,
        "f": _NUM,
        "m_list": {"type": "array", "items": {"type": "integer", "minimum": 1}, "minItems": 1},
        "depth": {"type": "integer", "minimum": 1},
        "datum": {"enum": ["holder", "fundamental"]},
    },
}

APPLY_SCHEMA = {
    "type": "object",
    "required": ["function"],
    "properties": {"function": STEP_FUNCTION_SCHEMA, "alpha": {"type": "number", "exclusiveMinimum": 0}, "method": {"enum": ["spectral", "hypersingular", "both"]}},
}


def validate(instance, schema):
    try:
        jsonschema.validate(instance, schema)
    except jsonschema.ValidationError as exc:
        raise SchemaError(f"{exc.message} at {'/'.join(str(x) for x in exc.absolute_path) or '<root>'}") from exc


def load_json(path) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise SchemaError(f"cannot read {path}: {exc}") from exc


# --- commands ---------------------------------------------------------------------------------------


def _report(args, check, params, passed, **extra):
    out = {
        "check": check,
        "params": params,
        "pass": bool(passed),
        "corpus_seed": args.seed,
    }
    out.update(extra)
    return out


def cmd_apply(args):
    cfg = load_json(args.config or args.input)
    if "function" not in cfg:
        cfg = {"function": cfg}
    validate(cfg, APPLY_SCHEMA)
    f = step_function_from_json(cfg["function"])
    alpha = cfg.get("alpha", args.alpha)
    method = cfg.get("method", args.method)
    params = VTParams(alpha, f.prime, f.dimension)
    out = Path(args.out)
    passed = True
    extra = {}
    if method in ("spectral", "both"):
        res = apply_spectral(f, params)
    else:
        res = apply_hypersingular(f, params)
    if method == "both":
        gap = checks.operator_gap(f, params)
        passed = gap <= args.tolerance
        extra = {"lhs": "spectral", "rhs": "hypersingular", "ratio": None, "max_gap": gap}
    write_json(out / "apply_result.json", step_function_to_json(res))
    rep = _report(args, "apply", {"alpha": alpha, "method": method, "p": f.prime, "n": f.dimension}, passed,
                  paper_ref="operator: symbol form against hypersingular integral form", **extra)
    write_json(out / "apply_report.json", rep)
    return [] if passed else ["apply:dual-route"]


def cmd_fourier(args):
    cfg = load_json(args.config or args.input)
    data = cfg.get("function", cfg)
    validate(data, STEP_FUNCTION_SCHEMA)
    f = step_function_from_json(data)
    g = inverse_fourier(f) if args.inverse else fourier(f)
    back = fourier(g) if args.inverse else inverse_fourier(g)
    err = float(np.max(np.abs(back.values - f.values)) / max(np.max(np.abs(f.values)), 1e-300))
    passed = err <= args.tolerance
    out = Path(args.out)
    write_json(out / "fourier_result.json", step_function_to_json(g))
    write_json(
        out / "fourier_report.json",
        _report(args, "fourier-involution", {"inverse": args.inverse}, passed, lhs=err, rhs=args.tolerance, ratio=None,
                paper_ref="Fourier transform: inversion rule"),
    )
    return [] if passed else ["fourier:involution"]


def cmd_verify(args):
    names = list(checks.REGISTRY) if args.check == "all" else [args.check]
    failed = []
    results = []
    for name in names:
        res = _call_check(name, args)
        results.append(res)
        if not res.passed:
            failed.append(f"verify:{name}")
    out = Path(args.out)
    reports = []
    for r in results:
        key, bound = PRIMARY_METRIC[r.name]
        lhs = r.metrics.get(key)
        rhs = r.metrics.get(bound, r.params.get(bound)) if bound else None
        ratio = lhs / rhs if isinstance(lhs, float) and isinstance(rhs, float) and rhs else None
        reports.append(
            _report(args, r.name, r.params, r.passed, lhs=lhs, rhs=rhs, ratio=ratio, metrics=r.metrics,
                    paper_ref=r.paper_ref)
        )
    write_json(out / "verify_report.json", reports[0] if len(reports) == 1 else reports)
    if "seminorm" in names:
        seed = 0 if args.seed is None else args.seed
        alphas = (args.alpha,) if args.alpha is not None and 0 < args.alpha < 1 else (0.3, 0.5, 0.8)
        rows = rayleigh_sweep(alphas=alphas, p=args.p or 2, seed=seed)
        write_csv(out / "seminorm_sweep.csv", ["alpha", "N", "m", "lambda_min", "ratio_max"], rows)
    return failed


# (measured quantity, the bound it is judged against) per check
PRIMARY_METRIC = {
    "dual-route": ("max_gap", "tolerance"),
    "fourier": ("max_inversion_error", "tolerance"),
    "radial-identity": ("max_relative_error", "tolerance"),
    "fundamental-solution": ("max_error", "tolerance"),
    "weighted-positivity": ("max_gap", "tolerance"),
    "seminorm": ("max_gap", "tolerance"),
    "dirichlet": ("gram_gap", None),
    "comparison": ("min_u", None),
    "green": ("variation", None),
    "regularity": ("gamma_regular", None),
    "harmonicity": ("residual", None),
    "exactness": ("failures", None),
}


def _call_check(name, args):
    fn = checks.REGISTRY[name]
    kw = {}
    if args.seed is not None and name in ("dual-route", "fourier", "fundamental-solution", "weighted-positivity", "seminorm", "comparison", "exactness"):
        kw["seed"] = args.seed
    if args.p is not None and name in ("dual-route", "fourier"):
        kw["primes"] = (args.p,)
    if args.dimension is not None and name in ("dual-route", "fourier"):
        kw["dims"] = (args.dimension,)
    if args.alpha is not None:
        if name == "dual-route":
            kw["alphas"] = (args.alpha,)
        elif name in ("seminorm", "dirichlet", "comparison", "green", "regularity", "harmonicity"):
            kw["alpha"] = args.alpha
    if args.count is not None and name in ("dual-route", "fourier", "fundamental-solution", "weighted-positivity", "seminorm", "comparison", "exactness"):
        kw["count"] = args.count
    if args.tolerance_given and name in ("dual-route", "fourier", "radial-identity", "fundamental-solution", "weighted-positivity", "seminorm", "dirichlet", "comparison", "green", "harmonicity"):
        kw["tol"] = args.tolerance
    return fn(**kw)


def _g_from_config(data, omega, M, m):
    if data is None:
        return None
    if "radial" in data:
        r = data["radial"]
        g = radial_step(omega.prime, omega.dimension, M, m, float(r["amplitude"]), float(r["exponent"]))
        mask = domain_mask(omega, M, M + m)
        return StepFunction(g.prime, g.dimension, M, m, np.where(mask, 0, g.values), g.tail)
    return step_function_from_json(data)


def cmd_dirichlet(args):
    cfg = load_json(args.config)
    validate(cfg, DIRICHLET_SCHEMA)
    try:
        omega = decomposition_from_json(cfg["domain"])
    except (KeyError, ValueError) as exc:
        raise SchemaError(f"bad domain: {exc}") from exc
    M, m = int(cfg["support_M"]), int(cfg["scale_m"])
    f = step_function_from_json(cfg["f"]) if cfg.get("f") else None
    g = _g_from_config(cfg.get("g"), omega, M, m)
    problem = DirichletProblem(omega, float(cfg["alpha"]), f, g)
    u, system = solve_dirichlet(problem, m, M, cfg.get("method", "spectral"))
    residual = system.info["weak_residual"]
    passed = residual <= args.tolerance
    failed = [] if passed else ["dirichlet:weak-residual"]
    report = _report(args, "dirichlet", {"alpha": problem.alpha, "scale_m": m, "support_M": M, "cells": system.size},
                     passed, lhs=residual, rhs=args.tolerance, ratio=None, weak_residual=residual,
                     paper_ref="weak formulation of the Dirichlet problem")
    nonneg_f = f is None or bool(np.all(f.values.real >= 0))
    nonneg_g = g is None or bool(np.all(g.values.real >= 0))
    if nonneg_f and nonneg_g and omega.hypothesis:
        comp = comparison_check(problem, u, system, args.tolerance)
        report["comparison"] = {"min_u": comp.min_u, "pass": comp.passed, "hypothesis": comp.hypothesis}
        if not comp.passed:
            failed.append("dirichlet:comparison")
            report["pass"] = False
    out = Path(args.out)
    write_json(out / "solution.json", step_function_to_json(u))
    write_json(out / "dirichlet_report.json", report)
    return failed


def cmd_regularity(args):
    cfg = load_json(args.config)
    validate(cfg, REGULARITY_SCHEMA)
    p = int(cfg.get("prime", args.p or 2))
    alpha = float(cfg["alpha"])
    family = cfg["domain_family"]
    lam = cfg.get("lambda", {"ratio": 3, "count": 7})
    seq = LambdaSequence.geometric(lam["ratio"], lam["count"]) if isinstance(lam, dict) else LambdaSequence(tuple(lam))
    datum = cfg.get("datum", "holder" if family == "sphere-union" else "fundamental")
    if family == "sphere-union":
        depth = int(cfg.get("depth", seq.lambdas[-1]))
        omega = make_sphere_union_domain(seq, p, depth, require_regular=False)
        density_seq = None
    else:
        depth = int(cfg.get("depth", 40))
        omega = make_punctured_disk(p, depth)
        density_seq = LambdaSequence.up_to(3, depth - 1)
    m_list = tuple(cfg.get("m_list", [max(depth, seq.lambdas[-1]) + 1 if family == "sphere-union" else depth]))
    if datum == "fundamental":
        g = RadialKernel(fundamental_constant(p, alpha), alpha - 1)
        tail = True
    else:
        g = RadialKernel(float(cfg.get("amplitude", 1.0)), float(cfg.get("delta", 0.4)))
        tail = False
    rep = estimate_holder_exponent(omega, alpha, float(cfg.get("f", 0.0)), g, m_list, tail, density_seq)
    out = Path(args.out)
    rows = [(round(-math.log(r, p)), r, s) for r, s in zip(rep.radii, rep.sup_abs_u)]
    write_csv(out / "regularity.csv", ["lambda", "radius", "sup_abs_u"], rows)
    if rep.degenerate:
        passed = True
    elif datum == "fundamental":
        passed = abs(rep.gamma_fit - (alpha - 1)) <= 0.05
    else:
        passed = rep.gamma_fit > 0 and rep.fit_r2 >= 0.9
    body = {
        "radii": rep.radii,
        "sup_abs_u": rep.sup_abs_u,
        "gamma_fit": rep.gamma_fit,
        "fit_r2": rep.fit_r2,
        "nu_observed": rep.nu_observed,
        "density_condition_pass": rep.density_condition_pass,
        "degenerate": rep.degenerate,
        "fit_window": list(rep.fit_window),
        "notes": rep.notes,
    }
    write_json(
        out / "regularity_report.json",
        _report(args, "regularity", {"family": family, "alpha": alpha, "p": p, "datum": datum, "m_list": list(m_list)},
                passed, lhs=rep.gamma_fit, rhs=None, ratio=None, report=body,
                paper_ref="boundary Hoelder regularity at the origin"),
    )
    return [] if passed else ["regularity:gamma"]


def cmd_corpus(args):
    seed = 0 if args.seed is None else args.seed
    primes = (args.p,) if args.p else (2, 3, 5)
    dims = (args.dimension,) if args.dimension else (1, 2)
    entries = make_corpus(seed, args.count or 20, primes, dims, real=args.real)
    write_json(Path(args.out) / "corpus.json", corpus_to_json(entries, seed))
    return []


COMMANDS = {
    "apply": cmd_apply,
    "fourier": cmd_fourier,
    "verify": cmd_verify,
    "dirichlet": cmd_dirichlet,
    "regularity": cmd_regularity,
    "corpus": cmd_corpus,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--p", type=int, default=None, help="prime")
    common.add_argument("--alpha", type=float, default=None, help="order of the operator")
    common.add_argument("--dimension", type=int, default=None, help="dimension n")
    common.add_argument("--seed", type=int, default=None, help="corpus seed")
    common.add_argument("--out", default=".", help="output directory")
    common.add_argument("--tolerance", type=float, default=None, help="pass/fail tolerance")

    parser = argparse.ArgumentParser(prog="vt", description=__doc__.splitlines()[0], parents=[common])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("apply", parents=[common], help="apply the operator to a step function")
    p.add_argument("--input")
    p.add_argument("--config")
    p.add_argument("--method", choices=["spectral", "hypersingular", "both"], default="both")

    p = sub.add_parser("fourier", parents=[common], help="Fourier transform of a step function")
    p.add_argument("--input")
    p.add_argument("--config")
    p.add_argument("--inverse", action="store_true")

    p = sub.add_parser("verify", parents=[common], help="run a named verification")
    p.add_argument("--check", choices=sorted(checks.REGISTRY) + ["all"], default="all")
    p.add_argument("--count", type=int, default=None)

    p = sub.add_parser("dirichlet", parents=[common], help="solve a Dirichlet problem from a config file")
    p.add_argument("--config", required=True)

    p = sub.add_parser("regularity", parents=[common], help="boundary regularity experiment")
    p.add_argument("--config", required=True)

    p = sub.add_parser("corpus", parents=[common], help="write a seeded corpus of step functions")
    p.add_argument("--count", type=int, default=None)
    p.add_argument("--real", action="store_true")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_SCHEMA if exc.code else EXIT_OK
    args.tolerance_given = args.tolerance is not None
    if args.tolerance is None:
        args.tolerance = 1e-9
    if args.alpha is not None and not args.alpha > 0:
        print("error: --alpha must be positive", file=sys.stderr)
        return EXIT_SCHEMA
    if args.command in ("apply", "fourier") and not (args.input or args.config):
        print("error: --input or --config is required", file=sys.stderr)
        return EXIT_SCHEMA
    if args.command == "apply" and args.alpha is None:
        args.alpha = 0.5
    try:
        failed = COMMANDS[args.command](args)
    except SchemaError as exc:
        print(f"schema error: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    except Exception as exc:  # noqa: BLE001 - any computation failure maps to exit 3
        print(f"computation error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_COMPUTE
    if failed:
        for name in failed:
            print(f"FAILED {name}", file=sys.stderr)
        return EXIT_CHECK
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
