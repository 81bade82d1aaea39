"""Command-line front end: ``singmetric <subcommand> ...``.

Exit codes
----------
0  success
2  parse error (bad arguments, unreadable or malformed input)
3  engine mismatch (inputs from different engines or models, or an
   operation the engine does not support)
4  verification suite failure
5  incompatible solver data
6  solver divergence
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import defaults, grid
from .core import (
    EngineMismatch,
    Relation,
    SingularityError,
    SingularityHandle,
    UnsupportedEngine,
    ds_comparable,
    ds_estimate,
    energy_Is,
    human_number,
    make_handle,
    render_number,
    witness,
)
from .dim1 import AtomicSingularity, BudgetMismatch, meet_atomic
from .harness import SUITES, UnknownSuite, run_suite
from .report import load as load_report
from .toric import AmbientMismatch, ToricClass, intersect

EXIT_PARSE = 2
EXIT_ENGINE = 3
EXIT_SUITE = 4
EXIT_DATA = 5
EXIT_DIVERGE = 6


class InputError(Exception):
    pass


def _read_json_arg(arg: str):
    text = arg if arg.lstrip().startswith("{") else Path(arg).read_text()
    return json.loads(text)


def payload_from_json(d):
    if not isinstance(d, dict):
        raise InputError("expected a JSON object")
    if "payload" in d and "engine" in d:
        if d["engine"] == "grid":
            raise InputError("grid potentials are read from a values file with a JSON sidecar")
        return payload_from_json(d["payload"])
    if "ambient" in d and "body" in d:
        return ToricClass.from_json(d)
    if "lelong" in d and "budget" in d:
        return AtomicSingularity.from_json(d)
    raise InputError("cannot tell which engine this JSON belongs to")


def load_payload(arg: str):
    """Inline JSON, a ``.json`` file, or a grid values file with its sidecar."""
    try:
        if arg.lstrip().startswith("{") or arg.endswith(".json"):
            return payload_from_json(_read_json_arg(arg))
        if grid.potential.sidecar_path(arg).exists():
            return grid.read_potential(arg)
        raise InputError(f"{arg}: not JSON and no sidecar {arg}.json found")
    except (OSError, ValueError, KeyError, TypeError, ZeroDivisionError) as exc:
        raise InputError(f"{arg}: {exc}") from exc


def _config(args) -> grid.SolverConfig:
    kw = {}
    if getattr(args, "tol", None) is not None:
        kw["tol"] = args.tol
    if getattr(args, "max_iters", None) is not None:
        kw["max_iters"] = args.max_iters
    if getattr(args, "trunc_depth", None) is not None:
        kw["trunc_depth"] = args.trunc_depth
    return grid.SolverConfig(**kw)


def _emit(human: str, doc: dict):
    print(human)
    print(json.dumps(doc, indent=2, default=str))


# ---------------------------------------------------------------------------
# subcommands


def cmd_dist(args) -> int:
    a, b = make_handle(load_payload(args.a)), make_handle(load_payload(args.b))
    est = ds_estimate(a, b)
    doc = {"engine": a.engine, "ds_estimate": render_number(est)}
    human = human_number(est)
    if args.exact_if_comparable:
        w = witness(a, b)
        doc["relation"] = w.relation.value
        if w.relation is not Relation.INCOMPARABLE:
            val = ds_comparable(a, b)
            doc["ds_comparable"] = render_number(val)
            doc["certified_by"] = w.certified_by
            human = f"{human_number(val)}\ncomparable ({w.relation.value}): {w.certified_by}"
        else:
            human += "\nnot comparable; printed value is the estimator"
    _emit(human, doc)
    return 0


def cmd_mass(args) -> int:
    p = load_payload(args.input)
    if isinstance(p, grid.GridPotential):
        h = SingularityHandle("grid", p, grid.mass_vector_grid(p, _config(args)))
    else:
        h = make_handle(p)
    mv = h.mass
    e = energy_Is(h)
    human = "m = [" + ", ".join(human_number(m) for m in mv.masses) + f"]  energy = {human_number(e)}"
    doc = mv.to_json()
    doc["energy"] = render_number(e)
    _emit(human, doc)
    return 0


def cmd_envelope(args) -> int:
    a, b = load_payload(args.a), load_payload(args.b)
    if type(a) is not type(b):
        raise EngineMismatch("inputs come from different engines")
    if isinstance(a, ToricClass):
        cap = intersect(a, b)
        doc = {"exists": cap is not None, "result": cap.to_json() if cap else None}
        human = "empty (envelope is not a potential in the model)" if cap is None else json.dumps(cap.to_json())
    elif isinstance(a, AtomicSingularity):
        m = meet_atomic(a, b)
        doc = {"exists": m is not None, "result": m.to_json() if m else None}
        human = "nonexistent (exceeds the budget)" if m is None else json.dumps(m.to_json())
    else:
        w = grid.rooftop(a, b, _config(args))
        mass = grid.np_mass(w, _config(args))
        doc = {"exists": True, "np_mass": mass, "atoms": w.sidecar()["atoms"]}
        if args.out:
            grid.write_potential(args.out, w)
            doc["written"] = args.out
        human = f"np_mass = {human_number(mass)}"
    if args.out and doc.get("result") is not None:
        Path(args.out).write_text(json.dumps(doc["result"], indent=2))
        doc["written"] = args.out
    _emit(human, doc)
    return 0


def cmd_ceiling(args) -> int:
    u = load_payload(args.input)
    if not isinstance(u, grid.GridPotential):
        raise UnsupportedEngine("ceiling runs on grid potentials only")
    cfg = _config(args)
    det = {}
    c = grid.ceiling(u, cfg, details=det)
    doc = {"mass_in": det["mass_in"], "mass_out": det["mass_out"], "worst_rise": det["worst_rise"]}
    if args.out:
        grid.write_potential(args.out, c)
        doc["written"] = args.out
    _emit(f"np_mass = {human_number(det['mass_out'])}", doc)
    return 0


def _read_density(arg: str, N: int | None):
    if arg.startswith("const:"):
        if N is None:
            raise InputError("a constant density needs --n")
        return np.full((N, N), float(arg.split(":", 1)[1]))
    side = grid.potential.sidecar_path(arg)
    if N is None and side.exists():
        N = int(json.loads(side.read_text())["N"])
    if N is None:
        if arg.endswith(".csv"):
            return np.loadtxt(arg, delimiter=",", ndmin=2)
        size = os.path.getsize(arg) // 8
        N = int(round(size**0.5))
    return grid.potential.read_array(arg, N)


def cmd_solve(args) -> int:
    try:
        spec = _read_json_arg(args.atoms)
        N = args.n if args.n is not None else spec.get("N")
        f = _read_density(args.f, N)
        atoms = grid.potential.parse_atoms(spec.get("atoms", []))
        c = float(spec.get("c", 1.0))
    except (OSError, ValueError, KeyError, TypeError) as exc:
        raise InputError(str(exc)) from exc
    if N is not None and f.shape != (N, N):
        raise InputError(f"density has shape {f.shape}, expected ({N}, {N})")
    cfg = _config(args)
    det = {}
    psi = grid.solve_cmae(atoms, f, cfg, c=c, method=args.method, details=det)
    summary = {
        "N": psi.N,
        "residual": det["residual"],
        "np_mass": det["np_mass"],
        "expected_mass": c - psi.total_lelong,
        "iterations": det["iterations"],
        "method": det["method"],
    }
    if np.ptp(f) == 0:
        oracle = grid.green_potential(psi.N, psi.atoms, c)
        err = float(np.abs(oracle.values - psi.values).max())
        summary["green_oracle_error"] = err
        summary["matches_green_oracle"] = err <= max(cfg.tol, 1e-12) * 10
    if args.out:
        grid.write_potential(args.out, psi)
        Path(str(args.out) + ".summary.json").write_text(json.dumps(summary, indent=2))
        summary["written"] = args.out
    _emit(f"residual = {summary['residual']:.3g}  np_mass = {human_number(summary['np_mass'])}", summary)
    return 0


def _default_seed() -> int:
    env = os.environ.get("SINGMETRIC_SEED")
    return int(env) if env else defaults.DEFAULT_SEED


def cmd_verify(args) -> int:
    seed = args.seed if args.seed is not None else _default_seed()
    rep = run_suite(args.suite, args.trials, seed)
    out = args.out or f"singmetric-{args.suite}-report.json"
    rep.write(out, args.csv)
    print(rep.summary())
    if not rep.passed:
        print(f"counterexamples written to {out}")
        return EXIT_SUITE
    print(f"report written to {out}")
    return 0


def cmd_report(args) -> int:
    try:
        rep = load_report(args.input)
    except (OSError, ValueError, TypeError) as exc:
        raise InputError(str(exc)) from exc
    print(rep.summary())
    for k, v in rep.details.items():
        print(f"  {k}: {json.dumps(v, default=str) if not isinstance(v, str) else v}")
    for a in rep.artifacts[:5]:
        print(f"  counterexample: {json.dumps(a, default=str)}")
    return 0


# ---------------------------------------------------------------------------


def _add_solver_flags(p):
    p.add_argument("--tol", type=float, help="relaxation accuracy (default 1e-8)")
    p.add_argument("--max-iters", type=int, help="sweep cap (default 1e6)")
    p.add_argument("--trunc-depth", type=float, help="truncation depth k for the mass")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="singmetric", description=__doc__.splitlines()[0],
                                 epilog="exit codes: 2 parse, 3 engine mismatch, 4 suite failure, "
                                        "5 incompatible data, 6 divergence")
    sub = ap.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("dist", help="distance estimate between two singularity types")
    p.add_argument("a")
    p.add_argument("b")
    p.add_argument("--exact-if-comparable", action="store_true",
                   help="print the exact comparable-case distance when an order is certified")
    p.set_defaults(func=cmd_dist)

    p = sub.add_parser("mass", help="mass vector and energy")
    p.add_argument("input")
    _add_solver_flags(p)
    p.set_defaults(func=cmd_mass)

    p = sub.add_parser("envelope", help="rooftop envelope of two types")
    p.add_argument("a")
    p.add_argument("b")
    p.add_argument("--out")
    _add_solver_flags(p)
    p.set_defaults(func=cmd_envelope)

    p = sub.add_parser("ceiling", help="ceiling operator of a grid potential")
    p.add_argument("input")
    p.add_argument("--out")
    _add_solver_flags(p)
    p.set_defaults(func=cmd_ceiling)

    p = sub.add_parser("solve", help="Monge-Ampere equation with prescribed atoms on the grid")
    p.add_argument("atoms", help='JSON {"N", "c", "atoms": [[i, j, nu], ...]} (path or inline)')
    p.add_argument("f", help="density file (.bin or .csv, optional sidecar) or const:VALUE")
    p.add_argument("--n", type=int, help="grid size")
    p.add_argument("--out")
    p.add_argument("--method", choices=("fft", "relax"), default="fft")
    _add_solver_flags(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("verify", help="run a verification suite")
    p.add_argument("suite", choices=sorted(SUITES))
    p.add_argument("--trials", type=int)
    p.add_argument("--seed", type=int, help="default 42, or $SINGMETRIC_SEED")
    p.add_argument("--out", help="report JSON path")
    p.add_argument("--csv", help="optional per-trial margins CSV")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("report", help="print a saved report")
    p.add_argument("input")
    p.set_defaults(func=cmd_report)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (InputError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (EngineMismatch, AmbientMismatch, BudgetMismatch, UnsupportedEngine) as exc:
        print(f"engine mismatch: {exc}", file=sys.stderr)
        return EXIT_ENGINE
    except (grid.IncompatibleData, grid.SingularBudget, grid.NotInCone) as exc:
        print(f"incompatible data: {exc}", file=sys.stderr)
        return EXIT_DATA
    except grid.Divergence as exc:
        print(f"divergence: {exc}", file=sys.stderr)
        return EXIT_DIVERGE
    except UnknownSuite as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except SingularityError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
