"""Command-line driver: ``affalg <command> SPEC [options]``.

Every command prints a JSON report on stdout.  Exit status is 0 when all
checks pass, 1 when a check fails and 2 for usage or input errors.
"""
from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np

from .algebroid import AlgebroidError, check_axioms
from .calculus import Form, FormError, d_coord, forms_residual, lie
from .dynamics import DynamicsError, admissibility_residual, integrate, pseudo_sode
from .expr import DomainError, ExprError, ParseError, evaluate_arrays, parse, to_text
from .generators import random_form
from .io import (SpecError, check_entry, dump_spec, form_to_dict, load_form, load_spec, make_report,
                 parse_section, report_json, section_to_dict)
from .lagrange import SingularHessianError, energy, lagrange_residual, lagrange_sode
from .poisson import PoissonSpace, coordinate_jacobi, poisson_bracket
from .prolong import prolong, prolonged_bracket_check

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


class _Timer:
    def __init__(self, enabled: bool):
        self.enabled = enabled
        self.start = time.perf_counter()

    def lap(self) -> float | None:
        if not self.enabled:
            return None
        now = time.perf_counter()
        out, self.start = now - self.start, now
        return out


def _floats(text: str, label: str) -> list:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"{label}: expected comma-separated numbers, got {text!r}") from None


def _rng(A) -> np.random.Generator:
    return np.random.default_rng(A.dom.seed)


# ----------------------------------------------------------------- commands


def cmd_validate(args, A, timer):
    rep = check_axioms(A)
    checks = {}
    for name, entry in rep.as_dict()["axioms"].items():
        checks[name] = check_entry(entry["residual"], rep.tol, worst_indices=entry["worst_indices"])
    if timer.enabled:
        checks[next(iter(checks))]["seconds"] = round(timer.lap(), 6)
    return make_report("validate", checks, n=A.n, k=A.k)


def cmd_bracket(args, A, timer):
    s1 = parse_section(args.s1, A.k)
    s2 = parse_section(args.s2, A.k)
    return make_report("bracket", {}, bracket=section_to_dict(A.bracket(s1, s2)))


def cmd_d(args, A, timer):
    form = load_form(args.form, A.k)
    return make_report("d", {}, form=form_to_dict(form), d=form_to_dict(d_coord(A, form)))


def cmd_d2check(args, A, timer):
    if args.degree < 0:
        raise UsageError("--degree must be non-negative")
    if args.trials < 1:
        raise UsageError("--trials must be positive")
    rng = _rng(A)
    worst = 0.0
    for _ in range(args.trials):
        w = random_form(rng, A, args.degree)
        dd = d_coord(A, d_coord(A, w))
        worst = max(worst, forms_residual(dd, Form.zero(A.k, args.degree + 2), A.dom))
    checks = {"d2": check_entry(worst, A.dom.tol, timer.lap())}
    return make_report("d2check", checks, degree=args.degree, trials=args.trials)


def cmd_lie(args, A, timer):
    s = parse_section(args.section, A.k)
    form = load_form(args.form, A.k)
    return make_report("lie", {}, section=section_to_dict(s), form=form_to_dict(form),
                       lie=form_to_dict(lie(A, s, form)))


def _init(args, A) -> list:
    init = _floats(args.init, "--init")
    if len(init) != 1 + A.n + A.k:
        raise UsageError(f"--init needs {1 + A.n + A.k} numbers (t, x1..x{A.n}, y1..y{A.k})")
    return init


def _write_csv(args, traj) -> None:
    if args.out:
        Path(args.out).write_text(traj.to_csv())


def _final(traj) -> dict:
    return {name: float(col[-1]) for name, col in traj.columns().items()}


def cmd_simulate(args, A, timer):
    G = pseudo_sode(A, args.force or [])
    init = _init(args, A)
    traj = integrate(G, init, args.t1, args.step)
    _write_csv(args, traj)
    checks = {"admissibility": check_entry(admissibility_residual(A, traj), args.residual_tol, timer.lap())}
    return make_report("simulate", checks, steps=len(traj) - 1, final=_final(traj), csv=args.out)


def cmd_lagrange(args, A, timer):
    L = parse(args.L)
    try:
        G = lagrange_sode(A, L)
    except SingularHessianError as err:
        return make_report("lagrange", {"regular": check_entry(float("inf"), A.dom.tol)}, error=str(err),
                           point=err.point)
    forces = [to_text(f) for f in G.force_exprs()] if G.is_symbolic else None
    init = _init(args, A)
    traj = integrate(G, init, args.t1, args.step)
    _write_csv(args, traj)
    E = energy(A, L)
    env = traj.columns()
    vals = evaluate_arrays([E], env, len(traj))[0]
    drift = float(np.max(np.abs(vals - vals[0])))
    checks = {
        "lagrange": check_entry(lagrange_residual(A, L, traj), args.residual_tol, timer.lap()),
        "admissibility": check_entry(admissibility_residual(A, traj), args.residual_tol),
    }
    return make_report("lagrange", checks, forces=forces, energy=to_text(E), energy_drift=drift,
                       steps=len(traj) - 1, final=_final(traj), csv=args.out)


def cmd_prolong(args, A, timer):
    P = prolong(A)
    B = P.algebroid
    rep = check_axioms(B)
    checks = {f"axiom:{name}": check_entry(e["residual"], rep.tol) for name, e in rep.as_dict()["axioms"].items()}
    br = prolonged_bracket_check(A, trials=args.trials, P=P)
    for name, e in br["checks"].items():
        checks[f"bracket:{name}"] = check_entry(e["residual"], br["tol"])
    if timer.enabled:
        checks["axiom:derivation"]["seconds"] = round(timer.lap(), 6)
    extra = {"n": B.n, "k": B.k,
             "renaming": {y: x for y, x in P.to_base.items()}}
    if args.out:
        dump_spec(B, args.out)
        extra["spec"] = args.out
    else:
        extra["spec"] = json.loads(dump_spec(B))
    return make_report("prolong", checks, **extra)


def cmd_poisson(args, A, timer):
    P = PoissonSpace(A)
    if args.f is not None or args.g is not None:
        if args.f is None or args.g is None:
            raise UsageError("--f and --g go together")
        try:
            value = poisson_bracket(P, parse(args.f), parse(args.g))
        except AlgebroidError as err:
            raise UsageError(str(err)) from err
        return make_report("poisson", {}, f=args.f, g=args.g, bracket=to_text(value))
    if args.jacobi:
        cj = coordinate_jacobi(P)
        checks = {"jacobi": check_entry(cj["residual"], A.dom.tol, timer.lap(), worst=cj["worst"])}
        return make_report("poisson", checks, coords=list(P.coords))
    return make_report("poisson", {}, coords=list(P.coords), table=P.table_text())


COMMANDS = {
    "validate": cmd_validate, "bracket": cmd_bracket, "d": cmd_d, "d2check": cmd_d2check, "lie": cmd_lie,
    "simulate": cmd_simulate, "lagrange": cmd_lagrange, "prolong": cmd_prolong, "poisson": cmd_poisson,
}


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="affalg", description="Checks and dynamics for affine Lie algebroids given as JSON specs.")
    sub = ap.add_subparsers(dest="command", parser_class=_Parser)

    def add(name, help_):
        p = sub.add_parser(name, help=help_)
        p.add_argument("spec", help="algebroid spec JSON file")
        p.add_argument("--timing", action="store_true", help="include wall times in the report")
        return p

    add("validate", "check the four algebroid identities")
    p = add("bracket", "bracket of two sections")
    p.add_argument("--s1", required=True, help="e.g. 'affine: x1, t' or 'vector: 1, 0'")
    p.add_argument("--s2", required=True)
    p = add("d", "exterior derivative of a form")
    p.add_argument("--form", required=True, help="form JSON file or inline JSON")
    p = add("d2check", "d(d(w)) = 0 on random forms")
    p.add_argument("--degree", type=int, default=1)
    p.add_argument("--trials", type=int, default=20)
    p = add("lie", "Lie derivative of a form along a section")
    p.add_argument("--section", required=True)
    p.add_argument("--form", required=True)
    for name, help_ in (("simulate", "integrate a pseudo-SODE with RK4"),
                        ("lagrange", "integrate the Lagrange-type equations of L")):
        p = add(name, help_)
        if name == "simulate":
            p.add_argument("--force", action="append", help="force component expression (repeat k times)")
        else:
            p.add_argument("--L", required=True, help="Lagrangian in t, x, y")
        p.add_argument("--init", required=True, help="t0,x1..xn,y1..yk")
        p.add_argument("--t1", type=float, required=True)
        p.add_argument("--step", type=float, default=1e-3)
        p.add_argument("--out", help="write the trajectory CSV here")
        p.add_argument("--residual-tol", type=float, default=1e-5)
    p = add("prolong", "prolonged algebroid over the total space")
    p.add_argument("--out", help="write the prolonged spec here")
    p.add_argument("--trials", type=int, default=3)
    p = add("poisson", "Poisson bracket on the extended dual")
    p.add_argument("--f")
    p.add_argument("--g")
    p.add_argument("--jacobi", action="store_true", help="check Jacobi on all coordinate triples")
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
        if not args.command:
            raise UsageError("a command is required")
        A = load_spec(args.spec)
        timer = _Timer(args.timing)
        report = COMMANDS[args.command](args, A, timer)
    except UsageError as err:
        print(f"affalg: {err}", file=sys.stderr)
        return EXIT_USAGE
    except (SpecError, ParseError, FormError, DynamicsError) as err:
        print(f"affalg: {err}", file=sys.stderr)
        return EXIT_USAGE
    except (DomainError, ExprError, AlgebroidError) as err:
        print(f"affalg: {err}", file=sys.stderr)
        return EXIT_FAIL
    sys.stdout.write(report_json(report))
    if not report["ok"]:
        for name, c in report["checks"].items():
            if not c["pass"]:
                print(f"affalg: {name} failed: residual {c['residual']:.3g} > tol {c['tol']:.3g}", file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


run_cli = main
