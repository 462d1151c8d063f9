"""JSON spec files, form and section text formats, and report assembly."""
from __future__ import annotations

import json
import os
from pathlib import Path

from .algebroid import AffineAlgebroid, AlgebroidError, Section, new_algebroid, x_names, y_names
from .calculus import Form, FormError
from .expr import ParseError, SampleDomain, as_expr, parse, to_text

SEED_ENV = "AFFALG_SEED"


class SpecError(ValueError):
    """Problem in a spec or form document; names the source and the location."""

    def __init__(self, source: str, location: str, message: str):
        where = f"{source}: {location}" if location else source
        super().__init__(f"{where}: {message}")
        self.source = source
        self.location = location


# ----------------------------------------------------------------- specs


def _int(d: dict, key: str, source: str, default=None, minimum: int = 0) -> int:
    if key not in d:
        if default is None:
            raise SpecError(source, key, "missing")
        return default
    v = d[key]
    if isinstance(v, bool) or not isinstance(v, int) or v < minimum:
        raise SpecError(source, key, f"expected an integer >= {minimum}, got {v!r}")
    return v


def _table(value, shape: tuple, source: str, loc: str):
    if not shape:
        if isinstance(value, bool):
            raise SpecError(source, loc, "expected an expression string or number")
        if isinstance(value, (int, float)):
            return as_expr(value)
        if not isinstance(value, str):
            raise SpecError(source, loc, "expected an expression string or number")
        try:
            return parse(value)
        except ParseError as err:
            raise SpecError(source, loc, f"{err} in {value!r}") from err
    if not isinstance(value, list) or len(value) != shape[0]:
        got = len(value) if isinstance(value, list) else type(value).__name__
        raise SpecError(source, loc, f"expected a list of length {shape[0]}, got {got}")
    return [_table(v, shape[1:], source, f"{loc}[{i}]") for i, v in enumerate(value)]


def spec_from_dict(d: dict, source: str = "<spec>", seed: int | None = None) -> AffineAlgebroid:
    """Build an algebroid from a decoded spec document.

    Missing tables are zero, missing domain intervals are [-1, 1].  ``seed``
    (or the AFFALG_SEED environment variable) overrides the document's seed.
    """
    if not isinstance(d, dict):
        raise SpecError(source, "", "top level must be an object")
    known = {"n", "k", "lambda", "rho", "C", "C0", "domain", "samples", "tol", "seed"}
    extra = sorted(set(d) - known)
    if extra:
        raise SpecError(source, extra[0], "unknown key")
    n = _int(d, "n", source)
    k = _int(d, "k", source)
    lam = _table(d.get("lambda", [0] * n), (n,), source, "lambda")
    rho = _table(d.get("rho", [[0] * k for _ in range(n)]), (n, k), source, "rho")
    C = _table(d.get("C", [[[0] * k for _ in range(k)] for _ in range(k)]), (k, k, k), source, "C")
    C0 = _table(d.get("C0", [[0] * k for _ in range(k)]), (k, k), source, "C0")
    samples = _int(d, "samples", source, default=64, minimum=1)
    tol = d.get("tol", 1e-9)
    if isinstance(tol, bool) or not isinstance(tol, (int, float)) or not tol > 0:
        raise SpecError(source, "tol", f"expected a positive number, got {tol!r}")
    if seed is None:
        env = os.environ.get(SEED_ENV)
        if env is not None:
            try:
                seed = int(env)
            except ValueError:
                raise SpecError(SEED_ENV, "", f"not an integer: {env!r}") from None
        else:
            seed = _int(d, "seed", source, default=0)
    names = ("t",) + x_names(n) + y_names(k)
    intervals = {v: (-1.0, 1.0) for v in names}
    domain = d.get("domain", {})
    if not isinstance(domain, dict):
        raise SpecError(source, "domain", "expected an object")
    for v, iv in domain.items():
        loc = f"domain.{v}"
        if v not in intervals:
            raise SpecError(source, loc, f"unknown variable; expected one of {', '.join(names)}")
        if (not isinstance(iv, list) or len(iv) != 2
                or any(isinstance(b, bool) or not isinstance(b, (int, float)) for b in iv)):
            raise SpecError(source, loc, "expected [lo, hi]")
        if not iv[0] <= iv[1]:
            raise SpecError(source, loc, f"empty interval [{iv[0]}, {iv[1]}]")
        intervals[v] = (float(iv[0]), float(iv[1]))
    dom = SampleDomain(intervals, samples=samples, tol=float(tol), seed=seed)
    try:
        return new_algebroid(n, k, C, C0, lam, rho, dom)
    except AlgebroidError as err:
        raise SpecError(source, "", str(err)) from err


def load_spec(path, seed: int | None = None) -> AffineAlgebroid:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as err:
        raise SpecError(str(path), "", err.strerror or str(err)) from err
    try:
        d = json.loads(text)
    except json.JSONDecodeError as err:
        raise SpecError(str(path), f"line {err.lineno} column {err.colno}", err.msg) from err
    return spec_from_dict(d, str(path), seed)


def spec_to_dict(A: AffineAlgebroid) -> dict:
    dom = A.dom
    names = ("t",) + A.xs + A.ys
    return {
        "n": A.n,
        "k": A.k,
        "lambda": [to_text(e) for e in A.lam],
        "rho": [[to_text(e) for e in row] for row in A.rho],
        "C": [[[to_text(e) for e in row] for row in mat] for mat in A.C],
        "C0": [[to_text(e) for e in row] for row in A.C0],
        "domain": {v: list(dom.intervals.get(v, (-1.0, 1.0))) for v in names},
        "samples": dom.samples,
        "tol": dom.tol,
        "seed": dom.seed,
    }


def dump_spec(A: AffineAlgebroid, path=None) -> str:
    text = json.dumps(spec_to_dict(A), indent=2) + "\n"
    if path is not None:
        Path(path).write_text(text)
    return text


# ----------------------------------------------------------------- forms


def _form_key(text: str, source: str, loc: str) -> tuple:
    if text.strip() == "":
        return ()
    try:
        return tuple(int(p) for p in text.split(","))
    except ValueError:
        raise SpecError(source, loc, f"bad index list {text!r}") from None


def form_from_dict(d: dict, k: int, source: str = "<form>") -> Form:
    """``{"degree": K, "coeff0": {"1,2": expr}, "coeffB": {"1,2,3": expr}}``.

    Keys are 1-based fibre indices in increasing order; coeff0 holds the
    components paired with e0, so its keys have K - 1 entries.
    """
    if not isinstance(d, dict):
        raise SpecError(source, "", "form must be an object")
    extra = sorted(set(d) - {"degree", "coeff0", "coeffB"})
    if extra:
        raise SpecError(source, extra[0], "unknown key")
    degree = _int(d, "degree", source)
    tables = []
    for name in ("coeff0", "coeffB"):
        raw = d.get(name, {})
        if not isinstance(raw, dict):
            raise SpecError(source, name, "expected an object")
        tab = {}
        for key, val in raw.items():
            loc = f"{name}[{key!r}]"
            tab[_form_key(key, source, loc)] = _table(val, (), source, loc)
        tables.append(tab)
    try:
        return Form.from_tables(k, degree, *tables)
    except FormError as err:
        raise SpecError(source, "", str(err)) from err


def form_to_dict(form: Form) -> dict:
    coeff0, coeffB = {}, {}
    for key, e in form.coeffs.items():
        if key and key[0] == 0:
            coeff0[",".join(map(str, key[1:]))] = to_text(e)
        else:
            coeffB[",".join(map(str, key))] = to_text(e)
    return {"degree": form.degree, "coeff0": coeff0, "coeffB": coeffB}


def load_form(text_or_path: str, k: int) -> Form:
    """Inline JSON (starting with ``{``) or a path to a JSON file."""
    text = text_or_path.strip()
    source = "<inline form>"
    if not text.startswith("{"):
        source = text_or_path
        try:
            text = Path(text_or_path).read_text()
        except OSError as err:
            raise SpecError(source, "", err.strerror or str(err)) from err
    try:
        d = json.loads(text)
    except json.JSONDecodeError as err:
        raise SpecError(source, f"line {err.lineno} column {err.colno}", err.msg) from err
    return form_from_dict(d, k, source)


# ----------------------------------------------------------------- sections


def parse_section(text: str, k: int) -> Section:
    """``"affine: z1, z2"`` or ``"vector: s1, s2"``; components are expressions."""
    kind, sep, rest = text.partition(":")
    kind = kind.strip().lower()
    if not sep or kind not in ("affine", "vector"):
        raise SpecError("<section>", "", f"expected 'affine: ...' or 'vector: ...', got {text!r}")
    parts = [p for p in (s.strip() for s in rest.split(",")) if p] if rest.strip() else []
    if len(parts) != k:
        raise SpecError("<section>", "", f"expected {k} components, got {len(parts)}")
    comps = []
    for i, p in enumerate(parts):
        try:
            comps.append(parse(p))
        except ParseError as err:
            raise SpecError("<section>", f"component {i + 1}", str(err)) from err
    return Section(kind, tuple(comps))


def section_to_dict(s: Section) -> dict:
    return {"kind": s.kind, "components": [to_text(c) for c in s.comps]}


# ----------------------------------------------------------------- reports


def check_entry(residual: float, tol: float, seconds: float | None = None, **extra) -> dict:
    entry = {"residual": float(residual), "tol": float(tol), "pass": bool(residual <= tol)}
    entry.update(extra)
    if seconds is not None:
        entry["seconds"] = round(seconds, 6)
    return entry


def make_report(command: str, checks: dict, **extra) -> dict:
    """Top-level ``ok`` is true exactly when every check passes."""
    report = {"command": command, "ok": all(c["pass"] for c in checks.values()), "checks": checks}
    report.update(extra)
    return report


def report_json(report: dict) -> str:
    return json.dumps(report, indent=2, allow_nan=True) + "\n"


__all__ = [
    "SEED_ENV", "SpecError", "check_entry", "dump_spec", "form_from_dict", "form_to_dict", "load_form",
    "load_spec", "make_report", "parse_section", "report_json", "section_to_dict", "spec_from_dict",
    "spec_to_dict",
]
