"""Randomised zero testing on a box of sample points.

Exact zero testing over sin/cos/exp is undecidable, so identities are
checked by evaluating at seeded random points.  A passing check means the
residual stayed under the tolerance at every sample, not a proof.
"""
from __future__ import annotations

import zlib
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import DomainError, UnboundVariable
from .evaluate import Compiled
from .nodes import Const, Expr, as_expr, var_rank


@dataclass(frozen=True)
class SampleDomain:
    """Per-variable closed intervals plus sample count, tolerance and seed."""

    intervals: Mapping[str, tuple] = field(hash=False)
    samples: int = 64
    tol: float = 1e-9
    seed: int = 0
    retries: int = 16

    def __post_init__(self):
        clean = {}
        for name, (lo, hi) in self.intervals.items():
            lo, hi = float(lo), float(hi)
            if not lo <= hi:
                raise ValueError(f"empty interval for {name}: [{lo}, {hi}]")
            clean[name] = (lo, hi)
        object.__setattr__(self, "intervals", dict(sorted(clean.items(), key=lambda kv: var_rank(kv[0]))))
        if self.samples < 1:
            raise ValueError("sample count must be positive")
        if not self.tol > 0:
            raise ValueError("tolerance must be positive")

    @property
    def names(self) -> tuple:
        return tuple(self.intervals)

    def _draw(self, name: str, size: int, attempt: int) -> np.ndarray:
        lo, hi = self.intervals[name]
        rng = np.random.default_rng([self.seed, attempt, zlib.crc32(name.encode())])
        return rng.uniform(lo, hi, size)

    @cached_property
    def points(self) -> dict:
        return {name: self._draw(name, self.samples, 0) for name in self.intervals}

    def covers(self, names: Iterable[str]) -> bool:
        return all(n in self.intervals for n in names)

    def with_intervals(self, extra: Mapping[str, tuple]) -> "SampleDomain":
        merged = dict(self.intervals)
        merged.update(extra)
        return replace(self, intervals=merged)

    def restricted(self, names: Iterable[str]) -> "SampleDomain":
        keep = set(names)
        return replace(self, intervals={k: v for k, v in self.intervals.items() if k in keep})

    def evaluate(self, exprs: Sequence[Expr]) -> list:
        """Values of each expression at every sample point, as float arrays.

        Samples where some expression leaves its domain are redrawn, up to
        ``retries`` times; after that DomainError is raised.
        """
        exprs = [as_expr(e) for e in exprs]
        live = [e for e in exprs if not isinstance(e, Const)]
        out = {}
        if live:
            comp = Compiled(live, vectorized=True)
            for name in comp.free:
                if name not in self.intervals:
                    raise UnboundVariable(name)
            env = {k: v.copy() for k, v in self.points.items()}
            for attempt in range(self.retries + 1):
                values, bad, first = comp.vector(env)
                if bad is None or not bad.any():
                    break
                if attempt == self.retries:
                    raise DomainError(f"singular at {int(bad.sum())} samples after {self.retries} redraws", first)
                idx = np.nonzero(bad)[0]
                for name in env:
                    env[name][idx] = self._draw(name, len(idx), attempt + 1 + 7919 * int(idx[0]))
            for e, v in zip(live, values):
                out[e] = np.broadcast_to(np.asarray(v, dtype=float), (self.samples,))
        return [out[e] if e in out else np.full(self.samples, float(e.value)) for e in exprs]

    def max_abs(self, exprs: Sequence[Expr]) -> list:
        res = []
        for v in self.evaluate(exprs):
            a = np.abs(v)
            res.append(float("inf") if np.isnan(a).any() else float(a.max()))
        return res


def is_zero(e, dom: SampleDomain) -> tuple:
    """(passed, residual): residual is max |e| over the samples."""
    r = dom.max_abs([as_expr(e)])[0]
    return r <= dom.tol, r


def residual(exprs: Sequence, dom: SampleDomain) -> float:
    """Largest |value| over all expressions and samples (0 for an empty batch)."""
    exprs = [as_expr(e) for e in exprs]
    exprs = [e for e in exprs if e is not Const(0)]
    if not exprs:
        return 0.0
    return max(dom.max_abs(exprs))
