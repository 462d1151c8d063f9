"""Ready-made algebroids used in tests, docs and the CLI."""
from __future__ import annotations

from .algebroid import AffineAlgebroid, default_domain, new_algebroid
from .expr import SampleDomain


def _eps(k: int = 3) -> list:
    C = [[[0] * k for _ in range(k)] for _ in range(k)]
    for a, b, c in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
        C[c][a][b] = 1
        C[c][b][a] = -1
    return C


def jet_algebroid(n: int = 2, dom: SampleDomain | None = None) -> AffineAlgebroid:
    """First-jet bundle of R x R^n -> R: rho = identity, everything else zero."""
    rho = [[1 if i == a else 0 for a in range(n)] for i in range(n)]
    return new_algebroid(n, n, rho=rho, dom=dom or default_domain(n, n))


def so3_algebroid(dom: SampleDomain | None = None) -> AffineAlgebroid:
    """so(3) with [e_a, e_b] = eps_abc e_c over the time line (n = 0)."""
    return new_algebroid(0, 3, C=_eps(), dom=dom or default_domain(0, 3))


def time_anchor_algebroid(dom: SampleDomain | None = None) -> AffineAlgebroid:
    """n = k = 1 with rho = t: violates the affine-anchor identity."""
    return new_algebroid(1, 1, rho=[["t"]], dom=dom or default_domain(1, 1))


def broken_jacobi_algebroid(dom: SampleDomain | None = None) -> AffineAlgebroid:
    """so(3) structure functions plus C^1_12 = 1, so [e3, [e1, e2]] picks up e2.

    Only the Jacobi identity fails; the anchors are zero.
    """
    C = _eps()
    C[0][0][1] = 1
    C[0][1][0] = -1
    return new_algebroid(0, 3, C=C, dom=dom or default_domain(0, 3))


def twisted_algebroid(dom: SampleDomain | None = None) -> AffineAlgebroid:
    """A valid algebroid with position-dependent anchor and nonzero C, C0, lam.

    n = 1, k = 2: rho = (1, x1), lam = t, [e1, e2] = e1, [e0, e2] = t e1.
    """
    return new_algebroid(
        1, 2,
        C=[[[0, 1], [-1, 0]], [[0, 0], [0, 0]]],
        C0=[[0, "t"], [0, 0]],
        lam=["t"],
        rho=[[1, "x1"]],
        dom=dom or default_domain(1, 2),
    )


def bent_anchor_algebroid(dom: SampleDomain | None = None) -> AffineAlgebroid:
    """n = 1, k = 2 with rho = (1, x1) and no brackets: [rho(e1), rho(e2)] = d/dx1
    is not rho([e1, e2]) = 0, so the linear-anchor identity fails."""
    return new_algebroid(1, 2, rho=[[1, "x1"]], dom=dom or default_domain(1, 2))


VALID = {"jet": jet_algebroid, "so3": so3_algebroid, "twisted": twisted_algebroid}
BROKEN = {
    "time_anchor": time_anchor_algebroid,
    "broken_jacobi": broken_jacobi_algebroid,
    "bent_anchor": bent_anchor_algebroid,
}
