"""Affine Lie algebroids: axioms, exterior calculus, dynamics, prolongation, Poisson bracket."""
from .algebroid import (
    AffineAlgebroid,
    AlgebroidError,
    AxiomReport,
    Section,
    VectorField,
    anchor,
    bracket,
    check_axioms,
    new_algebroid,
    transform_base,
    transform_fibre,
)
from .calculus import Form, d_coord, d_eval, eval_form, lie
from .dynamics import PseudoSode, admissibility_residual, integrate, pseudo_sode
from .expr import SampleDomain, diff, is_zero, parse
from .io import load_spec, spec_from_dict
from .lagrange import lagrange_residual, lagrange_sode
from .poisson import PoissonSpace, hat, jacobi_residual, poisson_bracket
from .prolong import ProlongedAlgebroid, sode_as_section

__version__ = "0.1.0"

__all__ = [
    "AffineAlgebroid", "AlgebroidError", "AxiomReport", "Form", "PoissonSpace", "ProlongedAlgebroid", "PseudoSode",
    "SampleDomain", "Section", "VectorField", "admissibility_residual", "anchor", "bracket", "check_axioms", "d_coord",
    "d_eval", "diff", "eval_form", "hat", "integrate", "is_zero", "jacobi_residual", "lagrange_residual",
    "lagrange_sode", "lie", "load_spec", "new_algebroid", "parse", "poisson_bracket", "pseudo_sode",
    "sode_as_section", "spec_from_dict", "transform_base", "transform_fibre",
]
