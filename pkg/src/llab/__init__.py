"""llab: exact Lefschetz-calculus identity checks, Fourier Hodge theory on
flat tori, and a certified spectral-gap verifier on the hyperbolic disc."""

from llab.algebra import (
    BigradedForm,
    CompatibleTriple,
    KForm,
    build_standard_triple,
    form_from_json,
    form_to_json,
    hodge_star,
    inner,
    j_action,
    norm,
    pq_decompose,
    triple_from_omega_j,
    weil_operator,
    wedge,
)

__version__ = "0.1.0"

__all__ = [
    "BigradedForm",
    "CompatibleTriple",
    "KForm",
    "build_standard_triple",
    "form_from_json",
    "form_to_json",
    "hodge_star",
    "inner",
    "j_action",
    "norm",
    "pq_decompose",
    "triple_from_omega_j",
    "weil_operator",
    "wedge",
    "__version__",
]
