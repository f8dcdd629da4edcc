"""Fixed-point iteration and contraction checks in semimetric spaces with triangle functions."""

__version__ = "0.1.0"

from .contractions import ContractionSpec, applicability, step_ratio, verify_on_finite
from .finitelab import classify, example_6_6, fixed_points, period2_points, random_instance, theorem_audit
from .solver import SolveConfig, error_bound, perimeter_solve, picard_solve
from .spaces import FiniteSpace, SelfMap, builtin_space, check_tr, validate_finite
from .triangle import c_alpha, check_axioms, eval_phi, make_builtin, nested_bound, psi, psi_inverse

__all__ = [
    "ContractionSpec", "FiniteSpace", "SelfMap", "SolveConfig",
    "applicability", "builtin_space", "c_alpha", "check_axioms", "check_tr", "classify",
    "error_bound", "eval_phi", "example_6_6", "fixed_points", "make_builtin", "nested_bound",
    "perimeter_solve", "period2_points", "picard_solve", "psi", "psi_inverse", "random_instance",
    "step_ratio", "theorem_audit", "validate_finite", "verify_on_finite",
]
