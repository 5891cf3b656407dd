"""Polyhedral set-valued convex optimization in the complete-lattice sense."""

from .duality import (
    DualSolutionSet,
    ProblemInstance,
    ValueReport,
    dual_objective,
    dual_value,
    feasible,
    lagrangian,
    primal_solution,
    primal_value,
    psep_build,
    psep_dual,
    psep_identity,
    reconstruct_primal,
    slater_check,
    solve_strong,
    value_biconjugate,
    value_conjugate,
    value_function,
    weak_duality_check,
)
from .errors import (
    ConeMembershipError,
    DimensionError,
    IndeterminateError,
    SetLatError,
    VerificationError,
)
from .geometry import (
    LatticeMode,
    PolyCone,
    Tag,
    UpperSet,
    contains,
    dual_cone,
    equal,
    from_hrep,
    halfspace,
    lattice_inf,
    lattice_sup,
    minkowski_add,
    scale,
    strictly_contains,
    support,
    to_hrep,
    upper_close,
)
from .lp import LinearProgram, LPOutcome, LPStatus, linprog, solve_lp
from .maps import (
    DualPair,
    Piece,
    S_of,
    S_pair,
    SetValuedMap,
    affine_map,
    base_conjugate,
    base_of,
    biconjugate,
    conjugate,
    facet_directions,
)
from .saddle import (
    CandidateSet,
    SaddleVerdict,
    SolutionVerdict,
    check_solution,
    inf_extension,
    is_infimizer,
    is_maximizer,
    is_minimizer,
    is_supremizer,
    lower_ext,
    saddle_check,
    sup_extension,
    upper_ext,
)
from .scalarization import phi, reconstruct, scalar_conjugate, scalar_lagrangian
from .tolerances import DELTA_SLATER, EPS_DUAL, EPS_GEOM, EPS_LP

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
