"""Boundary blow-up asymptotics for Delta u + a u = b(x) f(u).

The package classifies boundary weights by their regular-variation structure,
builds the associated blow-up profiles, predicts one- and two-term boundary
expansions of large solutions, and verifies the predictions against a radial
finite-difference solver.
"""

from .bvp import (
    Geometry,
    LargeSolution,
    RadialProblem,
    annulus,
    ball,
    eigenvalue_first_dirichlet,
    interval,
    manufactured_problem,
    solve_large_solution,
    subsupersolution_check,
    verify_first_order,
    verify_second_order,
)
from .config import RunConfig, parse_config
from .errors import (
    A1ViolationError,
    BlowupError,
    CaseMismatchError,
    ClassificationError,
    ConfigError,
    DomainError,
    InconclusiveError,
    InconsistentWeightError,
    IntegrabilityError,
    InvalidRepresentationError,
    MonotonicityError,
    NonconvergenceError,
    NonGeometricGridError,
    PreconditionError,
    QuadratureError,
    UnbracketableError,
    UnsupportedGeometryError,
)
from .expansion import (
    ALGEBRAIC_I,
    ALGEBRAIC_II,
    ALGEBRAIC_III,
    FIRST_ORDER,
    LOGARITHMIC_I,
    LOGARITHMIC_II,
    BExpansion,
    ExpansionPrediction,
    chi_algebraic,
    chi_logarithmic,
    dispatch_case,
    phi_leading,
    predict,
    predict_first_order,
    script_H_check,
    xi0,
)
from .expressions import ExpressionError, compile_expression
from .limits import TO_INFINITY, TO_ZERO, LimitEstimate, geometric_grid, limit_extrapolate
from .nonlinearity import (
    F_RHO0_TAU,
    F_RHO_ETA,
    PURE_POWER,
    Antiderivative,
    Nonlinearity,
    NonlinearityClass,
    T1_functional,
    T2_functional,
    keller_osserman_check,
    make_nonlinearity,
    xi_functional,
)
from .profiles import (
    HProfile,
    LemmaRow,
    Profile,
    PsiTransform,
    lemma_aux_report,
    make_profile_h,
    make_profile_phi,
    profile_h,
    profile_phi,
    profile_table,
    psi_transform,
)
from .regvar import (
    KaramataRepresentation,
    RegVarFunction,
    gamma_variation_check,
    karamata_direct_check,
    left_inverse,
    rv_index_estimate,
)
from .weights import (
    WeightClassReport,
    WeightFunction,
    classify_weight,
    constant_weight,
    expflat_weight,
    power_weight,
    tur_check,
    weight_from_E,
    weight_from_W,
    weight_integral,
)

__version__ = "0.1.0"
