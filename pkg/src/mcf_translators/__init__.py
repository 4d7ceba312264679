"""Translating solitons of mean curvature flow in H^n x R.

Modules
-------
numerics     ODE integration, monotone root finding, quadrature
hyperbolic   half-space and hyperboloid models, isometries
horosphere   profiles foliated by horospheres (closed-form branches)
rotational   rotationally invariant profiles (bowl, cones, spindles)
graphical    Dirichlet problem for space-like graphical translators
export, cli  file formats and the ``mcf-translators`` command
"""

__version__ = "0.1.0"

from .errors import (  # noqa: F401
    DegenerateProfile,
    DomainError,
    DomainNotInvariant,
    InversionFailure,
    MarginCollapse,
    NonConvergence,
    NotBracketed,
    NotSpacelike,
    OutsideImage,
    ShootingFailure,
    StepUnderflow,
    TranslatorError,
    Unclassifiable,
)
from .graphical import (  # noqa: F401
    BoxDomain,
    GridSolution,
    SolverConfig,
    SolverReport,
    assemble_nondivergence,
    coefficients,
    rectangle_problem,
    residual_divergence_form,
    solve_dirichlet,
    symmetry_extension_check,
    verify_uniqueness,
)
from .horosphere import (  # noqa: F401
    BranchTag,
    HoroBranch,
    branch_for_family,
    build_profile,
    classify_horosphere_families,
    eval_antiderivative,
    horo_branch,
    invert_branch,
)
from .hyperbolic import HalfSpaceIsometry, HalfSpacePoint, HyperboloidPoint  # noqa: F401
from .numerics import (  # noqa: F401
    TerminalEvent,
    ToleranceConfig,
    Trajectory,
    find_root_monotone,
    integrate_ode,
    quadrature,
)
from .profile import Causal, ProfileCurve  # noqa: F401
from .rotational import (  # noqa: F401
    RotationalKind,
    bowl,
    classify_rotational,
    linearize_fixed_point,
    spacelike_profile,
    spindle,
    timelike_profile,
)
