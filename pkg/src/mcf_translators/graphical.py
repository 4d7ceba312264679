"""Space-like graphical translators over boxes in the half-space model.

A graph ``t = u(x)`` over ``x`` in the half-space is a space-like translator
when, with ``p`` the Euclidean gradient of ``u`` and
``W = sqrt(1 - x_1^2 |p|^2)``,

    R[u] = div(grad u / W) - 1 / W = 0,

where ``div`` and ``grad`` are hyperbolic, ``grad u = x_1^2 p`` and
``div V = x_1^n sum_i d_i(x_1^{-n} V^i)``.  Expanding gives the
non-divergence form

    N[u] = sum_ij a^ij(x, p) u_ij + b(x, p) = W^3 R[u],
    a^ij = x_1^2 W^2 delta_ij + x_1^4 p_i p_j,
    b    = W^2 (2 x_1 p_1 + x_1^2 sum_i p_i Gamma^j_ij) + x_1^3 p_1 |p|^2 - W^2.

Grids may cover only the first ``k <= n`` coordinates; ``u`` is then taken
constant in the remaining ones and ``n`` enters only as a parameter.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.interpolate import RegularGridInterpolator
from scipy.sparse.linalg import spsolve

from .errors import DomainError, DomainNotInvariant, MarginCollapse, NonConvergence, NotSpacelike
from .hyperbolic import HalfSpaceIsometry, HalfSpacePoint, apply_isometry, contracted_christoffel_half
from .horosphere import HoroBranch, build_profile
from .profile import ProfileCurve

__all__ = [
    "BoxDomain",
    "GridSolution",
    "CoefficientPair",
    "SolverConfig",
    "SolverReport",
    "UniquenessReport",
    "SymmetryReport",
    "RectangleReport",
    "coefficients",
    "residual_divergence_form",
    "assemble_nondivergence",
    "spacelike_margin",
    "harmonic_extension",
    "solve_dirichlet",
    "verify_uniqueness",
    "symmetry_extension_check",
    "rectangle_problem",
    "horosphere_graph",
    "rotational_graph",
]


class BoxDomain:
    """Uniform grid on ``prod_d [lo_d, hi_d]`` with ``x_1 = lo_0 > 0``.

    Parameters
    ----------
    bounds : sequence of (lo, hi)
        One interval per gridded axis, starting with ``x_1``.
    shape : sequence of int
        Nodes per axis, at least 3.
    n : int, optional
        Dimension of the hyperbolic space; defaults to ``len(bounds)``.
    """

    def __init__(self, bounds, shape, n: Optional[int] = None):
        self.bounds = tuple((float(lo), float(hi)) for lo, hi in bounds)
        self.shape = tuple(int(s) for s in shape)
        k = len(self.bounds)
        self.n = k if n is None else int(n)
        if k < 1 or len(self.shape) != k:
            raise DomainError("bounds and shape must have the same positive length")
        if self.n < max(2, k):
            raise DomainError(f"n = {self.n} is too small for a {k}-axis grid")
        if not self.bounds[0][0] > 0:
            raise DomainError("the x1 interval must lie in (0, inf)")
        if any(not hi > lo for lo, hi in self.bounds):
            raise DomainError("every interval needs lo < hi")
        if any(s < 3 for s in self.shape):
            raise DomainError("grid_shape must be at least 3 per axis")
        self.axes = tuple(np.linspace(lo, hi, s) for (lo, hi), s in zip(self.bounds, self.shape))
        self.spacing = tuple((hi - lo) / (s - 1) for (lo, hi), s in zip(self.bounds, self.shape))

    def __repr__(self):
        return f"BoxDomain(bounds={self.bounds}, shape={self.shape}, n={self.n})"

    @property
    def k(self) -> int:
        return len(self.shape)

    @property
    def h(self) -> float:
        return max(self.spacing)

    @property
    def interior(self):
        return (slice(1, -1),) * self.k

    @property
    def interior_shape(self):
        return tuple(s - 2 for s in self.shape)

    def coords(self):
        return np.meshgrid(*self.axes, indexing="ij")

    def points(self) -> np.ndarray:
        return np.stack(self.coords(), axis=-1)

    @property
    def x1(self) -> np.ndarray:
        return self.coords()[0]

    def boundary_mask(self) -> np.ndarray:
        mask = np.ones(self.shape, dtype=bool)
        mask[self.interior] = False
        return mask

    def refined(self, shape) -> "BoxDomain":
        return BoxDomain(self.bounds, shape, self.n)


@dataclass(frozen=True, eq=False)
class GridSolution:
    """Grid function ``u`` on a :class:`BoxDomain`.

    ``boundary`` holds the values at the boundary nodes (in C order of the
    boundary mask) and always equals ``values`` there.
    """

    domain: BoxDomain
    values: np.ndarray
    boundary: np.ndarray = None
    spacelike_margin: float = None

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != self.domain.shape:
            raise DomainError(f"values shape {v.shape} does not match grid {self.domain.shape}")
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "boundary", v[self.domain.boundary_mask()].copy())
        object.__setattr__(self, "spacelike_margin", spacelike_margin(v, self.domain))

    @classmethod
    def from_function(cls, domain: BoxDomain, func: Callable) -> "GridSolution":
        """Sample ``func`` on the nodes; ``func`` maps ``(..., k)`` points to values."""
        return cls(domain, np.asarray(func(domain.points()), dtype=float))

    def with_boundary(self, boundary_values: np.ndarray) -> "GridSolution":
        v = self.values.copy()
        mask = self.domain.boundary_mask()
        v[mask] = boundary_values[mask]
        return GridSolution(self.domain, v)

    def interior_values(self) -> np.ndarray:
        return self.values[self.domain.interior]


@dataclass(frozen=True)
class CoefficientPair:
    A: np.ndarray
    b: float


@dataclass(frozen=True)
class SolverConfig:
    tol: float = 1e-10
    max_iter: int = 50
    margin_floor: float = 1e-3
    operator: str = "nondivergence"
    armijo: float = 1e-4
    max_backtracks: int = 40
    complex_step: float = 1e-30

    def __post_init__(self):
        if self.operator not in ("nondivergence", "divergence"):
            raise DomainError(f"unknown operator {self.operator!r}")
        if not self.tol > 0 or self.max_iter < 1 or not 0 <= self.margin_floor < 1:
            raise DomainError("invalid solver configuration")

    def as_dict(self) -> dict:
        return dict(self.__dict__)


@dataclass
class SolverReport:
    """Newton history.  ``residual_history`` holds max-norms of the solved operator."""

    iterations: int
    residual_history: list
    converged: bool
    final_spacelike_margin: float
    damping_events: int
    operator: str = "nondivergence"
    other_operator_residual: float = math.nan
    step_lengths: list = field(default_factory=list)

    def as_dict(self) -> dict:
        return {
            "iterations": self.iterations,
            "residual_history": [float(r) for r in self.residual_history],
            "converged": bool(self.converged),
            "final_spacelike_margin": float(self.final_spacelike_margin),
            "damping_events": int(self.damping_events),
            "operator": self.operator,
            "other_operator_residual": float(self.other_operator_residual),
            "step_lengths": [float(a) for a in self.step_lengths],
        }


# ---------------------------------------------------------------- pointwise


def coefficients(x, p, n: int) -> CoefficientPair:
    """``a^ij`` and ``b`` of the non-divergence operator at ``(x, p)``.

    ``x`` is a :class:`HalfSpacePoint` or the value of ``x_1``; ``p`` may have
    ``k <= n`` components (the rest are taken as zero).
    """
    x1 = x.x1 if isinstance(x, HalfSpacePoint) else float(x)
    p = np.atleast_1d(np.asarray(p, dtype=float))
    if not x1 > 0:
        raise DomainError("x1 must be positive")
    if p.size > n:
        raise DomainError("p has more components than n")
    P = float(p @ p)
    W2 = 1.0 - x1 * x1 * P
    if not W2 > 0:
        raise NotSpacelike(f"x1^2 |p|^2 = {1.0 - W2!r} >= 1")
    A = x1 * x1 * W2 * np.eye(p.size) + x1**4 * np.outer(p, p)
    C = contracted_christoffel_half(x1, n)[: p.size]
    b = W2 * (2.0 * x1 * p[0] + x1 * x1 * float(p @ C)) + x1**3 * p[0] * P - W2
    return CoefficientPair(A, float(b))


# ---------------------------------------------------------------- grid operators


def _shift(k, d, off, e=None, off_e=0):
    """Interior nodes shifted by ``off`` along ``d`` (and ``off_e`` along ``e``)."""
    out = [slice(1, -1)] * k
    out[d] = slice(1 + off, -1 + off if off < 1 else None)
    if e is not None:
        out[e] = slice(1 + off_e, -1 + off_e if off_e < 1 else None)
    return tuple(out)


def _centered_gradient(U, dom: BoxDomain):
    k = dom.k
    return [(U[_shift(k, d, 1)] - U[_shift(k, d, -1)]) / (2.0 * dom.spacing[d]) for d in range(k)]


def _nondiv(U, dom: BoxDomain):
    k, n = dom.k, dom.n
    x1 = dom.x1[dom.interior]
    p = _centered_gradient(U, dom)
    P = sum(pd * pd for pd in p)
    W2 = 1.0 - x1 * x1 * P
    Uc = U[dom.interior]
    out = (2.0 - n) * x1 * p[0] * W2 + x1**3 * p[0] * P - W2
    for d in range(k):
        h = dom.spacing[d]
        Udd = (U[_shift(k, d, 1)] - 2.0 * Uc + U[_shift(k, d, -1)]) / (h * h)
        out = out + (x1 * x1 * W2 + x1**4 * p[d] * p[d]) * Udd
        for e in range(d + 1, k):
            Ude = (
                U[_shift(k, d, 1, e, 1)] - U[_shift(k, d, 1, e, -1)]
                - U[_shift(k, d, -1, e, 1)] + U[_shift(k, d, -1, e, -1)]
            ) / (4.0 * h * dom.spacing[e])
            out = out + 2.0 * x1**4 * p[d] * p[e] * Ude
    return out


def _div(U, dom: BoxDomain):
    k, n = dom.k, dom.n
    X1 = dom.x1
    out = 0.0
    for d in range(k):
        h = dom.spacing[d]
        full_d = [slice(1, -1)] * k
        full_d[d] = slice(None)
        lo = list(full_d)
        hi = list(full_d)
        lo[d] = slice(0, -1)
        hi[d] = slice(1, None)
        lo, hi = tuple(lo), tuple(hi)
        pd = (U[hi] - U[lo]) / h
        P = pd * pd
        for e in range(k):
            if e == d:
                continue
            plus = list(full_d)
            minus = list(full_d)
            plus[e] = slice(2, None)
            minus[e] = slice(0, -2)
            Ce = (U[tuple(plus)] - U[tuple(minus)]) / (2.0 * dom.spacing[e])
            cut_lo = [slice(None)] * k
            cut_hi = [slice(None)] * k
            cut_lo[d] = slice(0, -1)
            cut_hi[d] = slice(1, None)
            pe = 0.5 * (Ce[tuple(cut_lo)] + Ce[tuple(cut_hi)])
            P = P + pe * pe
        x1h = 0.5 * (X1[lo] + X1[hi])
        flux = x1h ** (2.0 - n) * pd / np.sqrt(1.0 - x1h * x1h * P)
        cut_lo = [slice(None)] * k
        cut_hi = [slice(None)] * k
        cut_lo[d] = slice(0, -1)
        cut_hi[d] = slice(1, None)
        out = out + (flux[tuple(cut_hi)] - flux[tuple(cut_lo)]) / h
    x1 = X1[dom.interior]
    p = _centered_gradient(U, dom)
    W = np.sqrt(1.0 - x1 * x1 * sum(pd * pd for pd in p))
    return x1**n * out - 1.0 / W


def _margin_array(U, dom):
    x1 = dom.x1[dom.interior]
    p = _centered_gradient(np.real(U), dom)
    return 1.0 - x1 * x1 * sum(pd * pd for pd in p)


def spacelike_margin(U, dom: BoxDomain) -> float:
    """``min(1 - x_1^2 |grad_h u|^2)`` over interior nodes (centered differences)."""
    return float(np.min(_margin_array(U, dom)))


def _values(u):
    if isinstance(u, GridSolution):
        return u.values, u.domain
    raise TypeError("expected a GridSolution")


def residual_divergence_form(u: GridSolution) -> np.ndarray:
    """Discrete ``div(grad u / W) - 1/W`` on interior nodes (conservative fluxes)."""
    U, dom = _values(u)
    if not u.spacelike_margin > 0:
        raise NotSpacelike(f"space-like margin {u.spacelike_margin!r} <= 0")
    with np.errstate(invalid="raise"):
        try:
            return _div(U, dom)
        except FloatingPointError as exc:
            raise NotSpacelike("a half-node gradient is not space-like") from exc


def assemble_nondivergence(u: GridSolution) -> np.ndarray:
    """Discrete ``sum a^ij u_ij + b`` on interior nodes (centered differences)."""
    U, dom = _values(u)
    if not u.spacelike_margin > 0:
        raise NotSpacelike(f"space-like margin {u.spacelike_margin!r} <= 0")
    return _nondiv(U, dom)


_OPERATORS = {"nondivergence": _nondiv, "divergence": _div}


# ---------------------------------------------------------------- Newton


def _colored_jacobian(op, U, dom: BoxDomain, h_cs: float):
    """Sparse Jacobian of ``op`` w.r.t. interior values by colored complex steps.

    Each residual depends on the 3^k box of nodes around it, so nodes whose
    indices agree modulo 3 never share a row.
    """
    k = dom.k
    ishape = dom.interior_shape
    N = int(np.prod(ishape))
    gidx = np.meshgrid(*[np.arange(1, s - 1) for s in dom.shape], indexing="ij")
    gidx = [g.ravel() for g in gidx]
    rows_all, cols_all, vals_all = [], [], []
    base = U.astype(complex)
    for color in itertools.product(range(3), repeat=k):
        mask = np.ones(ishape, dtype=bool)
        for d in range(k):
            mask &= (np.arange(1, dom.shape[d] - 1) % 3 == color[d]).reshape(
                [-1 if i == d else 1 for i in range(k)]
            )
        if not mask.any():
            continue
        Uc = base.copy()
        Uc[dom.interior] += 1j * h_cs * mask
        col_deriv = (op(Uc, dom).imag / h_cs).ravel()
        # column node paired with each row for this color
        ok = np.ones(N, dtype=bool)
        col_multi = []
        for d in range(k):
            o = (color[d] - gidx[d] + 1) % 3 - 1
            g = gidx[d] + o
            ok &= (g >= 1) & (g <= dom.shape[d] - 2)
            col_multi.append(g - 1)
        rows = np.nonzero(ok)[0]
        cols = np.ravel_multi_index([c[ok] for c in col_multi], ishape)
        rows_all.append(rows)
        cols_all.append(cols)
        vals_all.append(col_deriv[ok])
    J = sp.csc_matrix(
        (np.concatenate(vals_all), (np.concatenate(rows_all), np.concatenate(cols_all))),
        shape=(N, N),
    )
    return J


def _laplace(U, dom):
    k = dom.k
    Uc = U[dom.interior]
    return sum(
        (U[_shift(k, d, 1)] - 2.0 * Uc + U[_shift(k, d, -1)]) / dom.spacing[d] ** 2 for d in range(k)
    )


def _boundary_grid(domain: BoxDomain, boundary) -> np.ndarray:
    """Full grid array carrying the boundary data (interior values unspecified)."""
    if isinstance(boundary, GridSolution):
        return boundary.values.copy()
    if callable(boundary):
        return np.asarray(boundary(domain.points()), dtype=float)
    arr = np.asarray(boundary, dtype=float)
    if arr.shape != domain.shape:
        raise DomainError(f"boundary array shape {arr.shape} does not match grid {domain.shape}")
    return arr.copy()


def harmonic_extension(domain: BoxDomain, boundary) -> GridSolution:
    """Discrete Euclidean-harmonic extension of the boundary data."""
    U = _boundary_grid(domain, boundary)
    U[domain.interior] = 0.0
    J = _colored_jacobian(_laplace, U, domain, 1e-30)
    rhs = -_laplace(U, domain).ravel()
    U[domain.interior] = spsolve(J, rhs).reshape(domain.interior_shape)
    return GridSolution(domain, U)


def solve_dirichlet(
    domain: BoxDomain,
    boundary,
    guess: Optional[GridSolution] = None,
    cfg: SolverConfig = SolverConfig(),
):
    """Damped Newton solve of the translator equation with Dirichlet data.

    Parameters
    ----------
    boundary : callable, array or GridSolution
        Dirichlet data; only boundary nodes are read.
    guess : GridSolution, optional
        Space-like starting point; its boundary values are replaced by the
        data.  Defaults to the harmonic extension.

    Returns
    -------
    (GridSolution, SolverReport)

    Raises
    ------
    MarginCollapse
        When the start or every damped step violates the margin floor.
    NotSpacelike
        When a supplied guess is not space-like once the data are imposed.
    NonConvergence
        After ``cfg.max_iter`` iterations or a failed line search.
    """
    data = _boundary_grid(domain, boundary)
    if guess is None:
        U = harmonic_extension(domain, data).values
    else:
        U = (guess.values if isinstance(guess, GridSolution) else np.asarray(guess, float)).copy()
        mask = domain.boundary_mask()
        U[mask] = data[mask]
    op = _OPERATORS[cfg.operator]
    other = _OPERATORS["divergence" if cfg.operator == "nondivergence" else "nondivergence"]

    report = SolverReport(0, [], False, spacelike_margin(U, domain), 0, cfg.operator)
    if guess is not None and not report.final_spacelike_margin > 0:
        raise NotSpacelike(
            f"the guess (with the boundary data imposed) has margin {report.final_spacelike_margin:.3g}"
        )
    if not report.final_spacelike_margin > 0:
        raise MarginCollapse(
            f"starting grid function is not space-like (margin {report.final_spacelike_margin:.3g});"
            " the boundary data may be too steep",
            report,
        )

    F = op(U, domain)
    norm = float(np.max(np.abs(F)))
    report.residual_history.append(norm)
    while norm >= cfg.tol:
        if report.iterations >= cfg.max_iter:
            raise NonConvergence(f"no convergence after {cfg.max_iter} Newton iterations", report)
        J = _colored_jacobian(op, U, domain, cfg.complex_step)
        delta = spsolve(J, -F.ravel()).reshape(domain.interior_shape)
        if not np.all(np.isfinite(delta)):
            raise NonConvergence("singular Newton system", report)
        l2 = float(np.linalg.norm(F))
        alpha = 1.0
        accepted = False
        margin_ok_seen = False
        for _ in range(cfg.max_backtracks):
            V = U.copy()
            V[domain.interior] += alpha * delta
            m = spacelike_margin(V, domain)
            if m >= cfg.margin_floor:
                margin_ok_seen = True
                with np.errstate(invalid="ignore"):
                    Fv = op(V, domain)
                if np.all(np.isfinite(Fv)) and np.linalg.norm(Fv) <= (1.0 - cfg.armijo * alpha) * l2:
                    accepted = True
                    break
            alpha *= 0.5
        if not accepted:
            if not margin_ok_seen:
                raise MarginCollapse(
                    f"no damped step keeps the space-like margin above {cfg.margin_floor:g}", report
                )
            if norm < 1e3 * cfg.tol:
                break  # rounding floor reached just above tol
            raise NonConvergence("line search failed to reduce the residual", report)
        if alpha < 1.0:
            report.damping_events += 1
        report.step_lengths.append(alpha)
        U, F = V, Fv
        norm = float(np.max(np.abs(F)))
        report.iterations += 1
        report.residual_history.append(norm)
        report.final_spacelike_margin = m

    report.converged = norm < cfg.tol or norm < 1e3 * cfg.tol
    report.final_spacelike_margin = spacelike_margin(U, domain)
    with np.errstate(invalid="ignore"):
        report.other_operator_residual = float(np.max(np.abs(other(U, domain))))
    return GridSolution(domain, U), report


# ---------------------------------------------------------------- verification


@dataclass
class UniquenessReport:
    solutions: list
    reports: list
    max_pairwise_difference: float
    threshold: float

    @property
    def passed(self) -> bool:
        return self.max_pairwise_difference < self.threshold


def verify_uniqueness(
    domain: BoxDomain,
    boundary,
    guesses: Sequence,
    cfg: SolverConfig = SolverConfig(),
    threshold: Optional[float] = None,
) -> UniquenessReport:
    """Solve from every guess and compare the converged grid functions pairwise."""
    if len(guesses) < 2:
        raise DomainError("need at least two guesses")
    sols, reps = [], []
    for g in guesses:
        s, r = solve_dirichlet(domain, boundary, g, cfg)
        sols.append(s)
        reps.append(r)
    diff = max(
        float(np.max(np.abs(a.values - b.values)))
        for a, b in itertools.combinations(sols, 2)
    )
    return UniquenessReport(sols, reps, diff, 10.0 * cfg.tol if threshold is None else threshold)


@dataclass
class SymmetryReport:
    solution: GridSolution
    solver_report: SolverReport
    max_deviation: float
    boundary_deviation: float
    on_grid: bool
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.max_deviation <= self.tolerance


def _map_points(domain, sigma, pts, periodic_axes):
    k, n = domain.k, domain.n
    full = np.zeros(pts.shape[:-1] + (n,))
    full[..., :k] = pts
    img = apply_isometry(sigma, full)[..., :k]
    for d in periodic_axes:
        lo, hi = domain.bounds[d]
        L = hi - lo
        img[..., d] = lo + np.mod(img[..., d] - lo, L)
        # keep the two identified faces distinct: map hi-face nodes back to hi
        img[..., d] = np.where(np.isclose(pts[..., d], hi) & np.isclose(img[..., d], lo), hi, img[..., d])
    return img


def symmetry_extension_check(
    domain: BoxDomain,
    boundary,
    sigma: HalfSpaceIsometry,
    cfg: SolverConfig = SolverConfig(),
    periodic_axes: Sequence[int] = (),
    tolerance: Optional[float] = None,
    guess: Optional[GridSolution] = None,
) -> SymmetryReport:
    """Solve once and compare ``u`` with ``u o sigma`` on the nodes.

    Nodes mapped onto nodes are compared directly; otherwise ``u`` is
    interpolated with cubic splines, and the default tolerance becomes
    ``h^2`` instead of ``1e-6``.  Axes in ``periodic_axes`` are identified
    modulo the box length before the invariance check.
    """
    pts = domain.points()
    img = _map_points(domain, sigma, pts, periodic_axes)
    slack = 1e-9 * max(max(abs(lo), abs(hi)) for lo, hi in domain.bounds)
    for d, (lo, hi) in enumerate(domain.bounds):
        if np.any(img[..., d] < lo - slack) or np.any(img[..., d] > hi + slack):
            raise DomainNotInvariant(f"sigma moves grid nodes outside the box along axis {d}")
    sol, rep = solve_dirichlet(domain, boundary, guess, cfg)

    idx = []
    on_grid = True
    for d in range(domain.k):
        t = (img[..., d] - domain.bounds[d][0]) / domain.spacing[d]
        r = np.rint(t)
        if np.max(np.abs(t - r)) > 1e-7:
            on_grid = False
        idx.append(np.clip(r.astype(int), 0, domain.shape[d] - 1))
    if on_grid:
        mapped = sol.values[tuple(idx)]
    else:
        clipped = np.stack(
            [np.clip(img[..., d], *domain.bounds[d]) for d in range(domain.k)], axis=-1
        )
        interp = RegularGridInterpolator(domain.axes, sol.values, method="cubic")
        mapped = interp(clipped.reshape(-1, domain.k)).reshape(domain.shape)
    dev = np.abs(mapped - sol.values)
    mask = domain.boundary_mask()
    tol = (1e-6 if on_grid else domain.h**2) if tolerance is None else tolerance
    return SymmetryReport(sol, rep, float(np.max(dev[~mask])), float(np.max(dev[mask])), on_grid, tol)


def horosphere_graph(branch: HoroBranch, s0: float = 0.0, f0: float = 0.0) -> Callable:
    """``u(x) = f(-ln x_1)`` for the horosphere profile on ``branch``.

    The minus sign places the profile variable on the side where the
    horospheres ``x_1 = const`` have mean curvature ``n - 1`` with respect to
    the graph equation's normal.
    """

    def u(points):
        x1 = np.asarray(points, dtype=float)[..., 0]
        flat, inv = np.unique(x1.ravel(), return_inverse=True)
        s = -np.log(flat)
        order = np.argsort(s)
        curve = build_profile(branch, s[order], s0, f0)
        f = np.empty_like(s)
        f[order] = curve.f
        return f[inv].reshape(x1.shape)

    return u


def rotational_graph(profile: ProfileCurve, center: Optional[Sequence[float]] = None) -> Callable:
    """``u(x) = f(d(x, center))`` for a rotational profile with a dense evaluator.

    ``center`` defaults to ``(1, 0, ..., 0)``; grids with ``k`` axes use the
    first ``k`` coordinates of the centre.
    """

    def u(points):
        pts = np.asarray(points, dtype=float)
        k = pts.shape[-1]
        c = np.zeros(k)
        c[0] = 1.0
        if center is not None:
            c[:] = np.asarray(center, dtype=float)[:k]
        d2 = np.sum((pts - c) ** 2, axis=-1)
        tau = 2.0 * np.arcsinh(np.sqrt(d2) / (2.0 * np.sqrt(pts[..., 0] * c[0])))
        _, f = profile.evaluate(tau.ravel())
        return np.asarray(f).reshape(tau.shape)

    return u


@dataclass
class RectangleReport:
    max_error: float
    h: float
    solver_report: SolverReport
    exact: GridSolution

    def as_dict(self) -> dict:
        return {"max_error": self.max_error, "h": self.h, "solver": self.solver_report.as_dict()}


def rectangle_problem(
    branch: HoroBranch,
    a1: float,
    b1: float,
    a2: float,
    b2: float,
    shape: Sequence[int],
    cfg: SolverConfig = SolverConfig(),
    s0: float = 0.0,
    f0: float = 0.0,
    extra_bounds: Sequence = (),
    guess: Optional[GridSolution] = None,
):
    """Dirichlet problem on a rectangle in horosphere coordinates.

    The profile variable ``t = -ln x_1`` ranges over ``[a1, b1]`` and
    ``x_2`` over ``[a2, b2]``.  The data are the constants ``f(a1)``,
    ``f(b1)`` on the horosphere sides and ``f(t)`` on the two vertical
    sides; ``extra_bounds`` adds further translation-invariant axes (a
    slab).  The solution is compared with ``f(-ln x_1)``.
    """
    if not (a1 < b1 and a2 < b2):
        raise DomainError("need a1 < b1 and a2 < b2")
    bounds = [(math.exp(-b1), math.exp(-a1)), (a2, b2)] + [tuple(b) for b in extra_bounds]
    n = int(round(branch.n))
    domain = BoxDomain(bounds, shape, n)
    u_exact = horosphere_graph(branch, s0, f0)
    exact = GridSolution.from_function(domain, u_exact)
    sol, rep = solve_dirichlet(domain, exact, guess, cfg)
    err = float(np.max(np.abs(sol.values - exact.values)))
    return sol, RectangleReport(err, domain.h, rep, exact)
