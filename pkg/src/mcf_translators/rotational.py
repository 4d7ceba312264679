"""Rotationally invariant translators.

A profile over the distance ``s`` from a fixed point has slope ``w = f'``
solving

    w' = (1 - w^2)(1 - (n - 1) coth(s) w),

which is singular at ``s = 0``.  Space-like solutions are organised by the
phase-plane field ``X(s, z) = (sinh s, (1 - z^2)(sinh s - (n - 1) cosh(s) z))``
whose saddle at the origin emits the bowl.  Time-like solutions blow up in
finite ``s`` and close up into spindles.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import DomainError, InversionFailure, NonConvergence, ShootingFailure, Unclassifiable
from .numerics import TerminalEvent, ToleranceConfig, Trajectory, find_root_monotone, integrate_ode
from .profile import Causal, ProfileCurve

__all__ = [
    "PhasePoint",
    "FixedPoint",
    "FixedPointKind",
    "LinearizationReport",
    "BlowUpReport",
    "SpindleResult",
    "RotationalKind",
    "rhs_rot",
    "theta",
    "nullcline",
    "vector_field_X",
    "jacobian_X",
    "linearize_fixed_point",
    "blow_up_bound",
    "bowl",
    "spacelike_profile",
    "timelike_profile",
    "spindle",
    "classify_rotational",
]


@dataclass(frozen=True)
class PhasePoint:
    s: float
    z: float

    def __post_init__(self):
        if not self.s >= 0:
            raise DomainError(f"phase points need s >= 0, got {self.s!r}")


class FixedPoint(enum.Enum):
    P0 = "P0"
    PPLUS1 = "Pplus1"
    PMINUS1 = "Pminus1"


class FixedPointKind(enum.Enum):
    SADDLE = "Saddle"
    SOURCE = "Source"


@dataclass(frozen=True)
class LinearizationReport:
    fixed_point: PhasePoint
    jacobian: np.ndarray
    eigenvalues: tuple
    eigenvectors: tuple
    classification: FixedPointKind


@dataclass(frozen=True)
class BlowUpReport:
    """Forward blow-up of a time-like profile started at ``(s0, z0)``.

    ``detected_blow_up_s`` is where ``|w|`` reaches the blow-up threshold and
    ``limit_s`` the extrapolated time where ``1/|w|`` vanishes.  The
    comparison bound ``s0 + A_bound`` is only guaranteed when
    ``z0 ((n - 1) coth(s) - 1) >= 1`` along the solution, which holds for
    every ``n >= 3`` and for ``z0 < -1``; ``within_bound`` reports the check.
    """

    s0: float
    z0: float
    A_bound: float
    detected_blow_up_s: float
    limit_s: float

    @property
    def within_bound(self) -> bool:
        return self.s0 < self.detected_blow_up_s < self.s0 + self.A_bound


class RotationalKind(enum.Enum):
    BOWL = "Bowl"
    SPACELIKE_CONE_MINUS = "SpaceLikeConeMinus"
    SPACELIKE_CONE_PLUS = "SpaceLikeConePlus"
    SPINDLE_PIECE = "SpindlePiece"


def _check_n(n):
    if int(n) != n or n < 2:
        raise DomainError(f"n must be an integer >= 2, got {n!r}")


def rhs_rot(s: float, w: float, n: int) -> float:
    """``(1 - w^2)(1 - (n - 1) coth(s) w)`` for ``s > 0``."""
    _check_n(n)
    if not s > 0:
        raise DomainError(f"the rotational ODE is singular at s = {s!r} <= 0")
    return (1.0 - w * w) * (1.0 - (n - 1) * w / math.tanh(s))


def _rot_system(n):
    m = n - 1

    def rhs(s, y):
        w = y[0]
        return np.array([(1.0 - w * w) * (1.0 - m * w / math.tanh(s)), w])

    return rhs


def theta(s: float, z: float, n: int) -> float:
    return (1.0 - z * z) * (math.sinh(s) - (n - 1) * math.cosh(s) * z)


def nullcline(s, n: int):
    """``tanh(s) / (n - 1)``, where ``theta`` vanishes inside ``|z| < 1``."""
    return np.tanh(s) / (n - 1)


def vector_field_X(p, n: int) -> np.ndarray:
    s, z = (p.s, p.z) if isinstance(p, PhasePoint) else p
    return np.array([math.sinh(s), theta(s, z, n)])


def jacobian_X(s: float, z: float, n: int) -> np.ndarray:
    m = n - 1
    ch, sh = math.cosh(s), math.sinh(s)
    return np.array(
        [
            [ch, 0.0],
            [(1.0 - z * z) * (ch - m * sh * z), -2.0 * z * (sh - m * ch * z) - (1.0 - z * z) * m * ch],
        ]
    )


def linearize_fixed_point(which, n: int) -> LinearizationReport:
    """Jacobian of ``X`` at one of ``p0 = (0, 0)``, ``p1 = (0, 1)``, ``p-1 = (0, -1)``.

    Eigenvalue ``1`` is listed first; at ``p0`` its eigenvector is ``(n, 1)``.
    """
    _check_n(n)
    which = FixedPoint(which)
    z = {FixedPoint.P0: 0.0, FixedPoint.PPLUS1: 1.0, FixedPoint.PMINUS1: -1.0}[which]
    J = jacobian_X(0.0, z, n)
    vals, vecs = np.linalg.eig(J)
    order = np.argsort(np.abs(vals - 1.0))
    vals = vals[order].real
    vecs = vecs[:, order].real
    if which is FixedPoint.P0:
        v = np.array([float(n), 1.0])
        vecs[:, 0] = v / np.linalg.norm(v)
    kind = FixedPointKind.SADDLE if vals[0] * vals[1] < 0 else FixedPointKind.SOURCE
    return LinearizationReport(
        PhasePoint(0.0, z),
        J,
        (float(vals[0]), float(vals[1])),
        (vecs[:, 0].copy(), vecs[:, 1].copy()),
        kind,
    )


def blow_up_bound(z0: float) -> float:
    """``A = -1/2 ln(1 - 1/z0^2)``."""
    if not abs(z0) > 1:
        raise DomainError("the blow-up bound needs |z0| > 1")
    return -0.5 * math.log1p(-1.0 / (z0 * z0))


def _samples_on(traj: Trajectory, s_grid):
    s_grid = np.asarray(s_grid, dtype=float)
    Y = traj(s_grid)
    return s_grid, Y[:, 0], Y[:, 1]


def bowl(
    n: int,
    s_max: float = 10.0,
    delta: float = 1e-6,
    cfg: ToleranceConfig = ToleranceConfig(),
    f0: float = 0.0,
    s_grid: Optional[Sequence[float]] = None,
) -> ProfileCurve:
    """The bowl: the unstable manifold of the saddle ``p0``.

    Integration starts at ``delta (n, 1) / |(n, 1)|`` on the unstable
    eigenvector, where ``f`` is seeded with its series ``s^2 / (2n)``.  The
    returned samples start with ``(0, 0, f0)``.
    """
    _check_n(n)
    if not 0 < delta < 0.1:
        raise DomainError("delta must lie in (0, 0.1)")
    norm = math.hypot(n, 1.0)
    s_start, w_start = delta * n / norm, delta / norm
    if not s_max > s_start:
        raise DomainError("s_max must exceed the shooting offset")
    y0 = np.array([w_start, f0 + s_start * s_start / (2.0 * n)])
    traj = integrate_ode(_rot_system(n), s_start, y0, s_max, cfg,
                         region_guard=lambda s, y: abs(y[0]) < 1.0)
    if traj.terminal_event is TerminalEvent.LEFT_REGION:
        raise ShootingFailure("bowl trajectory left (-1, 1); reduce delta")

    def evaluator(s):
        s = np.atleast_1d(s)
        w = np.empty_like(s)
        f = np.empty_like(s)
        near = s < s_start
        w[near] = s[near] / n
        f[near] = f0 + s[near] ** 2 / (2.0 * n)
        if np.any(~near):
            Y = traj(s[~near])
            w[~near], f[~near] = Y[:, 0], Y[:, 1]
        return w, f

    if s_grid is None:
        s = np.concatenate([[0.0], traj.t])
        w = np.concatenate([[0.0], traj.y[:, 0]])
        f = np.concatenate([[f0], traj.y[:, 1]])
    else:
        s = np.asarray(s_grid, dtype=float)
        w, f = evaluator(s)
    return ProfileCurve(s, w, f, RotationalKind.BOWL.value, Causal.SPACELIKE, n,
                        0.0, f0, limit_tag=0, evaluator=evaluator)


def _certified_tag(s, w, n, slack=1e-12):
    """Limit of ``w`` at ``s -> 0`` forced by a single sample, else ``None``.

    Below the nullcline ``w`` decreases as ``s`` decreases, so ``w < 0``
    somewhere forces the limit ``-1``.  Above it ``w`` increases backward and
    stays above, which forces ``+1``.
    """
    if np.any(w < 0):
        return -1
    if np.any(w > nullcline(s, n) + slack):
        return 1
    return None


def spacelike_profile(
    n: int,
    s0: float,
    z0: float,
    cfg: ToleranceConfig = ToleranceConfig(),
    s_max: Optional[float] = None,
    f0: float = 0.0,
    s_min: float = 1e-8,
    eps_limit: float = 1e-4,
):
    """Space-like rotational profile through ``(s0, z0)`` and its limit at ``s -> 0``.

    Backward integration stops once ``|w| > 1 - eps_limit`` or at ``s_min``.
    Returns ``(curve, tag)`` with ``tag`` in ``{-1, 0, +1}``; ``0`` means the
    data followed the bowl down to ``s_min``.
    """
    _check_n(n)
    if not s0 > 0 or not abs(z0) < 1:
        raise DomainError("need s0 > 0 and |z0| < 1")
    s_max = s0 + 20.0 if s_max is None else float(s_max)
    if not s_max > s0:
        raise DomainError("s_max must exceed s0")
    rhs = _rot_system(n)
    y0 = np.array([z0, f0])
    fwd = integrate_ode(rhs, s0, y0, s_max, cfg, region_guard=lambda s, y: abs(y[0]) < 1.0)
    bwd = integrate_ode(rhs, s0, y0, s_min, cfg,
                        region_guard=lambda s, y: abs(y[0]) < 1.0 - eps_limit, strict=False)
    s = np.concatenate([bwd.t, fwd.t[1:]])
    Y = np.concatenate([bwd.y, fwd.y[1:]])
    w, f = Y[:, 0], Y[:, 1]

    tag = _certified_tag(s, w, n)
    if tag is None:
        if bwd.terminal_event is TerminalEvent.LEFT_REGION:
            tag = 1 if bwd.y[0, 0] > 0 else -1
        else:
            tag = 0
    kind = {
        -1: RotationalKind.SPACELIKE_CONE_MINUS,
        1: RotationalKind.SPACELIKE_CONE_PLUS,
        0: RotationalKind.BOWL,
    }[tag].value

    def evaluator(ss):
        ss = np.atleast_1d(ss)
        out = np.empty((ss.size, 2))
        lo = ss < s0
        if np.any(lo):
            out[lo] = bwd(ss[lo])
        if np.any(~lo):
            out[~lo] = fwd(ss[~lo])
        return out[:, 0], out[:, 1]

    curve = ProfileCurve(s, w, f, kind, Causal.SPACELIKE, n, s0, f0,
                         limit_tag=tag, evaluator=evaluator)
    return curve, tag


def _blowup_system(n, sigma):
    """``(s, f)`` as functions of ``r = 1/|w|``; regular at ``r = 0``."""
    m = n - 1

    def rhs(r, y):
        s = y[0]
        q = -2.0 * sigma * (r * r - 1.0) * (r - sigma * m / math.tanh(s))
        return np.array([2.0 * r / q, 2.0 * sigma / q])

    return rhs


def timelike_profile(
    n: int,
    s0: float,
    z0: float,
    cfg: ToleranceConfig = ToleranceConfig(),
    f0: float = 0.0,
    s_min: float = 1e-6,
    switch: float = 10.0,
):
    """Time-like rotational profile through ``(s0, z0)``, ``|z0| > 1``.

    Backward, ``w`` tends to ``sign(z0)`` as ``s -> 0``.  Forward, ``|w|``
    blows up at finite ``s``.  Once ``|w|`` exceeds ``switch`` the solve
    continues in ``r = 1/|w|`` where the equations are regular, so the
    blow-up time is the value of ``s`` at ``r = 0``.

    Returns ``(curve, report)``.
    """
    _check_n(n)
    if not s0 > 0 or not abs(z0) > 1:
        raise DomainError("need s0 > 0 and |z0| > 1")
    sigma = 1.0 if z0 > 0 else -1.0
    rhs = _rot_system(n)
    y0 = np.array([z0, f0])

    bwd = integrate_ode(rhs, s0, y0, s_min, cfg,
                        region_guard=lambda s, y: abs(y[0]) - 1.0 > 1e-10, strict=False)
    if abs(z0) < switch:
        fwd = integrate_ode(rhs, s0, y0, s0 + 100.0, cfg,
                            region_guard=lambda s, y: abs(y[0]) < switch)
        if fwd.terminal_event is not TerminalEvent.LEFT_REGION:
            raise NonConvergence("no blow-up found within 100 units of s0")
        s_sw, (w_sw, f_sw) = fwd.t[-1], fwd.y[-1]
    else:
        fwd = None
        s_sw, w_sw, f_sw = s0, z0, f0

    r_sw = 1.0 / abs(w_sw)
    tail = integrate_ode(_blowup_system(n, sigma), r_sw, np.array([s_sw, f_sw]), 0.0, cfg)
    r_det = 1.0 / cfg.blow_up_threshold
    s_det = float(tail(r_det)[0])
    s_lim = float(tail.y[0, 0])
    report = BlowUpReport(float(s0), float(z0), blow_up_bound(z0), s_det, s_lim)

    # tail samples have increasing r, i.e. decreasing s; drop r = 0 and r > r_sw duplicates
    keep = (tail.t > 0) & (tail.t < r_sw)
    r_tail = tail.t[keep][::-1]
    s_parts = [bwd.t]
    w_parts = [bwd.y[:, 0]]
    f_parts = [bwd.y[:, 1]]
    if fwd is not None:
        s_parts.append(fwd.t[1:])
        w_parts.append(fwd.y[1:, 0])
        f_parts.append(fwd.y[1:, 1])
    s_parts.append(tail.y[keep, 0][::-1])
    w_parts.append(sigma / r_tail)
    f_parts.append(tail.y[keep, 1][::-1])
    s = np.concatenate(s_parts)
    w = np.concatenate(w_parts)
    f = np.concatenate(f_parts)
    ok = np.concatenate([[True], np.diff(s) > 0])
    s, w, f = s[ok], w[ok], f[ok]

    def evaluator(ss):
        ss = np.atleast_1d(ss)
        ww = np.empty_like(ss)
        ff = np.empty_like(ss)
        for i, x in enumerate(ss):
            if x < s0:
                ww[i], ff[i] = bwd(x)
            elif fwd is not None and x <= s_sw:
                ww[i], ff[i] = fwd(x)
            elif x < s_lim:
                r = find_root_monotone(lambda rr: tail(rr)[0] - x, 0.0, r_sw)
                ww[i], ff[i] = sigma / r if r > 0 else sigma * math.inf, tail(r)[1]
            else:
                raise DomainError(f"s = {x!r} is past the blow-up at {s_lim!r}")
        return ww, ff

    tag = 1 if bwd.y[0, 0] > 0 else -1
    kind = "TimeLikePlus" if sigma > 0 else "TimeLikeMinus"
    curve = ProfileCurve(s, w, f, kind, Causal.TIMELIKE, n, s0, f0,
                         limit_tag=tag, evaluator=evaluator)
    return curve, report


@dataclass(frozen=True, eq=False)
class SpindleResult:
    """Inverse-ODE solution ``g`` and the two profiles obtained by inverting it.

    ``f_plus`` is the branch with ``t < t0`` (``f' > 1``), ``f_minus`` the
    branch with ``t > t0`` (``f' < -1``).  Both end at ``s_max = g(t0)``.
    """

    g_trajectory: Trajectory
    f_plus: ProfileCurve
    f_minus: ProfileCurve
    s_max: float
    t0: float
    g_ddot_top: float
    n: int = 2
    extra: dict = field(default_factory=dict)

    def f_plus_at(self, s):
        return self.f_plus.evaluate(s)[1]

    def f_minus_at(self, s):
        return self.f_minus.evaluate(s)[1]


def _spindle_system(n):
    m = n - 1

    def rhs(t, y):
        g, gp = y
        return np.array([gp, (gp * gp - 1.0) * (m / math.tanh(g) - gp)])

    return rhs


def spindle(
    n: int,
    s_top: float,
    cfg: ToleranceConfig = ToleranceConfig(),
    t0: float = 0.0,
    s_min: float = 1e-6,
) -> SpindleResult:
    """Spindle with maximal height ``s_top``.

    ``t = f(s)`` is inverted to ``s = g(t)``, which solves
    ``g'' = (g'^2 - 1)((n - 1) coth(g) - g')``.  Starting from
    ``g(t0) = s_top``, ``g'(t0) = 0`` both directions are integrated until
    ``g`` drops to ``s_min``.
    """
    _check_n(n)
    if not s_top > s_min:
        raise DomainError("s_top must be positive and above s_min")
    rhs = _spindle_system(n)
    y0 = np.array([float(s_top), 0.0])
    span = 10.0 * (s_top + 1.0)
    guard = lambda t, y: y[0] > s_min
    right = integrate_ode(rhs, t0, y0, t0 + span, cfg, region_guard=guard)
    left = integrate_ode(rhs, t0, y0, t0 - span, cfg, region_guard=guard)
    for side in (left, right):
        if side.terminal_event is not TerminalEvent.LEFT_REGION:
            raise InversionFailure("g did not reach s_min on one side of the top")

    gp_left, gp_right = left.y[:-1, 1], right.y[1:, 1]
    if not (np.all(gp_left > 0) and np.all(gp_right < 0)):
        raise InversionFailure("g lost strict monotonicity before reaching s_min")
    if np.any(np.abs(left.y[:, 1]) >= 1.0) or np.any(np.abs(right.y[:, 1]) >= 1.0):
        raise InversionFailure("|g'| reached 1, the inverse is no longer time-like")

    t_all = np.concatenate([left.t, right.t[1:]])
    y_all = np.concatenate([left.y, right.y[1:]])
    dy_all = np.concatenate([left.dy, right.dy[1:]])
    g_traj = Trajectory(t_all, y_all, dy_all, TerminalEvent.LEFT_REGION, 1,
                        left.n_rejected + right.n_rejected,
                        np.concatenate([left.poly, right.poly]))

    def branch_curve(side, sign, kind):
        t = side.t[:-1] if sign > 0 else side.t[1:]
        Y = side.y[:-1] if sign > 0 else side.y[1:]
        s, w, f = Y[:, 0], 1.0 / Y[:, 1], t
        if sign < 0:
            s, w, f = s[::-1], w[::-1], f[::-1]
        t_lo, t_hi = (side.t[0], t0) if sign > 0 else (t0, side.t[-1])

        def evaluator(ss):
            ss = np.atleast_1d(ss)
            ww = np.empty_like(ss)
            ff = np.empty_like(ss)
            for i, x in enumerate(ss):
                tt = find_root_monotone(lambda u: side(u)[0] - x, t_lo, t_hi, tol=1e-14)
                ww[i], ff[i] = 1.0 / side(tt)[1], tt
            return ww, ff

        return ProfileCurve(s, w, f, kind, Causal.TIMELIKE, n, float(s_top), float(t0),
                            limit_tag=int(sign), evaluator=evaluator)

    f_plus = branch_curve(left, 1, "SpindlePlus")
    f_minus = branch_curve(right, -1, "SpindleMinus")

    # |f'| must grow without bound toward the top on both branches
    for c, sgn in ((f_plus, 1), (f_minus, -1)):
        tail = c.w[-min(5, len(c)):]
        if not (np.all(np.sign(tail) == sgn) and np.all(np.diff(np.abs(tail)) > 0)):
            raise InversionFailure("slope does not diverge toward the top of the spindle")

    g_ddot = float(rhs(t0, y0)[1])
    return SpindleResult(g_traj, f_plus, f_minus, float(s_top), float(t0), g_ddot, n)


def classify_rotational(profile: ProfileCurve) -> RotationalKind:
    """Type of a rotational profile, decided from its samples.

    Space-like samples are sorted by the backward limit of ``w``; a profile
    that stays in ``0 <= w <= tanh(s)/(n - 1)`` and reaches ``w ~ 0`` near
    ``s = 0`` is the bowl.  Time-like samples are always spindle pieces.
    """
    if not isinstance(profile, ProfileCurve) or len(profile) == 0:
        raise Unclassifiable("expected a non-empty ProfileCurve")
    s, w, n = profile.s, profile.w, profile.n
    finite = np.isfinite(w)
    if not np.any(finite) or np.any(np.isnan(w)):
        raise Unclassifiable("profile has no usable samples")
    aw = np.abs(w[finite])
    if np.all(aw > 1.0):
        return RotationalKind.SPINDLE_PIECE
    if not np.all(aw < 1.0):
        raise Unclassifiable("profile mixes space-like and time-like samples")
    tag = _certified_tag(s, w, n)
    if tag == -1:
        return RotationalKind.SPACELIKE_CONE_MINUS
    if tag == 1:
        return RotationalKind.SPACELIKE_CONE_PLUS
    if s[0] <= 1e-3 and abs(w[0]) <= 1e-2:
        return RotationalKind.BOWL
    if profile.limit_tag == 0 and profile.kind == RotationalKind.BOWL.value:
        return RotationalKind.BOWL
    raise Unclassifiable("samples do not reach close enough to s = 0 to decide")
