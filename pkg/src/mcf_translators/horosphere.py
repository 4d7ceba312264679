"""Translator profiles foliated by horospheres.

A profile ``f`` with slope ``w = f'`` solves ``w' = (1 - w^2)(1 - m w)`` with
``m = n - 1``.  Away from the constant solutions the ODE separates into
``A(w) = s - s0`` where ``A`` is an antiderivative of
``1 / ((1 - x^2)(1 - m x))``.  ``A`` is written ``P`` for ``m = 1`` and ``Q``
for ``m > 1``; restricted to the intervals between its poles it gives the
eight branch families below.

Profiles are parameterised by the horosphere height ``s``.  Under the graph
equation used in :mod:`graphical` the height that makes this ODE correct is
``s = -ln(x_1)`` (see :func:`mcf_translators.graphical.horosphere_graph`).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DegenerateProfile, DomainError, NotBracketed, OutsideImage
from .numerics import find_root_monotone, quadrature
from .profile import Causal, ProfileCurve

__all__ = [
    "BranchTag",
    "Monotonicity",
    "HoroBranch",
    "FAMILY_TAGS",
    "horo_branch",
    "branch_for_family",
    "rhs_horo",
    "antiderivative_integrand",
    "slope_primitive",
    "eval_antiderivative",
    "invert_branch",
    "build_profile",
    "classify_horosphere_families",
]

INF = math.inf


class BranchTag(enum.Enum):
    LINEAR = "Linear"
    P1 = "P1"
    P2 = "P2"
    P3 = "P3"
    Q1 = "Q1"
    Q2 = "Q2"
    Q3 = "Q3"
    Q4 = "Q4"


class Monotonicity(enum.Enum):
    INCREASING = "Increasing"
    DECREASING = "Decreasing"


FAMILY_TAGS = {
    "f1": BranchTag.LINEAR,
    "f2": BranchTag.P1,
    "f3": BranchTag.P2,
    "f4": BranchTag.P3,
    "f5": BranchTag.Q1,
    "f6": BranchTag.Q2,
    "f7": BranchTag.Q3,
    "f8": BranchTag.Q4,
}
_TAG_FAMILY = {tag: name for name, tag in FAMILY_TAGS.items()}

_P_TAGS = (BranchTag.P1, BranchTag.P2, BranchTag.P3)
_Q_TAGS = (BranchTag.Q1, BranchTag.Q2, BranchTag.Q3, BranchTag.Q4)


@dataclass(frozen=True)
class HoroBranch:
    tag: BranchTag
    m: float
    w_interval: tuple
    image: tuple
    monotonicity: Monotonicity
    causal: Causal

    @property
    def family(self) -> str:
        return _TAG_FAMILY[self.tag]

    @property
    def n(self) -> float:
        return self.m + 1

    def contains_w(self, x: float) -> bool:
        lo, hi = self.w_interval
        return lo < x < hi

    def contains_image(self, y: float) -> bool:
        lo, hi = self.image
        return lo < y < hi


def _q_limit(m: float) -> float:
    """Common limit of Q at +-infinity, ``-m ln(m) / (m^2 - 1)``."""
    return _q_limit_stable(m)


def horo_branch(tag, m: float) -> HoroBranch:
    """Branch metadata for ``tag`` at ``m = n - 1``.

    P branches need ``m == 1`` and Q branches ``m > 1``.  The linear family
    ``w = 1/m`` is light-like at ``m = 1`` and rejected there.
    """
    tag = BranchTag(tag)
    m = float(m)
    if not m >= 1.0:
        raise DomainError(f"m must be >= 1, got {m!r}")
    inc, dec = Monotonicity.INCREASING, Monotonicity.DECREASING
    space, time = Causal.SPACELIKE, Causal.TIMELIKE
    if tag is BranchTag.LINEAR:
        if m == 1.0:
            raise DegenerateProfile("w = 1/m = 1 is light-like for n = 2")
        return HoroBranch(tag, m, (1.0 / m, 1.0 / m), (-INF, INF), inc, space)
    if tag in _P_TAGS:
        if m != 1.0:
            raise DomainError("P branches exist only for m = 1 (n = 2)")
        table = {
            BranchTag.P1: ((-INF, -1.0), (-INF, 0.0), dec, time),
            BranchTag.P2: ((-1.0, 1.0), (-INF, INF), inc, space),
            BranchTag.P3: ((1.0, INF), (-INF, 0.0), inc, time),
        }
    else:
        if not m > 1.0:
            raise DomainError("Q branches exist only for m > 1 (n > 2)")
        L = _q_limit(m)
        table = {
            BranchTag.Q1: ((-INF, -1.0), (-INF, L), dec, time),
            BranchTag.Q2: ((-1.0, 1.0 / m), (-INF, INF), inc, space),
            BranchTag.Q3: ((1.0 / m, 1.0), (-INF, INF), dec, space),
            BranchTag.Q4: ((1.0, INF), (-INF, L), inc, time),
        }
    w_int, image, mono, causal = table[tag]
    return HoroBranch(tag, m, w_int, image, mono, causal)


def branch_for_family(family: str, n: int) -> HoroBranch:
    """Branch behind one of the named families ``f1`` .. ``f8`` in dimension ``n``."""
    try:
        tag = FAMILY_TAGS[family]
    except KeyError:
        raise DomainError(f"unknown horosphere family {family!r}") from None
    if n < 2:
        raise DomainError("n must be at least 2")
    if tag in _P_TAGS and n != 2:
        raise DomainError(f"family {family} exists only for n = 2")
    if tag in _Q_TAGS and n == 2:
        raise DomainError(f"family {family} exists only for n > 2")
    return horo_branch(tag, n - 1)


def rhs_horo(w: float, m: float) -> float:
    return (1.0 - w * w) * (1.0 - m * w)


def antiderivative_integrand(x, m: float):
    return 1.0 / ((1.0 - x * x) * (1.0 - m * x))


def _P(x: float) -> float:
    if abs(x) > 2.0:
        return 0.25 * (math.log1p(1.0 / x) - math.log1p(-1.0 / x)) + 0.5 / (1.0 - x)
    return -0.25 * math.log(abs(1.0 - x)) + 0.5 / (1.0 - x) + 0.25 * math.log(abs(1.0 + x))


def _log1p_ratio(d: float) -> float:
    """``log1p(d) / d``, equal to 1 at ``d = 0``."""
    return 1.0 if d == 0.0 else math.log1p(d) / d


def _pole_split(x: float, m: float) -> float:
    """``ln|(1 - m x) / (1 - x)| / (m - 1)`` without cancellation as ``m -> 1``."""
    d = -(m - 1.0) * x / (1.0 - x)
    if abs(d) < 0.5:
        return -x / (1.0 - x) * _log1p_ratio(d)
    return math.log(abs(1.0 + d)) / (m - 1.0)


def _far_split(x: float, m: float) -> float:
    """``ln((m x - 1) / (m (x - 1))) / (m - 1)`` for ``|x| > 2``."""
    d = (m - 1.0) / (m * (x - 1.0))
    return _log1p_ratio(d) / (m * (x - 1.0))


def _q_limit_stable(m: float) -> float:
    return -m / (m + 1.0) * _log1p_ratio(m - 1.0)


def _Q(x: float, m: float) -> float:
    # The 1/(m - 1) log terms are regrouped so that m close to 1 stays accurate.
    b = 1.0 / (2.0 * m + 2.0)
    c = m / (m + 1.0)
    if abs(x) > 2.0:
        # log|x| terms cancel; expand around infinity to keep digits near the limit.
        return (
            _q_limit_stable(m)
            - b * math.log1p(-1.0 / x)
            + b * math.log1p(1.0 / x)
            - c * _far_split(x, m)
        )
    return -b * math.log(abs(1.0 - x)) + b * math.log(abs(1.0 + x)) - c * _pole_split(x, m)


def eval_antiderivative(branch: HoroBranch, x: float) -> float:
    """``P`` or ``Q`` evaluated on the branch interval."""
    if branch.tag is BranchTag.LINEAR:
        raise DomainError("the linear family has no antiderivative branch")
    x = float(x)
    if not branch.contains_w(x):
        raise DomainError(f"x = {x!r} outside {branch.tag.value} interval {branch.w_interval}")
    if branch.tag in _P_TAGS:
        return _P(x)
    return _Q(x, branch.m)


def _inner_endpoints(branch: HoroBranch):
    lo, hi = branch.w_interval

    def step_in(x, toward):
        # m * x may still round onto the pole 1/m; step until A is finite.
        x = math.nextafter(x, toward)
        for _ in range(64):
            try:
                if math.isfinite(eval_antiderivative(branch, x)):
                    return x
            except ValueError:
                pass
            x = math.nextafter(x, toward)
        raise DomainError("could not find a representable interior point")

    a = lo if math.isinf(lo) else step_in(lo, INF)
    b = hi if math.isinf(hi) else step_in(hi, -INF)
    return a, b


def invert_branch(branch: HoroBranch, y: float, tol: float = 1e-14) -> float:
    """The unique ``x`` in the branch interval with ``A(x) = y``.

    When ``y`` lies in the image but beyond what a double can resolve next to
    a finite pole, the nearest representable interior point is returned.
    """
    if branch.tag is BranchTag.LINEAR:
        raise DomainError("the linear family has no antiderivative branch")
    y = float(y)
    if not branch.contains_image(y):
        raise OutsideImage(
            f"y = {y!r} outside Im({branch.tag.value}) = {branch.image}"
        )
    a, b = _inner_endpoints(branch)
    increasing = branch.monotonicity is Monotonicity.INCREASING
    # Clamp at finite poles where the root is closer than one ulp.
    if not math.isinf(a):
        ya = eval_antiderivative(branch, a)
        if (increasing and y <= ya) or (not increasing and y >= ya):
            return a
    if not math.isinf(b):
        yb = eval_antiderivative(branch, b)
        if (increasing and y >= yb) or (not increasing and y <= yb):
            return b
    g = lambda x: eval_antiderivative(branch, x) - y
    try:
        return find_root_monotone(g, a, b, tol=tol * max(1.0, abs(y)))
    except NotBracketed as exc:
        raise OutsideImage(f"y = {y!r} could not be bracketed on {branch.tag.value}") from exc


def _R_P(x: float) -> float:
    if abs(x) > 2.0:
        return 0.25 * (math.log1p(-1.0 / x) - math.log1p(1.0 / x)) + 0.5 / (1.0 - x)
    return 0.25 * math.log(abs(1.0 - x)) + 0.5 / (1.0 - x) - 0.25 * math.log(abs(1.0 + x))


def _R_Q(x: float, m: float) -> float:
    b = 1.0 / (2.0 * m + 2.0)
    c = 1.0 / (m + 1.0)
    if abs(x) > 2.0:
        return (
            -c * _log1p_ratio(m - 1.0)
            + b * math.log1p(-1.0 / x)
            - b * math.log1p(1.0 / x)
            - c * _far_split(x, m)
        )
    return b * math.log(abs(1.0 - x)) - b * math.log(abs(1.0 + x)) - c * _pole_split(x, m)


def slope_primitive(branch: HoroBranch, x: float) -> float:
    """Primitive of ``x / ((1 - x^2)(1 - m x))``, i.e. of ``w ds`` written in ``x = w``.

    Finite at +-infinity (``0`` for ``m = 1``, ``-ln(m) / (m^2 - 1)`` otherwise).
    """
    if math.isinf(x):
        return 0.0 if branch.tag in _P_TAGS else -_log1p_ratio(branch.m - 1.0) / (branch.m + 1.0)
    if branch.tag in _P_TAGS:
        return _R_P(x)
    return _R_Q(x, branch.m)


def _primitive_along(branch, w, y):
    """``slope_primitive(w)`` computed so that it stays exact next to a simple pole.

    ``R - e A`` is regular at a simple pole ``e`` of the integrand, so
    ``R(w) = e y + (R - e A)(w)`` uses the log singularity only through the
    exact value ``y = A(w)``.  This matters once ``w`` sits within a few ulps
    of the pole and the inversion can no longer resolve it.
    """
    lo, hi = branch.w_interval
    poles = [e for e in (lo, hi) if math.isfinite(e)]
    out = np.empty_like(w)
    for i, (x, yi) in enumerate(zip(w, y)):
        e = min(poles, key=lambda p: abs(x - p))
        out[i] = e * yi + (slope_primitive(branch, x) - e * eval_antiderivative(branch, x))
    return out


def build_profile(
    branch: HoroBranch,
    s_grid: Sequence[float],
    s0: float = 0.0,
    f0: float = 0.0,
    method: str = "primitive",
    quad_tol: float = 1e-11,
) -> ProfileCurve:
    """Profile ``f`` with slope ``w(s) = A^{-1}(s - s0)`` on ``s_grid``.

    ``f`` is anchored by ``f(s0) = f0`` when ``s0`` belongs to the closure of
    the domain.  For the time-like families other than ``P2`` the domain
    ends at ``s0 + sup Im`` (where ``|w|`` blows up) and ``f`` takes the
    value ``f0`` at that endpoint instead.

    ``method="primitive"`` integrates ``w ds`` exactly after the substitution
    ``x = w(s)``; ``method="quad"`` runs adaptive quadrature of ``w(s)`` in
    ``s`` between consecutive samples (slower, and less accurate next to a
    pole, but independent of the primitive).
    """
    if method not in ("primitive", "quad"):
        raise DomainError(f"unknown method {method!r}")
    s = np.asarray(s_grid, dtype=float)
    if s.ndim != 1 or s.size == 0:
        raise DomainError("s_grid must be a non-empty 1-D sequence")
    if np.any(np.diff(s) <= 0):
        raise DomainError("s_grid must be strictly increasing")
    m = branch.m
    n = int(round(branch.n)) if float(branch.n).is_integer() else branch.n
    evaluator = lambda ss: _evaluate(branch, np.atleast_1d(ss), s0, f0)

    if branch.tag is BranchTag.LINEAR:
        w = np.full_like(s, 1.0 / m)
        f = f0 + (s - s0) / m
        return ProfileCurve(s, w, f, branch.family, branch.causal, n, s0, f0, branch,
                            evaluator=evaluator)

    y = s - s0
    bad = [float(si) for si, yi in zip(s, y) if not branch.contains_image(yi)]
    if bad:
        raise OutsideImage(
            f"s = {bad[0]!r} is outside the maximal domain of {branch.family} "
            f"(need s - s0 in {branch.image})"
        )
    w = np.array([invert_branch(branch, yi) for yi in y])

    if branch.contains_image(0.0):
        s_anchor = s0
        x_anchor = invert_branch(branch, 0.0)
    else:
        s_anchor = s0 + branch.image[1]
        lo, hi = branch.w_interval
        x_anchor = hi if branch.monotonicity is Monotonicity.INCREASING else lo

    if method == "primitive":
        f = f0 + _primitive_along(branch, w, y) - slope_primitive(branch, x_anchor)
    else:
        w_of_s = lambda t: invert_branch(branch, t - s0)
        f = np.empty_like(s)
        right = np.nonzero(s >= s_anchor)[0]
        left = np.nonzero(s < s_anchor)[0][::-1]
        singular_anchor = math.isinf(x_anchor)
        for idx_list in (right, left):
            acc = 0.0
            prev = s_anchor
            for i in idx_list:
                if singular_anchor and prev == s_anchor:
                    acc -= _blowup_segment(branch, s_anchor, s0, s[i], quad_tol)
                else:
                    acc += quadrature(w_of_s, prev, s[i], quad_tol)
                prev = s[i]
                f[i] = f0 + acc
    return ProfileCurve(s, w, f, branch.family, branch.causal, n, s0, f0, branch,
                        evaluator=evaluator)


def _blowup_segment(branch, s_star, s0, s_i, tol):
    """``int_{s_i}^{s_star} w ds`` where ``|w|`` blows up like ``1/sqrt(2m(s_star - s))``.

    With ``s = s_star - tau^2`` the integrand ``2 tau w`` stays bounded.
    """
    sign = 1.0 if branch.monotonicity is Monotonicity.INCREASING else -1.0
    limit = sign * math.sqrt(2.0 / branch.m)

    def g(tau):
        t = s_star - tau * tau
        if not branch.contains_image(t - s0):
            return limit
        return 2.0 * tau * invert_branch(branch, t - s0)

    return quadrature(g, 0.0, math.sqrt(s_star - s_i), tol)


def _evaluate(branch, s, s0, f0):
    order = np.argsort(s)
    curve = build_profile(branch, s[order], s0, f0)
    w = np.empty_like(s)
    f = np.empty_like(s)
    w[order] = curve.w
    f[order] = curve.f
    return w, f


def classify_horosphere_families(n: int, causal) -> list:
    """Families of horosphere-foliated graphical translators in dimension ``n``.

    Space-like: ``Linear`` (n > 2 only; it is light-like at n = 2), ``P2``
    (n = 2), ``Q2`` and ``Q3`` (n > 2).  Time-like: ``P1``, ``P3`` (n = 2),
    ``Q1``, ``Q4`` (n > 2).
    """
    if n < 2:
        raise DomainError("n must be at least 2")
    causal = Causal(causal)
    m = n - 1
    if causal is Causal.SPACELIKE:
        tags = [BranchTag.P2] if n == 2 else [BranchTag.LINEAR, BranchTag.Q2, BranchTag.Q3]
    else:
        tags = [BranchTag.P1, BranchTag.P3] if n == 2 else [BranchTag.Q1, BranchTag.Q4]
    return [horo_branch(t, m) for t in tags]
