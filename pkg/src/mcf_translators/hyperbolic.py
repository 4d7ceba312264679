"""Upper half-space and hyperboloid models of H^n.

The half-space model is ``{x in R^n : x_1 > 0}`` with metric
``delta_ij / x_1^2``; coordinate index 1 of the text is index 0 here.  The
hyperboloid model is the upper sheet of ``<p, p>_L = -1`` in Lorentz space
with signature ``(+, ..., +, -)``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import DomainError

__all__ = [
    "HalfSpacePoint",
    "HyperboloidPoint",
    "LevelSetKind",
    "IsometryKind",
    "HalfSpaceIsometry",
    "rho_half",
    "tau_hyperboloid",
    "christoffel_half",
    "contracted_christoffel_half",
    "level_set_mean_curvature",
    "apply_isometry",
    "distance_half",
    "distance_hyperboloid",
    "lorentz_product",
    "hyperboloid_to_half_space",
    "half_space_to_hyperboloid",
]


@dataclass(frozen=True)
class HalfSpacePoint:
    coords: tuple

    def __init__(self, coords: Sequence[float]):
        c = tuple(float(v) for v in coords)
        if len(c) < 1:
            raise DomainError("a half-space point needs at least one coordinate")
        if not c[0] > 0:
            raise DomainError(f"x1 must be strictly positive, got {c[0]!r}")
        object.__setattr__(self, "coords", c)

    @property
    def n(self) -> int:
        return len(self.coords)

    @property
    def x1(self) -> float:
        return self.coords[0]

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.coords, dtype=dtype)


def lorentz_product(p, q) -> float:
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    return float(np.dot(p[:-1], q[:-1]) - p[-1] * q[-1])


@dataclass(frozen=True)
class HyperboloidPoint:
    coords: tuple

    def __init__(self, coords: Sequence[float], atol: float = 1e-12):
        c = tuple(float(v) for v in coords)
        if len(c) < 2:
            raise DomainError("a hyperboloid point needs n + 1 >= 2 coordinates")
        if not c[-1] > 0:
            raise DomainError("the last coordinate must be positive")
        norm = lorentz_product(c, c)
        if abs(norm + 1.0) > atol * max(1.0, c[-1] ** 2):
            raise DomainError(f"<p, p>_L = {norm!r}, expected -1")
        object.__setattr__(self, "coords", c)

    @classmethod
    def from_spatial(cls, spatial: Sequence[float]) -> "HyperboloidPoint":
        """Lift ``(p_1, ..., p_n)`` to the sheet by solving for ``p_{n+1}``."""
        sp = np.asarray(spatial, dtype=float)
        return cls(tuple(sp) + (math.sqrt(1.0 + float(sp @ sp)),))

    @property
    def n(self) -> int:
        return len(self.coords) - 1

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.coords, dtype=dtype)


def rho_half(p: HalfSpacePoint) -> float:
    """Horosphere projection ``ln(x_1)``."""
    return math.log(p.x1)


def tau_hyperboloid(p) -> float:
    """Distance from the vertex ``(0, ..., 0, 1)``: ``ln(sqrt(r^2 - 1) + r)`` with ``r = p_{n+1}``."""
    r = float(p.coords[-1]) if isinstance(p, HyperboloidPoint) else float(np.asarray(p)[-1])
    if r < 1.0:
        raise DomainError(f"p_(n+1) = {r!r} < 1")
    return math.log(math.sqrt(r * r - 1.0) + r)


def christoffel_half(p, i: int, j: int, k: int) -> float:
    """Christoffel symbol ``Gamma^k_ij`` of the half-space metric (0-based indices).

    ``Gamma^k_ij = (-d_i0 d_jk - d_j0 d_ik + d_ij d_k0) / x_1``.
    """
    x1 = p.x1 if isinstance(p, HalfSpacePoint) else float(p)
    d = lambda a, b: 1.0 if a == b else 0.0
    return (-d(i, 0) * d(j, k) - d(j, 0) * d(i, k) + d(i, j) * d(k, 0)) / x1


def contracted_christoffel_half(x1: float, n: int) -> np.ndarray:
    """``sum_j Gamma^j_ij`` for each ``i``, assembled from :func:`christoffel_half`."""
    return np.array(
        [sum(christoffel_half(x1, i, j, j) for j in range(n)) for i in range(n)]
    )


class LevelSetKind(enum.Enum):
    HOROSPHERE = "Horosphere"
    GEODESIC_SPHERE = "GeodesicSphere"


def level_set_mean_curvature(kind: LevelSetKind, n: int, tau: Optional[float] = None) -> float:
    """Mean curvature of horospheres (``n - 1``) or of distance spheres (``(n - 1) coth(tau)``)."""
    if n < 2:
        raise DomainError("n must be at least 2")
    kind = LevelSetKind(kind)
    if kind is LevelSetKind.HOROSPHERE:
        return float(n - 1)
    if tau is None or not tau > 0:
        raise DomainError("geodesic spheres need tau > 0")
    if math.isinf(tau):
        return float(n - 1)
    return (n - 1) / math.tanh(tau)


class IsometryKind(enum.Enum):
    HORIZONTAL_TRANSLATION = "HorizontalTranslation"
    DILATION = "Dilation"
    REFLECTION = "Reflection"
    INVERSION = "Inversion"


@dataclass(frozen=True)
class HalfSpaceIsometry:
    """Composition of elementary half-space isometries, applied left to right.

    * ``HorizontalTranslation``: ``params = v`` (length n - 1), shifts x_2..x_n.
    * ``Dilation``: ``params = (lam,)``, scales every coordinate.
    * ``Reflection``: ``params = (axis, center)``, mirrors x_axis about
      ``center`` (axis >= 1, a vertical hyperplane).
    * ``Inversion``: ``params = (radius, c_2, ..., c_n)``, reflection in the
      totally geodesic hemisphere centred on the ideal boundary.
    """

    steps: tuple = field(default_factory=tuple)

    @classmethod
    def identity(cls) -> "HalfSpaceIsometry":
        return cls(())

    @classmethod
    def translation(cls, v: Sequence[float]) -> "HalfSpaceIsometry":
        return cls(((IsometryKind.HORIZONTAL_TRANSLATION, tuple(float(x) for x in v)),))

    @classmethod
    def dilation(cls, lam: float) -> "HalfSpaceIsometry":
        if not lam > 0:
            raise DomainError("dilation factor must be positive")
        return cls(((IsometryKind.DILATION, (float(lam),)),))

    @classmethod
    def reflection(cls, axis: int, center: float = 0.0) -> "HalfSpaceIsometry":
        if axis < 1:
            raise DomainError("a vertical mirror needs axis >= 1 (x_1 is preserved)")
        return cls(((IsometryKind.REFLECTION, (int(axis), float(center))),))

    @classmethod
    def inversion(cls, radius: float, center: Sequence[float]) -> "HalfSpaceIsometry":
        if not radius > 0:
            raise DomainError("inversion radius must be positive")
        return cls(((IsometryKind.INVERSION, (float(radius),) + tuple(float(c) for c in center)),))

    def then(self, other: "HalfSpaceIsometry") -> "HalfSpaceIsometry":
        """Apply ``self`` first, then ``other``."""
        return HalfSpaceIsometry(self.steps + other.steps)

    @property
    def is_identity(self) -> bool:
        return len(self.steps) == 0

    def __call__(self, x):
        return apply_isometry(self, x)


def apply_isometry(sigma: HalfSpaceIsometry, p):
    """Image of a point (or an ``(..., n)`` array of points) under ``sigma``."""
    as_point = isinstance(p, HalfSpacePoint)
    x = np.array(p.coords if as_point else p, dtype=float)
    if np.any(x[..., 0] <= 0):
        raise DomainError("points must satisfy x1 > 0")
    for kind, params in sigma.steps:
        if kind is IsometryKind.HORIZONTAL_TRANSLATION:
            v = np.asarray(params)
            if v.size != x.shape[-1] - 1:
                raise DomainError("translation vector must have length n - 1")
            x = x.copy()
            x[..., 1:] += v
        elif kind is IsometryKind.DILATION:
            x = x * params[0]
        elif kind is IsometryKind.REFLECTION:
            axis, center = params
            x = x.copy()
            x[..., axis] = 2.0 * center - x[..., axis]
        elif kind is IsometryKind.INVERSION:
            r = params[0]
            c = np.zeros(x.shape[-1])
            c[1:] = params[1:] if len(params) > 1 else 0.0
            d = x - c
            x = c + r * r * d / np.sum(d * d, axis=-1, keepdims=True)
        else:  # pragma: no cover
            raise DomainError(f"unknown isometry kind {kind}")
    return HalfSpacePoint(x) if as_point else x


def distance_half(p, q) -> float:
    """``arccosh(1 + |p - q|^2 / (2 p_1 q_1))``."""
    a = np.asarray(p.coords if isinstance(p, HalfSpacePoint) else p, dtype=float)
    b = np.asarray(q.coords if isinstance(q, HalfSpacePoint) else q, dtype=float)
    d2 = float(np.sum((a - b) ** 2))
    # 2 asinh(|p - q| / (2 sqrt(p1 q1))) is the cancellation-free form.
    return 2.0 * math.asinh(math.sqrt(d2) / (2.0 * math.sqrt(a[0] * b[0])))


def distance_hyperboloid(p, q) -> float:
    a = np.asarray(p.coords if isinstance(p, HyperboloidPoint) else p, dtype=float)
    b = np.asarray(q.coords if isinstance(q, HyperboloidPoint) else q, dtype=float)
    # <p - q, p - q>_L = 4 sinh^2(d / 2) avoids acosh cancellation for close points.
    chord2 = max(0.0, lorentz_product(a - b, a - b))
    return 2.0 * math.asinh(0.5 * math.sqrt(chord2))


def hyperboloid_to_half_space(p):
    """Standard isometry from the hyperboloid to the half-space model.

    With ``D = p_{n+1} - p_n``: ``x_1 = 1 / D`` and ``x_{i+1} = p_i / D`` for
    ``i < n``.  The vertex maps to ``(1, 0, ..., 0)``.  Used for mesh export.
    """
    c = np.asarray(p.coords if isinstance(p, HyperboloidPoint) else p, dtype=float)
    D = c[..., -1] - c[..., -2]
    x = np.empty(c.shape[:-1] + (c.shape[-1] - 1,))
    x[..., 0] = 1.0 / D
    x[..., 1:] = c[..., :-2] / D[..., None]
    return x


def half_space_to_hyperboloid(x):
    """Inverse of :func:`hyperboloid_to_half_space`."""
    c = np.asarray(x.coords if isinstance(x, HalfSpacePoint) else x, dtype=float)
    x1 = c[..., 0]
    y = c[..., 1:]
    y2 = np.sum(y * y, axis=-1)
    p = np.empty(c.shape[:-1] + (c.shape[-1] + 1,))
    p[..., :-2] = y / x1[..., None]
    # p_{n+1} - p_n = 1/x1 and p_{n+1} + p_n = x1 + |y|^2 / x1
    s = x1 + y2 / x1
    p[..., -1] = 0.5 * (s + 1.0 / x1)
    p[..., -2] = 0.5 * (s - 1.0 / x1)
    return p
