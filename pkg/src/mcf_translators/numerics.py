"""Shared numerical kernels: adaptive ODE integration, monotone root finding
and quadrature.

The integrator is an embedded Dormand-Prince 5(4) pair with a
proportional-integral step controller.  It carries a cubic Hermite dense
output so that callers can evaluate a trajectory between accepted steps.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy import integrate as _sp_integrate

from .errors import DomainError, NonConvergence, NotBracketed, StepUnderflow

__all__ = [
    "TerminalEvent",
    "ToleranceConfig",
    "Trajectory",
    "integrate_ode",
    "find_root_monotone",
    "quadrature",
]


class TerminalEvent(enum.Enum):
    REACHED_END = "ReachedEnd"
    LEFT_REGION = "LeftRegion"
    BLOW_UP_DETECTED = "BlowUpDetected"
    STEP_UNDERFLOW = "StepUnderflow"


@dataclass(frozen=True)
class ToleranceConfig:
    abs_tol: float = 1e-10
    rel_tol: float = 1e-10
    max_step: float = 1.0
    min_step: float = 1e-14
    blow_up_threshold: float = 1e8

    def __post_init__(self):
        for name in ("abs_tol", "rel_tol", "max_step", "min_step", "blow_up_threshold"):
            if not getattr(self, name) > 0:
                raise DomainError(f"{name} must be strictly positive")
        if not self.min_step < self.max_step:
            raise DomainError("min_step must be smaller than max_step")

    def scaled(self, factor: float) -> "ToleranceConfig":
        """Same configuration with both error tolerances multiplied by ``factor``."""
        return ToleranceConfig(
            abs_tol=self.abs_tol * factor,
            rel_tol=self.rel_tol * factor,
            max_step=self.max_step,
            min_step=self.min_step,
            blow_up_threshold=self.blow_up_threshold,
        )

    def as_dict(self) -> dict:
        return {
            "abs_tol": self.abs_tol,
            "rel_tol": self.rel_tol,
            "max_step": self.max_step,
            "min_step": self.min_step,
            "blow_up_threshold": self.blow_up_threshold,
        }


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Accepted steps of an ODE solve, stored with increasing ``t``.

    ``y`` has shape ``(N, d)`` and ``dy`` holds the right-hand side at each
    sample, which makes the Hermite dense output available through
    ``__call__``.  ``direction`` records whether the solve ran forward (+1)
    or backward (-1) from ``t0``.
    """

    t: np.ndarray
    y: np.ndarray
    dy: np.ndarray
    terminal_event: TerminalEvent
    direction: int = 1
    n_rejected: int = field(default=0)
    poly: Optional[np.ndarray] = field(default=None, repr=False)

    def __post_init__(self):
        if self.t.ndim != 1 or self.y.shape[0] != self.t.shape[0]:
            raise ValueError("inconsistent sample arrays")
        if np.any(np.diff(self.t) <= 0):
            raise ValueError("sample times must be strictly increasing")
        if self.poly is not None and self.poly.shape[:2] != (self.t.shape[0] - 1, self.y.shape[1]):
            raise ValueError("dense-output coefficients do not match the samples")

    def __len__(self):
        return self.t.shape[0]

    @property
    def samples(self):
        return list(zip(self.t.tolist(), self.y))

    @property
    def t_start(self) -> float:
        return float(self.t[0] if self.direction > 0 else self.t[-1])

    @property
    def t_final(self) -> float:
        return float(self.t[-1] if self.direction > 0 else self.t[0])

    @property
    def y_final(self) -> np.ndarray:
        return self.y[-1] if self.direction > 0 else self.y[0]

    def __call__(self, t):
        """Dense output at ``t`` (scalar or array) inside the sampled range."""
        t_arr = np.atleast_1d(np.asarray(t, dtype=float))
        lo, hi = self.t[0], self.t[-1]
        if np.any(t_arr < lo - 1e-12 * max(1.0, abs(lo))) or np.any(
            t_arr > hi + 1e-12 * max(1.0, abs(hi))
        ):
            raise DomainError("dense output requested outside the integrated range")
        if len(self.t) == 1:
            out = np.repeat(self.y[:1], t_arr.size, axis=0)
        else:
            idx = np.clip(np.searchsorted(self.t, t_arr, side="right") - 1, 0, len(self.t) - 2)
            if self.poly is not None:
                phi = (t_arr - self.t[idx]) / (self.t[idx + 1] - self.t[idx])
                c = self.poly[idx]
                out = c[..., 4]
                for j in (3, 2, 1, 0):
                    out = out * phi[:, None] + c[..., j]
            else:
                out = _hermite(
                    self.t[idx], self.t[idx + 1], self.y[idx], self.y[idx + 1],
                    self.dy[idx], self.dy[idx + 1], t_arr,
                )
        return out[0] if np.ndim(t) == 0 else out

    def derivative(self, t):
        """Derivative of the dense output."""
        t_arr = np.atleast_1d(np.asarray(t, dtype=float))
        idx = np.clip(np.searchsorted(self.t, t_arr, side="right") - 1, 0, len(self.t) - 2)
        t0, t1 = self.t[idx], self.t[idx + 1]
        if self.poly is not None:
            phi = ((t_arr - t0) / (t1 - t0))[:, None]
            c = self.poly[idx]
            d = 4 * c[..., 4]
            for j in (3, 2, 1):
                d = d * phi + j * c[..., j]
            d = d / (t1 - t0)[:, None]
            return d[0] if np.ndim(t) == 0 else d
        h = (t1 - t0)[:, None]
        th = ((t_arr - t0) / (t1 - t0))[:, None]
        y0, y1, f0, f1 = self.y[idx], self.y[idx + 1], self.dy[idx], self.dy[idx + 1]
        d = (
            (6 * th**2 - 6 * th) * (y0 - y1) / h
            + (3 * th**2 - 4 * th + 1) * f0
            + (3 * th**2 - 2 * th) * f1
        )
        return d[0] if np.ndim(t) == 0 else d


def _hermite(t0, t1, y0, y1, f0, f1, t):
    h = (t1 - t0)[:, None]
    th = ((t - t0) / (t1 - t0))[:, None]
    h00 = 2 * th**3 - 3 * th**2 + 1
    h10 = th**3 - 2 * th**2 + th
    h01 = -2 * th**3 + 3 * th**2
    h11 = th**3 - th**2
    return h00 * y0 + h10 * h * f0 + h01 * y1 + h11 * h * f1


# Dormand-Prince 5(4) tableau.
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_E = np.array([71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40])

# Continuous extension of order 4 (Shampine): y(t + th h) = y + h K^T P [th, th^2, th^3, th^4].
_P = np.array([
    [1.0, -8048581381 / 2820520608, 8663915743 / 2820520608, -12715105075 / 11282082432],
    [0.0, 0.0, 0.0, 0.0],
    [0.0, 131558114200 / 32700410799, -68118460800 / 10900136933, 87487479700 / 32700410799],
    [0.0, -1754552775 / 470086768, 14199869525 / 1410260304, -10690763975 / 1880347072],
    [0.0, 127303824393 / 49829197408, -318862633887 / 49829197408, 701980252875 / 199316789632],
    [0.0, -282668133 / 205662961, 2019193451 / 616988883, -1453857185 / 822651844],
    [0.0, 40617522 / 29380423, -110615467 / 29380423, 69997945 / 29380423],
])
# (1 - phi)^j expanded in powers of phi, used to flip backward steps.
_FLIP = np.array([[math.comb(j, k) * (-1) ** k for k in range(5)] for j in range(5)], dtype=float)

_SAFETY = 0.9
_PI_ALPHA = 0.7 / 5
_PI_BETA = 0.4 / 5
_FAC_MIN = 0.2
_FAC_MAX = 5.0


def _error_norm(err, y, y_new, cfg):
    scale = cfg.abs_tol + cfg.rel_tol * np.maximum(np.abs(y), np.abs(y_new))
    return float(np.sqrt(np.mean((err / scale) ** 2)))


def _initial_step(rhs, t0, y0, f0, direction, cfg):
    scale = cfg.abs_tol + cfg.rel_tol * np.abs(y0)
    d0 = np.sqrt(np.mean((y0 / scale) ** 2))
    d1 = np.sqrt(np.mean((f0 / scale) ** 2))
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    h0 = min(h0, cfg.max_step)
    y1 = y0 + direction * h0 * f0
    f1 = np.asarray(rhs(t0 + direction * h0, y1), dtype=float)
    d2 = np.sqrt(np.mean(((f1 - f0) / scale) ** 2)) / h0
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** (1 / 5)
    return max(min(100 * h0, h1, cfg.max_step), cfg.min_step)


def integrate_ode(
    rhs: Callable[[float, np.ndarray], np.ndarray],
    t0: float,
    y0,
    t_end: float,
    cfg: ToleranceConfig = ToleranceConfig(),
    region_guard: Optional[Callable[[float, np.ndarray], bool]] = None,
    *,
    strict: bool = True,
    max_steps: int = 200_000,
) -> Trajectory:
    """Integrate ``y' = rhs(t, y)`` from ``t0`` to ``t_end`` (either direction).

    Parameters
    ----------
    rhs : callable
        Right-hand side returning an array shaped like ``y``.
    region_guard : callable, optional
        Predicate ``(t, y) -> bool`` that must stay true.  When a step leaves
        the region the crossing is located on the dense output, the boundary
        point is appended and the solve ends with ``LeftRegion``.
    strict : bool
        Raise :class:`StepUnderflow` instead of returning a trajectory that
        ends with ``TerminalEvent.STEP_UNDERFLOW``.

    Returns
    -------
    Trajectory
        Accepted samples, stored with increasing time.
    """
    if t0 == t_end:
        raise DomainError("t0 and t_end must differ")
    direction = 1 if t_end > t0 else -1
    y = np.atleast_1d(np.asarray(y0, dtype=float)).copy()
    if region_guard is not None and not region_guard(t0, y):
        raise DomainError("initial point violates the region guard")

    f = np.asarray(rhs(t0, y), dtype=float)
    ts, ys, fs = [float(t0)], [y.copy()], [f.copy()]
    t = float(t0)
    h = _initial_step(rhs, t, y, f, direction, cfg)
    err_prev = 1.0
    n_rejected = 0
    event = TerminalEvent.REACHED_END

    polys = []

    def step_poly(y_start, k, dt, frac=1.0):
        """Quartic in the sorted-interval variable ``phi`` for one accepted step.

        ``frac < 1`` restricts the step polynomial to its first part.
        """
        c = np.empty((y_start.size, 5))
        c[:, 0] = y_start
        c[:, 1:] = dt * (np.column_stack(k) @ _P) * frac ** np.arange(1, 5)
        if direction < 0:
            c = c @ _FLIP
        return c

    def finish(ev):
        t_arr = np.array(ts)
        y_arr = np.array(ys)
        f_arr = np.array(fs)
        poly = np.array(polys).reshape(len(polys), y.size, 5) if polys else np.empty((0, y.size, 5))
        if direction < 0:
            t_arr, y_arr, f_arr, poly = t_arr[::-1], y_arr[::-1], f_arr[::-1], poly[::-1]
        return Trajectory(t_arr, y_arr, f_arr, ev, direction, n_rejected, poly)

    for _ in range(max_steps):
        remaining = abs(t_end - t)
        if remaining <= 4 * np.finfo(float).eps * max(1.0, abs(t)):
            break
        h = min(h, cfg.max_step, remaining)
        last = h == remaining

        k = [f]
        for i in range(1, 7):
            yi = y + direction * h * sum(a * kj for a, kj in zip(_A[i], k))
            k.append(np.asarray(rhs(t + direction * _C[i] * h, yi), dtype=float))
        y_new = y + direction * h * sum(a * kj for a, kj in zip(_A[6], k[:6]))
        err_vec = direction * h * sum(e * kj for e, kj in zip(_E, k))
        if not np.all(np.isfinite(y_new)) or not np.all(np.isfinite(k[6])):
            err = np.inf
        else:
            err = _error_norm(err_vec, y, y_new, cfg)

        if err <= 1.0:
            t_new = t_end if last else t + direction * h
            f_new = k[6]
            dt = t_new - t
            if region_guard is not None and not region_guard(t_new, y_new):
                frac, y_b = _locate_crossing(region_guard, t, dt, y, k)
                t_b = t + frac * dt
                if direction * (t_b - t) > 0:
                    polys.append(step_poly(y, k, dt, frac))
                    ts.append(t_b)
                    ys.append(y_b)
                    fs.append(np.asarray(rhs(t_b, y_b), dtype=float))
                return finish(TerminalEvent.LEFT_REGION)
            polys.append(step_poly(y, k, dt))
            t, y, f = t_new, y_new, f_new
            ts.append(t)
            ys.append(y.copy())
            fs.append(f.copy())
            if np.max(np.abs(y)) > cfg.blow_up_threshold:
                return finish(TerminalEvent.BLOW_UP_DETECTED)
            err_c = max(err, 1e-10)
            fac = _SAFETY * err_c ** (-_PI_ALPHA) * err_prev ** _PI_BETA
            h = h * min(_FAC_MAX, max(_FAC_MIN, fac))
            err_prev = err_c
        else:
            n_rejected += 1
            fac = _SAFETY * err ** (-1 / 5) if np.isfinite(err) else _FAC_MIN
            h = h * min(1.0, max(_FAC_MIN, fac))
            if h < cfg.min_step or t + direction * h == t:
                event = TerminalEvent.STEP_UNDERFLOW
                traj = finish(event)
                if strict:
                    raise StepUnderflow(
                        f"step size fell below min_step={cfg.min_step:g} at t={t!r}", traj
                    )
                return traj
    else:
        raise NonConvergence(f"integrate_ode exceeded max_steps={max_steps}")
    return finish(event)


def _locate_crossing(guard, t0, dt, y0, k, iters=80):
    """Last point inside the region on the continuous extension of one step.

    Returns ``(frac, y)`` with the crossing at ``t0 + frac * dt``.
    """
    Q = np.column_stack(k) @ _P

    def interp(th):
        return y0 + dt * (Q @ (th ** np.arange(1, 5)))

    lo, hi = 0.0, 1.0
    y_lo = y0
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        y_mid = interp(mid)
        if guard(t0 + mid * dt, y_mid):
            lo, y_lo = mid, y_mid
        else:
            hi = mid
    return lo, y_lo


def find_root_monotone(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    tol: float = 1e-12,
    xtol: Optional[float] = None,
    *,
    full_output: bool = False,
):
    """Root of a continuous strictly monotone function on ``(lo, hi)``.

    Infinite endpoints are handled by geometric bracket expansion.  The
    iteration is a secant (false position) step that falls back to bisection
    whenever the bracket failed to halve on the previous step, so the number
    of iterations stays below ``2 log2((hi - lo) / xtol) + 50``.

    Stops when ``|f(x)| <= tol`` or the bracket is narrower than ``xtol``
    (default: a few ulps of the root).  Raises :class:`NotBracketed` when 0
    is not in the image.
    """
    if not lo < hi:
        raise DomainError("need lo < hi")
    a, b, fa, fb = _bracket(f, lo, hi)
    if fa == 0.0:
        return (a, 0) if full_output else a
    if fb == 0.0:
        return (b, 0) if full_output else b

    width0 = b - a
    x = a
    fx = fa
    iterations = 0
    last_width = width0
    force_bisect = False
    while True:
        width = b - a
        if xtol is not None and width <= xtol:
            break
        if xtol is None and width <= 4 * np.finfo(float).eps * max(abs(a), abs(b), 1e-300):
            break
        if force_bisect or not (np.isfinite(fa) and np.isfinite(fb)):
            x = a + 0.5 * width
        else:
            x = b - fb * (b - a) / (fb - fa)
            if not (a < x < b):
                x = a + 0.5 * width
        if x <= a or x >= b:
            break
        fx = f(x)
        iterations += 1
        if fx == 0.0 or abs(fx) <= tol:
            break
        if np.sign(fx) == np.sign(fa):
            a, fa = x, fx
        else:
            b, fb = x, fx
        new_width = b - a
        force_bisect = new_width > 0.5 * last_width
        last_width = new_width
        if iterations > 10_000:
            raise NonConvergence("root finder did not terminate")
    if abs(fa) < abs(fx) and abs(fa) < abs(fb):
        x, fx = a, fa
    elif abs(fb) < abs(fx):
        x, fx = b, fb
    x = min(max(x, lo), hi)
    return (x, iterations) if full_output else x


def _finite_value(f, x, other):
    """``f(x)``, or ``f`` at the first point moved toward ``other`` where it is finite.

    Open intervals whose endpoints are singular are entered with a relative
    offset of 1e-12 of the width, grown tenfold until ``f`` is finite.
    """
    width = abs(other - x)
    direction = 1.0 if other > x else -1.0
    offset = 0.0
    while True:
        try:
            val = float(f(x + direction * offset))
        except (ArithmeticError, ValueError):
            val = math.nan
        if np.isfinite(val):
            return val, x + direction * offset
        offset = 1e-12 * width if offset == 0.0 else 10.0 * offset
        if offset >= 0.5 * width:
            raise NotBracketed("function is not finite near the bracket endpoint")


def _bracket(f, lo, hi):
    """Finite sign-change bracket inside (lo, hi)."""
    if math.isinf(lo) and math.isinf(hi):
        a, b = -1.0, 1.0
    elif math.isinf(lo):
        b = hi
        a = hi - max(1.0, abs(hi))
    elif math.isinf(hi):
        a = lo
        b = lo + max(1.0, abs(lo))
    else:
        a, b = lo, hi
    fa, a = _finite_value(f, a, b)
    fb, b = _finite_value(f, b, a)
    step_lo = b - a
    step_hi = b - a
    for _ in range(2100):
        if np.sign(fa) != np.sign(fb) or fa == 0.0 or fb == 0.0:
            return a, b, fa, fb
        moved = False
        # Expand towards an infinite endpoint on the side where the sign
        # change must be.
        if math.isinf(lo) and (not math.isinf(hi) or abs(fa) <= abs(fb)):
            step_lo *= 2.0
            b, fb = a, fa
            a = a - step_lo
            fa = f(a)
            moved = True
        elif math.isinf(hi):
            step_hi *= 2.0
            a, fa = b, fb
            b = b + step_hi
            fb = f(b)
            moved = True
        if not moved or not (np.isfinite(a) and np.isfinite(b)) or abs(a) > 1e300 or abs(b) > 1e300:
            break
        if not (np.isfinite(fa) and np.isfinite(fb)):
            break
    raise NotBracketed("target value is outside the image on the given interval")


def quadrature(f: Callable[[float], float], a: float, b: float, tol: float = 1e-10) -> float:
    """Adaptive Gauss-Kronrod estimate of the integral of ``f`` over ``[a, b]``.

    Infinite limits are accepted.  Raises :class:`NonConvergence` when the
    subdivision limit is hit or the error estimate exceeds ``tol``.
    """
    if a == b:
        return 0.0
    with warnings.catch_warnings():
        warnings.simplefilter("error", _sp_integrate.IntegrationWarning)
        try:
            value, err = _sp_integrate.quad(f, a, b, epsabs=tol, epsrel=0.0, limit=500)
        except _sp_integrate.IntegrationWarning as exc:
            raise NonConvergence(f"quadrature did not converge: {exc}") from exc
    if not np.isfinite(value) or err > max(tol, 1e3 * np.finfo(float).eps * abs(value)):
        raise NonConvergence(f"quadrature error estimate {err:g} exceeds tol {tol:g}")
    return float(value)
