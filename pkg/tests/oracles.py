"""Independent reference computations used by the tests.

None of these call into ``mcf_translators``: ODEs go through scipy's DOP853,
Christoffel symbols come from finite differences of the metric, and the
elliptic identities are derived with sympy.
"""

import math

import numpy as np
import sympy as sp
from scipy.integrate import quad, solve_ivp


def scipy_ode(rhs, t0, y0, t_eval, rtol=1e-12, atol=1e-13, **kw):
    """Dense DOP853 solution of ``y' = rhs(t, y)`` sampled at ``t_eval``."""
    t_eval = np.asarray(t_eval, dtype=float)
    t_end = t_eval[-1] if abs(t_eval[-1] - t0) >= abs(t_eval[0] - t0) else t_eval[0]
    sol = solve_ivp(rhs, (t0, t_end), np.atleast_1d(y0), method="DOP853",
                    rtol=rtol, atol=atol, dense_output=True, **kw)
    assert sol.success, sol.message
    return sol.sol(t_eval).T


def horo_rhs(m):
    return lambda s, y: [(1 - y[0] ** 2) * (1 - m * y[0])]


def rot_rhs(n):
    return lambda s, y: [(1 - y[0] ** 2) * (1 - (n - 1) * y[0] / math.tanh(s)), y[0]]


def integral_of_reciprocal(a, b, m):
    """Numerical integral of ``1/((1 - x^2)(1 - m x))`` over ``[a, b]``."""
    val, _ = quad(lambda x: 1.0 / ((1 - x * x) * (1 - m * x)), a, b, epsabs=1e-13, epsrel=1e-13)
    return val


def koszul_christoffel(x, i, j, k, h=1e-5):
    """Christoffel symbol of ``delta_ij / x1^2`` from centred differences of the metric.

    Indices are 1-based, matching the package.
    """
    x = np.asarray(x, dtype=float)
    n = x.size

    def g(y):
        return np.eye(n) / y[0] ** 2

    def dg(l):
        e = np.zeros(n)
        e[l] = h
        return (g(x + e) - g(x - e)) / (2 * h)

    ginv = np.linalg.inv(g(x))
    i, j, k = i - 1, j - 1, k - 1
    total = 0.0
    for l in range(n):
        total += 0.5 * ginv[k, l] * (dg(i)[j, l] + dg(j)[i, l] - dg(l)[i, j])
    return total


def blowup_time_comparison(s0, z0):
    """Blow-up time of the comparison ODE ``z' = (z^2 - 1) z`` from ``z(s0) = z0``.

    Found by integrating in ``r = 1/z^2`` where the equation is linear:
    ``r' = -2 (1 - r)``, so ``r`` reaches 0 at ``s0 - 1/2 ln(1 - 1/z0^2)``.
    The integration is numerical so that the closed form is not assumed.
    """
    r0 = 1.0 / (z0 * z0)
    sol = solve_ivp(lambda s, r: [-2.0 * (1.0 - r[0])], (s0, s0 + 50.0), [r0],
                    method="DOP853", rtol=1e-13, atol=1e-15,
                    events=lambda s, r: r[0])
    return float(sol.t_events[0][0])


def symbolic_operator_identity(n):
    """``(N - W^3 R, b)`` derived symbolically for a generic function of ``n`` variables.

    ``R`` is the divergence form ``x1^n sum_i d_i(x1^(2-n) u_i / W) - 1/W`` and
    ``N`` the non-divergence form with ``a^ij = x1^2 W^2 delta + x1^4 u_i u_j``.
    ``b`` is solved for as ``W^3 R - sum a^ij u_ij``, then simplified.
    """
    xs = sp.symbols(f"x1:{n + 1}", positive=True)
    u = sp.Function("u")(*xs)
    x1 = xs[0]
    grad = [sp.diff(u, v) for v in xs]
    P = sum(g * g for g in grad)
    W = sp.sqrt(1 - x1**2 * P)
    R = x1**n * sum(sp.diff(x1 ** (2 - n) * grad[i] / W, xs[i]) for i in range(n)) - 1 / W
    second = sum(
        (x1**2 * W**2 * (1 if i == j else 0) + x1**4 * grad[i] * grad[j]) * sp.diff(u, xs[i], xs[j])
        for i in range(n)
        for j in range(n)
    )
    b = sp.simplify(sp.expand(W**3 * R - second))
    return xs, grad, b
