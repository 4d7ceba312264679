"""Self-checks run by ``mcf-translators verify``.

Each suite returns a list of :class:`Case` records.  They mirror the unit
tests at reduced sizes so that an installed copy can be checked without the
test tree.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Callable

import numpy as np

from .errors import OutsideImage
from .graphical import (
    BoxDomain,
    GridSolution,
    assemble_nondivergence,
    coefficients,
    horosphere_graph,
    residual_divergence_form,
    solve_dirichlet,
)
from .horosphere import (
    build_profile,
    classify_horosphere_families,
    eval_antiderivative,
    horo_branch,
    invert_branch,
    rhs_horo,
    branch_for_family,
)
from .numerics import ToleranceConfig, find_root_monotone, integrate_ode, quadrature
from .profile import Causal
from .rotational import bowl, nullcline, spacelike_profile, spindle, timelike_profile


@dataclass
class Case:
    name: str
    passed: bool
    value: float
    tolerance: float

    def as_dict(self):
        d = asdict(self)
        d["passed"] = bool(self.passed)
        d["value"] = float(self.value)
        d["tolerance"] = float(self.tolerance)
        return d


def _case(name, value, tol, passed=None):
    value = float(value)
    return Case(name, bool(value <= tol) if passed is None else bool(passed), value, tol)


def suite_numerics():
    cfg = ToleranceConfig()
    tr = integrate_ode(lambda t, y: y, 0.0, np.array([1.0]), 1.0, cfg)
    root = find_root_monotone(lambda x: x**3 - 2.0, 0.0, 2.0)
    q = quadrature(math.exp, 0.0, 1.0, 1e-12)
    return [
        _case("exp ODE at t=1", abs(tr.y_final[0] - math.e), 1e-8),
        _case("cube root of 2", abs(root - 2 ** (1 / 3)), 1e-12),
        _case("quadrature of exp on [0,1]", abs(q - (math.e - 1.0)), 2e-12),
    ]


def suite_horosphere():
    cases = []
    rng = np.random.default_rng(7)
    for n in (2, 3):
        for causal in Causal:
            for b in classify_horosphere_families(n, causal):
                if b.tag.value == "Linear":
                    continue
                lo, hi = b.w_interval
                xs = rng.uniform(max(lo, -50.0), min(hi, 50.0), 50)
                xs = xs[np.minimum(np.abs(xs - lo), np.abs(hi - xs)) > 1e-6]
                err = max(abs(invert_branch(b, eval_antiderivative(b, x)) - x) / max(1.0, abs(x)) for x in xs)
                cases.append(_case(f"round trip {b.tag.value} n={n}", err, 1e-9))
                lo, hi = b.image
                s = np.linspace(max(lo, -3.0) + 0.05, min(hi, 3.0) - 0.05, 41)
                curve = build_profile(b, s)
                rhs = lambda t, y, m=b.m: np.array([rhs_horo(y[0], m)])
                tr = integrate_ode(rhs, s[20], np.array([curve.w[20]]), s[-1])
                dw = np.max(np.abs(tr(s[20:])[:, 0] - curve.w[20:]))
                cases.append(_case(f"closed form vs ODE {b.tag.value} n={n}", dw, 1e-6))
    q1 = horo_branch("Q1", 2.0)
    cases.append(_case("Q1 limit at -1e6 (m=2)",
                       abs(eval_antiderivative(q1, -1e6) + 2.0 / 3.0 * math.log(2.0)), 1e-5))
    try:
        invert_branch(horo_branch("P1", 1.0), 0.5)
        raised = False
    except OutsideImage:
        raised = True
    cases.append(Case("P1 query above 0 raises", raised, 0.0, 0.0))
    f1 = build_profile(branch_for_family("f1", 3), np.linspace(0, 1, 11))
    cases.append(_case("f1 equals s/2", np.max(np.abs(f1.f - f1.s / 2)), 1e-15))
    return cases


def suite_rotational():
    cases = []
    rng = np.random.default_rng(11)
    for n in (2, 3, 4):
        b = bowl(n, s_max=20.0)
        below = bool(np.all(b.w[1:] < nullcline(b.s[1:], n)))
        cases.append(Case(f"bowl below nullcline n={n}", below, 0.0, 0.0))
    for n in (2, 3):
        bw = bowl(n, s_max=8.0)
        for _ in range(4):
            s0 = rng.uniform(0.3, 3.0)
            z_b = float(bw.evaluate(s0)[0][0])
            for side in (-1, 1):
                z0 = z_b + side * rng.uniform(0.05, 0.3) * ((1 - z_b) if side > 0 else (1 + z_b))
                _, tag = spacelike_profile(n, s0, z0)
                cases.append(Case(f"trichotomy n={n} s0={s0:.3f} side={side:+d}", tag == side, tag, side))
    for n in (3, 4):
        for _ in range(4):
            s0, z0 = rng.uniform(0.2, 3.0), rng.uniform(1.1, 10.0)
            _, rep = timelike_profile(n, s0, z0)
            cases.append(Case(f"A-bound n={n} s0={s0:.3f} z0={z0:.3f}", rep.within_bound,
                              rep.detected_blow_up_s - s0, rep.A_bound))
    for n in (2, 3):
        sp = spindle(n, 1.0)
        cases.append(_case(f"spindle g''(t0) n={n}", abs(sp.g_ddot_top + (n - 1) / math.tanh(1.0)), 1e-8))
        t = np.linspace(sp.g_trajectory.t[0] + 0.05, sp.t0 - 0.05, 9)
        g = sp.g_trajectory(t)[:, 0]
        cases.append(_case(f"spindle inverse consistency n={n}",
                           np.max(np.abs(sp.f_plus_at(g) - t)), 1e-6))
    return cases


def suite_elliptic():
    cases = []
    rng = np.random.default_rng(5)
    worst = 0.0
    for _ in range(200):
        n = int(rng.integers(2, 5))
        x1 = rng.uniform(0.2, 3.0)
        p = rng.normal(size=n)
        p *= rng.uniform(0.0, 0.99) / (x1 * np.linalg.norm(p))
        ev = np.linalg.eigvalsh(coefficients(x1, p, n).A)
        target = np.sort([x1**2 * (1 - x1**2 * p @ p), x1**2])
        worst = max(worst, abs(ev[0] - target[0]), abs(ev[-1] - target[1]))
    cases.append(_case("eigenvalues of A", worst, 1e-12))

    smooth = lambda P: 0.2 * np.sin(P[..., 0] + 2 * P[..., 1]) + 0.1 * P[..., 1] ** 2
    errs = []
    for N in (17, 33, 65):
        d = BoxDomain([(0.5, 1.5), (0.0, 1.0)], (N, N), n=3)
        g = GridSolution.from_function(d, smooth)
        U = g.values
        x1 = d.x1[d.interior]
        grads = np.gradient(U, *d.axes)
        W = np.sqrt(1 - x1**2 * sum(gr[d.interior] ** 2 for gr in grads))
        errs.append(np.max(np.abs(assemble_nondivergence(g) - W**3 * residual_divergence_form(g))))
    order = math.log2(errs[1] / errs[2])
    cases.append(Case("divergence/non-divergence order", order >= 1.9, order, 1.9))

    u1 = horosphere_graph(branch_for_family("f1", 3))
    errs = []
    for N in (17, 33, 65):
        d = BoxDomain([(1.0, 2.0), (0.0, 1.0)], (N, N), n=3)
        sol, _ = solve_dirichlet(d, u1)
        errs.append(np.max(np.abs(sol.values - GridSolution.from_function(d, u1).values)))
    order = math.log2(errs[1] / errs[2])
    cases.append(Case("f1 exact-solution order", order >= 1.9, order, 1.9))
    cases.append(_case("f1 error at 65^2", errs[-1], 1e-5))
    return cases


SUITES: dict[str, Callable] = {
    "numerics": suite_numerics,
    "horosphere": suite_horosphere,
    "rotational": suite_rotational,
    "elliptic": suite_elliptic,
}


def run_suite(name: str) -> dict:
    cases = SUITES[name]()
    return {
        "suite": name,
        "cases": [c.as_dict() for c in cases],
        "passes": sum(c.passed for c in cases),
        "failures": sum(not c.passed for c in cases),
        "tolerances": {c.name: c.tolerance for c in cases},
    }
