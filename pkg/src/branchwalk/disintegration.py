"""End-to-end identity checks tying base measures to path-space measures.

The central object is a bundle ``(system, V, delta, mu0, tests)``.  For a
function ``g`` of the depth-``n`` coordinate, two independent evaluations
must agree:

* the *marginal* side: ``∫ V⁽ⁿ⁾ · g dμ₀`` with the forward-orbit product
  ``V⁽ⁿ⁾(x) = V(x) V(r x) ··· V(r^{n-1} x)``;
* the *fiber* side: ``∫ [Σ over depth-n trees of cocycle · g(x_n)] dμ₀``,
  built from backward trees and the branch transition density.

The marginal side never touches inverse branches and the fiber side never
touches forward-orbit products, so agreement genuinely cross-checks the
construction.  Quasi-invariance, duality, and the marginal-at-depth-0
correspondence are the companion identities; a transfer-power evaluation
provides a third, independent oracle for the same chain of equalities.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from . import exactnum as xn
from .errors import DepthMismatch
from .measures import (
    CylinderTable,
    EmpiricalCloud,
    GridDensity,
    TestFunctionSet,
    integrate,
    reduce_weighted,
    verify_fixed_point_property,
)
from .pathspace import CylinderFunctional, path_integral
from .report import CheckReport, make_row
from .systems import BranchSystem, Subshift, branch_labels
from .weights import (
    TransitionDensity,
    Weight,
    _delta_array,
    transfer_apply,
    transfer_power,
)


@dataclass
class ScenarioBundle:
    """Everything one verification run needs, immutable by convention."""

    name: str
    sys: BranchSystem
    weight: Weight
    delta: TransitionDensity
    mu0: object
    tests: TestFunctionSet
    tolerance: float
    depths: tuple = (0, 1, 2, 3)
    seed: int = 0
    budget: int = 1 << 24
    meta: dict = field(default_factory=dict)

    @property
    def exact(self) -> bool:
        return isinstance(self.mu0, CylinderTable) and self.mu0.exact \
            and self.delta.exact

    def config_echo(self) -> dict:
        echo = {
            "scenario": self.name,
            "system": type(self.sys).__name__,
            "measure": self.mu0.describe(),
            "tests": self.tests.family,
            "depths": [int(n) for n in self.depths],
            "seed": int(self.seed),
            "budget": int(self.budget),
            "tolerance": float(self.tolerance),
        }
        echo.update(self.meta)
        return echo


# ---------------------------------------------------------------------------
# the two sides


def lhs_integral(bundle: ScenarioBundle, g: Callable, n: int):
    """Marginal side: ``∫ V⁽ⁿ⁾ g dμ₀`` via forward-orbit products."""
    sys, weight, mu0 = bundle.sys, bundle.weight, bundle.mu0
    if isinstance(mu0, CylinderTable):
        if n > mu0.depth:
            raise DepthMismatch(
                f"need cylinder depth >= {n}, table has {mu0.depth}")

        def integrand(w):
            acc = g(w)
            x = w
            for k in range(n):
                acc = acc * weight(x)
                if k < n - 1:
                    x = sys.forward(x)
            return acc

        return mu0.expect(integrand)

    def integrand(xs):
        prod = np.ones_like(xs, dtype=float) if isinstance(xs, np.ndarray) \
            else 1.0
        x = xs
        for _ in range(n):
            prod = prod * weight(x)
            x = sys.forward(x)
        return prod * g(xs)

    return integrate(mu0, integrand)


def rhs_integral(bundle: ScenarioBundle, g: Callable, n: int):
    """Fiber side: ``∫ path_integral(x0, g∘θ_n, n) dμ₀(x0)``."""
    functional = CylinderFunctional(n, g, kind="last")

    def fiber(x0):
        return path_integral(bundle.sys, bundle.delta, x0, functional, n,
                             bundle.budget)

    return integrate(bundle.mu0, fiber)


# ---------------------------------------------------------------------------
# batched fiber sums (one tree walk for the whole test family)


def _fiber_sums(bundle: ScenarioBundle, fns: Sequence, n: int,
                weight_front: bool = False) -> dict:
    """``name -> ∫ [V(x0) if weight_front] · Σ_tree cocycle · g(x_n) dμ0``.

    Walks the depth-``n`` backward tree once, sharing the cocycle across
    all test functions; the outer integral reuses the measure's own
    quadrature (grid weights / cylinder masses / sample mean).
    """
    sys, delta, mu0 = bundle.sys, bundle.delta, bundle.mu0
    from .weights import _max_branching
    from .errors import BudgetExceeded
    deg = _max_branching(sys)
    if deg ** n > bundle.budget:
        raise BudgetExceeded(bundle.budget, deg ** n)

    if isinstance(mu0, CylinderTable):
        level = mu0.level(mu0.depth)
        out = {name: 0 for name, _ in fns}
        for w, mass in sorted(level.items()):
            front = bundle.weight(w) if weight_front else 1
            leaves = []

            def rec(x, k, cw):
                if k == n:
                    leaves.append((x, cw))
                    return
                for br in sys.preimages(x):
                    rec(br.point, k + 1,
                        cw * delta.at(br.point) * br.multiplicity)

            rec(w, 0, 1)
            for name, g in fns:
                s = 0
                for leaf, cw in leaves:
                    gv = g(leaf)
                    if gv:
                        s = s + cw * gv
                out[name] = out[name] + mass * front * s
        if bundle.exact:
            out = {k: xn.canon(v) for k, v in out.items()}
        return out

    # grid / cloud: vectorized over the quadrature nodes
    if isinstance(mu0, GridDensity):
        xs = mu0.nodes
        reduce = lambda arr: reduce_weighted(mu0.weights, arr)
    elif isinstance(mu0, EmpiricalCloud):
        xs = mu0.points
        reduce = (lambda arr: reduce_weighted(
            np.full(len(arr), 1.0 / len(arr)), arr) if len(arr) else 0.0)
    else:  # pragma: no cover - defensive
        raise TypeError(f"unsupported measure {type(mu0).__name__}")

    sums = {name: None for name, _ in fns}

    def rec(x, k, cw):
        if k == n:
            for name, g in fns:
                term = cw * np.asarray(g(x), dtype=float)
                sums[name] = term if sums[name] is None \
                    else sums[name] + term
            return
        for i in branch_labels(sys):
            y = sys.branch_point(i, x)
            rec(y, k + 1, cw * _delta_array(delta, y))

    rec(xs, 0, np.ones(len(xs)))
    front = np.asarray(bundle.weight(xs), dtype=float) if weight_front \
        else 1.0
    return {name: reduce(front * val) for name, val in sums.items()}


# ---------------------------------------------------------------------------
# verifications


def _finish_row(name: str, n: Optional[int], lhs, rhs, exact_mode: bool):
    diff = lhs - rhs
    if exact_mode and xn.is_exact(diff):
        exact = xn.is_zero(diff)
        disc = 0.0 if exact else abs(xn.to_float(diff))
    else:
        exact = False
        disc = abs(xn.to_float(diff))
    return make_row(name, n, xn.to_float(lhs), xn.to_float(rhs), disc, exact)


def verify_disintegration(bundle: ScenarioBundle,
                          depths: Optional[Sequence[int]] = None,
                          tol: Optional[float] = None) -> CheckReport:
    """Marginal vs fiber evaluation for every test and every depth."""
    t0 = time.perf_counter()
    depths = tuple(bundle.depths if depths is None else depths)
    tol = bundle.tolerance if tol is None else tol
    rows = []
    for n in depths:
        fiber = _fiber_sums(bundle, tuple(bundle.tests), n)
        for name, g in bundle.tests:
            lhs = lhs_integral(bundle, g, n)
            rows.append(_finish_row(name, n, lhs, fiber[name], bundle.exact))
    report = CheckReport(scenario=bundle.name, check="disintegration",
                         tolerance=tol, rows=rows,
                         config=bundle.config_echo())
    report.runtime = time.perf_counter() - t0
    return report


def verify_quasi_invariance(bundle: ScenarioBundle,
                            depths: Optional[Sequence[int]] = None,
                            tol: Optional[float] = None,
                            g: Optional[Callable] = None) -> CheckReport:
    """Composition with the invertible shift extension costs one weight
    layer: ``∫ g∘θ_{n+1} dμ̂ = ∫ (V∘θ₀)·(g∘θ_n) dμ̂``.

    The left side is a marginal at depth ``n+1``; the right side walks
    fibers at depth ``n`` under an extra front factor of ``V``.
    """
    t0 = time.perf_counter()
    depths = tuple(bundle.depths if depths is None else depths)
    depths = tuple(n for n in depths if n >= 1)
    tol = bundle.tolerance if tol is None else tol
    fns = (("g", g),) if g is not None else tuple(bundle.tests)
    rows = []
    for n in depths:
        fiber = _fiber_sums(bundle, fns, n, weight_front=True)
        for name, gg in fns:
            left = lhs_integral(bundle, gg, n + 1)
            rows.append(_finish_row(name, n, left, fiber[name],
                                    bundle.exact))
    report = CheckReport(scenario=bundle.name, check="quasi-invariance",
                         tolerance=tol, rows=rows,
                         config=bundle.config_echo())
    report.runtime = time.perf_counter() - t0
    return report


def verify_duality(bundle: ScenarioBundle,
                   tol: Optional[float] = None) -> CheckReport:
    """``∫ V f dμ₀ = ∫ Σ_{r(y)=x} delta(y) f(y) dμ₀(x)`` per test f."""
    t0 = time.perf_counter()
    tol = bundle.tolerance if tol is None else tol
    sys, delta, weight, mu0 = (bundle.sys, bundle.delta, bundle.weight,
                               bundle.mu0)
    rows = []
    for name, f in bundle.tests:
        lhs = integrate(mu0, lambda x, _f=f: weight(x) * _f(x))
        rhs = integrate(mu0,
                        lambda x, _f=f: transfer_apply(sys, delta, _f, x))
        rows.append(_finish_row(name, None, lhs, rhs, bundle.exact))
    report = CheckReport(scenario=bundle.name, check="duality",
                         tolerance=tol, rows=rows,
                         config=bundle.config_echo())
    report.runtime = time.perf_counter() - t0
    return report


def verify_pushforward(bundle: ScenarioBundle,
                       tol: float = 1e-15) -> CheckReport:
    """At depth 0 both sides must reproduce ``∫ g dμ₀`` itself."""
    t0 = time.perf_counter()
    rows = []
    for name, g in bundle.tests:
        base = integrate(bundle.mu0, g)
        lhs = lhs_integral(bundle, g, 0)
        rhs = rhs_integral(bundle, g, 0)
        rows.append(_finish_row(name + "/marginal", 0, lhs, base,
                                bundle.exact))
        rows.append(_finish_row(name + "/fiber", 0, rhs, base, bundle.exact))
    report = CheckReport(scenario=bundle.name, check="pushforward",
                         tolerance=tol, rows=rows,
                         config=bundle.config_echo())
    report.runtime = time.perf_counter() - t0
    return report


def verify_cross_oracle(bundle: ScenarioBundle,
                        depths: Optional[Sequence[int]] = None,
                        tol: Optional[float] = None) -> CheckReport:
    """Marginal side vs the transfer-power evaluation ``∫ Rⁿ g dμ₀``.

    A third route through the same identity chain: the n-fold transfer
    recursion shares no code with the forward-orbit products.
    """
    t0 = time.perf_counter()
    depths = tuple(bundle.depths if depths is None else depths)
    tol = bundle.tolerance if tol is None else tol
    sys, delta = bundle.sys, bundle.delta
    rows = []
    for n in depths:
        for name, g in bundle.tests:
            lhs = lhs_integral(bundle, g, n)
            rhs = integrate(
                bundle.mu0,
                lambda x, _g=g, _n=n: transfer_power(
                    sys, delta, _g, x, _n, budget=bundle.budget))
            rows.append(_finish_row(name, n, lhs, rhs, bundle.exact))
    report = CheckReport(scenario=bundle.name, check="transfer-oracle",
                         tolerance=tol, rows=rows,
                         config=bundle.config_echo())
    report.runtime = time.perf_counter() - t0
    return report


def verify_bundle(bundle: ScenarioBundle) -> list:
    """All checks a scenario declares, in a fixed order."""
    reports = [
        verify_fixed_point_property(
            bundle.sys, bundle.weight, bundle.mu0, bundle.tests,
            bundle.tolerance, scenario=bundle.name),
        verify_duality(bundle),
        verify_pushforward(bundle),
        verify_disintegration(bundle),
        verify_quasi_invariance(bundle),
        verify_cross_oracle(bundle),
    ]
    reports[0].config = bundle.config_echo()
    return reports
