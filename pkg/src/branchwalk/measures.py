"""Measure representations, fixed-point measures, and test-function sets.

Three concrete representations expose a common ``expect(fn)`` method:

* :class:`CylinderTable` — masses on subshift cylinders per depth, exact
  when built from exact data;
* :class:`GridDensity` — a density against Lebesgue on the circle,
  integrated by the midpoint rule (exact for trig polynomials below the
  Nyquist frequency of the grid);
* :class:`EmpiricalCloud` — equal-mass sample points in the plane, as
  produced by backward-orbit sampling on a Julia set.

:func:`perron_fixed_measure` builds the Markov measure with the
fixed-point property ``∫ V (f∘r) dμ = ∫ f dμ`` from Perron eigendata, and
:func:`verify_fixed_point_property` checks that identity against any
representation.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Callable, Dict, Optional, Tuple

import numpy as np

from . import exactnum as xn
from .errors import DepthMismatch, EigenvalueMismatch, NormalizationDefect
from .report import CheckReport, make_row
from .rng import CounterRng
from .systems import QuadraticJulia, Subshift
from .weights import TransitionDensity, Weight, _perron_exact, _perron_float

_STREAM_BROLIN = 2

# When set, weighted reductions run through math.fsum instead of BLAS dot
# products: slower, but the result no longer depends on how the backend
# splits the sum across threads.
_DETERMINISTIC_SUMS = False


def set_deterministic_sums(flag: bool) -> None:
    global _DETERMINISTIC_SUMS
    _DETERMINISTIC_SUMS = bool(flag)


def reduce_weighted(weights: np.ndarray, vals: np.ndarray) -> float:
    if _DETERMINISTIC_SUMS:
        return math.fsum(np.asarray(weights, dtype=float) *
                         np.asarray(vals, dtype=float))
    return float(np.dot(weights, vals))


# ---------------------------------------------------------------------------
# representations


class CylinderTable:
    """Masses of subshift cylinders ``[w]`` for every depth up to ``depth``.

    Construct from the finest-depth masses; coarser depths are derived by
    appending over the last symbol, so append-consistency
    ``mass(w) = Σ_b mass(w + (b,))`` holds structurally.
    """

    def __init__(self, masses: Dict[tuple, object], *, exact: bool = False):
        if not masses:
            raise ValueError("empty cylinder table")
        depths = {len(w) for w in masses}
        if len(depths) != 1:
            raise ValueError("finest-level masses must share one depth")
        self.depth = depths.pop()
        self.exact = exact
        self._levels: Dict[int, Dict[tuple, object]] = {self.depth: dict(masses)}
        for d in range(self.depth - 1, 0, -1):
            coarser: Dict[tuple, object] = {}
            for w, m in self._levels[d + 1].items():
                key = w[:d]
                coarser[key] = coarser.get(key, 0) + m
            if exact:
                coarser = {w: xn.canon(m) for w, m in coarser.items()}
            self._levels[d] = coarser
        total = sum(self._levels[1].values())
        defect = total - 1
        if exact:
            if not xn.is_zero(defect):
                raise NormalizationDefect((), xn.to_float(total))
        elif abs(xn.to_float(defect)) > 1e-9:
            raise NormalizationDefect((), xn.to_float(total))

    def level(self, depth: int) -> Dict[tuple, object]:
        if depth < 1 or depth > self.depth:
            raise DepthMismatch(
                f"requested depth {depth}, table holds 1..{self.depth}")
        return self._levels[depth]

    def mass(self, word: tuple):
        return self.level(len(word)).get(tuple(word), 0)

    def expect(self, fn: Callable, depth: Optional[int] = None):
        d = self.depth if depth is None else depth
        acc = 0
        for w, m in sorted(self.level(d).items()):
            acc = acc + m * fn(w)
        return xn.canon(acc) if self.exact and xn.is_exact(acc) else acc

    def describe(self) -> dict:
        return {"kind": "cylinder-table", "depth": self.depth,
                "exact": self.exact}


class GridDensity:
    """Density w.r.t. Lebesgue on the circle, sampled at grid midpoints.

    ``expect`` applies the midpoint rule with nodes ``(j + 1/2)/size``; for
    the constant density this integrates trig polynomials of frequency
    below ``size/2`` exactly (up to rounding).
    """

    def __init__(self, size: int, values: Optional[np.ndarray] = None):
        if size < 2:
            raise ValueError("grid size must be >= 2")
        self.size = size
        self.nodes = (np.arange(size) + 0.5) / size
        if values is None:
            self.values = np.ones(size)
        else:
            self.values = np.asarray(values, dtype=float)
            if self.values.shape != (size,):
                raise ValueError("density values must match the grid size")
        total = float(self.values.mean())
        if abs(total - 1.0) > 1e-9:
            raise NormalizationDefect((), total)
        self.weights = self.values / size

    def expect(self, fn: Callable):
        vals = _eval_on_array(fn, self.nodes)
        return reduce_weighted(self.weights, vals)

    def describe(self) -> dict:
        return {"kind": "lebesgue-grid", "size": self.size}


class EmpiricalCloud:
    """Equal-mass point cloud; integration is the sample mean."""

    def __init__(self, points: np.ndarray, *, seed: int = 0,
                 algorithm: str = "", burn_in: int = 0):
        self.points = np.asarray(points, dtype=complex)
        self.seed = seed
        self.algorithm = algorithm
        self.burn_in = burn_in

    def __len__(self):
        return len(self.points)

    def expect(self, fn: Callable):
        if len(self.points) == 0:
            return 0.0
        vals = _eval_on_array(fn, self.points)
        if _DETERMINISTIC_SUMS:
            return math.fsum(vals) / len(vals)
        return float(np.mean(vals))

    def describe(self) -> dict:
        return {"kind": "empirical-cloud", "count": int(len(self.points)),
                "seed": self.seed, "algorithm": self.algorithm,
                "burn_in": self.burn_in}


def _eval_on_array(fn: Callable, xs: np.ndarray) -> np.ndarray:
    """Vectorized evaluation with a scalar fallback."""
    try:
        vals = np.asarray(fn(xs), dtype=float)
        if vals.shape == xs.shape:
            return vals
        if vals.shape == ():
            return np.full(xs.shape, float(vals))
    except (TypeError, ValueError):
        pass
    return np.array([float(fn(x)) for x in xs])


def integrate(measure, fn: Callable, depth: Optional[int] = None):
    """``∫ fn dμ`` for any representation; ``depth`` applies to cylinder
    tables (defaulting to the finest level stored)."""
    if isinstance(measure, CylinderTable):
        return measure.expect(fn, depth)
    return measure.expect(fn)


# ---------------------------------------------------------------------------
# fixed-point measures


def perron_fixed_measure(sys: Subshift, delta: TransitionDensity,
                         depth: int = 6, tol: float = 1e-9) -> CylinderTable:
    """The Markov measure with the fixed-point property for ``delta``.

    Built from the right Perron vector ``u`` of the plain transition
    matrix and the weighted eigendata carried by ``delta``: symbol masses
    ``p ∝ phi ⊙ u`` and forward kernel ``A[a][b] = T[a][b] u_b/(λ u_a)``.
    Existence requires the weighted and plain Perron eigenvalues to agree;
    otherwise no Markov measure satisfies the identity and
    :class:`EigenvalueMismatch` is raised.
    """
    if not isinstance(sys, Subshift):
        raise TypeError("perron_fixed_measure needs a Subshift")
    if delta.perron is None:
        raise ValueError("density carries no Perron data; "
                         "derive it in subshift-perron mode")
    a = sys.alphabet_size
    t_rows = [[sys.transition[i][j] for j in range(a)] for i in range(a)]
    exact = delta.exact
    if exact:
        lam_t, u, _ = _perron_exact(t_rows)
    else:
        lam_t, u, _ = _perron_float(t_rows)

    lam_k = delta.perron.eigenvalue
    gap = lam_k - lam_t if exact else xn.to_float(lam_k) - xn.to_float(lam_t)
    if exact:
        mismatch = not xn.is_zero(gap)
    else:
        mismatch = abs(gap) > tol * max(1.0, abs(xn.to_float(lam_t)))
    if mismatch:
        raise EigenvalueMismatch(
            "weighted Perron eigenvalue {!r} differs from the plain one {!r};"
            " no Markov measure has the fixed-point property for this weight"
            .format(xn.to_float(lam_k), xn.to_float(lam_t)))

    phi = delta.perron.phi
    pu = [phi[i] * u[i] for i in range(a)]
    z = sum(pu)
    p = [v / z for v in pu]
    kern = [[(t_rows[i][j] * u[j] / (lam_t * u[i])) for j in range(a)]
            for i in range(a)]
    if exact:
        p = [xn.canon(v) for v in p]
        kern = [[xn.canon(v) for v in row] for row in kern]
    else:
        p = [xn.to_float(v) for v in p]
        kern = [[xn.to_float(v) for v in row] for row in kern]

    masses: Dict[tuple, object] = {}
    for w in sys.words(depth):
        m = p[w[0]]
        for t in range(depth - 1):
            m = m * kern[w[t]][w[t + 1]]
        masses[w] = xn.canon(m) if exact else m
    return CylinderTable(masses, exact=exact)


def brolin_sample(c, count: int, seed: int = 0, *,
                  burn_in: int = 64, start: complex = 1.0 + 0.0j
                  ) -> EmpiricalCloud:
    """Backward-orbit sampling of the equal-mass measure of ``z² + c``.

    ``c`` may be the parameter itself or a :class:`QuadraticJulia`.  A
    single chain: starting from ``start``, repeatedly jump to a uniformly
    chosen square-root preimage; the first ``burn_in`` states are dropped.
    Fully reproducible: draw ``k`` is a pure function of ``(seed, k)``.
    """
    sys = c if isinstance(c, QuadraticJulia) else QuadraticJulia(c)
    rng = CounterRng(seed, stream=_STREAM_BROLIN)
    z = complex(start)
    sys.validate(z)
    pts = np.empty(count, dtype=complex)
    for k in range(burn_in + count):
        w = z - sys.c
        s = cmath.sqrt(w)
        if (rng.u64(k) & 1) and w != 0:
            s = -s
        z = s
        if k >= burn_in:
            pts[k - burn_in] = z
    return EmpiricalCloud(pts, seed=seed, algorithm="backward-orbit/v1",
                          burn_in=burn_in)


# ---------------------------------------------------------------------------
# test-function families


@dataclass(frozen=True)
class TestFunctionSet:
    """Named, deterministically ordered test functions for identity checks.

    ``depth`` is the cylinder depth the functions consume on word inputs
    (0 for pointwise families).
    """

    family: str
    functions: Tuple[Tuple[str, Callable], ...]
    depth: int = 0

    def __iter__(self):
        return iter(self.functions)

    def __len__(self):
        return len(self.functions)


def trig_modes(max_frequency: int) -> TestFunctionSet:
    """1, cos 2πkx, sin 2πkx for k = 1..max_frequency (array-safe)."""
    fns = [("const", lambda x: np.ones_like(x) if isinstance(x, np.ndarray)
            else 1.0)]

    def cos_k(k):
        return lambda x: np.cos(2.0 * math.pi * k * x)

    def sin_k(k):
        return lambda x: np.sin(2.0 * math.pi * k * x)

    for k in range(1, max_frequency + 1):
        fns.append((f"cos{k}", cos_k(k)))
        fns.append((f"sin{k}", sin_k(k)))
    return TestFunctionSet("trig-modes", tuple(fns))


def cylinder_indicators(sys: Subshift, max_depth: int) -> TestFunctionSet:
    """Indicators of every allowed cylinder of depth 1..max_depth."""

    def indicator(prefix):
        k = len(prefix)
        return lambda w: 1 if tuple(w[:k]) == prefix else 0

    fns = [("const", lambda w: 1)]
    for d in range(1, max_depth + 1):
        for w in sys.words(d):
            name = "[" + "".join(str(s) for s in w) + "]"
            fns.append((name, indicator(w)))
    return TestFunctionSet("cylinders", tuple(fns), depth=max_depth)


def moment_functions(max_total_degree: int) -> TestFunctionSet:
    """Real/imaginary parts of ``z**a * conj(z)**b`` for a ≥ b, a+b ≤ p.

    The imaginary part is skipped when a = b (identically zero), and the
    a = b = 0 case contributes the constant function.
    """

    def re_ab(a, b):
        return lambda z: (z ** a * np.conjugate(z) ** b).real

    def im_ab(a, b):
        return lambda z: (z ** a * np.conjugate(z) ** b).imag

    fns = []
    for total in range(0, max_total_degree + 1):
        for b in range(0, total // 2 + 1):
            a = total - b
            if a < b:
                continue
            name = f"z^{a}zb^{b}"
            if a == b == 0:
                fns.append(("const", lambda z: np.ones_like(z).real
                            if isinstance(z, np.ndarray) else 1.0))
                continue
            fns.append((f"Re[{name}]", re_ab(a, b)))
            if a != b:
                fns.append((f"Im[{name}]", im_ab(a, b)))
    return TestFunctionSet("moments", tuple(fns))


# ---------------------------------------------------------------------------
# the fixed-point property


def verify_fixed_point_property(sys, weight: Weight, mu0, tests,
                                tol: float, scenario: str = "") -> CheckReport:
    """Checks ``∫ V·(f∘r) dμ₀ = ∫ f dμ₀`` for every test function.

    This is the property singling out the measures that lift to path
    space; the left side composes with the forward map, so cylinder tables
    must be one level deeper than the tests they integrate.
    """
    exact_mode = isinstance(mu0, CylinderTable) and mu0.exact
    rows = []
    for name, f in tests:
        if isinstance(mu0, CylinderTable):
            lhs = mu0.expect(lambda w: weight(w) * f(w[1:]))
        else:
            def integrand(x, _f=f):
                return weight(x) * _f(sys.forward(x))
            lhs = integrate(mu0, integrand)
        rhs = integrate(mu0, f)
        diff = lhs - rhs
        if exact_mode and xn.is_exact(diff):
            exact = xn.is_zero(diff)
            disc = 0.0 if exact else abs(xn.to_float(diff))
        else:
            exact = False
            disc = abs(xn.to_float(diff))
        rows.append(make_row(name, None, xn.to_float(lhs), xn.to_float(rhs),
                             disc, exact))
    return CheckReport(scenario=scenario, check="fixed-point-property",
                       tolerance=tol, rows=rows)
