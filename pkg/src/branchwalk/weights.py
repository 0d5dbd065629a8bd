"""Branch weights, derived transition densities, and the transfer operator.

A weight ``V >= 0`` on the domain induces a transition density ``delta``
over inverse branches: ``delta(y)`` is the weight the branch carrying
``forward(y) -> y`` receives, normalized so the weights over the branches
of any point sum to one.  The associated transfer operator is

    (R f)(x) = sum over preimages y of x of  delta(y) * f(y),

which fixes constants exactly when the normalization holds.

Three derivations are supported:

* ``strongly-invariant`` — ``delta = V / branch_count``; valid only when
  the branch sums of ``V`` are constant (checked on samples).
* ``subshift-perron`` — symbol-dependent ``V`` on a subshift; the density
  comes from the Perron eigendata of ``K[i][j] = V[j] * T[j][i]``, and the
  Perron eigenvalue must be 1 (declare ``rescale=True`` to divide it out).
* ``explicit`` — caller-supplied density, validated on samples.

Subshift weights given symbolically keep every downstream quantity exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
import scipy.sparse as sparse

from . import exactnum as xn
from .errors import (
    BudgetExceeded,
    EigenvalueNotOne,
    GridIncompatible,
    NoConvergence,
    NormalizationDefect,
    NotNonnegative,
    NotPositive,
    QmfViolation,
    WordTooShort,
)
from .rng import CounterRng
from .systems import (
    BranchSystem,
    CircleMap,
    QuadraticJulia,
    Subshift,
    branch_labels,
)

TWO_PI = 2.0 * math.pi

# rng stream ids, so different consumers never share a draw sequence
_STREAM_SAMPLES = 1


# ---------------------------------------------------------------------------
# weights


class Weight:
    """Base class; concrete weights are callables on domain points."""

    def __call__(self, x):
        raise NotImplementedError

    def sup_bound(self) -> float:
        raise NotImplementedError

    def check_nonnegative(self, sys: Optional[BranchSystem] = None,
                          samples: int = 1000, seed: int = 0) -> None:
        """Raise :class:`NotNonnegative` with a witness if ``V < 0`` anywhere
        we can see (structurally, or on a deterministic sample set)."""
        if sys is None:
            return
        pts = default_sample_points(sys, samples, seed)
        for p in pts:
            v = self(p)
            if xn.to_float(v) < -1e-12:
                raise NotNonnegative(p, xn.to_float(v))


@dataclass(frozen=True)
class ConstantWeight(Weight):
    value: float = 1.0

    def __call__(self, x):
        if isinstance(x, np.ndarray):
            return np.full(x.shape, float(self.value))
        return self.value

    def sup_bound(self) -> float:
        return float(self.value)

    def check_nonnegative(self, sys=None, samples=1000, seed=0) -> None:
        if xn.to_float(self.value) < 0:
            raise NotNonnegative(None, xn.to_float(self.value))


@dataclass(frozen=True)
class TrigPolynomial(Weight):
    """``V(x) = cos_coeffs[0] + sum_k cos_coeffs[k] cos(2 pi k x)
    + sin_coeffs[k-1] sin(2 pi k x)`` on the circle."""

    cos_coeffs: tuple
    sin_coeffs: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "cos_coeffs",
                           tuple(float(c) for c in self.cos_coeffs))
        object.__setattr__(self, "sin_coeffs",
                           tuple(float(c) for c in self.sin_coeffs))

    def __call__(self, x):
        arr = isinstance(x, np.ndarray)
        t = x if arr else float(x)
        out = self.cos_coeffs[0] * (np.ones_like(t) if arr else 1.0)
        for k, a in enumerate(self.cos_coeffs[1:], start=1):
            if a:
                out = out + a * np.cos(TWO_PI * k * t)
        for k, b in enumerate(self.sin_coeffs, start=1):
            if b:
                out = out + b * np.sin(TWO_PI * k * t)
        return out if arr else float(out)

    def degree(self) -> int:
        return max(len(self.cos_coeffs) - 1, len(self.sin_coeffs))

    def sup_bound(self) -> float:
        return abs(self.cos_coeffs[0]) + sum(
            abs(c) for c in self.cos_coeffs[1:]) + sum(
            abs(c) for c in self.sin_coeffs)

    def check_nonnegative(self, sys=None, samples=1000, seed=0) -> None:
        # a trig polynomial of degree K is resolved by a dense grid far
        # beyond 2K+1 points; add rng samples for good measure
        grid = np.arange(4096) / 4096.0
        vals = self(grid)
        j = int(np.argmin(vals))
        if vals[j] < -1e-12:
            raise NotNonnegative(float(grid[j]), float(vals[j]))
        super().check_nonnegative(sys, samples, seed)


@dataclass(frozen=True)
class FilterSquared(Weight):
    """``V = |m0|**2`` for a trigonometric filter ``m0(x) = sum m[k] z**k``
    with ``z = exp(2 pi i x)``; nonnegative by construction.

    Evaluation goes through the autocorrelation of the taps, so ``V`` is
    handled as the real trig polynomial it is.
    """

    taps: tuple

    def __post_init__(self):
        object.__setattr__(self, "taps", tuple(complex(t) for t in self.taps))
        k = len(self.taps)
        gamma = [sum(self.taps[i] * self.taps[i - j].conjugate()
                     for i in range(j, k)) for j in range(k)]
        object.__setattr__(self, "_gamma", tuple(gamma))

    def __call__(self, x):
        arr = isinstance(x, np.ndarray)
        t = x if arr else float(x)
        out = self._gamma[0].real * (np.ones_like(t) if arr else 1.0)
        for j, g in enumerate(self._gamma[1:], start=1):
            if g != 0:
                ang = TWO_PI * j * t
                out = out + 2.0 * (g.real * np.cos(ang) - g.imag * np.sin(ang))
        return out if arr else float(out)

    def m0(self, x):
        z = np.exp(2j * math.pi * (x if isinstance(x, np.ndarray) else float(x)))
        acc = 0.0 + 0.0j
        for t in reversed(self.taps):
            acc = acc * z + t
        return acc

    def sup_bound(self) -> float:
        return sum(abs(t) for t in self.taps) ** 2

    def check_nonnegative(self, sys=None, samples=1000, seed=0) -> None:
        return  # squared modulus


@dataclass(frozen=True)
class SymbolTable(Weight):
    """Per-symbol weight on a subshift: ``V(word) = values[word[0]]``.

    Values may be ints, Fractions, floats, or strings of exact arithmetic
    (``"3/2"``, ``"2/(1 + sqrt(5))"``); non-floats are kept exact.
    """

    values: tuple

    def __post_init__(self):
        object.__setattr__(self, "values",
                           tuple(xn.as_exact(v) for v in self.values))

    def __call__(self, x):
        sym = x[0] if isinstance(x, tuple) else x
        return self.values[sym]

    def sup_bound(self) -> float:
        return max(xn.to_float(v) for v in self.values)

    def is_exact(self) -> bool:
        return all(xn.is_exact(v) for v in self.values)

    def check_nonnegative(self, sys=None, samples=1000, seed=0) -> None:
        for a, v in enumerate(self.values):
            if xn.to_float(v) < 0:
                raise NotNonnegative((a,), xn.to_float(v))


@dataclass(frozen=True)
class CallbackWeight(Weight):
    """Arbitrary callable weight with a declared sup bound."""

    fn: Callable
    bound: float = float("inf")

    def __call__(self, x):
        return self.fn(x)

    def sup_bound(self) -> float:
        return self.bound


# ---------------------------------------------------------------------------
# deterministic sample points per family


def default_sample_points(sys: BranchSystem, count: int, seed: int = 0):
    """Reproducible spread of domain points used by sampled identities."""
    rng = CounterRng(seed, stream=_STREAM_SAMPLES)
    if isinstance(sys, CircleMap):
        pts = list(rng.uniform_array(0, count))
        # structured points catch edge cases random draws may miss
        pts[:8] = [0.0, 0.25, 0.5, 0.75, 1.0 / 3.0, 2.0 / 3.0, 0.125, 0.875][: len(pts)]
        return [float(p) for p in pts]
    if isinstance(sys, Subshift):
        length = 8
        words = []
        for k in range(count):
            a = int(rng.u64(2 * k) % sys.alphabet_size)
            word = [a]
            for t in range(length - 1):
                nxt = [b for b in range(sys.alphabet_size)
                       if sys.transition[word[-1]][b]]
                word.append(nxt[int(rng.u64(2 * k + 1) >> (t * 4)) % len(nxt)])
            words.append(tuple(word))
        return words
    if isinstance(sys, QuadraticJulia):
        z = 1.0 + 0.0j
        out = []
        for k in range(count + 8):
            br = sys.preimages(z)
            z = br[int(rng.u64(k)) % len(br)].point
            if k >= 8:
                out.append(z)
        return out
    raise TypeError(f"unsupported system {type(sys).__name__}")


# ---------------------------------------------------------------------------
# Perron eigendata for subshift densities


@dataclass(frozen=True)
class PerronData:
    """Perron triple of ``K[i][j] = V[j] T[j][i]`` plus derived vectors.

    ``eigenvalue`` is the raw spectral radius; ``eigenvalue_scaled`` is
    what remains after the declared rescale (1 exactly when rescaled).
    ``phi``/``psi`` are the right/left eigenvectors normalized to sum 1,
    and ``pi ~ psi * phi`` is the stationary law of the backward symbol
    chain driven by the density.
    """

    eigenvalue: object
    eigenvalue_scaled: object
    phi: tuple
    psi: tuple
    pi: tuple
    rescaled: bool
    exact: bool


def _perron_exact(k_rows):
    import sympy as sp

    m = sp.Matrix([[xn.canon(v) for v in row] for row in k_rows])
    n = m.rows

    def positive_pair(mat):
        best = None
        for val, _mult, vecs in mat.eigenvects():
            fv = complex(sp.N(val))
            if abs(fv.imag) > 1e-12:
                continue
            if best is None or fv.real > best[0]:
                best = (fv.real, val, vecs[0])
        if best is None:
            raise NotPositive("no real eigenvalue found")
        _, val, vec = best
        entries = [xn.canon(v) for v in vec]
        if all(xn.to_float(e) < 0 for e in entries):
            entries = [xn.canon(-e) for e in entries]
        if any(xn.to_float(e) <= 0 for e in entries):
            raise NotPositive(
                "Perron eigenvector has nonpositive entries; "
                "transition matrix is not irreducible")
        total = xn.canon(sum(entries))
        return xn.canon(val), tuple(xn.canon(e / total) for e in entries)

    lam, phi = positive_pair(m)
    lam2, psi = positive_pair(m.T)
    if not xn.is_zero(lam - lam2):  # pragma: no cover - sanity
        raise NotPositive("left/right Perron eigenvalues disagree")
    return lam, phi, psi


def _perron_float(k_rows, tol=1e-14, max_iterations=100000):
    k = np.array([[xn.to_float(v) for v in row] for row in k_rows])
    n = k.shape[0]
    # power iteration on K + I: keeps convergence for periodic transition
    # structure while sharing eigenvectors with K
    b = k + np.eye(n)

    def iterate(mat):
        v = np.ones(n) / n
        for it in range(max_iterations):
            w = mat @ v
            s = w.sum()
            if s <= 0:
                raise NotPositive("power iteration collapsed to zero")
            w /= s
            if np.max(np.abs(w - v)) <= tol:
                return w, it + 1
            v = w
        raise NoConvergence(max_iterations, float(np.max(np.abs(w - v))))

    phi, _ = iterate(b)
    psi, _ = iterate(b.T)
    if phi.min() < 1e-10 * phi.max() or psi.min() < 1e-10 * psi.max():
        raise NotPositive(
            "Perron eigenvector has (near-)zero entries; "
            "transition matrix is not irreducible")
    lam = float((k @ phi).sum() / phi.sum())
    return lam, tuple(float(v) for v in phi), tuple(float(v) for v in psi)


# ---------------------------------------------------------------------------
# transition densities


@dataclass(frozen=True)
class TransitionDensity:
    """Normalized branch weights; ``at(y)`` is the density at preimage ``y``.

    For subshift modes the density depends on the two leading symbols of
    ``y`` and is stored as a table; for the pointwise modes it is computed
    on the fly (vectorized over numpy arrays).
    """

    sys: BranchSystem
    mode: str
    weight: Optional[Weight] = None
    table: Optional[tuple] = None
    fn: Optional[Callable] = None
    perron: Optional[PerronData] = None
    exact: bool = False

    def at(self, y):
        if self.table is not None:
            if not isinstance(y, tuple) or len(y) < 2:
                raise WordTooShort(
                    f"density needs two leading symbols, got {y!r}")
            return self.table[y[0]][y[1]]
        if self.fn is not None:
            return self.fn(y)
        count = _constant_branch_count(self.sys)
        if count is None:
            count = self.sys.branch_count(self.sys.forward(y))
        return self.weight(y) / count

    def row(self, x):
        """``[(branch, value)]`` over the preimages of ``x``."""
        return [(br, self.at(br.point)) for br in self.sys.preimages(x)]


def _constant_branch_count(sys: BranchSystem) -> Optional[int]:
    """Branch count when it is point-independent (circle/Julia)."""
    if isinstance(sys, CircleMap):
        return sys.degree
    if isinstance(sys, QuadraticJulia):
        return 2
    return None


def _delta_array(delta: TransitionDensity, y: np.ndarray) -> np.ndarray:
    """Evaluate a pointwise density on an array, with a scalar fallback."""
    try:
        out = delta.at(y)
        out = np.asarray(out, dtype=float)
        if out.shape == y.shape:
            return out
    except (TypeError, ValueError):
        pass
    return np.array([delta.at(v) for v in np.ravel(y)]).reshape(y.shape)


def derive_delta(sys: BranchSystem, weight, mode: str = "strongly-invariant",
                 *, rescale: bool = False, samples: int = 1000, seed: int = 0,
                 tol: float = 1e-9) -> TransitionDensity:
    """Build and validate a transition density from a weight.

    ``mode`` is one of ``"strongly-invariant"``, ``"subshift-perron"``, or
    ``"explicit"`` (where ``weight`` is the density itself, as a callable).
    """
    if mode == "explicit":
        fn = weight if callable(weight) else None
        if fn is None:
            raise TypeError("explicit mode expects a callable density")
        delta = TransitionDensity(sys=sys, mode=mode, fn=fn)
        _check_row_sums(sys, delta, samples, seed, tol)
        return delta

    if not isinstance(weight, Weight):
        raise TypeError(f"expected a Weight, got {type(weight).__name__}")
    weight.check_nonnegative(sys, samples, seed)

    if mode == "strongly-invariant":
        if isinstance(sys, Subshift):
            table, exact = _strongly_invariant_table(sys, weight, tol)
            return TransitionDensity(sys=sys, mode=mode, weight=weight,
                                     table=table, exact=exact)
        delta = TransitionDensity(sys=sys, mode=mode, weight=weight)
        _check_branch_sums(sys, weight, samples, seed, tol)
        return delta

    if mode == "subshift-perron":
        if not isinstance(sys, Subshift):
            raise TypeError("subshift-perron mode requires a Subshift")
        if isinstance(weight, ConstantWeight):
            weight = SymbolTable((weight.value,) * sys.alphabet_size)
        if not isinstance(weight, SymbolTable):
            raise TypeError("subshift-perron mode requires per-symbol weights")
        return _subshift_perron(sys, weight, rescale, tol)

    raise ValueError(f"unknown density mode {mode!r}")


def _check_branch_sums(sys, weight, samples, seed, tol):
    for x in default_sample_points(sys, samples, seed):
        total = sum(br.multiplicity * xn.to_float(weight(br.point))
                    for br in sys.preimages(x))
        dev = total / sys.branch_count(x) - 1.0
        if abs(dev) > tol:
            raise QmfViolation(x, dev)


def _check_row_sums(sys, delta, samples, seed, tol):
    for x in default_sample_points(sys, samples, seed):
        total = sum(br.multiplicity * xn.to_float(delta.at(br.point))
                    for br in sys.preimages(x))
        if abs(total - 1.0) > tol:
            raise NormalizationDefect(x, total)


def _strongly_invariant_table(sys: Subshift, weight, tol):
    if not isinstance(weight, SymbolTable):
        if isinstance(weight, ConstantWeight):
            weight = SymbolTable((weight.value,) * sys.alphabet_size)
        else:
            raise TypeError("subshift densities need per-symbol weights")
    a = sys.alphabet_size
    t = sys.transition
    exact = weight.is_exact()
    cols = [sum(t[i][b] for i in range(a)) for b in range(a)]
    for b in range(a):
        total = sum(weight.values[i] for i in range(a) if t[i][b])
        dev = total / cols[b] - 1
        if exact:
            if not xn.is_zero(dev):
                raise QmfViolation((b,), xn.to_float(dev))
        elif abs(xn.to_float(dev)) > tol:
            raise QmfViolation((b,), xn.to_float(dev))
    table = tuple(
        tuple((weight.values[i] / cols[b]) if t[i][b] else 0 for b in range(a))
        for i in range(a))
    if exact:
        table = tuple(tuple(xn.canon(v) for v in row) for row in table)
    return table, exact


def _subshift_perron(sys: Subshift, weight: SymbolTable, rescale, tol):
    a = sys.alphabet_size
    t = sys.transition
    exact = weight.is_exact() and a <= 4
    k_rows = [[weight.values[j] * t[j][i] for j in range(a)] for i in range(a)]
    if exact:
        lam, phi, psi = _perron_exact(k_rows)
    else:
        lam, phi, psi = _perron_float(
            [[xn.to_float(v) for v in row] for row in k_rows])
        exact = False

    scale = lam if rescale else 1
    lam_scaled = xn.canon(lam / scale) if exact else xn.to_float(lam) / (
        xn.to_float(scale))
    dev = xn.to_float(lam_scaled) - 1.0
    if abs(dev) > tol:
        raise EigenvalueNotOne(xn.to_float(lam))

    if exact:
        table = tuple(
            tuple(xn.canon(weight.values[i] * t[i][b] * phi[i] / (lam * phi[b]))
                  for b in range(a))
            for i in range(a))
        prod = [xn.canon(psi[i] * phi[i]) for i in range(a)]
        tot = xn.canon(sum(prod))
        pi = tuple(xn.canon(p / tot) for p in prod)
    else:
        lamf = xn.to_float(lam)
        table = tuple(
            tuple(xn.to_float(weight.values[i]) * t[i][b] * phi[i]
                  / (lamf * phi[b]) for b in range(a))
            for i in range(a))
        prod = [psi[i] * phi[i] for i in range(a)]
        tot = sum(prod)
        pi = tuple(p / tot for p in prod)

    data = PerronData(eigenvalue=lam, eigenvalue_scaled=lam_scaled,
                      phi=phi, psi=psi, pi=pi, rescaled=bool(rescale),
                      exact=exact)
    return TransitionDensity(sys=sys, mode="subshift-perron", weight=weight,
                             table=table, perron=data, exact=exact)


# ---------------------------------------------------------------------------
# transfer operator


def transfer_apply(sys: BranchSystem, delta: TransitionDensity, f, x):
    """One application of the weighted transfer operator at ``x``.

    ``x`` may be a numpy array for circle/Julia systems, in which case the
    branches are evaluated vectorized; the coinciding branches at a Julia
    critical value then contribute twice, which is exactly the declared
    multiplicity-2 convention.
    """
    if isinstance(x, np.ndarray):
        total = None
        for i in branch_labels(sys):
            y = sys.branch_point(i, x)
            term = _delta_array(delta, y) * f(y)
            total = term if total is None else total + term
        return total
    acc = 0
    for br in sys.preimages(x):
        term = delta.at(br.point) * f(br.point)
        if br.multiplicity != 1:
            term = term * br.multiplicity
        acc = acc + term
    return acc


def transfer_power(sys: BranchSystem, delta: TransitionDensity, f, x,
                   n: int, budget: int = 1 << 24):
    """``n``-fold transfer application via backward recursion."""
    if n < 0:
        raise ValueError("power must be >= 0")
    deg = _max_branching(sys)
    if deg ** n > budget:
        raise BudgetExceeded(budget, deg ** n)
    if n == 0:
        return f(x)
    return transfer_apply(
        sys, delta, lambda y: transfer_power(sys, delta, f, y, n - 1,
                                             budget=budget), x)


def _max_branching(sys: BranchSystem) -> int:
    if isinstance(sys, Subshift):
        a = sys.alphabet_size
        return max(sum(sys.transition[i][b] for i in range(a))
                   for b in range(a))
    if isinstance(sys, CircleMap):
        return sys.degree
    if isinstance(sys, QuadraticJulia):
        return 2
    return 2


# ---------------------------------------------------------------------------
# grid transfer operator and the harmonic fixed point


def grid_transfer_operator(sys: CircleMap, delta: TransitionDensity,
                           size: int) -> sparse.csr_matrix:
    """Sparse matrix acting the transfer operator on grid functions.

    Nodes sit at ``j/size``.  Branch values ``(x_j + i)/N`` that land on a
    node are taken exactly; values between nodes are linearly interpolated
    (periodically), so each row mixes at most ``2 N`` entries.
    """
    if not isinstance(sys, CircleMap):
        raise GridIncompatible("grid operator needs a circle system")
    n = sys.degree
    if size % n != 0:
        raise GridIncompatible(
            f"grid size {size} not divisible by map degree {n}")
    j = np.arange(size)
    rows, cols, vals = [], [], []
    for i in range(n):
        y = (j + i * size) / (n * size)          # branch points
        d = _delta_array(delta, y)
        pos = (j + i * size) / n                 # in node units
        k0 = np.floor(pos).astype(int)
        frac = pos - k0
        rows.append(j)
        cols.append(k0 % size)
        vals.append(d * (1.0 - frac))
        rows.append(j)
        cols.append((k0 + 1) % size)
        vals.append(d * frac)
    mat = sparse.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(size, size))
    return mat.tocsr()


@dataclass
class FixedPointResult:
    """Outcome of the harmonic fixed-point iteration ``R h = h``."""

    values: object                 # np.ndarray over the grid, or word table
    residual: float                # sup |R h - h| at the returned values
    iterations: int
    converged: bool
    selection: str                 # "power-iteration" or "attractor-basin"
    normalizer: Optional[float]    # integral the raw values were divided by
    grid: Optional[np.ndarray] = None
    words: Optional[tuple] = None

    def at(self, x):
        """Evaluate (periodic linear interpolation / table lookup)."""
        if self.grid is not None:
            size = len(self.grid)
            pos = (np.asarray(x, dtype=float) % 1.0) * size
            k0 = np.floor(pos).astype(int) % size
            frac = pos - np.floor(pos)
            v = self.values
            out = v[k0] * (1.0 - frac) + v[(k0 + 1) % size] * frac
            return out if isinstance(x, np.ndarray) else float(out)
        depth = len(self.words[0])
        return self.values[tuple(x[:depth])]


def fixed_point_h(sys: BranchSystem, delta: TransitionDensity, *,
                  grid: int = 4096, depth: int = 6, tol: float = 1e-8,
                  max_iterations: int = 2000, mu0=None) -> FixedPointResult:
    """Iterate the transfer operator to a fixed function ``R h = h``.

    The fixed space may have dimension above one (each closed backward-
    absorbing component contributes a basin function).  Iteration from the
    constant seed converges to a constant whenever the density is
    normalized, so a second probe seeded at the node of the map's fixed
    point ``x = 0`` detects a nontrivial component attached to it and is
    preferred when it is visibly nonconstant.  The selection is recorded
    in ``selection``; non-convergence is reported, not raised.

    When ``mu0`` is supplied (an object with an ``expect`` method), the
    returned values are normalized to mean 1 against it.
    """
    if isinstance(sys, CircleMap):
        return _fixed_point_circle(sys, delta, grid, tol, max_iterations, mu0)
    if isinstance(sys, Subshift):
        return _fixed_point_subshift(sys, delta, depth, tol, max_iterations,
                                     mu0)
    raise ValueError(
        f"fixed-point iteration not implemented for {type(sys).__name__}")


def _iterate_to_fixed(op, start, tol, max_iterations):
    h = start
    resid = math.inf
    for it in range(1, max_iterations + 1):
        nxt = op @ h
        resid = float(np.max(np.abs(nxt - h)))
        h = nxt
        if resid <= tol:
            return h, resid, it, True
    return h, resid, max_iterations, False


def _fixed_point_circle(sys, delta, size, tol, max_iterations, mu0):
    op = grid_transfer_operator(sys, delta, size)
    xs = np.arange(size) / size
    # The loop stops on step size, but the reported residual is the true
    # defect sup|Rh - h| of the (normalized) return value, which can sit
    # a normalizer factor above the last step.  Iterate two orders
    # tighter so the defect lands safely under the requested tolerance.
    itol = max(tol * 1e-2, 1e-15)

    h1, _, it1, ok1 = _iterate_to_fixed(op, np.ones(size), itol,
                                        max_iterations)

    seed = np.zeros(size)
    seed[0] = 1.0
    h2, _, it2, ok2 = _iterate_to_fixed(op, seed, itol, max_iterations)
    spread = float(h2.max() - h2.min())

    if ok2 and spread > 1e-2 * max(1.0, float(np.abs(h2).max())) \
            and spread > 1e2 * tol:
        h, iters, selection = h2, it2, "attractor-basin"
    else:
        h, iters, selection = h1, it1, "power-iteration"

    normalizer = None
    probe = FixedPointResult(values=h, residual=math.inf, iterations=iters,
                             converged=False, selection=selection,
                             normalizer=None, grid=xs)
    mean = _mean_against(probe, mu0)
    if mean is not None and abs(mean) > 1e-12:
        h = h / mean
        normalizer = mean
    resid = float(np.max(np.abs(op @ h - h)))
    while resid > tol and iters < max_iterations:
        h = op @ h
        iters += 1
        resid = float(np.max(np.abs(op @ h - h)))
    return FixedPointResult(values=h, residual=resid, iterations=iters,
                            converged=resid <= tol, selection=selection,
                            normalizer=normalizer, grid=xs)


def _mean_against(result, mu0):
    if mu0 is None:
        vals = result.values
        if isinstance(vals, np.ndarray):
            return float(vals.mean())
        return None
    return float(mu0.expect(result.at))


def _fixed_point_subshift(sys, delta, depth, tol, max_iterations, mu0):
    words = tuple(sys.words(depth))
    index = {w: i for i, w in enumerate(words)}
    a = sys.alphabet_size
    exact = delta.exact
    one = 1 if exact else 1.0
    h = {w: one for w in words}

    def step(cur):
        out = {}
        for w in words:
            acc = 0
            for s in range(a):
                if sys.transition[s][w[0]]:
                    key = ((s,) + w)[:depth]
                    acc = acc + delta.table[s][w[0]] * cur[key]
            out[w] = xn.canon(acc) if exact else acc
        return out

    itol = max(tol * 1e-2, 1e-15)
    it = 0
    for it in range(1, max_iterations + 1):
        nxt = step(h)
        resid = max(abs(xn.to_float(nxt[w] - h[w])) for w in words)
        h = nxt
        if resid <= itol:
            break

    normalizer = None
    if mu0 is not None:
        mean = mu0.expect(lambda w: h[tuple(w[:depth])])
        mf = xn.to_float(mean)
        if abs(mf) > 1e-12:
            if exact and xn.is_exact(mean):
                h = {w: xn.canon(v / mean) for w, v in h.items()}
            else:
                h = {w: xn.to_float(v) / mf for w, v in h.items()}
            normalizer = mf

    def defect(cur):
        nxt = step(cur)
        return nxt, max(abs(xn.to_float(nxt[w] - cur[w])) for w in words)

    nxt, resid = defect(h)
    while resid > tol and it < max_iterations:
        h = nxt
        it += 1
        nxt, resid = defect(h)
    return FixedPointResult(values=h, residual=resid, iterations=it,
                            converged=resid <= tol,
                            selection="power-iteration",
                            normalizer=normalizer, words=words)
