"""Backward paths, the weight cocycle, and exact/Monte-Carlo fiber integrals.

A depth-``n`` backward path from ``x0`` is ``(x0, x1, ..., xn)`` with
``forward(x_{k+1}) = x_k``, identified by its branch-label path.  The
transition density assigns it the cocycle weight ``Π_k delta(x_k)``, and
summing ``weight * F`` over the full preimage tree is the exact integral
of the cylinder functional ``F`` against the fiber measure over ``x0``.
The same tree, sampled branch by branch, gives the Monte Carlo view.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from . import exactnum as xn
from .errors import BudgetExceeded, EmptyPath, InvalidPoint, \
    NormalizationDefect, NumericOverflow
from .rng import CounterRng
from .systems import BranchSystem, Subshift, branch_labels
from .weights import TransitionDensity, _delta_array, _max_branching

_STREAM_PATHS = 3
_MAX_SAMPLED_DEPTH = 64


@dataclass(frozen=True)
class PathPrefix:
    """``points = (x0, ..., xn)`` and the labels that produced them."""

    points: tuple
    labels: tuple

    def __post_init__(self):
        if len(self.points) != len(self.labels) + 1:
            raise ValueError("a depth-n path has n+1 points and n labels")

    @property
    def depth(self) -> int:
        return len(self.labels)

    @property
    def x0(self):
        return self.points[0]

    @property
    def last(self):
        return self.points[-1]

    def validate(self, sys: BranchSystem, tol: float = 1e-12) -> None:
        """Check the backward-orbit relation forward(x_{k+1}) = x_k."""
        for k in range(self.depth):
            image = sys.forward(self.points[k + 1])
            target = self.points[k]
            if isinstance(target, tuple):
                ok = image == target
            else:
                ok = abs(complex(image) - complex(target)) <= tol
            if not ok:
                raise InvalidPoint(
                    f"coordinate {k + 1} does not map onto coordinate {k}")


@dataclass(frozen=True)
class CylinderFunctional:
    """A functional of the first ``depth`` backward coordinates.

    ``kind`` declares what ``fn`` consumes:

    * ``"last"``   — ``fn(x_n)`` (the single-coordinate form);
    * ``"points"`` — ``fn((x1, ..., xn))``;
    * ``"labels"`` — ``fn((i1, ..., in))``, the canonical identity for
      path statistics (labels never collide, points may).
    """

    depth: int
    fn: Callable
    kind: str = "last"

    def __post_init__(self):
        if self.kind not in ("last", "points", "labels"):
            raise ValueError(f"unknown functional kind {self.kind!r}")
        if self.depth < 0:
            raise ValueError("depth must be >= 0")

    def evaluate(self, labels: tuple, points: tuple):
        """``points`` includes ``x0``; truncates to the declared depth."""
        d = self.depth
        if self.kind == "labels":
            return self.fn(labels[:d])
        if self.kind == "points":
            return self.fn(points[1:d + 1])
        return self.fn(points[d])


def label_indicator(labels: tuple) -> CylinderFunctional:
    """Indicator of one branch-label path, as a cylinder functional."""
    target = tuple(labels)

    def fn(seen):
        return 1 if tuple(seen) == target else 0

    return CylinderFunctional(len(target), fn, kind="labels")


def cocycle_weight(delta: TransitionDensity, path: PathPrefix):
    """``Π_{k=1..n} delta(x_k)``; the empty product is 1."""
    acc = 1
    for x in path.points[1:]:
        acc = acc * delta.at(x)
    if isinstance(acc, float) and not math.isfinite(acc):
        raise NumericOverflow(f"cocycle weight overflowed along {path.labels}")
    return acc


def path_integral(sys: BranchSystem, delta: TransitionDensity, x0,
                  functional: CylinderFunctional, n: int,
                  budget: int = 1 << 24):
    """Exact fiber integral: Σ over the depth-``n`` tree of weight · F.

    ``x0`` may be a numpy array for circle/Julia systems; the return value
    is then the array of fiber integrals over the roots (used to integrate
    fibers against quadrature measures in one pass).
    """
    if functional.depth > n:
        raise ValueError("functional depth exceeds the tree depth")
    deg = _max_branching(sys)
    if deg ** n > budget:
        raise BudgetExceeded(budget, deg ** n)

    if isinstance(x0, np.ndarray):
        return _path_integral_array(sys, delta, x0, functional, n)

    def rec(x, k, weight, labels, points):
        if k == n:
            return weight * functional.evaluate(labels, points)
        total = 0
        for br in sys.preimages(x):
            w = weight * delta.at(br.point)
            if br.multiplicity != 1:
                w = w * br.multiplicity
            total = total + rec(br.point, k + 1, w,
                                labels + (br.label,), points + (br.point,))
        return total

    return rec(x0, 0, 1, (), (x0,))


def _path_integral_array(sys, delta, x0, functional, n):
    labels_range = branch_labels(sys)

    def rec(x, k, weight, labels, points):
        if k == n:
            val = functional.evaluate(labels, points)
            return weight * val
        total = None
        for i in labels_range:
            y = sys.branch_point(i, x)
            w = weight * _delta_array(delta, y)
            term = rec(y, k + 1, w, labels + (i,), points + (y,))
            total = term if total is None else total + term
        return total

    return rec(x0, 0, np.ones_like(x0, dtype=float), (), (x0,))


def consistency_check(sys: BranchSystem, delta: TransitionDensity, x0,
                      functional: CylinderFunctional, n: int,
                      budget: int = 1 << 24) -> dict:
    """Kolmogorov consistency: integrating at depth ``n`` and at ``n+1``
    (the functional regarded as depending on the extra coordinate) must
    agree, because branch weights at the new layer sum to one."""
    at_n = path_integral(sys, delta, x0, functional, n, budget)
    # the functional truncates to its declared depth, so handing it a
    # deeper tree is exactly the "extra dummy coordinate" reading
    at_n1 = path_integral(sys, delta, x0, functional, n + 1, budget)
    diff = at_n - at_n1
    if xn.is_exact(diff):
        exact = xn.is_zero(diff)
        disc = 0.0 if exact else abs(xn.to_float(diff))
    else:
        exact = False
        disc = abs(xn.to_float(diff))
    return {
        "n": n,
        "value_n": xn.to_float(at_n),
        "value_n_plus_1": xn.to_float(at_n1),
        "discrepancy": disc,
        "exact": exact,
    }


def sample_path(sys: BranchSystem, delta: TransitionDensity, x0, n: int,
                seed: int = 0, index: int = 0) -> PathPrefix:
    """Draw one backward path of depth ``n``, branch by branch.

    Reproducible: step ``k`` of path ``index`` consumes the fixed counter
    ``index * 64 + k`` of the path stream, so paths are independent of
    each other and of evaluation order.  Branch probabilities are the
    density values; a row defect beyond 1e-9 aborts loudly, smaller
    defects are renormalized silently (attributed to floating point).
    """
    if n >= _MAX_SAMPLED_DEPTH:
        raise ValueError(f"sampled depth must be < {_MAX_SAMPLED_DEPTH}")
    rng = CounterRng(seed, stream=_STREAM_PATHS)
    points = (x0,)
    labels = ()
    x = x0
    for k in range(n):
        branches = sys.preimages(x)
        probs = [br.multiplicity * xn.to_float(delta.at(br.point))
                 for br in branches]
        total = sum(probs)
        if abs(total - 1.0) > 1e-9:
            raise NormalizationDefect(x, total)
        u = rng.uniform(index * _MAX_SAMPLED_DEPTH + k) * total
        acc = 0.0
        chosen = branches[-1]
        for br, p in zip(branches, probs):
            acc += p
            if u < acc:
                chosen = br
                break
        points = points + (chosen.point,)
        labels = labels + (chosen.label,)
        x = chosen.point
    return PathPrefix(points, labels)


def shift_extend(sys: BranchSystem, path: PathPrefix) -> PathPrefix:
    """Prepend the forward image: (x0, ...) -> (r(x0), x0, ...).

    The new front coordinate needs a label for the branch that recovers
    ``x0`` from ``r(x0)``; it is located among the preimages exactly for
    words and dyadics, by nearest distance otherwise.
    """
    new_front = sys.forward(path.x0)
    best = None
    for br in sys.preimages(new_front):
        if isinstance(path.x0, tuple):
            if br.point == path.x0:
                best = br
                break
        else:
            d = abs(complex(br.point) - complex(path.x0))
            if best is None or d < best[0]:
                best = (d, br)
    if best is None:
        raise InvalidPoint(f"{path.x0!r} is not among the preimages of "
                           f"its own forward image")
    label = best.label if isinstance(path.x0, tuple) else best[1].label
    return PathPrefix((new_front,) + path.points, (label,) + path.labels)


def shift_drop(path: PathPrefix) -> PathPrefix:
    """Remove the front coordinate; inverse of :func:`shift_extend`."""
    if path.depth == 0:
        raise EmptyPath("cannot drop the front of a depth-0 path")
    return PathPrefix(path.points[1:], path.labels[1:])
