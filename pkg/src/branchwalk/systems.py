"""Endomorphisms with labeled inverse branches.

Three concrete families share one interface:

* :class:`Subshift` — finite words over an alphabet with a 0/1 transition
  matrix ``T`` (``T[a][b] = 1`` iff symbol ``a`` may immediately precede
  ``b``); the map drops the first symbol and inverse branches prepend an
  allowed symbol.
* :class:`CircleMap` — ``x -> N*x mod 1`` on ``[0, 1)`` with the ``N``
  branches ``(x + i)/N``.  Arithmetic is exact for dyadic floats when ``N``
  is a power of two, and `fractions.Fraction` coordinates are supported
  transparently for exact rational work with any degree.
* :class:`QuadraticJulia` — ``z -> z**2 + c`` on the closed disk of the
  escape radius, branches ``+sqrt(z - c)`` (principal) and its negation.

Branch order is fixed per family so label paths are reproducible:
ascending prepended symbol, ascending branch index ``i``, and principal
root before its negation, respectively.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass
from numbers import Real
from typing import Iterator, Sequence, Union

import numpy as np

from .errors import BudgetExceeded, InvalidPoint, WordTooShort

Word = tuple
Point = Union[Word, float, complex]

#: default cap on the total number of nodes a preimage tree may create
DEFAULT_NODE_BUDGET = 1 << 24


@dataclass(frozen=True)
class Branch:
    """One inverse branch value: ``forward(point) == x`` for its source x.

    ``multiplicity`` is 1 except at the Julia critical value ``x = c``,
    where the two branches coincide at 0 and are reported once with
    multiplicity 2 (weight sums treat it as two equal branches).
    """

    label: int
    point: Point
    multiplicity: int = 1


@dataclass(frozen=True)
class TreeLeaf:
    """A depth-``n`` backward point together with its branch-label path.

    ``labels = (i_1, ..., i_n)`` means ``point`` was reached by applying
    branch ``i_1`` to the root, then ``i_2`` to the result, and so on;
    ``multiplicity`` is the product of branch multiplicities on the way.
    """

    labels: tuple
    point: Point
    multiplicity: int = 1


class BranchSystem:
    """Shared behaviour; concrete families implement the abstract parts."""

    def forward(self, x):
        raise NotImplementedError

    def preimages(self, x) -> Sequence[Branch]:
        raise NotImplementedError

    def branch_count(self, x) -> int:
        """Number of preimages of ``x`` counted with multiplicity."""
        return sum(b.multiplicity for b in self.preimages(x))

    def validate(self, x) -> None:
        raise NotImplementedError

    def preimage_tree(self, x, n: int, budget: int = DEFAULT_NODE_BUDGET):
        """All ``y`` with ``forward^n(y) = x`` plus their label paths.

        Leaves are ordered lexicographically by label path.  Raises
        :class:`BudgetExceeded` once more than ``budget`` nodes (across
        all levels) would be created; ``n = 0`` returns ``[TreeLeaf((), x)]``.
        """
        if n < 0:
            raise ValueError("depth must be >= 0")
        leaves = [TreeLeaf((), x, 1)]
        created = 1
        for _ in range(n):
            nxt = []
            for leaf in leaves:
                for br in self.preimages(leaf.point):
                    created += 1
                    if created > budget:
                        raise BudgetExceeded(budget, created)
                    nxt.append(
                        TreeLeaf(
                            leaf.labels + (br.label,),
                            br.point,
                            leaf.multiplicity * br.multiplicity,
                        )
                    )
            leaves = nxt
        return leaves


@dataclass(frozen=True)
class Subshift(BranchSystem):
    """Subshift of finite type; points are finite words (tuples of ints).

    Words carry a working length: operations consume leading symbols and
    callers must supply words at least as long as the depth they need.
    ``transition[a][b] = 1`` iff ``a`` may immediately precede ``b``.
    """

    transition: tuple

    def __post_init__(self):
        rows = tuple(tuple(int(v) for v in row) for row in self.transition)
        object.__setattr__(self, "transition", rows)
        a = len(rows)
        if a < 1 or any(len(row) != a for row in rows):
            raise ValueError("transition matrix must be square")
        if any(v not in (0, 1) for row in rows for v in row):
            raise ValueError("transition entries must be 0 or 1")
        if any(not any(row) for row in rows):
            raise ValueError("every symbol must be allowed to precede some symbol")
        if any(not any(row[b] for row in rows) for b in range(a)):
            raise ValueError("every symbol must have an allowed predecessor")

    @property
    def alphabet_size(self) -> int:
        return len(self.transition)

    def validate(self, x) -> None:
        if not isinstance(x, tuple) or len(x) == 0:
            raise InvalidPoint(f"subshift point must be a nonempty tuple, got {x!r}")
        a = self.alphabet_size
        for s in x:
            if not isinstance(s, int) or not 0 <= s < a:
                raise InvalidPoint(f"symbol {s!r} outside alphabet of size {a}")
        for t in range(len(x) - 1):
            if not self.transition[x[t]][x[t + 1]]:
                raise InvalidPoint(f"forbidden pair {x[t]}{x[t + 1]} in word {x!r}")

    def forward(self, x):
        if not isinstance(x, tuple) or len(x) < 2:
            raise WordTooShort(f"need length >= 2 to shift, got {x!r}")
        return x[1:]

    def preimages(self, x):
        self.validate(x)
        lead = x[0]
        return [
            Branch(a, (a,) + x)
            for a in range(self.alphabet_size)
            if self.transition[a][lead]
        ]

    def branch_count(self, x) -> int:
        lead = x[0] if isinstance(x, tuple) else x
        return sum(row[lead] for row in self.transition)

    def words(self, depth: int) -> Iterator[Word]:
        """All allowed words of the given length, lexicographically."""
        if depth < 1:
            raise ValueError("depth must be >= 1")

        def extend(prefix):
            if len(prefix) == depth:
                yield prefix
                return
            for b in range(self.alphabet_size):
                if self.transition[prefix[-1]][b]:
                    yield from extend(prefix + (b,))

        for a in range(self.alphabet_size):
            yield from extend((a,))


@dataclass(frozen=True)
class CircleMap(BranchSystem):
    """``x -> degree * x mod 1`` on ``[0, 1)``."""

    degree: int

    def __post_init__(self):
        if int(self.degree) != self.degree or self.degree < 2:
            raise ValueError("degree must be an integer >= 2")
        object.__setattr__(self, "degree", int(self.degree))

    def validate(self, x) -> None:
        if isinstance(x, Real):
            if 0 <= x < 1:
                return
            raise InvalidPoint(f"circle coordinate {x!r} outside [0, 1)")
        raise InvalidPoint(f"circle point must be real, got {x!r}")

    def forward(self, x):
        return (self.degree * x) % 1

    def branch_point(self, i: int, x):
        """Inverse branch ``(x + i)/degree``; accepts scalars or arrays."""
        return (x + i) / self.degree

    def preimages(self, x):
        self.validate(x)
        return [Branch(i, self.branch_point(i, x)) for i in range(self.degree)]

    def branch_count(self, x) -> int:
        return self.degree


@dataclass(frozen=True)
class QuadraticJulia(BranchSystem):
    """``z -> z**2 + c`` restricted to the disk ``|z| <= escape_radius``.

    The disk is backward invariant: ``|y|**2 = |x - c| <= R + |c| = R**2``,
    so preimages never need re-validation.
    """

    c: complex

    def __post_init__(self):
        object.__setattr__(self, "c", complex(self.c))

    @property
    def escape_radius(self) -> float:
        """Radius ``R = (1 + sqrt(1 + 4|c|))/2`` with ``R**2 = R + |c|``."""
        return (1.0 + (1.0 + 4.0 * abs(self.c)) ** 0.5) / 2.0

    def validate(self, x) -> None:
        if isinstance(x, (Real, complex)):
            if abs(complex(x)) <= self.escape_radius + 1e-6:
                return
            raise InvalidPoint(
                f"|{x!r}| exceeds escape radius {self.escape_radius:.6g}"
            )
        raise InvalidPoint(f"expected a complex point, got {x!r}")

    def forward(self, x):
        return x * x + self.c

    def branch_point(self, i: int, x):
        """Principal square root of ``x - c`` for ``i = 0``, negated for 1."""
        w = x - self.c
        s = np.sqrt(w) if isinstance(w, np.ndarray) else cmath.sqrt(w)
        return s if i == 0 else -s

    def preimages(self, x):
        self.validate(x)
        w = complex(x) - self.c
        if w == 0:
            return [Branch(0, 0j, multiplicity=2)]
        s = cmath.sqrt(w)
        return [Branch(0, s), Branch(1, -s)]

    def branch_count(self, x) -> int:
        return 2


def branch_labels(sys: BranchSystem) -> range:
    """Label range for families with a constant branch layout (not Subshift).

    Used by vectorized code paths that evaluate all branches of an array of
    points at once; the Julia critical value needs no special case because
    both labels evaluate to the same point there.
    """
    if isinstance(sys, CircleMap):
        return range(sys.degree)
    if isinstance(sys, QuadraticJulia):
        return range(2)
    raise TypeError(f"no constant branch layout for {type(sys).__name__}")
