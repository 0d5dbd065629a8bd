"""Backward-path machinery: prefixes, fiber integrals, sampling.

The load-bearing oracle: on the full 2-shift with branch weights
(3/4, 1/4), the mass of the label path (0, 0) at depth 2 is
(3/4)^2 = 9/16 = 0.5625, and all depth-n label masses sum to one.
"""

from fractions import Fraction

import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from branchwalk import (
    BudgetExceeded,
    CircleMap,
    CylinderFunctional,
    EmptyPath,
    FilterSquared,
    InvalidPoint,
    PathPrefix,
    QuadraticJulia,
    Subshift,
    SymbolTable,
    cocycle_weight,
    consistency_check,
    derive_delta,
    label_indicator,
    path_integral,
    sample_path,
    shift_drop,
    shift_extend,
)
from branchwalk import exactnum as xn

FULL2 = Subshift(((1, 1), (1, 1)))
GOLDEN = Subshift(((1, 1), (1, 0)))
ROOT6 = (0,) * 6

S = 2.0 ** -0.5


def weighted_delta():
    return derive_delta(FULL2, SymbolTable(("3/2", "1/2")),
                        "subshift-perron", rescale=True)


def golden_delta():
    return derive_delta(GOLDEN, SymbolTable(("1", "1")),
                        "subshift-perron", rescale=True)


def doubling_delta(taps=(S, S)):
    sys = CircleMap(2)
    return sys, derive_delta(sys, FilterSquared(taps), "strongly-invariant")


# ---------------------------------------------------------------------------
# path prefixes


def test_prefix_shape_is_enforced():
    p = PathPrefix((0.5, 0.25, 0.625), (0, 1))
    assert p.depth == 2 and p.x0 == 0.5 and p.last == 0.625
    with pytest.raises(ValueError):
        PathPrefix((0.5, 0.25), (0, 1))


def test_validate_accepts_true_orbits_and_rejects_fakes():
    sys = CircleMap(2)
    good = PathPrefix((0.5, 0.25, 0.125), (0, 0))
    good.validate(sys)
    bad = PathPrefix((0.5, 0.3, 0.15), (0, 0))
    with pytest.raises(InvalidPoint):
        bad.validate(sys)


def test_validate_on_words_is_exact():
    p = PathPrefix(((0, 1, 0), (1, 0, 1, 0), (0, 1, 0, 1, 0)), (1, 0))
    p.validate(GOLDEN)
    with pytest.raises(InvalidPoint):
        PathPrefix(((0, 1, 0), (1, 1, 0, 0)), (1,)).validate(GOLDEN)


# ---------------------------------------------------------------------------
# cylinder functionals


def test_functional_kinds_read_the_right_slice():
    labels = (0, 1, 1)
    points = (0.5, 0.25, 0.625, 0.8125)
    assert CylinderFunctional(2, lambda x: x, kind="last") \
        .evaluate(labels, points) == 0.625
    assert CylinderFunctional(2, lambda ps: ps, kind="points") \
        .evaluate(labels, points) == (0.25, 0.625)
    assert CylinderFunctional(2, lambda ls: ls, kind="labels") \
        .evaluate(labels, points) == (0, 1)


def test_functional_rejects_bad_kind_and_depth():
    with pytest.raises(ValueError):
        CylinderFunctional(1, lambda x: x, kind="middle")
    with pytest.raises(ValueError):
        CylinderFunctional(-1, lambda x: x)


def test_depth_zero_functional_sees_only_the_root():
    sys, delta = doubling_delta()
    f = CylinderFunctional(0, lambda x: 5.0, kind="last")
    # the deeper layers integrate out because branch weights sum to one
    assert abs(path_integral(sys, delta, 0.3, f, 3) - 5.0) < 1e-12


# ---------------------------------------------------------------------------
# cocycles and exact fiber integrals


def test_cocycle_is_the_product_of_branch_weights():
    delta = weighted_delta()
    p = PathPrefix((ROOT6, (0,) + ROOT6, (1, 0) + ROOT6), (0, 1))
    w = cocycle_weight(delta, p)
    assert xn.canon(w - sp.Rational(3, 16)) == 0
    assert cocycle_weight(delta, PathPrefix((ROOT6,), ())) == 1


def test_cocycle_splits_across_concatenation():
    delta = weighted_delta()
    path = PathPrefix(
        (ROOT6, (1,) + ROOT6, (0, 1) + ROOT6, (0, 0, 1) + ROOT6,
         (1, 0, 0, 1) + ROOT6),
        (1, 0, 0, 1))
    for cut in range(path.depth + 1):
        front = PathPrefix(path.points[:cut + 1], path.labels[:cut])
        back = PathPrefix(path.points[cut:], path.labels[cut:])
        prod = cocycle_weight(delta, front) * cocycle_weight(delta, back)
        assert xn.canon(prod - cocycle_weight(delta, path)) == 0


def test_leading_pair_mass_is_nine_sixteenths():
    delta = weighted_delta()
    mass = path_integral(FULL2, delta, ROOT6, label_indicator((0, 0)), 2)
    assert xn.canon(mass - sp.Rational(9, 16)) == 0
    assert xn.to_float(mass) == 0.5625


def test_label_masses_sum_to_one():
    delta = weighted_delta()
    total = 0
    for w in FULL2.words(3):
        total = total + path_integral(FULL2, delta, ROOT6,
                                      label_indicator(w), 3)
    assert xn.canon(total - 1) == 0


def test_path_integral_equals_cocycle_on_singleton_cylinders():
    sys, delta = doubling_delta((S, 0.0, 0.0, S))
    x0 = 0.375
    leaf = None
    for lf in sys.preimage_tree(x0, 3):
        if lf.labels == (1, 0, 1):
            leaf = lf
    # leaves carry only the endpoint; the forward map recovers the chain
    pts = [leaf.point]
    for _ in range(3):
        pts.append(sys.forward(pts[-1]))
    path = PathPrefix(tuple(reversed(pts)), leaf.labels)
    direct = cocycle_weight(delta, path)
    via_tree = path_integral(sys, delta, x0, label_indicator(leaf.labels), 3)
    assert abs(direct - via_tree) < 1e-14


def test_budget_and_depth_guards():
    delta = weighted_delta()
    with pytest.raises(BudgetExceeded):
        path_integral(FULL2, delta, ROOT6, label_indicator((0,)), 5,
                      budget=16)
    with pytest.raises(ValueError):
        path_integral(FULL2, delta, ROOT6, label_indicator((0, 0)), 1)


def test_array_roots_match_scalar_roots():
    sys, delta = doubling_delta((S, 0.0, 0.0, S))
    f = CylinderFunctional(2, lambda x: np.cos(2 * np.pi * x), kind="last")
    xs = np.array([0.0, 0.125, 0.4, 0.75])
    arr = path_integral(sys, delta, xs, f, 2)
    scalar_f = CylinderFunctional(2, lambda x: np.cos(2 * np.pi * x))
    for i, x in enumerate(xs):
        assert abs(arr[i] - path_integral(sys, delta, float(x),
                                          scalar_f, 2)) < 1e-12


# ---------------------------------------------------------------------------
# Kolmogorov consistency


def test_consistency_exact_on_subshifts():
    out = consistency_check(GOLDEN, golden_delta(), (0, 1, 0, 1, 0, 1),
                            label_indicator((0, 1)), 3)
    assert out["exact"] and out["discrepancy"] == 0.0


def test_consistency_on_dyadic_circle_points():
    sys, delta = doubling_delta((S, 0.0, 0.0, S))
    f = CylinderFunctional(2, lambda x: np.sin(2 * np.pi * x), kind="last")
    for x0 in (0.0, 0.5, 0.75, Fraction(3, 8)):
        out = consistency_check(sys, delta, float(x0), f, 4)
        assert out["discrepancy"] < 1e-12


def test_consistency_for_quadratic_preimages():
    from branchwalk import ConstantWeight
    sys = QuadraticJulia(0)
    delta = derive_delta(sys, ConstantWeight(1.0), "strongly-invariant")
    f = CylinderFunctional(2, lambda z: (z * np.conjugate(z)).real,
                           kind="last")
    out = consistency_check(sys, delta, 1 + 0j, f, 3)
    assert out["discrepancy"] < 1e-10


# ---------------------------------------------------------------------------
# sampling


def test_sampling_is_reproducible_and_indexed():
    delta = weighted_delta()
    a = sample_path(FULL2, delta, ROOT6, 5, seed=9, index=3)
    b = sample_path(FULL2, delta, ROOT6, 5, seed=9, index=3)
    assert a == b
    others = [sample_path(FULL2, delta, ROOT6, 5, seed=9, index=i)
              for i in range(40)]
    assert len({p.labels for p in others}) > 1


def test_sampled_paths_are_valid_orbits():
    sys, delta = doubling_delta((S, 0.0, 0.0, S))
    for i in range(20):
        p = sample_path(sys, delta, 0.3, 6, seed=2, index=i)
        p.validate(sys)
        assert p.depth == 6


def test_sampled_first_step_frequency_matches_weight():
    delta = weighted_delta()
    n_paths = 4000
    hits = sum(sample_path(FULL2, delta, ROOT6, 1, seed=31, index=i)
               .labels[0] == 0 for i in range(n_paths))
    p = 0.75
    sigma = (p * (1 - p) / n_paths) ** 0.5
    assert abs(hits / n_paths - p) < 4 * sigma


def test_sampled_depth_cap():
    delta = weighted_delta()
    with pytest.raises(ValueError):
        sample_path(FULL2, delta, ROOT6, 64, seed=0)


# ---------------------------------------------------------------------------
# the shift on path space


def test_extend_then_drop_roundtrips_exactly():
    sys, delta = doubling_delta()
    # dyadic start: every coordinate along the orbit is an exact float
    p = sample_path(sys, delta, 0.40625, 5, seed=4)
    q = shift_extend(sys, p)
    assert q.depth == p.depth + 1
    q.validate(sys)
    assert shift_drop(q) == p


def test_extend_on_words_prepends_the_forward_image():
    p = PathPrefix(((0, 1, 0, 1), (1, 0, 1, 0, 1)), (1,))
    q = shift_extend(GOLDEN, p)
    assert q.points[0] == (1, 0, 1)
    assert q.labels[0] == 0
    assert shift_drop(q) == p


def test_drop_needs_a_front_to_remove():
    with pytest.raises(EmptyPath):
        shift_drop(PathPrefix((0.5,), ()))


@given(st.integers(min_value=0, max_value=2 ** 10 - 1))
@settings(max_examples=30)
def test_extend_drop_roundtrip_on_random_dyadics(k):
    sys, delta = doubling_delta()
    x0 = k / 2 ** 10
    p = sample_path(sys, delta, x0, 4, seed=1, index=k)
    assert shift_drop(shift_extend(sys, p)) == p
