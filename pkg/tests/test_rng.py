"""Counter-based generator: pure function of (seed, stream, index)."""

import numpy as np
from hypothesis import given
from hypothesis import strategies as st

from branchwalk import ALGORITHM, CounterRng

U64 = st.integers(min_value=0, max_value=2 ** 64 - 1)


def test_algorithm_identifier():
    assert ALGORITHM == "splitmix64-counter/v1"


@given(U64, st.integers(min_value=0, max_value=7), U64)
def test_draws_are_pure(seed, stream, index):
    a = CounterRng(seed, stream=stream)
    b = CounterRng(seed, stream=stream)
    assert a.u64(index) == b.u64(index)
    assert 0.0 <= a.uniform(index) < 1.0


def test_streams_decorrelate():
    draws = {CounterRng(42, stream=s).u64(0) for s in range(8)}
    assert len(draws) == 8


def test_array_matches_scalar_loop():
    rng = CounterRng(7, stream=3)
    np.testing.assert_array_equal(
        rng.u64_array(100, 50), np.array([rng.u64(100 + i) for i in range(50)],
                                         dtype=np.uint64))
    np.testing.assert_array_equal(
        rng.uniform_array(5, 17), [rng.uniform(5 + i) for i in range(17)])


def test_uniform_moments_are_sane():
    u = CounterRng(0, stream=1).uniform_array(0, 4096)
    assert abs(u.mean() - 0.5) < 0.02
    assert abs(u.var() - 1.0 / 12.0) < 0.005
