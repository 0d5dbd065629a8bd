"""Marginal-vs-fiber identities on the bundled scenarios.

The heavyweight all-scenario sweep lives in test_acceptance; here the
two integral routes are exercised directly, plus report determinism
and the refinement behaviour of the grid quadrature.
"""

import json

import numpy as np
import pytest

from branchwalk import (
    DepthMismatch,
    build_bundle,
    integrate,
    lhs_integral,
    load_scenario,
    parse_config,
    rhs_integral,
    verify_bundle,
    verify_cross_oracle,
    verify_disintegration,
    verify_duality,
    verify_pushforward,
    verify_quasi_invariance,
)
from branchwalk import exactnum as xn


def rebuilt(name, **measure_overrides):
    cfg = load_scenario(name)
    data = cfg.as_dict()
    data["measure"] = {**data["measure"], **measure_overrides}
    return build_bundle(parse_config(data, source=f"{name}(modified)"))


# ---------------------------------------------------------------------------
# the two routes


def test_depth_zero_is_the_plain_integral(bundles):
    for b in bundles.values():
        name, g = next(iter(b.tests))
        base = integrate(b.mu0, g)
        assert abs(xn.to_float(lhs_integral(b, g, 0) - base)) == 0.0
        assert abs(xn.to_float(rhs_integral(b, g, 0) - base)) < 1e-15


def test_routes_agree_exactly_on_golden(bundles):
    b = bundles["golden-mean"]
    for name, g in b.tests:
        for n in (1, 2, 3):
            diff = lhs_integral(b, g, n) - rhs_integral(b, g, n)
            assert xn.canon(diff) == 0


def test_routes_agree_on_the_circle(bundles):
    b = bundles["haar-circle"]
    for name, g in list(b.tests)[:5]:
        for n in (1, 3):
            d = abs(lhs_integral(b, g, n) - rhs_integral(b, g, n))
            assert d < 1e-12


def test_routes_agree_on_julia_cloud(bundles):
    b = bundles["julia-c0"]
    for name, g in b.tests:
        d = abs(lhs_integral(b, g, 2) - rhs_integral(b, g, 2))
        assert d < 0.02


def test_cylinder_depth_guard(bundles):
    b = bundles["golden-mean"]
    name, g = next(iter(b.tests))
    with pytest.raises(DepthMismatch):
        lhs_integral(b, g, b.mu0.depth + 1)


# ---------------------------------------------------------------------------
# check drivers


def test_full_check_sweep_on_an_exact_scenario(bundles):
    reports = verify_bundle(bundles["2-shift-weighted"])
    names = [r.check for r in reports]
    assert names == ["fixed-point-property", "duality", "pushforward",
                     "disintegration", "quasi-invariance", "transfer-oracle"]
    for r in reports:
        assert r.passed, r.summary()
        assert r.max_discrepancy == 0.0


def test_individual_checks_on_the_stretched_filter(bundles):
    b = bundles["stretched-haar"]
    assert verify_duality(b).passed
    assert verify_pushforward(b).passed
    r = verify_disintegration(b, depths=(0, 1, 2))
    assert r.passed and r.max_discrepancy < 1e-10


def test_quasi_invariance_skips_depth_zero(bundles):
    b = bundles["golden-mean"]
    r = verify_quasi_invariance(b, depths=(0, 1, 2))
    assert r.passed
    assert {row["n"] for row in r.rows} == {1, 2}


def test_cross_oracle_routes_through_transfer_powers(bundles):
    b = bundles["haar-circle"]
    r = verify_cross_oracle(b, depths=(0, 2))
    assert r.passed and r.max_discrepancy < 1e-12


# ---------------------------------------------------------------------------
# report mechanics


def test_report_payload_is_deterministic():
    a = verify_disintegration(build_bundle(load_scenario("golden-mean")))
    b = verify_disintegration(build_bundle(load_scenario("golden-mean")))
    assert a.to_json() == b.to_json()
    assert a.runtime > 0.0 and "runtime" not in a.payload()


def test_report_summary_reads_as_one_line(bundles):
    r = verify_duality(bundles["golden-mean"])
    line = r.summary()
    assert "\n" not in line
    assert line.startswith("golden-mean duality: pass")


def test_payload_round_trips_through_json(bundles):
    r = verify_pushforward(bundles["2-shift-weighted"])
    decoded = json.loads(r.to_json())
    assert decoded["passed"] is True
    assert decoded["check"] == "pushforward"
    assert all(set(row) >= {"test", "lhs", "rhs", "discrepancy", "exact"}
               for row in decoded["rows"])


# ---------------------------------------------------------------------------
# grid refinement


def test_refining_the_grid_does_not_worsen_discrepancies():
    coarse = rebuilt("haar-circle", size=2048)
    fine = rebuilt("haar-circle", size=4096)
    d_coarse = verify_disintegration(coarse, depths=(1, 3)).max_discrepancy
    d_fine = verify_disintegration(fine, depths=(1, 3)).max_discrepancy
    assert d_fine <= d_coarse + 1e-14


def test_rebuild_helper_respects_overrides():
    b = rebuilt("haar-circle", size=1024)
    assert b.mu0.size == 1024
