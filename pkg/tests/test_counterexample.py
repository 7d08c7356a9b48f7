import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from qchain.counterexample import (
    CSV_HEADER,
    FamilyPoint,
    default_eps_grid,
    default_theta_grid,
    eps_star,
    family_states,
    lhs_gap,
    lhs_gap_numeric,
    region_scan,
    rhs_finite_n,
    rhs_limit,
    rhs_numeric_n,
    rows_to_csv,
)
from qchain.matrix_core import ValidationError, use_log_base
from qchain.quantum_objects import Channel, as_density, pinching_channel

B1 = FamilyPoint(0.0, math.pi / 2, 0.2)

points = st.builds(
    FamilyPoint,
    p=st.floats(0.0, 0.49),
    theta=st.floats(math.pi / 10, 9 * math.pi / 10),
    eps=st.floats(0.01, 0.99),
)


def test_point_ranges():
    for bad in [(-0.1, 1.0, 0.1), (0.5, 1.0, 0.1), (0.1, 0.0, 0.1), (0.1, math.pi, 0.1), (0.1, 1.0, 1.0)]:
        with pytest.raises(ValidationError):
            FamilyPoint(*bad)


def test_example_b1_objects():
    rho, sigma, m, n = family_states(FamilyPoint(0.0, math.pi / 2, 0.1))
    np.testing.assert_allclose(rho, np.diag([1, 0]), atol=1e-15)
    minus = np.array([1, -1]) / math.sqrt(2)
    np.testing.assert_allclose(sigma, 0.9 * np.full((2, 2), 0.5) + 0.1 * np.outer(minus, minus), atol=1e-15)
    np.testing.assert_allclose(m(rho), np.outer(minus, minus), atol=1e-15)
    np.testing.assert_allclose(n(rho), np.eye(2) / 2, atol=1e-15)


@given(points)
def test_family_objects_valid(pt):
    rho, sigma, m, n = family_states(pt)
    as_density(rho)
    as_density(sigma)
    assert isinstance(m, Channel) and isinstance(n, Channel)
    if abs(pt.eps - 0.5) > 1e-6:
        x = as_density(np.array([[0.3, 0.1j], [-0.1j, 0.7]]))
        np.testing.assert_allclose(n(x), pinching_channel(sigma)(x), atol=1e-12)


def test_lhs_gap_examples():
    assert lhs_gap(B1) == pytest.approx(-1.0, abs=1e-12)
    assert lhs_gap(FamilyPoint(0.0, 1.1, 0.5)) == pytest.approx(0.0, abs=1e-15)


@given(points)
def test_lhs_gap_closed_form_vs_numeric(pt):
    assert lhs_gap(pt) == pytest.approx(lhs_gap_numeric(pt), abs=1e-9)


def test_rhs_examples():
    for n in range(1, 11):
        assert rhs_finite_n(B1, n) == pytest.approx(-1.0, abs=1e-12)
    theta = 0.9
    assert rhs_limit(FamilyPoint(0.0, theta, 0.3)) == pytest.approx(math.log2(math.sin(theta / 2) ** 2))
    with pytest.raises(ValidationError):
        rhs_finite_n(B1, 11)
    with pytest.raises(ValidationError):
        rhs_numeric_n(B1, 9)


@given(points)
def test_rhs_finite_n_constant_in_n(pt):
    lim = rhs_limit(pt)
    for n in range(1, 9):
        assert rhs_finite_n(pt, n) == pytest.approx(lim, abs=1e-12)


@pytest.mark.parametrize("n", range(1, 9))
def test_rhs_numeric_b1(n):
    assert rhs_numeric_n(B1, n) == pytest.approx(-1.0, abs=1e-9)


def test_rhs_numeric_reference_point():
    pt = FamilyPoint(0.3, 1.0, 0.2)
    assert rhs_numeric_n(pt, 4) == pytest.approx(rhs_finite_n(pt, 4), abs=1e-8)


@given(points, st.integers(1, 4))
def test_rhs_numeric_matches_binomial_sum(pt, n):
    assert rhs_numeric_n(pt, n) == pytest.approx(rhs_finite_n(pt, n), abs=1e-8)


def test_eps_star_values():
    assert eps_star(math.pi / 2, 0.0) == pytest.approx(0.2, abs=1e-12)
    assert eps_star(math.pi / 2, 0.49) == pytest.approx(0.5, abs=1e-2)
    theta = 1.2
    s = math.sin(theta) ** 2
    assert eps_star(theta, 0.4999999) == pytest.approx(s / (1 + s), abs=1e-5)
    c2, s2 = math.cos(theta / 2) ** 2, math.sin(theta / 2) ** 2
    assert eps_star(theta, 0.0) == pytest.approx(s2 ** (1 / c2) / (1 + s2 ** (1 / c2)), abs=1e-12)


@given(st.floats(0.01, math.pi - 0.01), st.floats(0.0, 0.49))
def test_eps_star_in_unit_interval_and_boundary(theta, p):
    e = eps_star(theta, p)
    assert 0 < e < 1
    if 1e-6 < e < 1 - 1e-6:
        below, above = FamilyPoint(p, theta, e * (1 - 1e-6)), FamilyPoint(p, theta, min(e * (1 + 1e-6), 0.999999))
        assert lhs_gap(below) < rhs_limit(below)
        assert lhs_gap(above) > rhs_limit(above)


def test_eps_star_base_independent():
    with use_log_base(math.e):
        nat = eps_star(1.3, 0.2)
    assert eps_star(1.3, 0.2) == pytest.approx(nat, abs=1e-14)


def test_region_scan_small_grid_order_and_flags():
    rows = region_scan(p_values=[0.0, 0.25], theta_grid=[1.0, 2.0], eps_grid=[0.05, 0.3], n_numeric=2)
    keys = [(r.p, r.theta, r.eps) for r in rows]
    assert keys == sorted(keys) and len(rows) == 8
    for r in rows:
        assert r.violated_analytic == (r.eps < r.eps_star)
        assert r.violated_numeric == r.violated_analytic
        assert r.n_used == 2


def test_region_scan_b1_slice():
    rows = region_scan(p_values=[0.0], theta_grid=[math.pi / 2], eps_grid=[0.19, 0.2, 0.21])
    assert [r.violated_analytic for r in rows] == [True, False, False]
    assert [r.violated_numeric for r in rows] == [True, False, False]


def test_region_scan_p0_no_violation_above_half():
    rows = region_scan(p_values=[0.0], eps_grid=[0.51, 0.6, 0.9], n_numeric=1)
    assert not any(r.violated_analytic or r.violated_numeric for r in rows)


def test_region_scan_errors():
    with pytest.raises(ValidationError):
        region_scan(p_values=[])
    with pytest.raises(ValidationError):
        region_scan(n_numeric=7)


def test_default_grids():
    assert len(default_theta_grid()) == 49 and len(default_eps_grid()) == 49
    assert default_eps_grid()[0] == 0.01 and default_eps_grid()[-1] == 0.49


def test_csv_format():
    rows = region_scan(p_values=[0.0], theta_grid=[math.pi / 2], eps_grid=[0.1], n_numeric=1)
    text = rows_to_csv(rows)
    lines = text.split("\n")
    assert lines[0] == ",".join(CSV_HEADER)
    assert lines[0] == "p,theta,eps,lhs_gap,rhs_limit,eps_star,violated_analytic,violated_numeric,n_used"
    assert lines[1] == "0,1.57079632679,0.1,-1.58496250072,-1,0.2,1,1,1"
    assert text.endswith("\n") and "\r" not in text
