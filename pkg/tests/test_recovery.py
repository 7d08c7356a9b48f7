import numpy as np
import pytest
import scipy.linalg as sla
from hypothesis import given, settings
from scipy.integrate import quad as adaptive_quad

from qchain.divergences import umegaki
from qchain.matrix_core import ValidationError, frac_power, support_projector
from qchain.quantum_objects import (
    identity_channel,
    random_channel,
    random_density,
)
from qchain.recovery import (
    Superoperator,
    averaged_map,
    beta0,
    build_quadrature,
    petz_map,
    rotated_petz_map,
    trace_condition,
    twisted_map,
    universal_recovery_map,
    unvec,
    vec,
)

from .conftest import dims, seeds


def test_vec_convention():
    x = np.arange(4).reshape(2, 2)
    assert list(vec(x)) == [0, 2, 1, 3]
    np.testing.assert_array_equal(unvec(vec(x), 2), x)
    a, b = np.random.default_rng(0).standard_normal((2, 2, 2))
    np.testing.assert_allclose(vec(a @ x @ b), np.kron(b.T, a) @ vec(x))


def test_beta0_integrates_to_one_adaptive_oracle():
    # cosh(pi t) + 1 = 2 cosh^2(pi t / 2)
    val, _ = adaptive_quad(lambda t: np.pi / 4 / np.cosh(np.pi * t / 2) ** 2, -40, 40, limit=200)
    assert val == pytest.approx(1, abs=1e-10)
    q = build_quadrature()
    assert abs(q.mass - 1) < 1e-8


def test_truncated_quadrature_visibly_short():
    q = build_quadrature(8, 2.0)
    ref, _ = adaptive_quad(lambda t: float(beta0(t)), -2, 2)
    assert q.mass < 1 - 1e-3
    # 8 Gauss nodes resolve the [-2, 2] integral only to about 1e-2
    assert q.mass == pytest.approx(ref, abs=2e-2)


def test_quadrature_symmetric():
    q = build_quadrature()
    np.testing.assert_allclose(q.nodes, -q.nodes[::-1], atol=1e-12)
    np.testing.assert_allclose(q.weights, q.weights[::-1], atol=1e-15)
    assert np.all(q.weights > 0)


@pytest.mark.parametrize("omega", [0.0, 0.5, 1.3, 2.7])
def test_quadrature_fourier_oracle(omega):
    # int beta0(t) e^{i omega t} dt = omega / sinh(omega)
    q = build_quadrature()
    got = np.sum(q.weights * np.cos(omega * q.nodes))
    ref = 1.0 if omega == 0 else omega / np.sinh(omega)
    assert got == pytest.approx(ref, abs=1e-10)


def test_quadrature_rejects_bad_parameters():
    with pytest.raises(ValidationError):
        build_quadrature(4, 12.0)
    with pytest.raises(ValidationError):
        build_quadrature(400, -1.0)


def _petz_oracle(sigma, m, x):
    ms = m(sigma)
    inv = np.linalg.pinv(sla.sqrtm(ms))
    s = sla.sqrtm(sigma)
    return s @ m.adjoint(inv @ x @ inv) @ s


def _twisted_oracle(gamma, sigma, m, t, x):
    a = (1 - 1j * t) / 2
    left = frac_power(gamma, -a)
    right = frac_power(gamma, -np.conj(a))
    return frac_power(sigma, a) @ m.adjoint(left @ x @ right) @ frac_power(sigma, np.conj(a))


@given(seeds, dims)
def test_petz_matches_textbook_formula(seed, d):
    sigma = random_density(d, seed=seed)
    m = random_channel(d, 2, d, seed=seed + 1)
    x = random_density(2, seed=seed + 2)
    np.testing.assert_allclose(petz_map(sigma, m)(x), _petz_oracle(sigma, m, x), atol=1e-10)


@given(seeds, dims)
def test_twisted_matches_direct_formula(seed, d):
    rng = np.random.default_rng(seed)
    sigma = random_density(d, seed=rng)
    m = random_channel(d, d, 2, seed=rng)
    gamma = random_density(d, seed=rng) * 1.7
    t = float(rng.uniform(-3, 3))
    x = random_density(d, seed=rng)
    np.testing.assert_allclose(twisted_map(gamma, sigma, m, t)(x), _twisted_oracle(gamma, sigma, m, t, x), atol=1e-10)


def test_averaged_map_is_weighted_sum_of_twisted_maps():
    sigma = random_density(2, seed=1)
    m = random_channel(2, 2, 2, seed=2)
    gamma = random_density(2, seed=3)
    q = build_quadrature(16, 6.0)
    total = sum(w * twisted_map(gamma, sigma, m, t).matrix for t, w in zip(q.nodes, q.weights))
    np.testing.assert_allclose(averaged_map(gamma, sigma, m, q).matrix, total, atol=1e-13)


def test_petz_fixed_point_and_identity_case(quad):
    sigma = random_density(3, seed=4)
    m = random_channel(3, 2, 3, seed=5)
    np.testing.assert_allclose(petz_map(sigma, m)(m(sigma)), sigma, atol=1e-10)
    np.testing.assert_allclose(universal_recovery_map(sigma, m, quad)(m(sigma)), sigma, atol=1e-7)
    x = random_density(3, seed=6)
    ident = identity_channel(3)
    np.testing.assert_allclose(twisted_map(sigma, sigma, ident, 0.7)(x), x, atol=1e-10)
    np.testing.assert_allclose(averaged_map(sigma, sigma, ident, quad)(x), x, atol=1e-7)


def test_identity_case_on_support_only():
    sigma = random_density(3, rank=2, seed=7)
    x = random_density(3, seed=8)
    p = support_projector(sigma)
    np.testing.assert_allclose(twisted_map(sigma, sigma, identity_channel(3), 1.1)(x), p @ x @ p, atol=1e-10)


@given(seeds, dims)
def test_rotated_petz_trace_preserving_on_support(seed, d):
    rng = np.random.default_rng(seed)
    sigma = random_density(d, seed=rng)
    m = random_channel(d, 2, d, seed=rng)
    p = support_projector(m(sigma))
    x = p @ random_density(2, seed=rng) @ p
    t = float(rng.uniform(-4, 4))
    assert np.trace(rotated_petz_map(sigma, m, t)(x)).real == pytest.approx(np.trace(x).real, abs=1e-10)


@settings(max_examples=25)
@given(seeds, dims)
def test_complete_positivity(seed, d):
    rng = np.random.default_rng(seed)
    sigma = random_density(d, seed=rng)
    m = random_channel(d, 2, d, seed=rng)
    gamma = random_density(2, seed=rng) * float(rng.uniform(0.3, 3))
    q = build_quadrature(64, 8.0)
    assert twisted_map(gamma, sigma, m, float(rng.uniform(-5, 5))).min_choi_eigenvalue() >= -1e-8
    assert averaged_map(gamma, sigma, m, q).min_choi_eigenvalue() >= -1e-8


def test_hermiticity_preserving(quad):
    sigma, gamma = random_density(3, seed=1), random_density(3, seed=2)
    m = random_channel(3, 3, 2, seed=3)
    y = averaged_map(gamma, sigma, m, quad)(random_density(3, seed=4))
    np.testing.assert_allclose(y, y.conj().T, atol=1e-9)


def test_quadrature_convergence():
    sigma, gamma = random_density(3, seed=11), random_density(2, seed=12)
    m = random_channel(3, 2, 2, seed=13)
    a = averaged_map(gamma, sigma, m, build_quadrature(400, 12.0)).matrix
    b = averaged_map(gamma, sigma, m, build_quadrature(800, 12.0)).matrix
    assert np.max(np.abs(a - b)) < 1e-8


def test_superoperator_composition_and_choi():
    m = random_channel(2, 3, 2, seed=1)
    s = Superoperator.from_kraus(m)
    np.testing.assert_allclose(s.choi, m.choi, atol=1e-12)
    r = petz_map(random_density(2, seed=2), m)
    comp = r.compose(s)
    assert (comp.d_in, comp.d_out) == (2, 2)
    x = random_density(2, seed=3)
    np.testing.assert_allclose(comp(x), r(m(x)), atol=1e-12)
    np.testing.assert_allclose((0.5 * s + 0.5 * s)(x), m(x), atol=1e-12)
    with pytest.raises(ValidationError):
        s.compose(s)


def test_trace_condition_cases(quad):
    rho, sigma = random_density(3, seed=21), random_density(3, seed=22)
    m = random_channel(3, 2, 3, seed=23)
    t_val, holds = trace_condition(rho, m(sigma), sigma, m, random_density(2, seed=24), quad)
    assert t_val == pytest.approx(1, abs=1e-6) and holds
    t_val, holds = trace_condition(rho, m(sigma), sigma, m, np.zeros((2, 2)), quad)
    assert t_val == 0 and holds
    with pytest.raises(ValidationError):
        trace_condition(rho, m(sigma), sigma, m, np.eye(3) / 3, quad)


def test_exact_recovery_gives_equality():
    sigma = random_density(3, seed=31)
    m = random_channel(3, 3, 1, seed=32)  # unitary: always exactly recoverable
    rho = random_density(3, seed=33)
    np.testing.assert_allclose(petz_map(sigma, m)(m(rho)), rho, atol=1e-8)
    assert abs(umegaki(rho, sigma) - umegaki(m(rho), m(sigma))) < 1e-6


def test_dimension_errors():
    m = random_channel(3, 2, 2, seed=1)
    with pytest.raises(ValidationError):
        twisted_map(np.eye(3) / 3, random_density(3, seed=2), m, 0.0)
    with pytest.raises(ValidationError):
        twisted_map(np.eye(2) / 2, random_density(2, seed=2), m, 0.0)
