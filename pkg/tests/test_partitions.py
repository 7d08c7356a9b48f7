import numpy as np
import pytest
from hypothesis import given

from qchain.divergences import kl
from qchain.inequalities import classical_chain
from qchain.matrix_core import ValidationError
from qchain.partitions import (
    StochasticMatrix,
    ensemble_partition,
    induced_stochastic,
    measured_chain_audit,
    transpose_in_eigenbasis,
)
from qchain.quantum_objects import (
    Povm,
    identity_channel,
    maximally_mixed,
    prob_from_povm,
    projective_povm,
    random_channel,
    random_density,
    random_povm,
    random_unitary,
    replacement_channel,
)

from .conftest import dims, seeds


def test_maximally_mixed_canonical_projectors():
    g = projective_povm(np.eye(3))
    part = ensemble_partition(maximally_mixed(3), g)
    np.testing.assert_allclose(part.weights, [1 / 3] * 3, atol=1e-12)
    for j, s in enumerate(part.states):
        np.testing.assert_allclose(s, g.elements[j], atol=1e-12)


def test_common_eigenprojectors_are_self_transpose():
    u = random_unitary(3, seed=2)
    rho = u @ np.diag([0.5, 0.3, 0.2]) @ u.conj().T
    g = projective_povm(u)
    part = ensemble_partition(rho, g)
    for j, s in enumerate(part.states):
        np.testing.assert_allclose(s, g.elements[j], atol=1e-10)


@given(seeds, dims)
def test_reconstruction_both_conventions(seed, d):
    tau = random_density(d, seed=seed)
    g = random_povm(d, d + 1, seed=seed + 1)
    eig = ensemble_partition(tau, g, "eigenbasis_transpose")
    can = ensemble_partition(tau, g, "canonical_transpose")
    np.testing.assert_allclose(eig.reconstruct(), tau, atol=1e-10)
    np.testing.assert_allclose(can.reconstruct(), tau.T, atol=1e-10)
    np.testing.assert_allclose(eig.weights, prob_from_povm(g, tau), atol=1e-12)
    for s in eig.states:
        assert np.trace(s).real == pytest.approx(1, abs=1e-10)
        assert np.linalg.eigvalsh(s).min() > -1e-10


def test_zero_weight_outcome_flagged():
    tau = np.diag([1.0, 0.0]).astype(complex)
    part = ensemble_partition(tau, projective_povm(np.eye(2)))
    assert part.zero_weight == (False, True)
    assert part.states[1] is None
    assert [j for j, _, _ in part.active()] == [0]


def test_partition_errors():
    with pytest.raises(ValidationError, match="does not match"):
        ensemble_partition(random_density(2, seed=0), random_povm(3, 2, seed=0))
    with pytest.raises(ValidationError, match="convention"):
        ensemble_partition(random_density(2, seed=0), random_povm(2, 2, seed=0), "other")


def test_transpose_in_eigenbasis_fixes_diagonal_ops():
    tau = random_density(3, seed=8)
    np.testing.assert_allclose(transpose_in_eigenbasis(tau, tau), tau, atol=1e-12)


def test_stochastic_matrix_validation():
    StochasticMatrix(np.array([[0.3, 1.0], [0.7, 0.0]]))
    with pytest.raises(ValidationError, match="columns"):
        StochasticMatrix(np.array([[0.3, 1.0], [0.6, 0.0]]))
    with pytest.raises(ValidationError, match="negative"):
        StochasticMatrix(np.array([[1.5, 1.0], [-0.5, 0.0]]))


@given(seeds, dims)
def test_induced_stochastic_output_identity(seed, d):
    tau = random_density(d, seed=seed)
    c = random_channel(d, 2, d, seed=seed + 1)
    g, f = random_povm(d, 3, seed=seed + 2), random_povm(2, 3, seed=seed + 3)
    mat = induced_stochastic(tau, c, g, f)
    np.testing.assert_allclose(mat.matrix.sum(axis=0), 1, atol=1e-12)
    np.testing.assert_allclose(mat @ g.probabilities(tau), f.probabilities(c(tau)), atol=1e-9)


def test_induced_stochastic_trivial_cases():
    tau = np.diag([0.6, 0.4]).astype(complex)
    g = projective_povm(np.eye(2))
    mat = induced_stochastic(tau, identity_channel(2), g, g)
    np.testing.assert_allclose(mat.matrix, np.eye(2), atol=1e-12)
    w0 = random_density(2, seed=1)
    f = random_povm(2, 3, seed=2)
    mat = induced_stochastic(random_density(2, seed=3), replacement_channel(2, w0), random_povm(2, 4, seed=4), f)
    for col in mat.cols:
        np.testing.assert_allclose(col, f.probabilities(w0), atol=1e-12)


def test_measured_chain_trivial():
    rho = random_density(3, seed=1)
    m = random_channel(3, 3, 2, seed=2)
    rep = measured_chain_audit(rho, rho, m, m, random_povm(3, 3, seed=3), random_povm(3, 2, seed=4))
    assert rep.passed
    assert rep.lhs == pytest.approx(0, abs=1e-12) and rep.rhs == pytest.approx(0, abs=1e-12)


def test_measured_chain_commuting_reduces_to_classical():
    u = random_unitary(3, seed=5)
    rho = u @ np.diag([0.5, 0.3, 0.2]) @ u.conj().T
    # nondegenerate: the eigenbasis transpose of sigma must fix each projector of u
    sigma = u @ np.diag([0.1, 0.3, 0.6]) @ u.conj().T
    g = projective_povm(u)
    m, n = random_channel(3, 2, 2, seed=6), random_channel(3, 2, 2, seed=7)
    f = random_povm(2, 3, seed=8)
    rep = measured_chain_audit(rho, sigma, m, n, g, f)
    mm = StochasticMatrix(np.array([f.probabilities(m(p)) for p in g.elements]).T)
    nn = StochasticMatrix(np.array([f.probabilities(n(p)) for p in g.elements]).T)
    p, q = g.probabilities(rho), g.probabilities(sigma)
    cls = classical_chain(p, q, mm, nn)
    assert rep.slack == pytest.approx(cls.slack, abs=1e-10)
    assert rep.side_conditions["D_G"] == pytest.approx(kl(p, q))


@given(seeds, dims)
def test_measured_chain_holds(seed, d):
    rng = np.random.default_rng(seed)
    rho, sigma = random_density(d, seed=rng), random_density(d, seed=rng)
    m, n = random_channel(d, d, 2, seed=rng), random_channel(d, d, 2, seed=rng)
    rep = measured_chain_audit(rho, sigma, m, n, random_povm(d, 3, seed=rng), random_povm(d, 3, seed=rng))
    assert rep.passed, rep.to_dict()
