"""One verifier per chain-rule / data-processing inequality.

Every verifier evaluates both sides on a concrete instance and returns a
:class:`~qchain.reports.VerdictReport` for ``lhs >= rhs``. Quadrature-free
checks default to ``tol = 1e-8``; anything built on the averaged recovery map
defaults to ``tol = 1e-6``.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment

from .divergences import PROB_FLOOR, fidelity, kl, measured_eigenbasis, umegaki
from .matrix_core import ValidationError, as_psd, commutator_norm, eig_hermitian, exp_b, log_b, support_projector
from .partitions import StochasticMatrix, ensemble_partition
from .quantum_objects import KrausMap, Povm, as_density, ketbra, random_povm
from .recovery import QuadratureScheme, averaged_map, build_quadrature, universal_recovery_map
from .reports import VerdictReport, ext_sub, ext_sum, finalize_report, gap, instance_digest

TOL_EXACT = 1e-8
TOL_QUAD = 1e-6
COMMUTE_ATOL = 1e-9

EIGEN_NOTE = "rank-1 eigenprojectors, descending eigenvalues, deterministic tie-break"


def _check_pair(rho, sigma, m: KrausMap, n: KrausMap):
    rho = as_density(rho, "rho")
    sigma = as_density(sigma, "sigma")
    if rho.shape != sigma.shape:
        raise ValidationError(f"rho {rho.shape} and sigma {sigma.shape} differ in dimension")
    d = rho.shape[0]
    for name, c in (("M", m), ("N", n)):
        if c.d_in != d:
            raise ValidationError(f"channel {name} has d_in={c.d_in}, states have dim {d}")
    if m.d_out != n.d_out:
        raise ValidationError(f"channels have different output dims {m.d_out} vs {n.d_out}")
    return rho, sigma


def _expectation(weights, divs) -> float:
    """``sum_j w_j D_j`` skipping weights below the probability floor."""
    total = 0.0
    for w, dv in zip(weights, divs):
        if w > PROB_FLOOR:
            total += w * dv
    return total


def _pure(v) -> np.ndarray:
    return ketbra(v)


# --- partition chain rule ---------------------------------------------------

def verify_thm1(rho, sigma, m: KrausMap, n: KrausMap, g: Povm, strengthened: bool = False,
                convention: str = "eigenbasis_transpose", tol: float = TOL_EXACT) -> VerdictReport:
    """Chain rule through POVM ensemble partitions.

    ``D(rho||sigma) - D(M(rho)||N(sigma)) >= -E_{P_rho^G} D(M(rho_j)||N(sigma_j))``;
    with ``strengthened`` the first term is ``D_G(rho||sigma)``.

    The channels act on the states the partition averages to, which is
    ``rho`` itself for ``eigenbasis_transpose`` and ``rho^T`` for
    ``canonical_transpose``.
    """
    rho, sigma = _check_pair(rho, sigma, m, n)
    pr = ensemble_partition(rho, g, convention)
    ps = ensemble_partition(sigma, g, convention)
    rho_bar, sigma_bar = pr.reconstruct(), ps.reconstruct()

    first = kl(pr.weights, ps.weights) if strengthened else umegaki(rho, sigma)
    out = umegaki(m(rho_bar), n(sigma_bar))
    terms = []
    for j, w, rj in pr.active():
        sj = ps.states[j]
        terms.append(math.inf if sj is None else umegaki(m(rj), n(sj)))
    weights = [w for _, w, _ in pr.active()]
    rhs = -_expectation(weights, terms)
    return finalize_report(
        "thm1_strengthened" if strengthened else "thm1",
        lhs=gap(first, out),
        rhs=rhs,
        tol=tol,
        side_conditions={"n_outcomes": len(g), "D_first": first, "D_out": out},
        digest=instance_digest(rho, sigma, m, n, g),
        basis_note=f"partition convention {convention}",
    )


def search_thm1_povm(rho, sigma, m: KrausMap, n: KrausMap, trials: int = 20, n_outcomes: int | None = None,
                     seed: int = 0, strengthened: bool = False) -> VerdictReport:
    """Random-restart search for the POVM giving the tightest (largest) right side.

    A heuristic scan over seeded random POVMs, not an optimization guarantee.
    """
    d = np.asarray(rho).shape[0]
    k = n_outcomes or d
    best = None
    for trial in range(trials):
        g = random_povm(d, k, seed=[seed, trial])
        rep = verify_thm1(rho, sigma, m, n, g, strengthened=strengthened)
        if best is None or (rep.asserted and rep.rhs > best.rhs):
            best = rep
    best.side_conditions["povm_trials"] = trials
    best.side_conditions["search"] = "best of seeded random POVMs; no optimality claim"
    return best


# --- commuting inputs and their corollaries ---------------------------------

def common_eigenbasis(rho, sigma) -> np.ndarray:
    """Orthonormal basis diagonalizing two commuting Hermitian matrices.

    Diagonalizes ``sigma`` inside each (grouped) eigenspace of ``rho``.
    """
    spec = eig_hermitian(rho, group=True)
    cols = []
    for grp in spec.groups:
        v = spec.basis[:, list(grp)]
        if len(grp) == 1:
            cols.append(v)
            continue
        block = v.conj().T @ np.asarray(sigma) @ v
        inner = eig_hermitian((block + block.conj().T) / 2).basis
        cols.append(v @ inner)
    return np.hstack(cols)


def verify_commuting(rho, sigma, m: KrausMap, n: KrausMap, tol: float = TOL_EXACT) -> VerdictReport:
    """``D(rho||sigma) - D(M(rho)||N(sigma)) >= -E_p D(M(Pi_j)||N(Pi_j))`` for commuting inputs."""
    rho, sigma = _check_pair(rho, sigma, m, n)
    cn = commutator_norm(rho, sigma)
    if cn >= COMMUTE_ATOL:
        raise ValidationError(f"rho and sigma do not commute: commutator norm max|[rho, sigma]| = {cn:.3e}")
    basis = common_eigenbasis(rho, sigma)
    p = np.einsum("ik,ij,jk->k", basis.conj(), rho, basis).real
    terms = [umegaki(m(_pure(basis[:, j])), n(_pure(basis[:, j]))) if p[j] > PROB_FLOOR else 0.0
             for j in range(basis.shape[1])]
    return finalize_report(
        "commuting",
        lhs=gap(umegaki(rho, sigma), umegaki(m(rho), n(sigma))),
        rhs=-_expectation(p, terms),
        tol=tol,
        side_conditions={"commutator_norm": cn},
        digest=instance_digest(rho, sigma, m, n),
        basis_note="common eigenbasis: sigma diagonalized inside each eigenspace of rho",
    )


def verify_ensembles(p, q, taus: Sequence, mus: Sequence, tol: float = TOL_EXACT) -> VerdictReport:
    """``D(p||q) - D(sum p_j tau_j || sum q_j mu_j) >= -sum_j p_j D(tau_j||mu_j)``."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if not (len(p) == len(q) == len(taus) == len(mus)):
        raise ValidationError("p, q, taus and mus must have equal lengths")
    taus = [as_density(t, "tau") for t in taus]
    mus = [as_density(mu, "mu") for mu in mus]
    mix_t = sum(w * t for w, t in zip(p, taus))
    mix_m = sum(w * mu for w, mu in zip(q, mus))
    terms = [umegaki(t, mu) if w > PROB_FLOOR else 0.0 for w, t, mu in zip(p, taus, mus)]
    return finalize_report(
        "ensembles",
        lhs=gap(kl(p, q), umegaki(mix_t, mix_m)),
        rhs=-_expectation(p, terms),
        tol=tol,
        digest=instance_digest(p, q, list(taus), list(mus)),
        basis_note="ensemble order as given",
    )


# --- eigenbasis pairing -----------------------------------------------------

@dataclass(frozen=True)
class Pairing:
    """Bijection ``j -> permutation[j]`` on ``{0, ..., d-1}`` (0-based)."""

    permutation: tuple[int, ...]

    def __post_init__(self):
        perm = tuple(int(k) for k in self.permutation)
        if sorted(perm) != list(range(len(perm))):
            raise ValidationError(f"not a permutation: {perm}")
        object.__setattr__(self, "permutation", perm)

    @classmethod
    def identity(cls, d: int) -> "Pairing":
        return cls(tuple(range(d)))

    def __len__(self):
        return len(self.permutation)


def _spectra(rho, sigma):
    sr, ss = eig_hermitian(rho), eig_hermitian(sigma)
    return np.clip(sr.eigenvalues, 0, None), sr.basis, np.clip(ss.eigenvalues, 0, None), ss.basis


def verify_difbasis(rho, sigma, m: KrausMap, n: KrausMap, pairing: Pairing | None = None,
                    tol: float = TOL_EXACT) -> VerdictReport:
    """Semiclassical chain rule pairing eigenprojectors of rho with those of sigma.

    ``D(p||q_pi) - D(M(rho)||N(sigma)) >= -E_p D(M(Pi_j)||N(Pi~_pi(j)))`` where
    ``p``, ``q`` are the descending spectra and ``q_pi[j] = q[pi(j)]``.
    """
    rho, sigma = _check_pair(rho, sigma, m, n)
    d = rho.shape[0]
    pairing = pairing or Pairing.identity(d)
    if len(pairing) != d:
        raise ValidationError(f"pairing of length {len(pairing)} for dimension {d}")
    p, u, q, v = _spectra(rho, sigma)
    perm = list(pairing.permutation)
    terms = [umegaki(m(_pure(u[:, j])), n(_pure(v[:, perm[j]]))) if p[j] > PROB_FLOOR else 0.0
             for j in range(d)]
    return finalize_report(
        "difbasis",
        lhs=gap(kl(p, q[perm]), umegaki(m(rho), n(sigma))),
        rhs=-_expectation(p, terms),
        tol=tol,
        side_conditions={"pairing": list(pairing.permutation)},
        digest=instance_digest(rho, sigma, m, n),
        basis_note=EIGEN_NOTE,
    )


def pairing_costs(rho, sigma, m: KrausMap, n: KrausMap) -> np.ndarray:
    """``c[j, k] = p_j D(M(Pi_j) || N(Pi~_k))`` (zero for zero-weight rows)."""
    rho, sigma = _check_pair(rho, sigma, m, n)
    p, u, _, v = _spectra(rho, sigma)
    d = len(p)
    cost = np.zeros((d, d))
    for j in range(d):
        if p[j] <= PROB_FLOOR:
            continue
        mj = m(_pure(u[:, j]))
        for k in range(d):
            cost[j, k] = p[j] * umegaki(mj, n(_pure(v[:, k])))
    return cost


def solve_assignment(cost) -> tuple[tuple[int, ...], float]:
    """Minimum-cost perfect matching; ``inf`` entries are avoided when possible.

    Returns the permutation (row j -> column perm[j]) and its total cost.
    """
    cost = np.asarray(cost, dtype=float)
    finite = np.isfinite(cost)
    if finite.all():
        work = cost
    else:
        span = float(np.abs(cost[finite]).sum()) if finite.any() else 0.0
        work = np.where(finite, cost, (span + 1.0) * (cost.shape[0] + 1))
    rows, cols = linear_sum_assignment(work)
    perm = tuple(int(c) for _, c in sorted(zip(rows, cols)))
    total = float(sum(cost[j, perm[j]] for j in range(len(perm))))
    return perm, total


def brute_force_assignment(cost) -> tuple[tuple[int, ...], float]:
    """Exhaustive minimum over all permutations (reference for small d)."""
    cost = np.asarray(cost, dtype=float)
    d = cost.shape[0]
    best, best_val = None, math.inf
    for perm in itertools.permutations(range(d)):
        val = float(sum(cost[j, perm[j]] for j in range(d)))
        if best is None or val < best_val:
            best, best_val = perm, val
    return best, best_val


def optimize_pairing(rho, sigma, m: KrausMap, n: KrausMap,
                     tol: float = TOL_EXACT) -> tuple[Pairing, VerdictReport]:
    """Pairing that minimizes ``sum_j p_j D(M(Pi_j)||N(Pi~_pi(j)))``, via linear assignment."""
    d = np.asarray(rho).shape[0]
    if d > 32:
        raise ValidationError(f"optimize_pairing supports d <= 32, got {d}")
    perm, total = solve_assignment(pairing_costs(rho, sigma, m, n))
    pairing = Pairing(perm)
    rep = verify_difbasis(rho, sigma, m, n, pairing, tol)
    rep.inequality_id = "difbasis_optimal"
    rep.side_conditions["assignment_cost"] = total
    return pairing, rep


# --- recovery-map inequalities ----------------------------------------------

def verify_general_entropy(rho, sigma, gamma, omega, m: KrausMap, q: QuadratureScheme | None = None,
                           tol: float = TOL_QUAD) -> VerdictReport:
    """``D(rho||sigma) - D(M(rho)||gamma) + D(M(rho)||omega) >= D_Pi(rho || R_bar(omega))``."""
    rho = as_density(rho, "rho")
    sigma = as_density(sigma, "sigma")
    gamma = as_psd(gamma, "gamma")
    omega = as_psd(omega, "omega")
    q = q or build_quadrature()
    m_rho = m(rho)
    first = umegaki(rho, sigma)
    lhs = math.inf if first == math.inf else ext_sum(first, -umegaki(m_rho, gamma), umegaki(m_rho, omega))
    recovered = averaged_map(gamma, sigma, m, q)(omega)
    rhs = measured_eigenbasis(rho, _herm(recovered))
    return finalize_report(
        "general_entropy",
        lhs=lhs,
        rhs=rhs,
        tol=tol,
        side_conditions={"recovered_trace": float(np.trace(recovered).real), "quad_nodes": len(q.nodes)},
        digest=instance_digest(rho, sigma, gamma, omega, m),
        basis_note="D_Pi in the eigenbasis of rho; " + EIGEN_NOTE,
    )


def verify_two_channel_dpi(rho, sigma, m: KrausMap, n: KrausMap, q: QuadratureScheme | None = None,
                           tol: float = TOL_QUAD) -> VerdictReport:
    """``D(rho||sigma) - D(M(rho)||N(sigma)) >= D_Pi(rho || R_bar_{N(sigma),sigma,M}(M(rho)))``."""
    rho, sigma = _check_pair(rho, sigma, m, n)
    q = q or build_quadrature()
    m_rho, n_sigma = m(rho), n(sigma)
    recovered = averaged_map(n_sigma, sigma, m, q)(m_rho)
    return finalize_report(
        "two_channel_dpi",
        lhs=gap(umegaki(rho, sigma), umegaki(m_rho, n_sigma)),
        rhs=measured_eigenbasis(rho, _herm(recovered)),
        tol=tol,
        side_conditions={"recovered_trace": float(np.trace(recovered).real), "quad_nodes": len(q.nodes)},
        digest=instance_digest(rho, sigma, m, n),
        basis_note="D_Pi in the eigenbasis of rho; " + EIGEN_NOTE,
    )


def verify_conditional_chain(rho, sigma, m: KrausMap, n: KrausMap, q: QuadratureScheme | None = None,
                             tol: float = TOL_QUAD, condition_tol: float = 1e-8) -> VerdictReport:
    """Conditional chain rule, asserted only when its trace condition holds.

    ``T = Tr[Pi_rho R_bar_{N(sigma),sigma,M}(N(rho))]``. When ``T <= 1`` the
    report asserts both ``D(rho||sigma) - D(M(rho)||N(sigma)) >= -D(M(rho)||N(rho))``
    and the eigenprojector form ``... >= -E_p D(M(Pi_j)||N(Pi_j))``. Otherwise
    both sides are still evaluated but nothing is asserted.
    """
    rho, sigma = _check_pair(rho, sigma, m, n)
    q = q or build_quadrature()
    n_sigma, n_rho, m_rho = n(sigma), n(rho), m(rho)
    recovered = _herm(averaged_map(n_sigma, sigma, m, q)(n_rho))
    spec = eig_hermitian(rho)
    t_val = float(np.trace(support_projector(rho) @ recovered).real)
    condition = t_val <= 1 + condition_tol

    lhs = gap(umegaki(rho, sigma), umegaki(m_rho, n_sigma))
    p = np.clip(spec.eigenvalues, 0, None)
    terms = [umegaki(m(_pure(spec.basis[:, j])), n(_pure(spec.basis[:, j]))) if p[j] > PROB_FLOOR else 0.0
             for j in range(len(p))]
    rhs = -_expectation(p, terms)
    rhs_mid = -umegaki(m_rho, n_rho)
    slack = ext_sub(lhs, rhs)
    slack_mid = ext_sub(lhs, rhs_mid)
    side = {
        "T": t_val,
        "condition_holds": condition,
        "intermediate_rhs": rhs_mid,
        "intermediate_slack": slack_mid,
        "D_Pi_recovered": measured_eigenbasis(rho, recovered),
        "chain_rule_holds": bool(lhs == math.inf or slack >= -tol),
    }
    if not condition:
        side["note"] = "condition failed, inequality not asserted"
        return finalize_report("conditional_chain", lhs, rhs, tol, side, instance_digest(rho, sigma, m, n),
                               EIGEN_NOTE, asserted=False)
    rep = finalize_report("conditional_chain", lhs, rhs, tol, side, instance_digest(rho, sigma, m, n), EIGEN_NOTE)
    mid_ok = lhs == math.inf or rhs_mid == -math.inf or slack_mid >= -tol
    rep.passed = rep.passed and bool(mid_ok)
    return rep


def verify_universal_bound(rho, sigma, m: KrausMap, q: QuadratureScheme | None = None,
                           tol: float = TOL_QUAD) -> VerdictReport:
    """``D(rho||sigma) - D(M(rho)||M(sigma)) >= -2 log F(rho, R_bar_{sigma,M}(M(rho)))``."""
    rho = as_density(rho, "rho")
    sigma = as_density(sigma, "sigma")
    q = q or build_quadrature()
    m_rho = m(rho)
    recovered = _herm(universal_recovery_map(sigma, m, q)(m_rho))
    f = fidelity(rho, recovered)
    rhs = math.inf if f <= 0 else float(-2 * log_b(f))
    return finalize_report(
        "universal_bound",
        lhs=gap(umegaki(rho, sigma), umegaki(m_rho, m(sigma))),
        rhs=rhs,
        tol=tol,
        side_conditions={"fidelity": f},
        digest=instance_digest(rho, sigma, m),
    )


def _herm(x) -> np.ndarray:
    x = np.asarray(x)
    return (x + x.conj().T) / 2


# --- classical chain rule ---------------------------------------------------

def _stochastic(a) -> np.ndarray:
    if isinstance(a, StochasticMatrix):
        return a.matrix
    return StochasticMatrix(np.asarray(a, dtype=float)).matrix


def classical_chain(p, q, m, n, tol: float = TOL_EXACT) -> VerdictReport:
    """``D(p||q) - D(Mp||Nq) >= -E_p D(M delta_j || N delta_j)`` for column-stochastic M, N."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    mm, nn = _stochastic(m), _stochastic(n)
    if mm.shape != nn.shape or mm.shape[1] != len(p) or len(p) != len(q):
        raise ValidationError("shape mismatch between distributions and stochastic matrices")
    terms = [kl(mm[:, j], nn[:, j]) if p[j] > PROB_FLOOR else 0.0 for j in range(len(p))]
    return finalize_report(
        "classical_chain",
        lhs=gap(kl(p, q), kl(mm @ p, nn @ q)),
        rhs=-_expectation(p, terms),
        tol=tol,
        digest=instance_digest(p, q, mm, nn),
    )


def classical_identity_audit(p, q, m, n) -> float:
    """``E_{M_ij p_j} exp(-log(M_ij p_j / N_ij q_j) + log(p~_i / q~_i))``; equals 1 on full support."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    mm, nn = _stochastic(m), _stochastic(n)
    if mm.shape != nn.shape or mm.shape[1] != len(p) or len(p) != len(q):
        raise ValidationError("shape mismatch between distributions and stochastic matrices")
    p_out, q_out = mm @ p, nn @ q
    joint_p = mm * p[None, :]
    joint_q = nn * q[None, :]
    total = 0.0
    for i, j in zip(*np.nonzero(joint_p > 0)):
        expo = -log_b(joint_p[i, j] / joint_q[i, j]) + log_b(p_out[i] / q_out[i])
        total += joint_p[i, j] * float(exp_b(expo))
    return float(total)
