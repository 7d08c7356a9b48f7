"""POVM-induced ensemble partitions and their stochastic matrices.

For a state ``tau`` and POVM ``{G_j}`` the partition has weights
``w_j = Tr[G_j tau]`` and states

* ``eigenbasis_transpose``: ``sqrt(tau) G_j^{T_tau} sqrt(tau) / w_j``, the
  transpose taken in the (deterministic) eigenbasis of ``tau``. The states
  average back to ``tau``.
* ``canonical_transpose``: ``(sqrt(tau) G_j sqrt(tau))^T / w_j``, the transpose
  taken in the computational basis. The states average to ``tau^T``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .divergences import PROB_FLOOR, kl
from .matrix_core import ValidationError, eig_hermitian, frac_power
from .quantum_objects import KrausMap, Povm, as_density
from .reports import VerdictReport, finalize_report, gap, instance_digest

CONVENTIONS = ("eigenbasis_transpose", "canonical_transpose")


@dataclass(frozen=True, eq=False)
class EnsemblePartition:
    """Weights and conditional states of a partition.

    ``states[j]`` is ``None`` for outcomes flagged in ``zero_weight``
    (weight <= PROB_FLOOR); those outcomes are left out of every expectation.
    """

    weights: np.ndarray
    states: tuple
    convention: str
    zero_weight: tuple[bool, ...] = field(default=())

    def active(self):
        """Yield ``(j, weight, state)`` for outcomes with positive weight."""
        for j, (w, s) in enumerate(zip(self.weights, self.states)):
            if s is not None:
                yield j, float(w), s

    def reconstruct(self) -> np.ndarray:
        return sum(w * s for _, w, s in self.active())


def transpose_in_eigenbasis(x, tau) -> np.ndarray:
    """Transpose of ``x`` taken in the deterministic eigenbasis of ``tau``."""
    u = eig_hermitian(tau).basis
    return u @ (u.conj().T @ x @ u).T @ u.conj().T


def ensemble_partition(tau, g: Povm, convention: str = "eigenbasis_transpose") -> EnsemblePartition:
    tau = as_density(tau, "tau")
    if g.dim != tau.shape[0]:
        raise ValidationError(f"POVM dim {g.dim} does not match state dim {tau.shape[0]}")
    if convention not in CONVENTIONS:
        raise ValidationError(f"unknown convention {convention!r}; expected one of {CONVENTIONS}")
    root = frac_power(tau, 0.5)
    weights = g.probabilities(tau)
    states = []
    flags = []
    for w, el in zip(weights, g.elements):
        if w <= PROB_FLOOR:
            states.append(None)
            flags.append(True)
            continue
        if convention == "eigenbasis_transpose":
            s = root @ transpose_in_eigenbasis(el, tau) @ root
        else:
            s = (root @ el @ root).T
        s = s / w
        states.append((s + s.conj().T) / 2)
        flags.append(False)
    return EnsemblePartition(np.clip(weights, 0, None), tuple(states), convention, tuple(flags))


@dataclass(frozen=True, eq=False)
class StochasticMatrix:
    """Column-stochastic matrix; ``matrix[i, j]`` is the probability of j -> i."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float)
        if m.ndim != 2:
            raise ValidationError("stochastic matrix must be 2-D")
        if np.any(m < -1e-12):
            raise ValidationError("stochastic matrix has negative entries")
        dev = np.max(np.abs(m.sum(axis=0) - 1)) if m.size else 0.0
        if dev > 1e-10:
            raise ValidationError(f"columns do not sum to 1 (deviation {dev:.3e})")
        object.__setattr__(self, "matrix", np.clip(m, 0, None))

    @property
    def cols(self) -> list[np.ndarray]:
        return [self.matrix[:, j] for j in range(self.matrix.shape[1])]

    def __matmul__(self, p):
        return self.matrix @ np.asarray(p, dtype=float)


def induced_stochastic(tau, c: KrausMap, g: Povm, f: Povm,
                       convention: str = "eigenbasis_transpose") -> StochasticMatrix:
    """Column ``j`` is the outcome distribution of ``f`` on ``c(tau_j)``.

    Zero-weight outcomes of ``g`` get a uniform placeholder column; it is
    multiplied by weight 0 wherever the matrix is used.
    """
    if f.dim != c.d_out or g.dim != c.d_in:
        raise ValidationError("POVM dimensions do not match the channel")
    part = ensemble_partition(tau, g, convention)
    cols = []
    for s in part.states:
        if s is None:
            cols.append(np.full(len(f), 1.0 / len(f)))
        else:
            cols.append(f.probabilities(c(s)))
    return StochasticMatrix(np.array(cols).T)


def measured_chain_audit(rho, sigma, m: KrausMap, n: KrausMap, g: Povm, f: Povm,
                         convention: str = "eigenbasis_transpose", tol: float = 1e-8) -> VerdictReport:
    """Finite-measurement chain rule for the measured relative entropies.

    Checks ``D_F(M(rho)||N(sigma)) - D_G(rho||sigma) <= E_{P_rho^G} D_F(M(rho_j)||N(sigma_j))``.
    The report stores it in ``>=`` orientation: ``lhs = D_G - D_F``,
    ``rhs = -E[...]``.
    """
    rho = as_density(rho, "rho")
    sigma = as_density(sigma, "sigma")
    pr = ensemble_partition(rho, g, convention)
    ps = ensemble_partition(sigma, g, convention)
    rho_bar, sigma_bar = pr.reconstruct(), ps.reconstruct()
    d_g = kl(pr.weights, ps.weights)
    d_f = kl(f.probabilities(m(rho_bar)), f.probabilities(n(sigma_bar)))
    expect = 0.0
    for j, w, rj in pr.active():
        sj = ps.states[j]
        term = np.inf if sj is None else kl(f.probabilities(m(rj)), f.probabilities(n(sj)))
        expect += w * term
    return finalize_report(
        "measured_chain",
        lhs=gap(d_g, d_f),
        rhs=-expect,
        tol=tol,
        side_conditions={"D_G": d_g, "D_F_out": d_f},
        digest=instance_digest(rho, sigma, m, n, g, f),
        basis_note=f"partition convention {convention}; eigenbasis by deterministic tie-break",
    )

