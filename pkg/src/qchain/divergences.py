"""Relative entropies and fidelity.

Every divergence returns a Python ``float`` where ``math.inf`` marks a support
violation; infinities are ordinary return values, not errors. Logarithms use
the configured base (see :func:`qchain.matrix_core.use_log_base`).
"""
from __future__ import annotations

import math

import numpy as np

from .matrix_core import (
    SUPPORT_RTOL,
    ValidationError,
    as_hermitian,
    as_psd,
    eig_hermitian,
    frac_power,
    log_b,
    mat_log_support,
    support_projector,
)
from .quantum_objects import Povm, as_density

PROB_FLOOR = 1e-14
SUPPORT_ATOL = 1e-9


def kl(p, q) -> float:
    """Kullback-Leibler divergence ``sum_x p_x log(p_x / q_x)``.

    ``q`` may be unnormalized. Entries of ``p`` at or below ``PROB_FLOOR``
    contribute nothing; a positive ``p_x`` with ``q_x <= PROB_FLOOR`` gives
    ``inf``.
    """
    p = np.asarray(p, dtype=float).reshape(-1)
    q = np.asarray(q, dtype=float).reshape(-1)
    if p.shape != q.shape:
        raise ValidationError(f"length mismatch: {p.size} vs {q.size}")
    active = p > PROB_FLOOR
    if np.any(q[active] <= PROB_FLOOR):
        return math.inf
    pa, qa = p[active], q[active]
    return float(np.sum(pa * (log_b(pa) - log_b(qa))))


def binary_entropy(p: float) -> float:
    if p <= 0 or p >= 1:
        return 0.0
    return float(-p * log_b(p) - (1 - p) * log_b(1 - p))


def von_neumann_entropy(rho) -> float:
    w = np.linalg.eigvalsh(as_hermitian(rho))
    w = w[w > PROB_FLOOR]
    return float(-np.sum(w * log_b(w)))


def umegaki(rho, sigma, rel_tol: float = SUPPORT_RTOL) -> float:
    """Umegaki relative entropy ``Tr[rho (log rho - log sigma)]``.

    ``sigma`` may be any PSD operator (unnormalized is fine). Returns ``inf``
    when ``rho`` has weight above ``SUPPORT_ATOL`` outside the support of
    ``sigma``; ``rel_tol`` sets that support threshold relative to the
    largest eigenvalue of ``sigma``.
    """
    rho = as_density(rho, "rho")
    sigma = as_psd(sigma, "sigma")
    if rho.shape != sigma.shape:
        raise ValidationError(f"dimension mismatch: rho {rho.shape} vs sigma {sigma.shape}")
    leak = np.trace(rho @ (np.eye(rho.shape[0]) - support_projector(sigma, rel_tol))).real
    if leak > SUPPORT_ATOL:
        return math.inf
    return float(np.trace(rho @ (mat_log_support(rho) - mat_log_support(sigma, rel_tol))).real)


def measured(rho, sigma, g: Povm) -> float:
    """Measured relative entropy ``D(P_rho^G || P_sigma^G)`` for a fixed POVM."""
    rho = as_density(rho, "rho")
    sigma = as_psd(sigma, "sigma")
    if rho.shape != sigma.shape or g.dim != rho.shape[0]:
        raise ValidationError("dimension mismatch between rho, sigma and POVM")
    return kl(g.probabilities(rho), g.probabilities(sigma))


def measured_eigenbasis(rho, x) -> float:
    """``D_Pi(rho || x)``: measure both in the rank-1 eigenbasis of ``rho``.

    Eigenvalues of ``rho`` are compared with the diagonal of ``x`` in that
    basis; ``x`` may be unnormalized.
    """
    rho = as_density(rho, "rho")
    x = as_psd(x, "x")
    if rho.shape != x.shape:
        raise ValidationError(f"dimension mismatch: rho {rho.shape} vs x {x.shape}")
    spec = eig_hermitian(rho)
    v = spec.basis
    q = np.einsum("ik,ij,jk->k", v.conj(), x, v).real
    return kl(np.clip(spec.eigenvalues, 0, None), q)


def fidelity(rho, sigma) -> float:
    """``|| sqrt(rho) sqrt(sigma) ||_1`` (root fidelity, in [0, 1] for states)."""
    rho = as_psd(rho, "rho")
    sigma = as_psd(sigma, "sigma")
    if rho.shape != sigma.shape:
        raise ValidationError(f"dimension mismatch: rho {rho.shape} vs sigma {sigma.shape}")
    s = np.linalg.svd(frac_power(rho, 0.5) @ frac_power(sigma, 0.5), compute_uv=False)
    return float(np.sum(s))
