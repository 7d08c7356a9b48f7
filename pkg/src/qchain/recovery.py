"""Petz, rotated-Petz and twisted recovery maps as dense superoperators.

Superoperators act on column-stacked vectorizations, ``vec(X)[i + j*d] = X[i, j]``.

The twisted map for ``alpha = (1 - i t)/2`` is

    X -> sigma^alpha  M^H( gamma^(-alpha) X gamma^(-conj alpha) )  sigma^(conj alpha),

with pseudo-powers (kernel directions map to zero). In the eigenbases of
``gamma`` and ``sigma`` both conjugations are entrywise scalings, so a weighted
sum of twisted maps over quadrature nodes collapses to one Hadamard kernel
applied to the fixed matrix of ``M^H`` expressed in those bases.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .matrix_core import SUPPORT_RTOL, ValidationError, as_psd, support_projector
from .quantum_objects import KrausMap, as_density


def vec(x) -> np.ndarray:
    return np.asarray(x).reshape(-1, order="F")


def unvec(v, d: int) -> np.ndarray:
    return np.asarray(v).reshape(d, d, order="F")


@dataclass(frozen=True, eq=False)
class Superoperator:
    """Linear map from ``d_in x d_in`` to ``d_out x d_out`` operators."""

    matrix: np.ndarray
    d_in: int
    d_out: int

    def __post_init__(self):
        if self.matrix.shape != (self.d_out**2, self.d_in**2):
            raise ValidationError(
                f"superoperator matrix {self.matrix.shape} does not match d_in={self.d_in}, d_out={self.d_out}"
            )

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=complex)
        if x.shape != (self.d_in, self.d_in):
            raise ValidationError(f"input shape {x.shape} does not match d_in={self.d_in}")
        return unvec(self.matrix @ vec(x), self.d_out)

    def compose(self, other: "Superoperator") -> "Superoperator":
        """``self o other``."""
        if other.d_out != self.d_in:
            raise ValidationError("cannot compose: dimension mismatch")
        return Superoperator(self.matrix @ other.matrix, other.d_in, self.d_out)

    def __add__(self, other: "Superoperator") -> "Superoperator":
        return Superoperator(self.matrix + other.matrix, self.d_in, self.d_out)

    def __rmul__(self, c) -> "Superoperator":
        return Superoperator(c * self.matrix, self.d_in, self.d_out)

    @property
    def choi(self) -> np.ndarray:
        """``sum_ij |i><j| (x) S(|i><j|)`` on input (x) output."""
        t = self.matrix.reshape(self.d_out, self.d_out, self.d_in, self.d_in)
        t = t.transpose(3, 1, 2, 0)  # (i, a, j, b)
        return t.reshape(self.d_in * self.d_out, self.d_in * self.d_out)

    def min_choi_eigenvalue(self) -> float:
        c = self.choi
        return float(np.linalg.eigvalsh((c + c.conj().T) / 2).min())

    @classmethod
    def from_kraus(cls, c: KrausMap) -> "Superoperator":
        return cls(c.superoperator, c.d_in, c.d_out)


def beta0(t):
    """Weight ``pi / (2 (cosh(pi t) + 1))``; integrates to 1 over the real line."""
    t = np.asarray(t, dtype=float)
    return np.pi / (2.0 * (np.cosh(np.pi * t) + 1.0))


@dataclass(frozen=True)
class QuadratureScheme:
    """Nodes ``t_k`` and weights ``w_k`` that already include ``beta0(t_k)``."""

    nodes: np.ndarray
    weights: np.ndarray
    cutoff: float

    @property
    def mass(self) -> float:
        return float(np.sum(self.weights))


def build_quadrature(n_nodes: int = 400, cutoff: float = 12.0) -> QuadratureScheme:
    """Gauss-Legendre rule on ``[-cutoff, cutoff]`` weighted by ``beta0``."""
    if int(n_nodes) != n_nodes or n_nodes < 8:
        raise ValidationError(f"n_nodes must be an integer >= 8, got {n_nodes}")
    if not cutoff > 0 or not math.isfinite(cutoff):
        raise ValidationError(f"cutoff must be positive and finite, got {cutoff}")
    x, w = np.polynomial.legendre.leggauss(int(n_nodes))
    t = cutoff * x
    return QuadratureScheme(t, cutoff * w * beta0(t), float(cutoff))


def _eig_support(a):
    w, v = np.linalg.eigh(as_psd(a))
    lam_max = float(np.max(w)) if w.size else 0.0
    mask = w > SUPPORT_RTOL * lam_max if lam_max > 0 else np.zeros(w.size, dtype=bool)
    logs = np.zeros(w.size)
    logs[mask] = np.log(w[mask])
    return logs, mask, v


def _conj_op(u: np.ndarray) -> np.ndarray:
    # vec(U Y U^H) = (conj(U) (x) U) vec(Y)
    return np.kron(u.conj(), u)


def _twisted_family(gamma, sigma, m: KrausMap, nodes, weights) -> Superoperator:
    gamma = as_psd(gamma, "gamma")
    sigma = as_density(sigma, "sigma")
    if gamma.shape != (m.d_out, m.d_out):
        raise ValidationError(f"gamma {gamma.shape} is not on the channel output (dim {m.d_out})")
    if sigma.shape != (m.d_in, m.d_in):
        raise ValidationError(f"sigma {sigma.shape} is not on the channel input (dim {m.d_in})")
    d_a, d_b = m.d_in, m.d_out
    lg, mg, v = _eig_support(gamma)
    ls, ms, u = _eig_support(sigma)
    nodes = np.asarray(nodes, dtype=float)
    weights = np.asarray(weights, dtype=float)
    alpha = (1 - 1j * nodes) / 2  # (T,)

    # output-side scaling g_i^(-alpha) g_j^(-conj alpha), column-stacked (i + j d_b)
    li, lj = np.meshgrid(lg, lg, indexing="ij")
    g_exp = -(alpha[:, None, None] * li + alpha.conj()[:, None, None] * lj)
    g_fac = np.exp(g_exp) * np.outer(mg, mg)[None]
    g_flat = g_fac.transpose(0, 2, 1).reshape(len(nodes), -1)

    # input-side scaling s_k^alpha s_l^(conj alpha), column-stacked (k + l d_a)
    lk, ll = np.meshgrid(ls, ls, indexing="ij")
    s_exp = alpha[:, None, None] * lk + alpha.conj()[:, None, None] * ll
    s_fac = np.exp(s_exp) * np.outer(ms, ms)[None]
    s_flat = s_fac.transpose(0, 2, 1).reshape(len(nodes), -1)

    kernel = s_flat.T @ (weights[:, None] * g_flat)  # (d_a^2, d_b^2)

    adj = sum(np.kron(k.T, k.conj().T) for k in m.kraus)  # vec(K^H Y K) = (K^T (x) K^H) vec(Y)
    uop, vop = _conj_op(u), _conj_op(v)
    core = uop.conj().T @ adj @ vop
    return Superoperator(uop @ (kernel * core) @ vop.conj().T, d_b, d_a)


def twisted_map(gamma, sigma, m: KrausMap, t: float) -> Superoperator:
    """Two-reference recovery map at rotation ``t``."""
    return _twisted_family(gamma, sigma, m, [float(t)], [1.0])


def petz_map(sigma, m: KrausMap) -> Superoperator:
    """Standard Petz map, the ``t = 0`` twisted map with ``gamma = M(sigma)``."""
    return twisted_map(m(as_density(sigma, "sigma")), sigma, m, 0.0)


def rotated_petz_map(sigma, m: KrausMap, t: float) -> Superoperator:
    return twisted_map(m(as_density(sigma, "sigma")), sigma, m, t)


def averaged_map(gamma, sigma, m: KrausMap, q: QuadratureScheme | None = None) -> Superoperator:
    """``beta0``-average of the twisted maps over the quadrature nodes."""
    q = q or build_quadrature()
    return _twisted_family(gamma, sigma, m, q.nodes, q.weights)


def universal_recovery_map(sigma, m: KrausMap, q: QuadratureScheme | None = None) -> Superoperator:
    return averaged_map(m(as_density(sigma, "sigma")), sigma, m, q)


def trace_condition(rho, gamma, sigma, m: KrausMap, omega,
                    q: QuadratureScheme | None = None, tol: float = 1e-8) -> tuple[float, bool]:
    """``T = Tr[Pi_rho R_bar(omega)]`` and whether ``T <= 1 + tol``."""
    rho = as_density(rho, "rho")
    omega = as_psd(omega, "omega")
    if rho.shape != (m.d_in, m.d_in) or omega.shape != (m.d_out, m.d_out):
        raise ValidationError("rho / omega dimensions do not match the channel")
    rec = averaged_map(gamma, sigma, m, q)(omega)
    t_val = float(np.trace(support_projector(rho) @ rec).real)
    return t_val, t_val <= 1 + tol
