"""Hermitian eigendecomposition and spectral functions on supports.

All operator functions here act on the support of their argument: eigenvalues
at or below ``rel_tol * lambda_max`` are treated as exact zeros, and any
function of the matrix (log, negative powers) is set to zero on that kernel.

The logarithm base used by :func:`log_b` and :func:`mat_log_support` is a
context-local setting (default 2); see :func:`use_log_base`.
"""
from __future__ import annotations

import contextlib
import contextvars
import math
from dataclasses import dataclass

import numpy as np

HERMITIAN_RTOL = 1e-12
PSD_RTOL = 1e-10
SUPPORT_RTOL = 1e-10
DEGENERACY_RTOL = 1e-8

_LOG_BASE: contextvars.ContextVar[float] = contextvars.ContextVar("log_base", default=2.0)


class ValidationError(ValueError):
    """Raised when an input violates a structural precondition."""


def get_log_base() -> float:
    return _LOG_BASE.get()


@contextlib.contextmanager
def use_log_base(base: float):
    """Temporarily change the logarithm base for everything in this context."""
    base = float(base)
    if not base > 0 or base == 1.0:
        raise ValidationError(f"log base must be positive and != 1, got {base}")
    token = _LOG_BASE.set(base)
    try:
        yield base
    finally:
        _LOG_BASE.reset(token)


def set_log_base(base: float) -> None:
    """Set the log base for the current context (used by the CLI entry point)."""
    base = float(base)
    if not base > 0 or base == 1.0:
        raise ValidationError(f"log base must be positive and != 1, got {base}")
    _LOG_BASE.set(base)


def log_b(x):
    """Logarithm in the configured base; works on scalars and arrays."""
    return np.log(x) / math.log(get_log_base())


def exp_b(x):
    """Inverse of :func:`log_b`."""
    return np.exp(np.asarray(x) * math.log(get_log_base()))


def as_hermitian(h, name: str = "matrix") -> np.ndarray:
    """Validate a square Hermitian matrix and return it as a complex array.

    The returned array is exactly Hermitian (symmetrized), so downstream
    eigensolvers see a consistent input.
    """
    a = np.asarray(h, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] == 0:
        raise ValidationError(f"{name} must be a nonempty square matrix, got shape {a.shape}")
    scale = 1.0 + float(np.max(np.abs(a)))
    dev = float(np.max(np.abs(a - a.conj().T)))
    if dev > HERMITIAN_RTOL * scale:
        raise ValidationError(f"{name} is not Hermitian (max |A - A^H| = {dev:.3e})")
    return (a + a.conj().T) / 2


def as_psd(a, name: str = "matrix") -> np.ndarray:
    """Validate a PSD matrix, clamping small negative eigenvalues to zero."""
    h = as_hermitian(a, name)
    w, v = np.linalg.eigh(h)
    lam_max = max(float(np.max(np.abs(w))), 0.0)
    if w.min() < -PSD_RTOL * lam_max:
        raise ValidationError(f"{name} is not positive semidefinite (min eigenvalue {w.min():.3e})")
    if w.min() < 0:
        w = np.clip(w, 0.0, None)
        h = (v * w) @ v.conj().T
        h = (h + h.conj().T) / 2
    return h


@dataclass(frozen=True)
class Spectral:
    """Eigendecomposition ``h = sum_k eigenvalues[k] * projectors[k]``.

    ``basis`` holds the eigenvectors as columns in the same order as the
    rank-1 eigenvalues. When the decomposition was grouped, ``eigenvalues`` and
    ``projectors`` refer to eigenspaces and ``groups`` lists the basis columns
    spanning each one.
    """

    eigenvalues: np.ndarray
    basis: np.ndarray
    groups: tuple[tuple[int, ...], ...]

    @property
    def projectors(self) -> list[np.ndarray]:
        out = []
        for g in self.groups:
            v = self.basis[:, list(g)]
            out.append(v @ v.conj().T)
        return out

    @property
    def grouped(self) -> bool:
        return any(len(g) > 1 for g in self.groups)

    def reconstruct(self) -> np.ndarray:
        return sum(lam * p for lam, p in zip(self.eigenvalues, self.projectors))


def _fix_phase(v: np.ndarray) -> np.ndarray:
    # make the largest-magnitude entry of each column real positive
    out = v.copy()
    for k in range(v.shape[1]):
        col = v[:, k]
        mags = np.abs(col)
        idx = int(np.argmax(mags >= mags.max() * (1 - 1e-9)))
        out[:, k] = col * (abs(col[idx]) / col[idx])
    return out


def _clusters(w: np.ndarray, rtol: float) -> list[list[int]]:
    # w sorted descending; consecutive eigenvalues within rtol * scale merge
    scale = max(float(np.max(np.abs(w))), 1e-300)
    groups = [[0]]
    for k in range(1, len(w)):
        if abs(w[k - 1] - w[k]) <= rtol * scale:
            groups[-1].append(k)
        else:
            groups.append([k])
    return groups


def eig_hermitian(h, group: bool = False, degeneracy_rtol: float = DEGENERACY_RTOL) -> Spectral:
    """Deterministic Hermitian eigendecomposition, eigenvalues descending.

    Each eigenvector has its largest-magnitude component made real positive.
    Eigenvectors of (numerically) equal eigenvalues are ordered
    lexicographically by their entries. With ``group=True``, eigenvalues
    within ``degeneracy_rtol * |lambda_max|`` of each other are merged into a
    single eigenspace projector.
    """
    a = as_hermitian(h)
    w, v = np.linalg.eigh(a)
    order = np.argsort(-w, kind="stable")
    w = w[order]
    v = _fix_phase(v[:, order])

    clusters = _clusters(w, degeneracy_rtol)
    perm = []
    for c in clusters:
        if len(c) == 1:
            perm.extend(c)
            continue
        keys = {k: tuple(np.round(np.concatenate([v[:, k].real, v[:, k].imag]), 12)) for k in c}
        perm.extend(sorted(c, key=lambda k: keys[k]))
    w = w[perm]
    v = v[:, perm]

    if group:
        groups = []
        vals = []
        pos = 0
        for c in clusters:
            idx = tuple(range(pos, pos + len(c)))
            groups.append(idx)
            vals.append(float(np.mean(w[list(idx)])))
            pos += len(c)
        return Spectral(np.array(vals), v, tuple(groups))
    return Spectral(w.astype(float), v, tuple((k,) for k in range(len(w))))


def _support_mask(w: np.ndarray, rel_tol: float) -> np.ndarray:
    lam_max = float(np.max(w)) if len(w) else 0.0
    if lam_max <= 0:
        return np.zeros(len(w), dtype=bool)
    return w > rel_tol * lam_max


def support_projector(a, rel_tol: float = SUPPORT_RTOL) -> np.ndarray:
    """Orthogonal projector onto eigenvectors with eigenvalue > rel_tol * lambda_max."""
    if not 0 < rel_tol < 1:
        raise ValidationError(f"rel_tol must lie in (0, 1), got {rel_tol}")
    w, v = np.linalg.eigh(as_psd(a))
    vs = v[:, _support_mask(w, rel_tol)]
    return vs @ vs.conj().T


def spectral_function(a, fn, rel_tol: float = SUPPORT_RTOL) -> np.ndarray:
    """Apply ``fn`` to the positive eigenvalues of PSD ``a``; zero on the kernel."""
    w, v = np.linalg.eigh(as_psd(a))
    mask = _support_mask(w, rel_tol)
    vals = np.zeros(len(w), dtype=complex)
    vals[mask] = fn(w[mask])
    return (v * vals) @ v.conj().T


def mat_log_support(a, rel_tol: float = SUPPORT_RTOL) -> np.ndarray:
    """Support logarithm in the configured base, as a Hermitian matrix."""
    out = spectral_function(a, log_b, rel_tol)
    return (out + out.conj().T) / 2


def frac_power(a, alpha: complex, rel_tol: float = SUPPORT_RTOL) -> np.ndarray:
    """Pseudo power ``a**alpha`` on the support of PSD ``a``.

    Uses the natural-log exponent ``exp(alpha * ln(lambda))`` regardless of the
    configured log base, so negative real parts act as a pseudo-inverse.
    """
    alpha = complex(alpha)
    return spectral_function(a, lambda w: np.exp(alpha * np.log(w)), rel_tol)


def sqrt_psd(a) -> np.ndarray:
    return frac_power(a, 0.5)


def commutator_norm(a, b) -> float:
    """Max-entry norm of ``ab - ba``."""
    a = np.asarray(a)
    b = np.asarray(b)
    return float(np.max(np.abs(a @ b - b @ a)))
