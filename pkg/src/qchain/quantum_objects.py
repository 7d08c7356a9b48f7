"""States, POVMs and channels, plus seeded random generators.

Operators are plain complex ``numpy`` arrays; :func:`as_density` validates one
as a state. Channels and POVMs are small frozen dataclasses holding their
Kraus operators / effects.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np

from .matrix_core import (
    ValidationError,
    as_psd,
    eig_hermitian,
    frac_power,
)

TRACE_ATOL = 1e-10
TP_ATOL = 1e-9
CP_ATOL = 1e-9
POVM_ATOL = 1e-10


def as_density(rho, name: str = "state") -> np.ndarray:
    """Validate a density matrix (PSD, unit trace) and return it."""
    r = as_psd(rho, name)
    tr = np.trace(r).real
    if abs(tr - 1) > TRACE_ATOL:
        raise ValidationError(f"{name} must have unit trace, got {tr:.12g}")
    return r


def ket(*amplitudes) -> np.ndarray:
    return np.asarray(amplitudes, dtype=complex)


def ketbra(v) -> np.ndarray:
    v = np.asarray(v, dtype=complex).reshape(-1)
    return np.outer(v, v.conj())


def maximally_mixed(d: int) -> np.ndarray:
    return np.eye(d, dtype=complex) / d


@dataclass(frozen=True, eq=False)
class KrausMap:
    """Completely positive map ``x -> sum_i K_i x K_i^H``.

    No trace condition is enforced; see :class:`Channel` for CPTP maps.
    """

    kraus: tuple[np.ndarray, ...]

    def __post_init__(self):
        ks = tuple(np.asarray(k, dtype=complex) for k in self.kraus)
        if not ks:
            raise ValidationError("Kraus family must be nonempty")
        shape = ks[0].shape
        if len(shape) != 2 or any(k.shape != shape for k in ks):
            raise ValidationError("Kraus operators must be matrices of equal shape")
        object.__setattr__(self, "kraus", ks)

    @property
    def d_in(self) -> int:
        return self.kraus[0].shape[1]

    @property
    def d_out(self) -> int:
        return self.kraus[0].shape[0]

    def __call__(self, x) -> np.ndarray:
        return apply_channel(self, x)

    @cached_property
    def choi(self) -> np.ndarray:
        """Choi operator ``sum_ij |i><j| (x) K(|i><j|)`` on input (x) output."""
        d = self.d_in
        out = np.zeros((d * self.d_out, d * self.d_out), dtype=complex)
        for k in self.kraus:
            # vec of (id (x) K)|Phi> with |Phi> = sum_i |i>|i>
            v = np.concatenate([k[:, i] for i in range(d)])
            out += np.outer(v, v.conj())
        return out

    @cached_property
    def superoperator(self) -> np.ndarray:
        """Matrix on column-stacked vectorizations: vec(K x K^H) = (conj(K) (x) K) vec(x)."""
        return sum(np.kron(k.conj(), k) for k in self.kraus)

    def tensor_power(self, x, n: int) -> np.ndarray:
        return apply_tensor_power(self, x, n)


class Channel(KrausMap):
    """CPTP map in Kraus form."""

    def __post_init__(self):
        super().__post_init__()
        s = sum(k.conj().T @ k for k in self.kraus)
        dev = float(np.max(np.abs(s - np.eye(self.d_in))))
        if dev > TP_ATOL:
            raise ValidationError(f"Kraus family is not trace preserving (deviation {dev:.3e})")

    @property
    def adjoint(self) -> KrausMap:
        return adjoint_channel(self)


@dataclass(frozen=True, eq=False)
class Povm:
    """Finite POVM ``{G_j}`` of PSD effects summing to the identity."""

    elements: tuple[np.ndarray, ...]

    def __post_init__(self):
        els = tuple(as_psd(g, "POVM element") for g in self.elements)
        if not els:
            raise ValidationError("POVM must have at least one element")
        d = els[0].shape[0]
        if any(g.shape != (d, d) for g in els):
            raise ValidationError("POVM elements must share one dimension")
        dev = float(np.max(np.abs(sum(els) - np.eye(d))))
        if dev > POVM_ATOL:
            raise ValidationError(f"POVM elements do not sum to identity (deviation {dev:.3e})")
        object.__setattr__(self, "elements", els)

    @property
    def dim(self) -> int:
        return self.elements[0].shape[0]

    def __len__(self) -> int:
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    def probabilities(self, x) -> np.ndarray:
        """Outcome weights ``Tr[G_j x]`` (x may be any PSD operator)."""
        x = np.asarray(x, dtype=complex)
        if x.shape != (self.dim, self.dim):
            raise ValidationError(f"operator of shape {x.shape} does not match POVM dim {self.dim}")
        return np.array([np.trace(g @ x).real for g in self.elements])


def projective_povm(basis) -> Povm:
    """Rank-1 projective measurement on the columns of a unitary ``basis``."""
    basis = np.asarray(basis, dtype=complex)
    return Povm(tuple(ketbra(basis[:, k]) for k in range(basis.shape[1])))


def eigenbasis_povm(rho) -> Povm:
    return projective_povm(eig_hermitian(rho).basis)


def prob_from_povm(g: Povm, x) -> np.ndarray:
    return g.probabilities(x)


def apply_channel(c: KrausMap, x) -> np.ndarray:
    """Kraus action ``sum_i K_i x K_i^H``."""
    x = np.asarray(x, dtype=complex)
    if x.shape != (c.d_in, c.d_in):
        raise ValidationError(f"input of shape {x.shape} does not match channel d_in={c.d_in}")
    return sum(k @ x @ k.conj().T for k in c.kraus)


def adjoint_channel(c: KrausMap) -> KrausMap:
    """Heisenberg-picture map ``x -> sum_i K_i^H x K_i`` (unital when ``c`` is TP)."""
    return KrausMap(tuple(k.conj().T for k in c.kraus))


def apply_tensor_power(c: KrausMap, x, n: int) -> np.ndarray:
    """Apply ``c`` to every tensor factor of an operator on ``(C^d_in)^(x n)``."""
    d_in, d_out = c.d_in, c.d_out
    x = np.asarray(x, dtype=complex)
    if x.shape != (d_in**n, d_in**n):
        raise ValidationError(f"operator of shape {x.shape} is not on {n} copies of dim {d_in}")
    t = x.reshape((d_in,) * (2 * n))
    ks = np.stack(c.kraus)
    for site in range(n):
        dims_row = [d_out] * site + [d_in] * (n - site)
        t = t.reshape(dims_row + dims_row)
        # K on row index `site`, conj(K) on column index `site`
        t = np.moveaxis(t, (site, n + site), (0, 1))
        rest = t.shape[2:]
        t = t.reshape(d_in, d_in, -1)
        t = np.einsum("kai,ij...,kbj->ab...", ks, t, ks.conj())
        t = t.reshape((d_out, d_out) + rest)
        t = np.moveaxis(t, (0, 1), (site, n + site))
    return t.reshape(d_out**n, d_out**n)


def kron_all(ops: Sequence[np.ndarray]) -> np.ndarray:
    out = np.array([[1.0 + 0j]])
    for op in ops:
        out = np.kron(out, op)
    return out


def partial_trace(x, dims: tuple[int, int], keep: int) -> np.ndarray:
    """Partial trace of a bipartite operator; ``keep`` is 0 (first) or 1 (second)."""
    da, db = dims
    t = np.asarray(x).reshape(da, db, da, db)
    if keep == 0:
        return np.einsum("ajbj->ab", t)
    return np.einsum("iaib->ab", t)


def identity_channel(d: int) -> Channel:
    return Channel((np.eye(d, dtype=complex),))


def unitary_channel(u) -> Channel:
    return Channel((np.asarray(u, dtype=complex),))


def depolarizing_channel(d: int, p: float = 1.0) -> Channel:
    """``x -> (1-p) x + p Tr(x) I/d`` via the Weyl-Heisenberg Kraus family."""
    shift = np.roll(np.eye(d), 1, axis=0)
    clock = np.diag(np.exp(2j * np.pi * np.arange(d) / d))
    kraus = [np.sqrt(1 - p + p / d**2) * np.eye(d, dtype=complex)]
    for a in range(d):
        for b in range(d):
            if a == 0 and b == 0:
                continue
            kraus.append(np.sqrt(p) / d * np.linalg.matrix_power(shift, a) @ np.linalg.matrix_power(clock, b))
    return Channel(tuple(kraus))


def replacement_channel(d_in: int, state) -> Channel:
    """``x -> Tr(x) * state``."""
    state = as_psd(state, "replacement state")
    spec = eig_hermitian(state)
    kraus = []
    for lam, k in zip(spec.eigenvalues, range(spec.basis.shape[1])):
        if lam <= 0:
            continue
        v = spec.basis[:, k]
        for i in range(d_in):
            e = np.zeros(d_in, dtype=complex)
            e[i] = 1
            kraus.append(np.sqrt(lam) * np.outer(v, e))
    return Channel(tuple(kraus))


def pinching_channel(sigma) -> Channel:
    """Pinching onto the (degeneracy-grouped) eigenspaces of ``sigma``."""
    spec = eig_hermitian(as_psd(sigma, "sigma"), group=True)
    return Channel(tuple(spec.projectors))


def cq_channel(projectors: Povm, outputs: Sequence[np.ndarray]) -> Channel:
    """Classical-quantum channel ``X -> sum_i outputs[i] * Tr[projectors[i] X]``.

    The projectors must be pairwise orthogonal and rank 1.
    """
    if len(projectors) != len(outputs):
        raise ValidationError(f"{len(projectors)} projectors but {len(outputs)} outputs")
    vecs = []
    for p in projectors:
        if abs(np.trace(p).real - 1) > 1e-9 or np.max(np.abs(p @ p - p)) > 1e-9:
            raise ValidationError("cq_channel needs rank-1 projectors")
        vecs.append(eig_hermitian(p).basis[:, 0])
    gram = np.array([[abs(np.vdot(a, b)) for b in vecs] for a in vecs])
    if np.max(np.abs(gram - np.eye(len(vecs)))) > 1e-9:
        raise ValidationError("cq_channel needs pairwise orthogonal projectors")
    kraus = []
    for v, tau in zip(vecs, outputs):
        tau = as_density(tau, "cq output")
        spec = eig_hermitian(tau)
        for lam, k in zip(spec.eigenvalues, range(tau.shape[0])):
            if lam > 0:
                kraus.append(np.sqrt(lam) * np.outer(spec.basis[:, k], v.conj()))
    return Channel(tuple(kraus))


@dataclass(frozen=True, eq=False)
class BipartiteState:
    matrix: np.ndarray
    d_a: int
    d_b: int
    convention: str

    def reduced(self, keep: int) -> np.ndarray:
        return partial_trace(self.matrix, (self.d_a, self.d_b), keep)


def bipartite_omega(tau, c: KrausMap, convention: str = "purification") -> BipartiteState:
    """Joint state ``(id (x) c)`` applied to a purification of ``tau``.

    ``purification`` uses ``sum_k sqrt(tau_k) |tau_k, tau_k>`` in the eigenbasis
    of ``tau``; ``transpose`` uses ``(sqrt(tau) (x) I)(id (x) c)(d |Phi+><Phi+|)(sqrt(tau) (x) I)``
    with the canonical-basis maximally entangled vector.
    """
    tau = as_density(tau, "tau")
    d = tau.shape[0]
    if c.d_in != d:
        raise ValidationError(f"channel d_in={c.d_in} does not match tau dim {d}")
    if convention == "purification":
        spec = eig_hermitian(tau)
        lam = np.clip(spec.eigenvalues, 0, None)
        psi = sum(np.sqrt(lam[k]) * np.kron(spec.basis[:, k], spec.basis[:, k]) for k in range(d))
        joint = np.outer(psi, psi.conj())
        left = np.eye(d)
    elif convention == "transpose":
        phi = np.eye(d, dtype=complex).reshape(-1)
        joint = np.outer(phi, phi.conj())
        left = frac_power(tau, 0.5)
    else:
        raise ValidationError(f"unknown convention {convention!r}")
    out = np.zeros((d * c.d_out, d * c.d_out), dtype=complex)
    for k in c.kraus:
        op = np.kron(np.eye(d), k)
        out += op @ joint @ op.conj().T
    lop = np.kron(left, np.eye(c.d_out))
    out = lop @ out @ lop.conj().T
    return BipartiteState((out + out.conj().T) / 2, d, c.d_out, convention)


# --- random generators -----------------------------------------------------

def _rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def _ginibre(rng: np.random.Generator, rows: int, cols: int) -> np.ndarray:
    return rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))


def random_density(dim: int, rank: int | None = None, seed=None) -> np.ndarray:
    """Normalized ``G G^H`` with ``G`` a ``dim x rank`` complex Gaussian matrix."""
    rank = dim if rank is None else rank
    if dim < 1 or not 1 <= rank <= dim:
        raise ValidationError(f"need 1 <= rank <= dim, got dim={dim}, rank={rank}")
    g = _ginibre(_rng(seed), dim, rank)
    r = g @ g.conj().T
    r = r / np.trace(r).real
    return (r + r.conj().T) / 2


def random_pure(dim: int, seed=None) -> np.ndarray:
    return random_density(dim, 1, seed)


def random_unitary(dim: int, seed=None) -> np.ndarray:
    q, r = np.linalg.qr(_ginibre(_rng(seed), dim, dim))
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_povm(dim: int, n_outcomes: int, seed=None) -> Povm:
    """Random PSD elements normalized as ``S^{-1/2} G_j S^{-1/2}``."""
    if dim < 1 or n_outcomes < 1:
        raise ValidationError(f"invalid POVM shape dim={dim}, n_outcomes={n_outcomes}")
    rng = _rng(seed)
    raw = []
    for _ in range(n_outcomes):
        g = _ginibre(rng, dim, dim)
        raw.append(g @ g.conj().T)
    s_inv = frac_power(sum(raw), -0.5)
    els = []
    for g in raw:
        e = s_inv @ g @ s_inv
        els.append((e + e.conj().T) / 2)
    return Povm(tuple(els))


def random_channel(d_in: int, d_out: int, n_kraus: int, seed=None) -> Channel:
    """Channel from a QR-orthonormalized ``(d_out*n_kraus) x d_in`` isometry."""
    if d_in < 1 or d_out < 1 or n_kraus < 1 or d_out * n_kraus < d_in:
        raise ValidationError(f"invalid channel shape d_in={d_in}, d_out={d_out}, n_kraus={n_kraus}")
    q, _ = np.linalg.qr(_ginibre(_rng(seed), d_out * n_kraus, d_in))
    return Channel(tuple(q[i * d_out:(i + 1) * d_out] for i in range(n_kraus)))


# --- JSON formats ----------------------------------------------------------

def matrix_to_json(m) -> list:
    m = np.asarray(m, dtype=complex)
    return [[[float(z.real), float(z.imag)] for z in row] for row in m]


def matrix_from_json(data) -> np.ndarray:
    try:
        arr = np.array(data, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"matrix is not a nested array of [re, im] pairs: {exc}") from None
    if arr.ndim != 3 or arr.shape[2] != 2:
        raise ValidationError(f"matrix must have shape (rows, cols, 2), got {arr.shape}")
    return arr[..., 0] + 1j * arr[..., 1]


def state_to_json(rho) -> dict:
    rho = np.asarray(rho)
    return {"dim": rho.shape[0], "matrix": matrix_to_json(rho)}


def state_from_json(data: dict) -> np.ndarray:
    m = matrix_from_json(data["matrix"])
    if m.shape != (data["dim"], data["dim"]):
        raise ValidationError(f"state matrix shape {m.shape} does not match dim {data['dim']}")
    return m


def channel_to_json(c: KrausMap) -> dict:
    return {"d_in": c.d_in, "d_out": c.d_out, "kraus": [matrix_to_json(k) for k in c.kraus]}


def channel_from_json(data: dict) -> Channel:
    ks = [matrix_from_json(k) for k in data["kraus"]]
    for k in ks:
        if k.shape != (data["d_out"], data["d_in"]):
            raise ValidationError(f"Kraus shape {k.shape} does not match d_out x d_in")
    return Channel(tuple(ks))


def povm_to_json(g: Povm) -> dict:
    return {"dim": g.dim, "elements": [matrix_to_json(e) for e in g.elements]}


def povm_from_json(data: dict) -> Povm:
    els = [matrix_from_json(e) for e in data["elements"]]
    for e in els:
        if e.shape != (data["dim"], data["dim"]):
            raise ValidationError(f"POVM element shape {e.shape} does not match dim {data['dim']}")
    return Povm(tuple(els))


def load_object(path):
    """Read a state, channel or POVM file, dispatching on its keys."""
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    if not isinstance(data, dict):
        raise ValidationError("top-level JSON value must be an object")
    if "kraus" in data:
        return channel_from_json(data)
    if "elements" in data:
        return povm_from_json(data)
    if "matrix" in data:
        return state_from_json(data)
    raise ValidationError("JSON object is not a state, channel or POVM")
