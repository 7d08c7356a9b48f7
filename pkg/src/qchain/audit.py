"""Seeded random instances and batch audits for every verifier.

Trial ``t`` of inequality number ``k`` in a run with seed ``s`` draws from
``default_rng([s, t, k])``, so any single trial can be replayed on its own.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from . import inequalities as ineq
from .matrix_core import ValidationError
from .partitions import StochasticMatrix, measured_chain_audit
from .quantum_objects import (
    Channel,
    Povm,
    random_channel,
    random_density,
    random_povm,
    random_unitary,
)
from .recovery import QuadratureScheme, build_quadrature
from .reports import VerdictReport, finalize_report, instance_digest

IDENTITY_TOL = 1e-12


def trial_rng(seed: int, trial: int, stream: int = 0) -> np.random.Generator:
    return np.random.default_rng([int(seed), int(trial), int(stream)])


# --- random pieces ----------------------------------------------------------

def _state(rng, d: int) -> np.ndarray:
    rank = d - 1 if d > 1 and rng.random() < 0.2 else d
    return random_density(d, rank, seed=rng)


def _full_state(rng, d: int) -> np.ndarray:
    return random_density(d, seed=rng)


def _channel(rng, d_in: int, d_out: int | None = None) -> Channel:
    d_out = d_in if d_out is None else d_out
    n_kraus = math.ceil(d_in / d_out) + int(rng.integers(0, 2))
    return random_channel(d_in, d_out, n_kraus, seed=rng)


def _channel_pair(rng, d: int) -> tuple[Channel, Channel]:
    d_out = int(rng.integers(2, d + 1)) if d > 2 else d
    return _channel(rng, d, d_out), _channel(rng, d, d_out)


def _povm(rng, d: int) -> Povm:
    return random_povm(d, int(rng.integers(2, d + 2)), seed=rng)


def _prob(rng, k: int) -> np.ndarray:
    return rng.dirichlet(np.ones(k))


def _stochastic(rng, rows: int, cols: int) -> StochasticMatrix:
    return StochasticMatrix(rng.dirichlet(np.ones(rows), size=cols).T)


def random_commuting_pair(rng, d: int) -> tuple[np.ndarray, np.ndarray]:
    u = random_unitary(d, seed=rng)
    rho = u @ np.diag(_prob(rng, d)) @ u.conj().T
    sigma = u @ np.diag(_prob(rng, d)) @ u.conj().T
    return (rho + rho.conj().T) / 2, (sigma + sigma.conj().T) / 2


# --- registry ---------------------------------------------------------------

@dataclass(frozen=True)
class Spec:
    """How to draw an instance and evaluate it."""

    draw: Callable[[np.random.Generator, int], dict]
    run: Callable[..., VerdictReport]
    quadrature: bool = False


def _draw_pair(rng, d):
    rho, sigma = _state(rng, d), _state(rng, d)
    m, n = _channel_pair(rng, d)
    return {"rho": rho, "sigma": sigma, "m": m, "n": n}


def _draw_thm1(rng, d):
    inst = _draw_pair(rng, d)
    inst["g"] = _povm(rng, d)
    return inst


def _draw_commuting(rng, d):
    rho, sigma = random_commuting_pair(rng, d)
    m, n = _channel_pair(rng, d)
    return {"rho": rho, "sigma": sigma, "m": m, "n": n}


def _draw_ensembles(rng, d):
    k = int(rng.integers(2, d + 2))
    return {"p": _prob(rng, k), "q": _prob(rng, k),
            "taus": [_state(rng, d) for _ in range(k)], "mus": [_full_state(rng, d) for _ in range(k)]}


def _draw_difbasis(rng, d):
    inst = _draw_pair(rng, d)
    inst["pairing"] = ineq.Pairing(tuple(int(k) for k in rng.permutation(d)))
    return inst


def _draw_general(rng, d):
    inst = _draw_pair(rng, d)
    d_out = inst["m"].d_out
    inst["gamma"] = _full_state(rng, d_out) * float(rng.uniform(0.5, 2.0))
    inst["omega"] = _full_state(rng, d_out) * float(rng.uniform(0.5, 2.0))
    return inst


def _draw_classical(rng, d):
    k_out = int(rng.integers(2, d + 2))
    return {"p": _prob(rng, d), "q": _prob(rng, d), "m": _stochastic(rng, k_out, d), "n": _stochastic(rng, k_out, d)}


def _draw_measured(rng, d):
    inst = _draw_thm1(rng, d)
    inst["f"] = _povm(rng, inst["m"].d_out)
    return inst


def _identity_report(p, q, m, n, tol=None) -> VerdictReport:
    tol = IDENTITY_TOL if tol is None else tol
    value = ineq.classical_identity_audit(p, q, m, n)
    rep = finalize_report("classical_identity", value, 1.0, tol,
                          side_conditions={"deviation": abs(value - 1.0)},
                          digest=instance_digest(p, q, m.matrix, n.matrix),
                          basis_note="equality check: pass iff |value - 1| <= tol")
    rep.passed = abs(value - 1.0) <= tol
    return rep


def _pick(inst, *keys):
    return [inst[k] for k in keys]


REGISTRY: dict[str, Spec] = {
    "thm1": Spec(_draw_thm1, lambda i, tol, q: ineq.verify_thm1(*_pick(i, "rho", "sigma", "m", "n", "g"), tol=tol)),
    "thm1_strengthened": Spec(_draw_thm1, lambda i, tol, q: ineq.verify_thm1(
        *_pick(i, "rho", "sigma", "m", "n", "g"), strengthened=True, tol=tol)),
    "thm1_canonical": Spec(_draw_thm1, lambda i, tol, q: ineq.verify_thm1(
        *_pick(i, "rho", "sigma", "m", "n", "g"), convention="canonical_transpose", tol=tol)),
    "commuting": Spec(_draw_commuting, lambda i, tol, q: ineq.verify_commuting(
        *_pick(i, "rho", "sigma", "m", "n"), tol=tol)),
    "ensembles": Spec(_draw_ensembles, lambda i, tol, q: ineq.verify_ensembles(
        *_pick(i, "p", "q", "taus", "mus"), tol=tol)),
    "difbasis": Spec(_draw_difbasis, lambda i, tol, q: ineq.verify_difbasis(
        *_pick(i, "rho", "sigma", "m", "n"), i.get("pairing"), tol=tol)),
    "difbasis_optimal": Spec(_draw_pair, lambda i, tol, q: ineq.optimize_pairing(
        *_pick(i, "rho", "sigma", "m", "n"), tol=tol)[1]),
    "measured_chain": Spec(_draw_measured, lambda i, tol, q: measured_chain_audit(
        *_pick(i, "rho", "sigma", "m", "n", "g", "f"), tol=tol)),
    "general_entropy": Spec(_draw_general, lambda i, tol, q: ineq.verify_general_entropy(
        *_pick(i, "rho", "sigma", "gamma", "omega", "m"), q, tol=tol), quadrature=True),
    "two_channel_dpi": Spec(_draw_pair, lambda i, tol, q: ineq.verify_two_channel_dpi(
        *_pick(i, "rho", "sigma", "m", "n"), q, tol=tol), quadrature=True),
    "conditional_chain": Spec(_draw_pair, lambda i, tol, q: ineq.verify_conditional_chain(
        *_pick(i, "rho", "sigma", "m", "n"), q, tol=tol), quadrature=True),
    "universal_bound": Spec(_draw_pair, lambda i, tol, q: ineq.verify_universal_bound(
        *_pick(i, "rho", "sigma", "m"), q, tol=tol), quadrature=True),
    "classical_chain": Spec(_draw_classical, lambda i, tol, q: ineq.classical_chain(
        *_pick(i, "p", "q", "m", "n"), tol=tol)),
    "classical_identity": Spec(_draw_classical, lambda i, tol, q: _identity_report(
        *_pick(i, "p", "q", "m", "n"), tol=tol)),
}

INEQUALITY_IDS = tuple(REGISTRY)

# what a file-based instance needs, in order: (states, channels, povms)
FILE_SIGNATURES = {
    "thm1": (2, 2, 1), "thm1_strengthened": (2, 2, 1), "thm1_canonical": (2, 2, 1),
    "commuting": (2, 2, 0), "difbasis": (2, 2, 0), "difbasis_optimal": (2, 2, 0),
    "measured_chain": (2, 2, 2), "general_entropy": (4, 1, 0), "two_channel_dpi": (2, 2, 0),
    "conditional_chain": (2, 2, 0), "universal_bound": (2, 1, 0),
}


def default_tol(inequality_id: str) -> float:
    if inequality_id == "classical_identity":
        return IDENTITY_TOL
    return ineq.TOL_QUAD if REGISTRY[inequality_id].quadrature else ineq.TOL_EXACT


def random_instance(inequality_id: str, d: int, rng: np.random.Generator) -> dict:
    if inequality_id not in REGISTRY:
        raise ValidationError(f"unknown inequality {inequality_id!r}; choose from {', '.join(INEQUALITY_IDS)}")
    if d < 2:
        raise ValidationError(f"dimension must be >= 2, got {d}")
    return REGISTRY[inequality_id].draw(rng, d)


def instance_from_objects(inequality_id: str, objects: Sequence) -> dict:
    """Assign loaded states / channels / POVMs to verifier arguments in file order.

    States fill ``rho, sigma`` (then ``gamma, omega``), channels fill ``m, n``,
    POVMs fill ``g, f``.
    """
    if inequality_id not in FILE_SIGNATURES:
        raise ValidationError(f"inequality {inequality_id!r} does not take file inputs")
    states = [o for o in objects if isinstance(o, np.ndarray)]
    channels = [o for o in objects if isinstance(o, Channel)]
    povms = [o for o in objects if isinstance(o, Povm)]
    need = FILE_SIGNATURES[inequality_id]
    have = (len(states), len(channels), len(povms))
    if have != need:
        raise ValidationError(f"{inequality_id} needs (states, channels, povms) = {need}, got {have}")
    inst = dict(zip(("rho", "sigma"), states[:2]))
    if inequality_id == "general_entropy":
        inst["gamma"], inst["omega"] = states[2], states[3]
    inst.update(zip(("m", "n"), channels))
    inst.update(zip(("g", "f"), povms))
    return inst


def evaluate(inequality_id: str, inst: dict, q: QuadratureScheme | None = None,
             tol: float | None = None) -> VerdictReport:
    spec = REGISTRY[inequality_id]
    tol = default_tol(inequality_id) if tol is None else tol
    if spec.quadrature and q is None:
        q = build_quadrature()
    return spec.run(inst, tol, q)


def run_audit(inequality_ids: Sequence[str], trials: int, seed: int = 0, dims: Sequence[int] = (3,),
              q: QuadratureScheme | None = None, tol: float | None = None) -> list[VerdictReport]:
    """Reports in (trial, inequality) order; trial ``t`` uses dimension ``dims[t % len(dims)]``."""
    if trials < 0:
        raise ValidationError(f"trials must be >= 0, got {trials}")
    reports = []
    for t in range(trials):
        d = dims[t % len(dims)]
        for k, ident in enumerate(inequality_ids):
            rng = trial_rng(seed, t, k)
            reports.append(evaluate(ident, random_instance(ident, d, rng), q, tol))
    return reports


def summarize(reports: Sequence[VerdictReport]) -> dict:
    """``{total, passed, failed, not_asserted, min_slack}``; min over asserted reports."""
    asserted = [r for r in reports if r.asserted]
    slacks = [r.slack for r in asserted if not math.isnan(r.slack)]
    return {
        "total": len(reports),
        "passed": sum(r.passed for r in reports),
        "failed": sum(1 for r in asserted if not r.passed),
        "not_asserted": len(reports) - len(asserted),
        "min_slack": min(slacks) if slacks else math.inf,
    }
