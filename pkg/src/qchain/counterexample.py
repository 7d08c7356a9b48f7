"""Qubit family violating the unconditional chain rule, and its region scan.

A point ``(p, theta, eps)`` fixes

* ``rho = (1-p)|0><0| + p|1><1|``
* ``sigma = (1-eps)|+t><+t| + eps|-t><-t|`` with
  ``|+t> = cos(theta/2)|0> + sin(theta/2)|1>`` and
  ``|-t> = sin(theta/2)|0> - cos(theta/2)|1>``
* ``M`` replacing every input by ``|-t><-t|`` and ``N`` pinching in the
  ``|+-t>`` basis.

The regularized projector bound ``lhs_gap >= rhs`` fails exactly when
``eps < eps_star(theta, p)``.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from functools import lru_cache
from math import comb
from typing import Iterable, Sequence

import numpy as np

from .divergences import binary_entropy, umegaki
from .matrix_core import ValidationError, exp_b, log_b
from .quantum_objects import Channel, apply_tensor_power, kron_all, replacement_channel

MAX_N_FINITE = 10
MAX_N_NUMERIC = 8
MAX_N_SCAN = 6
WEIGHT_FLOOR = 1e-14
# ties within this margin are not counted as violations
VIOLATION_TOL = 1e-9
# n-copy images have eigenvalues down to sin^(2n)(theta/2); keep them in the support
NUMERIC_SUPPORT_RTOL = 1e-14

CSV_HEADER = ("p", "theta", "eps", "lhs_gap", "rhs_limit", "eps_star",
              "violated_analytic", "violated_numeric", "n_used")


@dataclass(frozen=True)
class FamilyPoint:
    p: float
    theta: float
    eps: float

    def __post_init__(self):
        if not 0 <= self.p < 0.5:
            raise ValidationError(f"p must lie in [0, 1/2), got {self.p}")
        if not 0 < self.theta < math.pi:
            raise ValidationError(f"theta must lie in (0, pi), got {self.theta}")
        if not 0 < self.eps < 1:
            raise ValidationError(f"eps must lie in (0, 1), got {self.eps}")


@dataclass(frozen=True)
class RegionRow:
    p: float
    theta: float
    eps: float
    lhs_gap: float
    rhs_limit: float
    eps_star: float
    violated_analytic: bool
    violated_numeric: bool
    n_used: int

    def csv_fields(self) -> list[str]:
        return [_fmt(self.p), _fmt(self.theta), _fmt(self.eps), _fmt(self.lhs_gap),
                _fmt(self.rhs_limit), _fmt(self.eps_star), str(int(self.violated_analytic)),
                str(int(self.violated_numeric)), str(self.n_used)]


def _fmt(x: float) -> str:
    return format(float(x), ".12g")


def _half_angle(theta: float) -> tuple[float, float]:
    """``(sin^2(theta/2), cos^2(theta/2))``."""
    return math.sin(theta / 2) ** 2, math.cos(theta / 2) ** 2


def tilted_basis(theta: float) -> np.ndarray:
    """Columns ``|+t>``, ``|-t>``."""
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    return np.array([[c, s], [s, -c]], dtype=complex)


def _projectors(theta: float):
    basis = tilted_basis(theta)
    return np.outer(basis[:, 0], basis[:, 0].conj()), np.outer(basis[:, 1], basis[:, 1].conj())


@lru_cache(maxsize=256)
def _channels(theta: float) -> tuple[Channel, Channel]:
    plus, minus = _projectors(theta)
    # pinching in the tilted basis; equals pinching_channel(sigma) whenever eps != 1/2
    return replacement_channel(2, minus), Channel((plus, minus))


def family_states(pt: FamilyPoint):
    """``(rho, sigma, M, N)`` for one family point."""
    plus, minus = _projectors(pt.theta)
    rho = np.diag([1 - pt.p, pt.p]).astype(complex)
    sigma = (1 - pt.eps) * plus + pt.eps * minus
    m, n = _channels(float(pt.theta))
    return rho, sigma, m, n


def lhs_gap(pt: FamilyPoint) -> float:
    """``D(rho||sigma) - D(M(rho)||N(sigma))`` in closed form."""
    s2, c2 = _half_angle(pt.theta)
    return float(-binary_entropy(pt.p)
                 + (log_b(pt.eps) - log_b(1 - pt.eps)) * ((1 - pt.p) * c2 + pt.p * s2))


def lhs_gap_numeric(pt: FamilyPoint) -> float:
    rho, sigma, m, n = family_states(pt)
    return umegaki(rho, sigma) - umegaki(m(rho), n(sigma))


def rhs_limit(pt: FamilyPoint) -> float:
    s2, c2 = _half_angle(pt.theta)
    return float((1 - pt.p) * log_b(s2) + pt.p * log_b(c2))


def rhs_finite_n(pt: FamilyPoint, n: int) -> float:
    """Binomial sum over the ``n + 1`` eigenspaces of ``rho^{(x) n}`` (``k`` counts zeros)."""
    if not 1 <= n <= MAX_N_FINITE:
        raise ValidationError(f"n must lie in [1, {MAX_N_FINITE}], got {n}")
    s2, c2 = _half_angle(pt.theta)
    total = 0.0
    for k in range(n + 1):
        w = comb(n, k) * (1 - pt.p) ** k * pt.p ** (n - k)
        if w == 0:
            continue
        total += w * (k * log_b(s2) + (n - k) * log_b(c2))
    return float(total / n)


def _zero_count_classes(n: int) -> np.ndarray:
    """Number of zeros in the binary expansion of each basis index."""
    idx = np.arange(2**n)
    ones = np.array([bin(i).count("1") for i in idx])
    return n - ones


def rhs_numeric_n(pt: FamilyPoint, n: int) -> float:
    """``-(1/n) sum_k lambda_k D(M^n(Pi_k) || N^n(Pi_k))`` from explicit n-copy operators."""
    if not 1 <= n <= MAX_N_NUMERIC:
        raise ValidationError(f"n must lie in [1, {MAX_N_NUMERIC}], got {n}")
    _, _, m, ch_n = family_states(pt)
    zeros = _zero_count_classes(n)
    # evaluate in the tilted product basis, where N^n(.) is diagonal
    u = kron_all([tilted_basis(pt.theta)] * n)
    total = 0.0
    for k in range(n + 1):
        lam = (1 - pt.p) ** k * pt.p ** (n - k)
        if lam <= WEIGHT_FLOOR:
            continue
        proj = np.diag((zeros == k).astype(complex))
        c = comb(n, k)
        a = u.conj().T @ apply_tensor_power(m, proj, n) @ u
        b = u.conj().T @ apply_tensor_power(ch_n, proj, n) @ u
        total += lam * c * umegaki(a / c, b / c, rel_tol=NUMERIC_SUPPORT_RTOL)
    return float(-total / n)


def eps_star(theta: float, p: float) -> float:
    """Boundary of the violation region: violated iff ``eps < eps_star``."""
    FamilyPoint(p, theta, 0.5)
    s2, c2 = _half_angle(theta)
    expo = ((1 - p) * log_b(s2) + p * log_b(c2) + binary_entropy(p)) / ((1 - p) * c2 + p * s2)
    e = float(exp_b(expo))
    return e / (1 + e)


def default_theta_grid() -> list[float]:
    return [k * math.pi / 50 for k in range(1, 50)]


def default_eps_grid() -> list[float]:
    return [k / 100 for k in range(1, 50)]


DEFAULT_P_VALUES = (0.0, 0.25, 0.49)


def region_scan(p_values: Sequence[float] = DEFAULT_P_VALUES, theta_grid: Sequence[float] | None = None,
                eps_grid: Sequence[float] | None = None, n_numeric: int = 4) -> list[RegionRow]:
    """One row per grid point in ``(p, theta, eps)`` lexicographic order."""
    theta_grid = default_theta_grid() if theta_grid is None else list(theta_grid)
    eps_grid = default_eps_grid() if eps_grid is None else list(eps_grid)
    if not p_values or not theta_grid or not eps_grid:
        raise ValidationError("scan grids must be nonempty")
    if not 1 <= n_numeric <= MAX_N_SCAN:
        raise ValidationError(f"n_numeric must lie in [1, {MAX_N_SCAN}], got {n_numeric}")
    rows = []
    for p in p_values:
        for theta in theta_grid:
            rhs_num = rhs_numeric_n(FamilyPoint(p, theta, 0.5), n_numeric)
            star = eps_star(theta, p)
            for eps in eps_grid:
                pt = FamilyPoint(p, theta, eps)
                gap, limit = lhs_gap(pt), rhs_limit(pt)
                rows.append(RegionRow(
                    p=p, theta=theta, eps=eps, lhs_gap=gap, rhs_limit=limit, eps_star=star,
                    violated_analytic=gap < limit - VIOLATION_TOL,
                    violated_numeric=lhs_gap_numeric(pt) < rhs_num - VIOLATION_TOL,
                    n_used=n_numeric,
                ))
    return rows


def rows_to_csv(rows: Iterable[RegionRow]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for row in rows:
        writer.writerow(row.csv_fields())
    return buf.getvalue()


def write_csv(rows: Iterable[RegionRow], path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(rows_to_csv(rows))
