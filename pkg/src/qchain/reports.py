"""Verdict reports shared by every verifier."""
from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .quantum_objects import KrausMap, Povm


def ext_sub(a: float, b: float) -> float:
    """``a - b`` on the extended reals; ``inf - inf`` is ``nan`` (indeterminate)."""
    if math.isinf(a) and math.isinf(b) and (a > 0) == (b > 0):
        return math.nan
    return a - b


def gap(a: float, b: float) -> float:
    """``a - b`` where ``a = +inf`` stays ``+inf`` (the inequality holds vacuously)."""
    if a == math.inf:
        return math.inf
    return ext_sub(a, b)


def ext_sum(*terms: float) -> float:
    pos = any(t == math.inf for t in terms)
    neg = any(t == -math.inf for t in terms)
    if pos and neg:
        return math.nan
    return float(sum(terms))


def _encode(x):
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    if isinstance(x, str):
        return x
    if isinstance(x, (list, tuple)):
        return [_encode(v) for v in x]
    if isinstance(x, dict):
        return {str(k): _encode(v) for k, v in x.items()}
    return str(x)


def _decode(x):
    if x == "inf":
        return math.inf
    if x == "-inf":
        return -math.inf
    if x == "nan":
        return math.nan
    return x


@dataclass
class VerdictReport:
    """Outcome of checking one inequality ``lhs >= rhs`` on one instance.

    ``asserted`` is False when the inequality's hypothesis failed (or its sides
    were indeterminate) and so nothing was claimed; such reports never pass.
    """

    inequality_id: str
    lhs: float
    rhs: float
    slack: float
    passed: bool
    tol: float
    side_conditions: dict = field(default_factory=dict)
    instance_digest: str = ""
    basis_note: str = ""
    asserted: bool = True

    def to_dict(self) -> dict:
        return {
            "inequality_id": self.inequality_id,
            "lhs": _encode(self.lhs),
            "rhs": _encode(self.rhs),
            "slack": _encode(self.slack),
            "pass": bool(self.passed),
            "tol": _encode(self.tol),
            "side_conditions": _encode(self.side_conditions),
            "instance_digest": self.instance_digest,
            "basis_note": self.basis_note,
            "asserted": bool(self.asserted),
        }

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)

    @classmethod
    def from_dict(cls, d: dict) -> "VerdictReport":
        return cls(
            inequality_id=d["inequality_id"],
            lhs=_decode(d["lhs"]),
            rhs=_decode(d["rhs"]),
            slack=_decode(d["slack"]),
            passed=d["pass"],
            tol=_decode(d["tol"]),
            side_conditions={k: _decode(v) for k, v in d.get("side_conditions", {}).items()},
            instance_digest=d.get("instance_digest", ""),
            basis_note=d.get("basis_note", ""),
            asserted=d.get("asserted", True),
        )


def finalize_report(inequality_id: str, lhs: float, rhs: float, tol: float,
                    side_conditions: dict | None = None, digest: str = "",
                    basis_note: str = "", asserted: bool = True) -> VerdictReport:
    """Build a report for ``lhs >= rhs`` with the extended-real conventions.

    ``lhs = +inf`` or ``rhs = -inf`` pass vacuously; a ``nan`` side is
    indeterminate and is reported as not asserted.
    """
    side = dict(side_conditions or {})
    lhs, rhs = float(lhs), float(rhs)
    if math.isnan(lhs) or math.isnan(rhs):
        side.setdefault("note", "indeterminate inf - inf; inequality not asserted")
        return VerdictReport(inequality_id, lhs, rhs, math.nan, False, tol, side, digest, basis_note, False)
    if lhs == math.inf or rhs == -math.inf:
        slack = math.inf
        side.setdefault("vacuous", True)
    else:
        slack = lhs - rhs
    passed = asserted and slack >= -tol
    return VerdictReport(inequality_id, lhs, rhs, slack, passed, tol, side, digest, basis_note, asserted)


def instance_digest(*objs) -> str:
    """SHA-256 over the raw bytes of every array in the inputs."""
    h = hashlib.sha256()
    for obj in objs:
        if isinstance(obj, KrausMap):
            arrays = obj.kraus
            h.update(b"K")
        elif isinstance(obj, Povm):
            arrays = obj.elements
            h.update(b"G")
        elif isinstance(obj, (list, tuple)):
            h.update(instance_digest(*obj).encode())
            continue
        else:
            arrays = (obj,)
            h.update(b"A")
        for a in arrays:
            a = np.ascontiguousarray(np.asarray(a, dtype=complex))
            h.update(str(a.shape).encode())
            h.update(a.tobytes())
    return h.hexdigest()[:16]
