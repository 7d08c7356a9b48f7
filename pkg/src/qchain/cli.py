"""Command-line entry point.

Exit status: 0 when every asserted check passed, 1 on a genuine inequality
failure, 2 on an input error.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass, field

from . import audit
from .counterexample import region_scan, rows_to_csv
from .matrix_core import ValidationError, use_log_base
from .quantum_objects import load_object
from .recovery import build_quadrature

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2
MASS_TOL = 1e-8
FAMILIES = ("appendixB",)


class InputError(Exception):
    """Bad input, reported with exit status 2."""


@dataclass
class RunConfig:
    command: str
    inequality_id: str = "thm1"
    seed: int = 0
    dim: int = 3
    trials: int = 100
    tol: float | None = None
    log_base: float = 2.0
    quad_nodes: int = 400
    quad_cutoff: float = 12.0
    input_paths: list[str] = field(default_factory=list)
    out_path: str | None = None
    family: str = "appendixB"
    n_copies: int = 4


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qchain", description="Numerical audits of relative-entropy chain rules.",
                                     allow_abbrev=False)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--tol", type=float, default=None, help="override the verifier's default tolerance")
        p.add_argument("--log-base", type=float, default=2.0)
        p.add_argument("--quad-nodes", type=int, default=400)
        p.add_argument("--quad-cutoff", type=float, default=12.0)
        p.add_argument("--out", default=None)

    v = sub.add_parser("verify", help="check one inequality on one instance", allow_abbrev=False)
    common(v)
    v.add_argument("--inequality", required=True, choices=audit.INEQUALITY_IDS)
    v.add_argument("--dim", type=int, default=3)
    v.add_argument("--in", dest="input_paths", action="append", default=[],
                   help="state/channel/POVM JSON file; repeat in argument order")

    a = sub.add_parser("audit", help="batch of seeded random instances", allow_abbrev=False)
    common(a)
    a.add_argument("--inequality", default="all", choices=("all",) + audit.INEQUALITY_IDS)
    a.add_argument("--dim", type=int, default=3)
    a.add_argument("--trials", type=int, default=100)

    s = sub.add_parser("scan", help="region scan of the qubit counterexample family", allow_abbrev=False)
    s.add_argument("--family", default="appendixB", choices=FAMILIES)
    s.add_argument("--n-copies", type=int, default=4)
    s.add_argument("--log-base", type=float, default=2.0)
    s.add_argument("--out", default=None)

    qc = sub.add_parser("quadcheck", help="quadrature mass diagnostic", allow_abbrev=False)
    qc.add_argument("--quad-nodes", type=int, default=400)
    qc.add_argument("--quad-cutoff", type=float, default=12.0)
    qc.add_argument("--out", default=None)
    return parser


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    cfg = RunConfig(command=ns.command)
    for name in ("seed", "dim", "trials", "tol", "log_base", "quad_nodes", "quad_cutoff",
                 "input_paths", "family", "n_copies"):
        if hasattr(ns, name):
            setattr(cfg, name, getattr(ns, name))
    if hasattr(ns, "inequality"):
        cfg.inequality_id = ns.inequality
    cfg.out_path = ns.out
    return cfg


def _emit(text: str, out_path: str | None) -> None:
    if out_path is None:
        sys.stdout.write(text)
        return
    try:
        with open(out_path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise InputError(f"{out_path}: cannot write output ({exc.strerror})") from None


def _dump(obj) -> str:
    return json.dumps(obj, sort_keys=False, allow_nan=False)


def _load_inputs(paths):
    objects = []
    for path in paths:
        try:
            objects.append(load_object(path))
        except FileNotFoundError:
            raise InputError(f"{path}: file not found") from None
        except json.JSONDecodeError as exc:
            raise InputError(f"{path}: malformed JSON ({exc.msg} at line {exc.lineno})") from None
        except (ValidationError, KeyError, TypeError, ValueError) as exc:
            raise InputError(f"{path}: {exc}") from None
    return objects


def _quadrature(cfg: RunConfig):
    try:
        return build_quadrature(cfg.quad_nodes, cfg.quad_cutoff)
    except ValidationError as exc:
        raise InputError(str(exc)) from None


def _cmd_verify(cfg: RunConfig) -> int:
    ident = cfg.inequality_id
    if cfg.input_paths:
        inst = audit.instance_from_objects(ident, _load_inputs(cfg.input_paths))
    else:
        inst = audit.random_instance(ident, cfg.dim, audit.trial_rng(cfg.seed, 0))
    q = _quadrature(cfg) if audit.REGISTRY[ident].quadrature else None
    rep = audit.evaluate(ident, inst, q, cfg.tol)
    _emit(_dump(rep.to_dict()) + "\n", cfg.out_path)
    return EXIT_FAIL if rep.asserted and not rep.passed else EXIT_OK


def _cmd_audit(cfg: RunConfig) -> int:
    ids = audit.INEQUALITY_IDS if cfg.inequality_id == "all" else (cfg.inequality_id,)
    q = _quadrature(cfg)
    reports = audit.run_audit(ids, cfg.trials, cfg.seed, (cfg.dim,), q, cfg.tol)
    body = "[\n" + ",\n".join(_dump(r.to_dict()) for r in reports) + "\n]\n"
    summary = audit.summarize(reports)
    line = _dump({"total": summary["total"], "passed": summary["passed"],
                  "min_slack": _finite_or_str(summary["min_slack"])}) + "\n"
    if cfg.out_path is None:
        sys.stdout.write(body + line)
    else:
        _emit(body, cfg.out_path)
        sys.stdout.write(line)
    return EXIT_FAIL if summary["failed"] else EXIT_OK


def _finite_or_str(x: float):
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return x


def _cmd_scan(cfg: RunConfig) -> int:
    rows = region_scan(n_numeric=cfg.n_copies)
    _emit(rows_to_csv(rows), cfg.out_path)
    return EXIT_OK


def _cmd_quadcheck(cfg: RunConfig) -> int:
    q = _quadrature(cfg)
    dev = abs(q.mass - 1.0)
    ok = dev < MASS_TOL
    _emit(_dump({"quad_nodes": cfg.quad_nodes, "quad_cutoff": cfg.quad_cutoff, "mass": q.mass,
                 "mass_deviation": dev, "tol": MASS_TOL, "pass": ok}) + "\n", cfg.out_path)
    return EXIT_OK if ok else EXIT_FAIL


COMMANDS = {"verify": _cmd_verify, "audit": _cmd_audit, "scan": _cmd_scan, "quadcheck": _cmd_quadcheck}


def run(cfg: RunConfig) -> int:
    if cfg.log_base <= 0 or cfg.log_base == 1:
        print(f"error: --log-base must be positive and != 1, got {cfg.log_base}", file=sys.stderr)
        return EXIT_INPUT
    if cfg.trials < 0 or cfg.dim < 2 or cfg.seed < 0:
        print("error: --trials must be >= 0, --dim >= 2 and --seed >= 0", file=sys.stderr)
        return EXIT_INPUT
    try:
        with use_log_base(cfg.log_base):
            return COMMANDS[cfg.command](cfg)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


def main(argv=None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    return run(config_from_args(ns))


if __name__ == "__main__":
    sys.exit(main())
