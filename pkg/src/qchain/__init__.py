"""Numerical audits of chain rules and recoverability bounds for quantum relative entropy."""
from .divergences import binary_entropy, fidelity, kl, measured, measured_eigenbasis, umegaki, von_neumann_entropy
from .inequalities import (
    Pairing,
    classical_chain,
    classical_identity_audit,
    optimize_pairing,
    verify_commuting,
    verify_conditional_chain,
    verify_difbasis,
    verify_ensembles,
    verify_general_entropy,
    verify_thm1,
    verify_two_channel_dpi,
    verify_universal_bound,
)
from .matrix_core import ValidationError, get_log_base, set_log_base, use_log_base
from .partitions import EnsemblePartition, ensemble_partition, measured_chain_audit
from .quantum_objects import Channel, KrausMap, Povm
from .recovery import averaged_map, build_quadrature, petz_map, twisted_map, universal_recovery_map
from .reports import VerdictReport

__version__ = "0.1.0"
