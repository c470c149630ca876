"""Certified computations on a rough interval attractor.

The package evaluates a self-affine cosine curve, the stable slopes of
its associated skew products and the derived comparison kernels with
floating-point enclosures, certifies the sign and root structure those
enclosures support, and estimates the invariant measures' pushforwards
and fibre marginals by deterministic Monte Carlo.
"""

import os as _os

# BLAS pools read their env vars at import; apply the override first.
_threads = _os.environ.get("WEIERBAKER_THREADS")
if _threads:
    for _var in (
        "OMP_NUM_THREADS",
        "OPENBLAS_NUM_THREADS",
        "MKL_NUM_THREADS",
        "NUMEXPR_NUM_THREADS",
    ):
        _os.environ.setdefault(_var, _threads)

from .certify import (
    CaseSpec,
    CertificateReport,
    CheckResult,
    EnvelopePair,
    SlotBound,
    TABLE_CASES,
    bracket_root,
    case_by_id,
    case_pair,
    certify_case,
    certify_g_roots,
    certify_k_signs,
    certify_kappa,
    certify_l_signs,
    envelope,
    estimate_kappa0,
    eval_k,
    eval_k_grid,
    eval_l,
    eval_l_grid,
    inf_V_sample,
    shape_certified,
    value_at_test_point,
)
from .dyadic import (
    BitSequence,
    JumpTimes,
    PhasePoint,
    Roughness,
    baker,
    bits_from_jumps,
    decode,
    encode,
    jump_times,
    sample_macroscopic_bits,
    sample_macroscopic_pair,
)
from .dynamics import (
    ExtendedPoint,
    holder_estimate,
    jacobian_F,
    stable_X,
    step_F,
    step_Gamma,
)
from .errors import (
    BracketError,
    CaseConstraintError,
    CertificateUnavailableError,
    DegenerateInputError,
    DomainError,
    IndeterminateSignError,
    OutOfValidityError,
    PrecisionError,
)
from .measures import (
    DensityEstimate,
    EmpiricalMeasure,
    L2Refinement,
    L2Saturation,
    TelescopingReport,
    char_fn_l2_diag,
    density_rho,
    density_rho_hat,
    marginal_l2_refinement,
    roots_of_f,
    sample_rho,
    sbr_marginal,
    support_halfwidth,
    telescoping_check,
)
from .series import (
    BoundedValue,
    CERT_TERMS,
    ORACLE_TERMS,
    SupBounds,
    certified_sup_g,
    eval_G_jumps,
    eval_S,
    eval_S_diff,
    eval_W,
    eval_g,
    eval_g_grid,
    g_tail_bound,
    s_batch,
    sup_bounds,
)

__version__ = "0.1.0"

__all__ = [
    "BitSequence",
    "BoundedValue",
    "BracketError",
    "CERT_TERMS",
    "CaseConstraintError",
    "CaseSpec",
    "CertificateReport",
    "CertificateUnavailableError",
    "CheckResult",
    "DegenerateInputError",
    "DensityEstimate",
    "DomainError",
    "EmpiricalMeasure",
    "EnvelopePair",
    "ExtendedPoint",
    "IndeterminateSignError",
    "JumpTimes",
    "L2Refinement",
    "L2Saturation",
    "ORACLE_TERMS",
    "OutOfValidityError",
    "PhasePoint",
    "PrecisionError",
    "Roughness",
    "SlotBound",
    "SupBounds",
    "TABLE_CASES",
    "TelescopingReport",
    "baker",
    "bits_from_jumps",
    "bracket_root",
    "case_by_id",
    "case_pair",
    "certified_sup_g",
    "certify_case",
    "certify_g_roots",
    "certify_k_signs",
    "certify_kappa",
    "certify_l_signs",
    "char_fn_l2_diag",
    "decode",
    "density_rho",
    "density_rho_hat",
    "encode",
    "envelope",
    "estimate_kappa0",
    "eval_G_jumps",
    "eval_S",
    "eval_S_diff",
    "eval_W",
    "eval_g",
    "eval_g_grid",
    "eval_k",
    "eval_k_grid",
    "eval_l",
    "eval_l_grid",
    "g_tail_bound",
    "holder_estimate",
    "inf_V_sample",
    "jacobian_F",
    "jump_times",
    "marginal_l2_refinement",
    "roots_of_f",
    "s_batch",
    "sample_macroscopic_bits",
    "sample_macroscopic_pair",
    "sample_rho",
    "sbr_marginal",
    "shape_certified",
    "stable_X",
    "step_F",
    "step_Gamma",
    "sup_bounds",
    "support_halfwidth",
    "telescoping_check",
    "value_at_test_point",
]
