"""Approximate orthogonal matrices by short products of Givens rotations."""

from .factorize import (
    Algorithm,
    FactorizeConfig,
    FactorizeTrace,
    factorize,
    factorize_elimination,
    factorize_greedy,
    factorize_l1,
    jacobi_truncated,
    lemma1_check,
    optimal_angle_l1,
)
from .matrix import (
    GivensRotation,
    GivensSequence,
    apply_left_transpose,
    apply_right,
    frobenius_norm,
    hadamard,
    is_orthogonal,
    l0_count,
    l1_norm_scaled,
    sample_haar_orthogonal,
)
from .metrics import SignedPermutation, n_epsilon, off_diagonal, symnorm, symnorm_bruteforce

__version__ = "0.1.0"

__all__ = [
    "Algorithm",
    "FactorizeConfig",
    "FactorizeTrace",
    "factorize",
    "factorize_elimination",
    "factorize_greedy",
    "factorize_l1",
    "jacobi_truncated",
    "lemma1_check",
    "optimal_angle_l1",
    "GivensRotation",
    "GivensSequence",
    "apply_left_transpose",
    "apply_right",
    "frobenius_norm",
    "hadamard",
    "is_orthogonal",
    "l0_count",
    "l1_norm_scaled",
    "sample_haar_orthogonal",
    "SignedPermutation",
    "n_epsilon",
    "off_diagonal",
    "symnorm",
    "symnorm_bruteforce",
]
