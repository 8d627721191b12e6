"""Permutation-invariant approximation error and related statistics."""

from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from .matrix import GivensSequence, as_square, is_orthogonal, rotate_rows_


@dataclass(frozen=True)
class SignedPermutation:
    """``P[k, perm[k]] = signs[k]``, all other entries zero."""

    perm: np.ndarray
    signs: np.ndarray

    def __post_init__(self) -> None:
        perm = np.asarray(self.perm, dtype=np.intp)
        signs = np.asarray(self.signs, dtype=np.float64)
        d = perm.size
        if signs.shape != (d,) or not np.array_equal(np.sort(perm), np.arange(d)):
            raise ValueError("perm must be a bijection on range(d) with one sign per entry")
        if not np.all(np.abs(signs) == 1.0):
            raise ValueError("signs must be +1 or -1")
        object.__setattr__(self, "perm", perm)
        object.__setattr__(self, "signs", signs)

    @property
    def dim(self) -> int:
        return int(self.perm.size)

    def to_matrix(self) -> np.ndarray:
        p = np.zeros((self.dim, self.dim))
        p[np.arange(self.dim), self.perm] = self.signs
        return p

    def right_multiply(self, m: np.ndarray) -> np.ndarray:
        """``m @ P`` without forming ``P``."""
        out = np.empty_like(m, dtype=np.float64)
        out[:, self.perm] = m * self.signs
        return out


def _check_pair(u: np.ndarray, u_hat: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    u, u_hat = as_square(u), as_square(u_hat)
    if u.shape != u_hat.shape:
        raise ValueError(f"dimension mismatch: {u.shape} vs {u_hat.shape}")
    return u, u_hat


def symnorm(u: np.ndarray, u_hat: np.ndarray, check: bool = True) -> tuple[float, SignedPermutation]:
    """``min_P ||U - U_hat P||_F`` over signed permutations, and the minimizing ``P``.

    For orthogonal arguments ``||U - U_hat P||^2 = 2d - 2 tr(P^T U_hat^T U)``,
    so the minimization is a linear assignment maximizing
    ``sum_k |M[k, sigma(k)]|`` with ``M = U_hat^T U``. The returned value is
    the directly evaluated distance, not the trace identity, to keep full
    precision near zero.
    """
    u, u_hat = _check_pair(u, u_hat)
    if check and not (is_orthogonal(u, 1e-8) and is_orthogonal(u_hat, 1e-8)):
        warnings.warn("symnorm called on a non-orthogonal argument", RuntimeWarning, stacklevel=2)
    m = u_hat.T @ u
    rows, cols = linear_sum_assignment(np.abs(m), maximize=True)
    perm = np.empty(m.shape[0], dtype=np.intp)
    perm[rows] = cols
    picked = m[rows, cols]
    signs = np.where(picked < 0.0, -1.0, 1.0)
    p = SignedPermutation(perm, signs[np.argsort(rows)])
    return float(np.linalg.norm(u - p.right_multiply(u_hat))), p


def symnorm_to_identity(v: np.ndarray) -> float:
    """``min_P ||V - P||_F``; used on residuals ``V = U_hat^T U``."""
    v = as_square(v)
    rows, cols = linear_sum_assignment(np.abs(v), maximize=True)
    diff = v.copy()
    diff[rows, cols] -= np.where(v[rows, cols] < 0.0, -1.0, 1.0)
    return float(np.linalg.norm(diff))


def symnorm_bruteforce(u: np.ndarray, u_hat: np.ndarray) -> float:
    """Exhaustive minimum over all ``d! 2^d`` signed permutations (``d <= 6``)."""
    u, u_hat = _check_pair(u, u_hat)
    d = u.shape[0]
    if d > 6:
        raise ValueError(f"brute force is limited to d <= 6, got {d}")
    best = math.inf
    sign_vectors = np.array(list(itertools.product((1.0, -1.0), repeat=d)))
    for perm in itertools.permutations(range(d)):
        # columns of U_hat P: column perm[k] is signs[k] * U_hat[:, k]
        inv = np.argsort(perm)
        permuted = u_hat[:, inv]
        stacked = permuted[None, :, :] * sign_vectors[:, inv][:, None, :]
        dist = np.sqrt(np.sum((u[None] - stacked) ** 2, axis=(1, 2)))
        best = min(best, float(dist.min()))
    return best


def off_diagonal(l: np.ndarray) -> float:
    """Squared Frobenius norm of the off-diagonal part.

    Summed over off-diagonal entries directly; ``||L||_F^2 - sum L_kk^2``
    cancels catastrophically once the matrix is nearly diagonal.
    """
    l = as_square(l)
    mask = ~np.eye(l.shape[0], dtype=bool)
    return float(np.sum(np.square(l[mask])))


def checkpoint_stride(n: int) -> int:
    return max(1, n // 200)


def error_curve(u: np.ndarray, seq: GivensSequence, stride: int) -> list[tuple[int, float]]:
    """Normalized errors ``symnorm(U, G_1...G_n)/sqrt(d)`` every ``stride`` prefixes.

    The final prefix is always included.
    """
    u = as_square(u)
    d = u.shape[0]
    root = math.sqrt(d)
    residual = np.array(u, dtype=np.float64, copy=True)
    out = [(0, symnorm_to_identity(residual) / root)]
    n = len(seq)
    for k, g in enumerate(seq, start=1):
        c, s = g.cs
        rotate_rows_(residual, g.i, g.j, c, s)
        if k % stride == 0 or k == n:
            out.append((k, symnorm_to_identity(residual) / root))
    return out


def n_epsilon(u: np.ndarray, seq: GivensSequence, eps: float) -> int | None:
    """Smallest ``N`` with ``symnorm(U, G_1...G_N)/sqrt(d) < eps``, or ``None``.

    Prefixes are evaluated every ``max(1, N/200)`` factors; once a checkpoint
    qualifies, the prefix length is located by bisection inside the last
    stride.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    u = as_square(u)
    if u.shape[0] != seq.dim:
        raise ValueError("dimension mismatch between matrix and sequence")
    root = math.sqrt(seq.dim)
    residual = np.array(u, dtype=np.float64, copy=True)
    if symnorm_to_identity(residual) / root < eps:
        return 0
    n = len(seq)
    stride = checkpoint_stride(n)
    lo, lo_residual = 0, residual.copy()
    for k, g in enumerate(seq, start=1):
        c, s = g.cs
        rotate_rows_(residual, g.i, g.j, c, s)
        if k % stride and k != n:
            continue
        if symnorm_to_identity(residual) / root < eps:
            return _bisect(lo, k, lo_residual, seq, eps, root)
        lo, lo_residual = k, residual.copy()
    return None


def _bisect(lo: int, hi: int, lo_residual: np.ndarray, seq: GivensSequence, eps: float, root: float) -> int:
    # invariant: prefix lo fails, prefix hi passes
    while hi - lo > 1:
        mid = (lo + hi) // 2
        r = lo_residual.copy()
        for g in seq.factors[lo:mid]:
            c, s = g.cs
            rotate_rows_(r, g.i, g.j, c, s)
        if symnorm_to_identity(r) / root < eps:
            hi = mid
        else:
            lo, lo_residual = mid, r
    return hi
