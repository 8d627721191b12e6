"""Givens factorization algorithms.

All factorizers return a sequence ``G_1 ... G_N`` built from residuals
``V_k = G_k^T ... G_1^T U``; the approximation is ``U_hat = G_1 ... G_N`` and
its quality is ``symnorm(U, U_hat) / sqrt(d)``, which equals the distance of
the final residual to the nearest signed permutation.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .matrix import (
    GivensRotation,
    GivensSequence,
    as_square,
    frobenius_norm,
    is_orthogonal,
    l1_norm_scaled,
    rotate_cols_,
    rotate_rows_,
)
from .metrics import off_diagonal, symnorm, symnorm_to_identity

QUARTER_TURN = 0.5 * math.pi
TIE_TOL = 1e-12
ORTHO_TOL = 1e-8
OFF_PIVOT_TOL = 1e-14


class Algorithm(str, enum.Enum):
    ELIMINATION = "elimination"
    GREEDY = "greedy"
    L1 = "l1"
    JACOBI = "jacobi"


@dataclass
class FactorizeConfig:
    """Stopping rules and bookkeeping for one factorization run.

    ``max_factors=None`` means ``d(d-1)/2``. ``eps`` is compared against
    ``symnorm/sqrt(d)`` every ``checkpoint_stride`` iterations.
    """

    algorithm: Algorithm = Algorithm.L1
    max_factors: int | None = None
    eps: float = 0.1
    seed: int = 0
    checkpoint_stride: int = 25

    def __post_init__(self) -> None:
        self.algorithm = Algorithm(self.algorithm)
        if self.max_factors is not None and self.max_factors < 0:
            raise ValueError("max_factors must be >= 0")
        if not self.eps > 0:
            raise ValueError("eps must be positive")
        if self.checkpoint_stride < 1:
            raise ValueError("checkpoint_stride must be >= 1")

    def budget(self, d: int) -> int:
        return d * (d - 1) // 2 if self.max_factors is None else self.max_factors


@dataclass
class FactorizeTrace:
    sequence: GivensSequence
    objective_history: list[float] = field(default_factory=list)
    error_checkpoints: list[tuple[int, float]] = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    @property
    def n_factors(self) -> int:
        return len(self.sequence)

    @property
    def final_error(self) -> float | None:
        return self.error_checkpoints[-1][1] if self.error_checkpoints else None


def _require_orthogonal(u: np.ndarray) -> np.ndarray:
    u = as_square(u)
    if not np.all(np.isfinite(u)):
        raise ValueError("matrix contains non-finite entries")
    if not is_orthogonal(u, ORTHO_TOL):
        raise ValueError("input is not orthogonal within 1e-8")
    return np.array(u, dtype=np.float64, order="C", copy=True)


def _error(v: np.ndarray) -> float:
    return symnorm_to_identity(v) / math.sqrt(v.shape[0])


# ---------------------------------------------------------------------------
# Exact per-subspace angle for the L1 objective


def l1_angles_batch(x1: np.ndarray, x2: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Globally optimal angles for many row pairs at once.

    ``x1``, ``x2`` have shape ``(P, d)``. For each pair minimizes
    ``g(a) = ||R(a) [x1; x2]||_1`` where ``R(a)`` rotates each column point
    counter-clockwise. Writing point ``k`` as ``r_k (cos phi_k, sin phi_k)``,
    ``g(a) = sum_k r_k h(phi_k + a)`` with ``h = |cos| + |sin|``; ``h`` has
    period pi/2 and is concave on each period, so minima sit where some
    point crosses an axis, ``a = -phi_k mod pi/2``. After sorting the reduced
    phases, ``g`` at every crossing comes from two prefix sums, giving
    O(d log d) per pair.

    Returns ``(angles, values, base)`` where ``base = g(0)``. Angles lie in
    [0, pi/2); among values within ``TIE_TOL`` of the minimum the smallest
    angle wins, and ``a = 0`` is always a candidate.
    """
    x1 = np.atleast_2d(np.asarray(x1, dtype=np.float64))
    x2 = np.atleast_2d(np.asarray(x2, dtype=np.float64))
    base = np.abs(x1).sum(axis=1) + np.abs(x2).sum(axis=1)

    r = np.hypot(x1, x2)
    theta = np.mod(np.arctan2(x2, x1), QUARTER_TURN)
    theta[theta >= QUARTER_TURN] = 0.0
    order = np.argsort(theta, axis=1, kind="stable")
    theta = np.take_along_axis(theta, order, axis=1)
    r = np.take_along_axis(r, order, axis=1)
    cos_t, sin_t = np.cos(theta), np.sin(theta)
    cc, ss = r * cos_t, r * sin_t
    plus, minus = cc + ss, cc - ss

    zeros = np.zeros((x1.shape[0], 1))
    before_plus = np.concatenate([zeros, np.cumsum(plus, axis=1)[:, :-1]], axis=1)
    before_minus = np.concatenate([zeros, np.cumsum(minus, axis=1)[:, :-1]], axis=1)
    total_plus = before_plus[:, -1:] + plus[:, -1:]
    total_minus = before_minus[:, -1:] + minus[:, -1:]
    # points at or after m in phase order sit at psi = theta_k - theta_m in [0, pi/2);
    # earlier ones wrap to psi + pi/2
    coef_cos = (total_plus - before_plus) + before_minus
    coef_sin = -(total_minus - before_minus) + before_plus
    values = cos_t * coef_cos + sin_t * coef_sin
    angles = np.where(theta > 0.0, QUARTER_TURN - theta, 0.0)

    values = np.concatenate([base[:, None], values], axis=1)
    angles = np.concatenate([zeros, angles], axis=1)
    best = values.min(axis=1, keepdims=True)
    masked = np.where(values <= best + TIE_TOL, angles, np.inf)
    pick = np.argmin(masked, axis=1)[:, None]
    return (
        np.take_along_axis(angles, pick, axis=1)[:, 0],
        np.take_along_axis(values, pick, axis=1)[:, 0],
        base,
    )


def optimal_angle_l1(rows: np.ndarray) -> tuple[float, float]:
    """Angle in [0, pi/2) minimizing ``||R(a) rows||_1`` for a ``2 x d`` block, and the minimum."""
    rows = np.asarray(rows, dtype=np.float64)
    if rows.ndim != 2 or rows.shape[0] != 2:
        raise ValueError(f"expected a 2 x d array, got shape {rows.shape}")
    if not np.any(rows):
        return 0.0, 0.0
    angles, values, _ = l1_angles_batch(rows[:1], rows[1:])
    return float(angles[0]), float(values[0])


def rotated_l1(rows: np.ndarray, angle: float) -> float:
    c, s = math.cos(angle), math.sin(angle)
    x1, x2 = rows
    return float(np.abs(c * x1 - s * x2).sum() + np.abs(s * x1 + c * x2).sum())


def optimal_angle_l1_naive(rows: np.ndarray) -> tuple[float, float]:
    """Reference evaluator: ``g`` evaluated directly at every axis crossing, O(d^2)."""
    rows = np.asarray(rows, dtype=np.float64)
    phases = np.arctan2(rows[1], rows[0])
    candidates = np.mod(np.concatenate([[0.0], -phases]), QUARTER_TURN)
    candidates[candidates >= QUARTER_TURN] = 0.0
    values = np.array([rotated_l1(rows, a) for a in candidates])
    best = values.min()
    angle = candidates[values <= best + TIE_TOL].min()
    return float(angle), rotated_l1(rows, angle)


# ---------------------------------------------------------------------------
# Coordinate descent on the L1 objective


def factorize_l1(u: np.ndarray, cfg: FactorizeConfig | None = None, use_cache: bool = True) -> FactorizeTrace:
    """Greedy coordinate descent on ``f(U) = ||U||_1 / d`` over O(d).

    Each iteration picks the subspace whose optimal rotation lowers ``f`` the
    most. Optimal angles and objective changes are cached per subspace; a
    rotation of rows ``(i, j)`` only invalidates the ``2d - 3`` subspaces
    touching ``i`` or ``j``. ``use_cache=False`` recomputes all subspaces each
    iteration and must select the identical sequence.
    """
    cfg = cfg or FactorizeConfig()
    v = _require_orthogonal(u)
    d = v.shape[0]
    budget = cfg.budget(d)
    rows, cols = np.triu_indices(d, k=1)
    delta = np.zeros((d, d))
    best_angle = np.zeros((d, d))

    def refresh(pi: np.ndarray, pj: np.ndarray) -> None:
        angles, values, base = l1_angles_batch(v[pi], v[pj])
        delta[pi, pj] = values - base
        best_angle[pi, pj] = angles

    everything = np.arange(d)

    def touching(i: int, j: int) -> tuple[np.ndarray, np.ndarray]:
        others = everything[(everything != i) & (everything != j)]
        pi = np.concatenate([np.minimum(others, i), np.minimum(others, j), [i]])
        pj = np.concatenate([np.maximum(others, i), np.maximum(others, j), [j]])
        return pi, pj

    seq = GivensSequence(d)
    trace = FactorizeTrace(seq, meta={"algorithm": Algorithm.L1.value, "cached": use_cache})
    trace.objective_history.append(l1_norm_scaled(v))
    err = _error(v)
    trace.error_checkpoints.append((0, err))
    stop = "eps" if err < cfg.eps else None

    if stop is None and d > 1:
        refresh(rows, cols)
    while stop is None:
        if len(seq) >= budget:
            stop = "max_factors"
            break
        flat = delta[rows, cols]
        lowest = flat.min()
        if lowest > -TIE_TOL:
            stop = "local_minimum"
            break
        k = int(np.argmax(flat <= lowest + TIE_TOL))
        i, j = int(rows[k]), int(cols[k])
        angle = float(best_angle[i, j])
        rotate_rows_(v, i, j, math.cos(angle), math.sin(angle))
        seq.append(GivensRotation(i, j, angle))
        trace.objective_history.append(l1_norm_scaled(v))
        if use_cache:
            refresh(*touching(i, j))
        else:
            refresh(rows, cols)
        if len(seq) % cfg.checkpoint_stride == 0:
            err = _error(v)
            trace.error_checkpoints.append((len(seq), err))
            if err < cfg.eps:
                stop = "eps"

    if trace.error_checkpoints[-1][0] != len(seq):
        trace.error_checkpoints.append((len(seq), _error(v)))
    trace.meta["stop"] = stop
    return trace


# ---------------------------------------------------------------------------
# Structured elimination


def factorize_elimination(u: np.ndarray, checkpoint_stride: int | None = None) -> FactorizeTrace:
    """Exact factorization with ``d(d-1)/2`` eliminations plus pi-rotation sign fixes.

    Entries below the diagonal are zeroed column by column, left to right,
    bottom to top within a column; entry ``(r, c)`` is zeroed by a rotation of
    rows ``(c, r)`` against the pivot ``V[c, c]``. The smallest such rotation
    is used, so the residual ends as ``diag(+-1)``; pairs of ``-1`` are then
    flipped by rotations through pi. For ``det(U) = -1`` one ``-1`` remains,
    which the signed-permutation error absorbs.
    """
    v = _require_orthogonal(u)
    d = v.shape[0]
    seq = GivensSequence(d)
    trace = FactorizeTrace(seq, meta={"algorithm": Algorithm.ELIMINATION.value})
    trace.objective_history.append(l1_norm_scaled(v))
    stride = checkpoint_stride
    trace.error_checkpoints.append((0, _error(v)))

    def push(i: int, j: int, angle: float) -> None:
        rotate_rows_(v, i, j, math.cos(angle), math.sin(angle))
        seq.append(GivensRotation(i, j, angle))
        trace.objective_history.append(l1_norm_scaled(v))
        if stride and len(seq) % stride == 0:
            trace.error_checkpoints.append((len(seq), _error(v)))

    for c in range(d - 1):
        for r in range(d - 1, c, -1):
            pivot, target = v[c, c], v[r, c]
            sign = -1.0 if pivot < 0.0 else 1.0
            angle = math.atan2(-sign * target, sign * pivot) if (pivot or target) else 0.0
            push(c, r, angle)
            v[r, c] = 0.0

    negatives = [k for k in range(d) if v[k, k] < 0.0]
    for a, b in zip(negatives[0::2], negatives[1::2]):
        push(a, b, math.pi)
    trace.meta["sign_fixes"] = len(negatives) // 2
    trace.meta["det_negative"] = len(negatives) % 2 == 1

    if trace.error_checkpoints[-1][0] != len(seq):
        trace.error_checkpoints.append((len(seq), _error(v)))
    trace.meta["stop"] = "complete"
    return trace


# ---------------------------------------------------------------------------
# Greedy Frobenius baseline


def factorize_greedy(u: np.ndarray, cfg: FactorizeConfig | None = None) -> FactorizeTrace:
    """Greedy rotations toward a fixed signed-permutation target.

    The target column assignment ``P0`` is the symnorm assignment of ``U``
    against the identity, computed once. With ``W = U P0^T`` each step
    maximizes ``tr(V)`` of the residual ``V = G_k^T ... G_1^T W``, which for
    fixed ``P0`` is equivalent to minimizing ``||V - I||_F``. For rows
    ``(i, j)`` the best angle is ``atan2(V_ij - V_ji, V_ii + V_jj)``.
    """
    cfg = cfg or FactorizeConfig(algorithm=Algorithm.GREEDY)
    u = _require_orthogonal(u)
    d = u.shape[0]
    budget = cfg.budget(d)
    _, p0 = symnorm(u, np.eye(d), check=False)
    v = np.ascontiguousarray(u @ p0.to_matrix().T)
    iu = np.triu_indices(d, k=1)

    seq = GivensSequence(d)
    trace = FactorizeTrace(
        seq, meta={"algorithm": Algorithm.GREEDY.value, "objective": "trace-proxy, fixed initial assignment"}
    )
    eye = np.eye(d)
    trace.objective_history.append(frobenius_norm(v - eye))
    err = _error(v)
    trace.error_checkpoints.append((0, err))
    stop = "eps" if err < cfg.eps else None

    while stop is None:
        if len(seq) >= budget:
            stop = "max_factors"
            break
        diag = np.diag(v)
        s = (diag[:, None] + diag[None, :])[iu]
        t = (v - v.T)[iu]
        gain = np.hypot(t, s) - s
        top = gain.max()
        if top <= TIE_TOL:
            stop = "local_minimum"
            break
        k = int(np.argmax(gain >= top - TIE_TOL))
        i, j = int(iu[0][k]), int(iu[1][k])
        angle = math.atan2(t[k], s[k])
        rotate_rows_(v, i, j, math.cos(angle), math.sin(angle))
        seq.append(GivensRotation(i, j, angle))
        trace.objective_history.append(frobenius_norm(v - eye))
        if len(seq) % cfg.checkpoint_stride == 0:
            err = _error(v)
            trace.error_checkpoints.append((len(seq), err))
            if err < cfg.eps:
                stop = "eps"

    if trace.error_checkpoints[-1][0] != len(seq):
        trace.error_checkpoints.append((len(seq), _error(v)))
    trace.meta["stop"] = stop
    return trace


# ---------------------------------------------------------------------------
# Truncated classical Jacobi


def jacobi_angle(app: float, aqq: float, apq: float) -> float:
    """Rotation angle zeroing ``apq`` under ``G^T A G``, with ``|angle| <= pi/4``."""
    if apq == 0.0:
        return 0.0
    if app == aqq:
        return math.copysign(0.25 * math.pi, apq)
    return 0.5 * math.atan(-2.0 * apq / (app - aqq))


def require_symmetric(l: np.ndarray, tol: float = 1e-8) -> np.ndarray:
    l = as_square(l)
    if not np.all(np.isfinite(l)):
        raise ValueError("matrix contains non-finite entries")
    if np.max(np.abs(l - l.T), initial=0.0) > tol:
        raise ValueError("matrix is not symmetric within 1e-8")
    return np.array(0.5 * (l + l.T), order="C")


def jacobi_truncated(
    l: np.ndarray, cfg: FactorizeConfig | None = None, reference: np.ndarray | None = None
) -> FactorizeTrace:
    """Classical Jacobi: each step annihilates the largest off-diagonal entry.

    ``objective_history`` holds ``off(L^k)``. The returned sequence is the
    accumulated approximate eigenbasis ``U_hat = G_1 ... G_k``. When
    ``reference`` (an exact eigenbasis) is given, error checkpoints record
    ``symnorm(reference, U_hat) / sqrt(d)``; ``cfg.eps`` then acts as a
    stopping threshold as for the other algorithms.
    """
    cfg = cfg or FactorizeConfig(algorithm=Algorithm.JACOBI)
    a = require_symmetric(l)
    d = a.shape[0]
    budget = cfg.budget(d)
    basis = np.eye(d)
    iu = np.triu_indices(d, k=1)
    root = math.sqrt(d)

    seq = GivensSequence(d)
    trace = FactorizeTrace(seq, meta={"algorithm": Algorithm.JACOBI.value, "has_reference": reference is not None})
    trace.objective_history.append(off_diagonal(a))

    def checkpoint() -> bool:
        if reference is None:
            return False
        err = symnorm(reference, basis, check=False)[0] / root
        trace.error_checkpoints.append((len(seq), err))
        return err < cfg.eps

    stop = "eps" if checkpoint() else None
    while stop is None:
        if len(seq) >= budget:
            stop = "max_factors"
            break
        upper = np.abs(a[iu])
        k = int(np.argmax(upper)) if upper.size else 0
        if not upper.size or upper[k] < OFF_PIVOT_TOL:
            stop = "diagonal"
            break
        p, q = int(iu[0][k]), int(iu[1][k])
        angle = jacobi_angle(a[p, p], a[q, q], a[p, q])
        c, s = math.cos(angle), math.sin(angle)
        rotate_rows_(a, p, q, c, s)
        rotate_cols_(a, p, q, c, s)
        a[p, q] = a[q, p] = 0.0
        rotate_cols_(basis, p, q, c, s)
        seq.append(GivensRotation(p, q, angle))
        trace.objective_history.append(off_diagonal(a))
        if len(seq) % cfg.checkpoint_stride == 0 and checkpoint():
            stop = "eps"

    if reference is not None and trace.error_checkpoints[-1][0] != len(seq):
        checkpoint()
    trace.meta["stop"] = stop
    trace.meta["diagonal"] = np.diag(a).copy()
    return trace


def factorize(u: np.ndarray, cfg: FactorizeConfig) -> FactorizeTrace:
    """Dispatch on ``cfg.algorithm``; for Jacobi ``u`` is the symmetric matrix itself."""
    if cfg.algorithm is Algorithm.L1:
        return factorize_l1(u, cfg)
    if cfg.algorithm is Algorithm.GREEDY:
        return factorize_greedy(u, cfg)
    if cfg.algorithm is Algorithm.ELIMINATION:
        return factorize_elimination(u, cfg.checkpoint_stride)
    return jacobi_truncated(u, cfg)


# ---------------------------------------------------------------------------
# Angle perturbation bound


def lemma1_check(seq: GivensSequence, deltas: Sequence[float], delta_max: float) -> tuple[float, float]:
    """Compare ``||prod G_bar - prod G||_F`` with the bound ``2 N delta_max``.

    ``G_bar_n`` rotates the same plane as ``G_n`` by ``alpha_n + delta_n``.
    Raises ``AssertionError`` if the measured gap exceeds the bound.
    """
    deltas = np.asarray(deltas, dtype=np.float64)
    if deltas.shape != (len(seq),):
        raise ValueError("need one perturbation per factor")
    if np.any(deltas < 0) or np.any(deltas > delta_max):
        raise ValueError("perturbations must lie in [0, delta_max]")
    perturbed = GivensSequence(
        seq.dim, [GivensRotation(g.i, g.j, g.angle + float(dn)) for g, dn in zip(seq, deltas)]
    )
    lhs = frobenius_norm(perturbed.materialize() - seq.materialize())
    rhs = 2.0 * len(seq) * float(delta_max)
    if lhs > rhs:
        raise AssertionError(f"perturbation gap {lhs} exceeds bound {rhs}")
    return lhs, rhs
