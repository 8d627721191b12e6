"""Dense orthogonal matrices, Givens factors and their application kernels.

Matrices are plain C-contiguous ``float64`` numpy arrays of shape ``(d, d)``.
A Givens factor ``G(i, j, alpha)`` equals the identity except for

    G[i, i] = cos(alpha)    G[i, j] = sin(alpha)
    G[j, i] = -sin(alpha)   G[j, j] = cos(alpha)

so that left-multiplying by its transpose rotates rows ``i`` and ``j``
counter-clockwise:

    row_i' = cos * row_i - sin * row_j
    row_j' = sin * row_i + cos * row_j

Every other module relies on this one convention.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

import numpy as np

DEFAULT_ZERO_TOL = 1e-9


def wrap_angle(angle: float) -> float:
    """Map ``angle`` onto the half-open interval (-pi, pi]."""
    a = math.remainder(float(angle), 2.0 * math.pi)
    if a <= -math.pi:
        a += 2.0 * math.pi
    return a


@dataclass(frozen=True)
class GivensRotation:
    """Rotation in the ``(i, j)`` coordinate plane by ``angle`` radians.

    Indices are stored with ``i < j``; a factor given as ``(j, i, a)`` is the
    same matrix as ``(i, j, -a)`` and is canonicalized that way.
    """

    i: int
    j: int
    angle: float

    def __post_init__(self) -> None:
        i, j, angle = int(self.i), int(self.j), float(self.angle)
        if i == j:
            raise ValueError(f"rotation plane needs two distinct indices, got ({i}, {j})")
        if i < 0 or j < 0:
            raise ValueError(f"negative index in ({i}, {j})")
        if i > j:
            i, j, angle = j, i, -angle
        object.__setattr__(self, "i", i)
        object.__setattr__(self, "j", j)
        object.__setattr__(self, "angle", wrap_angle(angle))

    @property
    def cs(self) -> tuple[float, float]:
        return math.cos(self.angle), math.sin(self.angle)

    def inverse(self) -> GivensRotation:
        return GivensRotation(self.i, self.j, -self.angle)

    def materialize(self, d: int) -> np.ndarray:
        _check_indices(self, d)
        c, s = self.cs
        g = np.eye(d)
        g[self.i, self.i] = c
        g[self.i, self.j] = s
        g[self.j, self.i] = -s
        g[self.j, self.j] = c
        return g


class OpCounter:
    """Counts fused two-coordinate updates performed by the kernels."""

    def __init__(self) -> None:
        self.updates = 0

    def __repr__(self) -> str:
        return f"OpCounter(updates={self.updates})"


def _check_indices(g: GivensRotation, d: int) -> None:
    if g.j >= d:
        raise IndexError(f"rotation ({g.i}, {g.j}) out of range for dimension {d}")


# In-place kernels. Callers own the buffer exclusively.

def rotate_rows_(m: np.ndarray, i: int, j: int, c: float, s: float) -> None:
    """``m <- G(i, j, alpha)^T m`` on rows ``i`` and ``j`` only."""
    ri = m[i].copy()
    rj = m[j]
    m[i] = c * ri - s * rj
    m[j] = s * ri + c * rj


def rotate_cols_(m: np.ndarray, i: int, j: int, c: float, s: float) -> None:
    """``m <- m G(i, j, alpha)`` on columns ``i`` and ``j`` only."""
    ci = m[:, i].copy()
    cj = m[:, j].copy()
    m[:, i] = c * ci - s * cj
    m[:, j] = s * ci + c * cj


def _as_work_copy(m: np.ndarray) -> np.ndarray:
    return np.array(m, dtype=np.float64, order="C", copy=True)


def apply_left_transpose(g: GivensRotation, m: np.ndarray) -> np.ndarray:
    """Return ``G^T m``. O(d): only rows ``g.i`` and ``g.j`` change."""
    out = _as_work_copy(m)
    _check_indices(g, out.shape[0])
    c, s = g.cs
    rotate_rows_(out, g.i, g.j, c, s)
    return out


def apply_right(m: np.ndarray, g: GivensRotation) -> np.ndarray:
    """Return ``m G``. O(d): only columns ``g.i`` and ``g.j`` change."""
    out = _as_work_copy(m)
    _check_indices(g, out.shape[1])
    c, s = g.cs
    rotate_cols_(out, g.i, g.j, c, s)
    return out


@dataclass
class GivensSequence:
    """Ordered product ``G_1 G_2 ... G_N`` of Givens factors in dimension ``dim``."""

    dim: int
    factors: list[GivensRotation] = field(default_factory=list)

    def __post_init__(self) -> None:
        if self.dim < 1:
            raise ValueError("dimension must be positive")
        self.factors = list(self.factors)
        for g in self.factors:
            _check_indices(g, self.dim)

    def __len__(self) -> int:
        return len(self.factors)

    def __iter__(self) -> Iterator[GivensRotation]:
        return iter(self.factors)

    def __getitem__(self, idx):
        if isinstance(idx, slice):
            return GivensSequence(self.dim, self.factors[idx])
        return self.factors[idx]

    def append(self, g: GivensRotation) -> None:
        _check_indices(g, self.dim)
        self.factors.append(g)

    def prefix(self, n: int) -> GivensSequence:
        return GivensSequence(self.dim, self.factors[:n])

    def materialize(self) -> np.ndarray:
        out = np.eye(self.dim)
        for g in self.factors:
            c, s = g.cs
            rotate_cols_(out, g.i, g.j, c, s)
        return out

    def apply(self, x: np.ndarray, counter: OpCounter | None = None) -> np.ndarray:
        """Return ``G_1 ... G_N x`` for a vector or a ``(d, k)`` block.

        Each factor is one fused update of two coordinates (rows), so the
        cost is Theta(N k) rather than Theta(d^2 k) for a dense product.
        """
        out = _as_vector_block(x, self.dim)
        for g in reversed(self.factors):
            c, s = g.cs
            # G x == G(i, j, -alpha)^T x
            rotate_rows_(out, g.i, g.j, c, -s)
            if counter is not None:
                counter.updates += 1
        return out.reshape(np.shape(x))

    def apply_transpose(self, x: np.ndarray, counter: OpCounter | None = None) -> np.ndarray:
        """Return ``G_N^T ... G_1^T x``."""
        out = _as_vector_block(x, self.dim)
        for g in self.factors:
            c, s = g.cs
            rotate_rows_(out, g.i, g.j, c, s)
            if counter is not None:
                counter.updates += 1
        return out.reshape(np.shape(x))


def _as_vector_block(x: np.ndarray, d: int) -> np.ndarray:
    arr = np.array(x, dtype=np.float64, copy=True)
    if arr.shape[0] != d:
        raise ValueError(f"leading dimension {arr.shape[0]} does not match sequence dimension {d}")
    if arr.ndim == 1:
        arr = arr.reshape(d, 1)
    return np.ascontiguousarray(arr)


def as_square(m: np.ndarray) -> np.ndarray:
    arr = np.asarray(m, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {arr.shape}")
    return arr


def is_orthogonal(m: np.ndarray, tol: float = 1e-10) -> bool:
    m = as_square(m)
    return bool(np.linalg.norm(m.T @ m - np.eye(m.shape[0])) <= tol)


def frobenius_norm(m: np.ndarray) -> float:
    return float(np.sqrt(np.sum(np.square(m))))


def l1_norm_scaled(m: np.ndarray) -> float:
    """Entrywise L1 norm divided by the dimension; 1 on signed permutations."""
    m = as_square(m)
    return float(np.abs(m).sum() / m.shape[0])


def l0_count(m: np.ndarray, zero_tol: float = DEFAULT_ZERO_TOL) -> int:
    return int(np.count_nonzero(np.abs(m) > zero_tol))


def sample_haar_orthogonal(d: int, rng_seed: int | np.random.Generator) -> np.ndarray:
    """Haar-distributed element of O(d) via sign-corrected QR of a Gaussian matrix."""
    if d < 2:
        raise ValueError("Haar sampling needs d >= 2")
    rng = make_rng(rng_seed)
    z = rng.standard_normal((d, d))
    q, r = np.linalg.qr(z)
    q *= np.sign(np.diag(r))
    return np.ascontiguousarray(q)


def hadamard(d: int) -> np.ndarray:
    """Normalized Sylvester Hadamard matrix; ``d`` must be a power of two."""
    if d < 1 or d & (d - 1):
        raise ValueError(f"Sylvester construction needs a power of two, got {d}")
    h = np.ones((1, 1))
    base = np.array([[1.0, 1.0], [1.0, -1.0]])
    while h.shape[0] < d:
        h = np.kron(h, base)
    return h / math.sqrt(d)


def make_rng(seed: int | np.random.Generator | None) -> np.random.Generator:
    """Counter-based (Philox) generator; passes an existing generator through."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.Generator(np.random.Philox(seed))


def random_rotations(d: int, n: int, rng: np.random.Generator) -> list[GivensRotation]:
    """``n`` factors with uniform subspaces (with replacement) and angles in (0, 2pi)."""
    rows, cols = np.triu_indices(d, k=1)
    picks = rng.integers(0, rows.size, size=n)
    angles = rng.uniform(0.0, 2.0 * math.pi, size=n)
    return [GivensRotation(int(rows[p]), int(cols[p]), float(a)) for p, a in zip(picks, angles)]


def from_triples(d: int, triples: Iterable[Sequence[float]]) -> GivensSequence:
    return GivensSequence(d, [GivensRotation(int(i), int(j), float(a)) for i, j, a in triples])
