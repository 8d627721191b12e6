"""Graphs, Laplacians, and approximate graph Fourier transforms."""

from __future__ import annotations

import math
import re
import time
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .factorize import (
    Algorithm,
    FactorizeConfig,
    factorize_elimination,
    factorize_greedy,
    factorize_l1,
    jacobi_angle,
    jacobi_truncated,
    require_symmetric,
)
from .matrix import make_rng, rotate_cols_, rotate_rows_
from .metrics import off_diagonal, symnorm
from .records import ExperimentRecord

# n -> (m_1, m_2); m_k targets about k * 0.25 * n(n-1)/2 edges
BA_TABLE = {
    64: (54, 36),
    128: (109, 69),
    256: (218, 136),
    512: (437, 267),
    1024: (874, 528),
}


class ConvergenceError(RuntimeError):
    pass


@dataclass(frozen=True)
class Graph:
    """Simple undirected graph on vertices ``0 .. n-1``."""

    n: int
    edges: frozenset

    def __init__(self, n: int, edges: Iterable[tuple[int, int]] = ()):
        canon = set()
        for a, b in edges:
            a, b = int(a), int(b)
            if a == b:
                raise ValueError(f"self-loop at vertex {a}")
            if not (0 <= a < n and 0 <= b < n):
                raise ValueError(f"edge ({a}, {b}) outside vertex range {n}")
            canon.add((min(a, b), max(a, b)))
        object.__setattr__(self, "n", int(n))
        object.__setattr__(self, "edges", frozenset(canon))

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def degrees(self) -> np.ndarray:
        deg = np.zeros(self.n, dtype=np.int64)
        for a, b in self.edges:
            deg[a] += 1
            deg[b] += 1
        return deg

    def sorted_edges(self) -> list[tuple[int, int]]:
        return sorted(self.edges)


def laplacian(g: Graph) -> np.ndarray:
    """Unnormalized Laplacian ``D - A``."""
    lap = np.zeros((g.n, g.n))
    if g.edges:
        a, b = np.array(g.sorted_edges()).T
        lap[a, b] = -1.0
        lap[b, a] = -1.0
    lap[np.diag_indices(g.n)] = g.degrees()
    return lap


def barabasi_albert(n: int, m: int, n0: int | None = None, rng_seed: int = 0) -> Graph:
    """Preferential attachment starting from ``n0`` isolated vertices.

    Each new vertex links to ``m`` distinct existing vertices drawn without
    replacement with probability proportional to degree. While every existing
    vertex has degree zero the draw is uniform; if fewer than ``m`` vertices
    have positive degree, all of them are taken and the rest is drawn
    uniformly from the isolated ones.
    """
    n0 = m if n0 is None else n0
    if m < 1 or n0 < m or n <= n0:
        raise ValueError(f"need n > n0 >= m >= 1, got n={n}, n0={n0}, m={m}")
    rng = make_rng(rng_seed)
    deg = np.zeros(n)
    edges = []
    for v in range(n0, n):
        w = deg[:v]
        connected = np.flatnonzero(w > 0)
        if connected.size >= m:
            targets = rng.choice(v, size=m, replace=False, p=w / w.sum())
        elif connected.size == 0:
            targets = rng.choice(v, size=m, replace=False)
        else:
            isolated = np.flatnonzero(w == 0)
            extra = rng.choice(isolated, size=m - connected.size, replace=False)
            targets = np.concatenate([connected, extra])
        for t in targets:
            edges.append((int(t), v))
        deg[targets] += 1
        deg[v] += m
    return Graph(n, edges)


_HEADER = re.compile(r"^n\s*=\s*(\d+)$")


def load_edge_list(path: str | Path) -> Graph:
    """Read a whitespace-separated edge list.

    ``#`` starts a comment line; an optional ``n=<int>`` line fixes the vertex
    count, otherwise it is one more than the largest id. Reversed duplicates
    collapse to one edge; self-loops are dropped with a warning.
    """
    n_header = None
    pairs = []
    loops = 0
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        head = _HEADER.match(line)
        if head:
            n_header = int(head.group(1))
            continue
        parts = line.split()
        if len(parts) < 2:
            raise ValueError(f"{path}:{lineno}: expected two vertex ids, got {raw!r}")
        try:
            a, b = int(parts[0]), int(parts[1])
        except ValueError:
            raise ValueError(f"{path}:{lineno}: vertex ids must be integers, got {raw!r}") from None
        if a < 0 or b < 0:
            raise ValueError(f"{path}:{lineno}: negative vertex id")
        if a == b:
            loops += 1
            continue
        pairs.append((a, b))
    if loops:
        warnings.warn(f"{path}: skipped {loops} self-loop(s)", RuntimeWarning, stacklevel=2)
    n = n_header if n_header is not None else 1 + max((max(p) for p in pairs), default=-1)
    return Graph(n, pairs)


@dataclass
class EigenDecomposition:
    eigenvalues: np.ndarray
    basis: np.ndarray


def _fix_signs(basis: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    mags = np.abs(basis)
    lead = np.argmax(mags >= mags.max(axis=0) - tol, axis=0)
    flip = np.where(basis[lead, np.arange(basis.shape[1])] < 0, -1.0, 1.0)
    return basis * flip


def eigendecompose(l: np.ndarray, rel_tol: float = 1e-18, max_sweeps: int = 100) -> EigenDecomposition:
    """Symmetric eigendecomposition by cyclic-by-row Jacobi sweeps.

    Sweeps run until ``off(A) < rel_tol * ||L||_F^2``. Eigenvalues are sorted
    ascending; each eigenvector is signed so its largest-magnitude entry
    (lowest index among ties) is positive.
    """
    a = require_symmetric(l)
    d = a.shape[0]
    basis = np.eye(d)
    target = rel_tol * float(np.sum(a * a))
    sweeps = 0
    while off_diagonal(a) > target:
        if sweeps >= max_sweeps:
            raise ConvergenceError(f"Jacobi eigensolver did not converge in {max_sweeps} sweeps")
        for p in range(d - 1):
            for q in range(p + 1, d):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                angle = jacobi_angle(a[p, p], a[q, q], apq)
                c, s = math.cos(angle), math.sin(angle)
                rotate_rows_(a, p, q, c, s)
                rotate_cols_(a, p, q, c, s)
                a[p, q] = a[q, p] = 0.0
                rotate_cols_(basis, p, q, c, s)
        sweeps += 1
    values = np.diag(a).copy()
    order = np.argsort(values, kind="stable")
    return EigenDecomposition(values[order], _fix_signs(basis[:, order]))


def gft(basis: np.ndarray, signal: np.ndarray) -> np.ndarray:
    """Spectral coefficients ``U^T x``."""
    return basis.T @ signal


def igft(basis: np.ndarray, coefficients: np.ndarray) -> np.ndarray:
    return basis @ coefficients


def default_budget(n: int) -> int:
    return int(round(n * math.log2(n)))


def gft_experiment(
    g: Graph,
    budget: int | None = None,
    algorithms: Sequence[str] = ("l1", "greedy", "jacobi"),
    label: str = "graph",
    seed: int = 0,
    timing: bool = False,
) -> list[ExperimentRecord]:
    """Approximate the Laplacian eigenbasis with ``budget`` Givens factors.

    L1, greedy and elimination factorize the exact eigenbasis ``U``; the
    Jacobi baseline runs truncated on ``L`` itself and its accumulated
    rotations are scored against ``U``. Elimination is exact only at
    ``budget >= n(n-1)/2`` and is truncated to a prefix otherwise.
    """
    lap = laplacian(g)
    n = g.n
    budget = default_budget(n) if budget is None else budget
    u = eigendecompose(lap).basis
    root = math.sqrt(n)
    out = []
    for name in algorithms:
        alg = Algorithm(name)
        cfg = FactorizeConfig(alg, max_factors=budget, eps=1e-12, seed=seed, checkpoint_stride=max(1, budget))
        t0 = time.perf_counter()
        if alg is Algorithm.JACOBI:
            seq = jacobi_truncated(lap, cfg).sequence
        elif alg is Algorithm.L1:
            seq = factorize_l1(u, cfg).sequence
        elif alg is Algorithm.GREEDY:
            seq = factorize_greedy(u, cfg).sequence
        else:
            seq = factorize_elimination(u).sequence.prefix(budget)
        err = symnorm(u, seq.materialize(), check=False)[0] / root
        ms = int(round(1000 * (time.perf_counter() - t0))) if timing else 0
        out.append(ExperimentRecord("gft", n, label, alg.value, len(seq), err, seed, ms))
    return out
