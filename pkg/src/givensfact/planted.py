"""K-planted orthogonal matrices and the experiments built on them."""

from __future__ import annotations

import math
import re
import time
from collections import defaultdict
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from ._pool import ordered_map
from .factorize import Algorithm, FactorizeConfig, factorize
from .matrix import GivensSequence, l0_count, make_rng, random_rotations, DEFAULT_ZERO_TOL
from .metrics import n_epsilon, symnorm
from .records import ExperimentRecord

N_EPS_THRESHOLD = 0.1


@dataclass
class PlantedSample:
    matrix: np.ndarray
    ground_truth: GivensSequence
    seed: int


def sample_seed(base: int, *keys: int) -> int:
    """Deterministic 32-bit child seed for ``(base, *keys)``."""
    return int(np.random.SeedSequence([int(base), *map(int, keys)]).generate_state(1)[0])


def sample_planted(d: int, k: int, rng_seed: int) -> PlantedSample:
    """Product of ``k`` Givens factors with i.i.d. uniform planes and angles in (0, 2pi)."""
    if d < 2:
        raise ValueError("planted samples need d >= 2")
    if k < 0:
        raise ValueError("k must be >= 0")
    rng = make_rng(rng_seed)
    truth = GivensSequence(d, random_rotations(d, k, rng))
    return PlantedSample(truth.materialize(), truth, int(rng_seed))


# ---------------------------------------------------------------------------
# K grids like "d/4,d/2,d,2d,dlogd/2,dlogd"

_K_TOKEN = re.compile(r"^(\d*)(dlogd|d)?(?:/(\d+))?$")


def resolve_k(token: str, d: int) -> int:
    token = token.strip().replace(" ", "")
    m = _K_TOKEN.match(token)
    if not m or not token or (m.group(1) == "" and m.group(2) is None):
        raise ValueError(f"cannot parse K value {token!r}")
    coef, unit, div = m.groups()
    value = int(coef) if coef else 1
    if unit == "d":
        value *= d
    elif unit == "dlogd":
        value *= d * int(round(math.log2(d)))
    if div:
        value //= int(div)
    return value


DEFAULT_K_GRID = ("d/4", "d/2", "d", "2d", "dlogd/2", "dlogd")


def default_k_grid(d: int) -> list[int]:
    return [resolve_k(t, d) for t in DEFAULT_K_GRID]


# ---------------------------------------------------------------------------
# Density


def _density_job(args) -> float:
    d, k, seed, zero_tol = args
    sample = sample_planted(d, k, seed)
    return l0_count(sample.matrix, zero_tol) / d**2


def density_samples(
    d: int, k_values: Sequence[int], n_samples: int = 100, zero_tol: float = DEFAULT_ZERO_TOL, rng_seed: int = 0
) -> list[ExperimentRecord]:
    jobs = [(d, k, sample_seed(rng_seed, d, k, s), zero_tol) for k in k_values for s in range(n_samples)]
    fractions = ordered_map(_density_job, jobs)
    return [
        ExperimentRecord("density", d, str(k), "none", k, frac, seed)
        for (_, k, seed, _), frac in zip(jobs, fractions)
    ]


def density_curve(
    d: int, k_values: Sequence[int], n_samples: int = 100, zero_tol: float = DEFAULT_ZERO_TOL, rng_seed: int = 0
) -> list[tuple[int, float]]:
    """Mean fraction of entries above ``zero_tol`` for each K."""
    rows = density_samples(d, k_values, n_samples, zero_tol, rng_seed)
    by_k: dict[int, list[float]] = defaultdict(list)
    for rec in rows:
        by_k[rec.n_factors].append(rec.error)
    return [(k, float(np.mean(by_k[k]))) for k in k_values]


# ---------------------------------------------------------------------------
# Approximation error curves and N_eps


def default_configs(d: int, eps: float = 1e-10, stride: int = 25) -> dict[str, FactorizeConfig]:
    budget = d * (d - 1) // 2
    return {
        alg.value: FactorizeConfig(alg, max_factors=budget, eps=eps, checkpoint_stride=stride)
        for alg in (Algorithm.L1, Algorithm.GREEDY, Algorithm.ELIMINATION)
    }


def _approx_job(args) -> list[ExperimentRecord]:
    d, k, k_label, seed, configs, threshold, timing = args
    sample = sample_planted(d, k, seed)
    out = []
    for name, cfg in configs.items():
        if cfg.algorithm is Algorithm.JACOBI:
            raise ValueError("Jacobi needs a symmetric matrix, not a planted orthogonal one")
        t0 = time.perf_counter()
        trace = factorize(sample.matrix, cfg)
        ms = int(round(1000 * (time.perf_counter() - t0))) if timing else 0
        for n, err in trace.error_checkpoints:
            out.append(ExperimentRecord("error_curve", d, k_label, name, n, err, seed, ms))
        n_eps = n_epsilon(sample.matrix, trace.sequence, threshold)
        n_used = len(trace.sequence) if n_eps is None else n_eps
        err = symnorm(sample.matrix, trace.sequence.prefix(n_used).materialize(), check=False)[0] / math.sqrt(d)
        out.append(ExperimentRecord("n_epsilon", d, k_label, name, n_used, err, seed, ms))
    return out


def approximation_experiment(
    d: int,
    k: int,
    n_samples: int = 10,
    configs: Mapping[str, FactorizeConfig] | None = None,
    rng_seed: int = 0,
    threshold: float = N_EPS_THRESHOLD,
    k_label: str | None = None,
    timing: bool = False,
) -> list[ExperimentRecord]:
    """Factorize ``n_samples`` K-planted matrices with each configured algorithm.

    Emits ``error_curve`` rows (one per checkpoint) and one ``n_epsilon`` row
    per sample and algorithm. If no prefix reaches ``threshold`` the
    ``n_epsilon`` row carries the full sequence length and its (too large)
    error.
    """
    configs = dict(configs or default_configs(d))
    label = str(k) if k_label is None else k_label
    jobs = [
        (d, k, label, sample_seed(rng_seed, d, k, s), configs, threshold, timing) for s in range(n_samples)
    ]
    return [rec for chunk in ordered_map(_approx_job, jobs) for rec in chunk]


def fit_power_law(dims: Sequence[float], values: Sequence[float]) -> float:
    """Least-squares slope of ``log(values)`` against ``log(dims)``."""
    if len(dims) < 2:
        raise ValueError("need at least two dimensions to fit a growth rate")
    x, y = np.log(np.asarray(dims, float)), np.log(np.asarray(values, float))
    slope, _ = np.polyfit(x, y, 1)
    return float(slope)


def growth_rate_fit(records: Iterable[ExperimentRecord] | Mapping[int, Sequence[float]]) -> float:
    """Exponent ``eta`` of ``N_eps ~ d^eta`` from per-dimension mean ``N_eps``."""
    if isinstance(records, Mapping):
        grouped = {int(d): list(v) for d, v in records.items()}
    else:
        grouped = defaultdict(list)
        for rec in records:
            if rec.experiment == "n_epsilon":
                grouped[rec.d].append(rec.n_factors)
    dims = sorted(grouped)
    return fit_power_law(dims, [np.mean(grouped[d]) for d in dims])


def growth_experiment(
    dims: Sequence[int],
    k_tokens: Sequence[str] = DEFAULT_K_GRID,
    n_samples: int = 10,
    eps: float = N_EPS_THRESHOLD,
    rng_seed: int = 0,
    timing: bool = False,
) -> tuple[list[ExperimentRecord], dict[str, float]]:
    """L1 ``N_eps`` for every ``(d, K)`` and the fitted exponent per K token."""
    records: list[ExperimentRecord] = []
    fits: dict[str, float] = {}
    for token in k_tokens:
        chunk = []
        for d in dims:
            cfg = {Algorithm.L1.value: FactorizeConfig(Algorithm.L1, max_factors=d * (d - 1) // 2, eps=eps)}
            chunk += [
                r
                for r in approximation_experiment(
                    d, resolve_k(token, d), n_samples, cfg, rng_seed, eps, k_label=token, timing=timing
                )
                if r.experiment == "n_epsilon"
            ]
        records += chunk
        if len(dims) >= 2:
            fits[token] = growth_rate_fit(chunk)
    return records, fits
