"""End-to-end acceptance checks, one group of tests per criterion.

A summary line per criterion is printed at the end of the pytest run.
"""

import json
import math
import time

import numpy as np
import pytest
from scipy.optimize import minimize_scalar

from givensfact import cli, io
from givensfact.factorize import (
    Algorithm,
    FactorizeConfig,
    factorize,
    factorize_elimination,
    factorize_l1,
    jacobi_truncated,
    lemma1_check,
    optimal_angle_l1,
    rotated_l1,
)
from givensfact.graphs import BA_TABLE, barabasi_albert, gft_experiment
from givensfact.matrix import (
    GivensRotation,
    GivensSequence,
    hadamard,
    make_rng,
    random_rotations,
    sample_haar_orthogonal,
)
from givensfact.metrics import error_curve, symnorm, symnorm_bruteforce
from givensfact.planted import density_curve, sample_planted, sample_seed

acceptance = pytest.mark.acceptance


# ---------------------------------------------------------------------------
# 1


@acceptance(1, "elimination is exact with d(d-1)/2 factors plus sign fixes")
def test_exact_elimination():
    t0 = time.perf_counter()
    rng = np.random.default_rng(2024)
    for d in (4, 8, 16, 32, 64):
        for _ in range(20):
            u = sample_haar_orthogonal(d, rng)
            trace = factorize_elimination(u)
            assert trace.n_factors - trace.meta["sign_fixes"] == d * (d - 1) // 2
            assert symnorm(u, trace.sequence.materialize())[0] < 1e-8
    assert time.perf_counter() - t0 < 10.0


# ---------------------------------------------------------------------------
# 2

GRID_POINTS = 100_000
QUARTER = math.pi / 2


def grid_oracle(rows):
    """Raw grid minimum and a refined minimum near the best grid cells."""
    theta = np.arange(GRID_POINTS) * (QUARTER / GRID_POINTS)
    c, s = np.cos(theta)[:, None], np.sin(theta)[:, None]
    x1, x2 = rows
    g = (np.abs(c * x1 - s * x2) + np.abs(s * x1 + c * x2)).sum(axis=1)
    raw = float(g.min())
    # cyclic local minima of the sampled curve (period pi/2)
    local = np.flatnonzero((g <= np.roll(g, 1)) & (g <= np.roll(g, -1)))
    best = local[np.argsort(g[local])[:8]]
    h = QUARTER / GRID_POINTS
    refined = raw
    for k in best:
        res = minimize_scalar(
            lambda a: rotated_l1(rows, a), bounds=(theta[k] - h, theta[k] + h), method="bounded",
            options={"xatol": 1e-13},
        )
        refined = min(refined, float(res.fun))
    return raw, refined


@acceptance(2, "optimal L1 angle matches a 1e5-point grid oracle and zeroes an entry")
def test_optimal_angle_oracle():
    t0 = time.perf_counter()
    rng = np.random.default_rng(7)
    for case in range(500):
        d = int(rng.integers(1, 33))
        rows = rng.standard_normal((2, d))
        angle, value = optimal_angle_l1(rows)
        raw, refined = grid_oracle(rows)
        assert value <= raw + 1e-6, case
        assert abs(value - refined) <= 1e-6, case
        c, s = math.cos(angle), math.sin(angle)
        out = np.array([c * rows[0] - s * rows[1], s * rows[0] + c * rows[1]])
        assert np.abs(out).min() <= 1e-9, case
    assert time.perf_counter() - t0 < 30.0


# ---------------------------------------------------------------------------
# 3


@acceptance(3, "perturbed sequences stay within 2 N delta")
def test_perturbation_bound():
    rng = make_rng(33)
    for _ in range(200):
        d = int(rng.integers(2, 33))
        n = int(rng.integers(1, 101))
        delta_max = float(rng.uniform(0.0, 0.05))
        seq = GivensSequence(d, random_rotations(d, n, rng))
        deltas = rng.uniform(0.0, delta_max, size=n)
        perturbed = GivensSequence(d, [GivensRotation(g.i, g.j, g.angle + dn) for g, dn in zip(seq, deltas)])
        gap = np.linalg.norm(perturbed.materialize() - seq.materialize())
        lhs, rhs = lemma1_check(seq, deltas, delta_max)
        assert lhs == pytest.approx(gap, abs=1e-12)
        assert gap <= 2 * n * delta_max


@acceptance(3, "perturbed sequences stay within 2 N delta")
def test_perturbation_single_factor_equality():
    for delta in (0.0, 1e-3, 0.02, 0.05, 0.3):
        seq = GivensSequence(5, [GivensRotation(1, 3, 0.4)])
        lhs, _ = lemma1_check(seq, [delta], max(delta, 1e-12))
        assert abs(lhs - 2 * math.sqrt(1 - math.cos(delta))) <= 1e-12


# ---------------------------------------------------------------------------
# 4


@acceptance(4, "symnorm matches brute force; Hadamard distance interval")
def test_symnorm_bruteforce_agreement():
    rng = np.random.default_rng(44)
    for _ in range(100):
        u, v = sample_haar_orthogonal(4, rng), sample_haar_orthogonal(4, rng)
        assert abs(symnorm(u, v)[0] - symnorm_bruteforce(u, v)) <= 1e-12


@acceptance(4, "symnorm matches brute force; Hadamard distance interval")
def test_hadamard_distance_interval():
    ratio = symnorm(hadamard(256), np.eye(256))[0] / 16
    assert 1.40 < ratio < math.sqrt(2), f"symnorm(H256, I)/16 = {ratio:.6f}"


# ---------------------------------------------------------------------------
# 5


@acceptance(5, "planted matrices are dense at K = d log2 d, d = 64")
def test_density_curve():
    t0 = time.perf_counter()
    (k0, f0), (k1, f1) = density_curve(64, [0, 64 * 6], n_samples=100)
    assert (k0, k1) == (0, 384)
    assert f0 == 1 / 64
    assert f1 > 0.99
    assert time.perf_counter() - t0 < 60.0


# ---------------------------------------------------------------------------
# 6


@acceptance(6, "L1 <= greedy <= half-budget elimination on d log2 d planted, d = 64")
def test_planted_error_ordering():
    t0 = time.perf_counter()
    d, k = 64, 384
    budget = d * (d - 1) // 2
    l1, greedy, elim = [], [], []
    for s in range(10):
        u = sample_planted(d, k, sample_seed(0, d, k, s)).matrix
        for alg, sink in ((Algorithm.L1, l1), (Algorithm.GREEDY, greedy)):
            cfg = FactorizeConfig(alg, max_factors=budget, eps=1e-10, checkpoint_stride=budget)
            sink.append(factorize(u, cfg).final_error)
        full = factorize_elimination(u).sequence
        elim.append(error_curve(u, full.prefix(budget // 2), budget // 2)[-1][1])
    print(f"\nmean errors: l1 {np.mean(l1):.4f} greedy {np.mean(greedy):.4f} elimination@half {np.mean(elim):.4f}")
    assert np.mean(l1) <= np.mean(greedy)
    assert np.mean(l1) <= np.mean(elim) and np.mean(greedy) <= np.mean(elim)
    assert time.perf_counter() - t0 < 15 * 60


# ---------------------------------------------------------------------------
# 7


@acceptance(7, "objective histories never increase; cached and uncached runs agree")
def test_objective_monotone():
    runs = []
    for d in (8, 16, 32):
        for s in range(3):
            u = sample_planted(d, 2 * d, sample_seed(7, d, s)).matrix
            runs.append(factorize_l1(u, FactorizeConfig(eps=1e-10)).objective_history)
            runs.append(factorize_l1(sample_haar_orthogonal(d, s), FactorizeConfig(eps=1e-10)).objective_history)
            a = np.random.default_rng(d + s).standard_normal((d, d))
            runs.append(jacobi_truncated(a + a.T, FactorizeConfig(Algorithm.JACOBI, max_factors=4 * d * d)).objective_history)
    for hist in runs:
        assert all(b <= a for a, b in zip(hist, hist[1:]))


@acceptance(7, "objective histories never increase; cached and uncached runs agree")
def test_cache_equivalence():
    for s in range(5):
        u = sample_planted(16, 48, sample_seed(8, 16, s)).matrix
        cfg = FactorizeConfig(eps=1e-10)
        cached = factorize_l1(u, cfg, use_cache=True)
        plain = factorize_l1(u, cfg, use_cache=False)
        assert cached.sequence.factors == plain.sequence.factors
    haar = sample_haar_orthogonal(16, 99)
    assert factorize_l1(haar, use_cache=True).sequence.factors == factorize_l1(haar, use_cache=False).sequence.factors


# ---------------------------------------------------------------------------
# 8


@acceptance(8, "truncated Jacobi contracts off(L) by 1 - 2/(d(d-1)) per step")
def test_jacobi_contraction():
    d = 32
    rate = 1 - 2 / (d * (d - 1))
    rng = np.random.default_rng(88)
    for _ in range(10):
        a = rng.standard_normal((d, d))
        off = jacobi_truncated(a + a.T, FactorizeConfig(Algorithm.JACOBI, max_factors=4000)).objective_history
        assert len(off) > 1000
        assert all(b <= rate * a for a, b in zip(off, off[1:]))


# ---------------------------------------------------------------------------
# 9


@acceptance(9, "graph Fourier transform comparison on Barabasi-Albert graphs, n = 64")
def test_gft_barabasi_albert():
    t0 = time.perf_counter()
    n = 64
    for m in BA_TABLE[n]:
        errs = {"l1": [], "greedy": [], "jacobi": []}
        for seed in range(10):
            g = barabasi_albert(n, m, rng_seed=seed)
            for rec in gft_experiment(g, label=f"ba{m}", seed=seed):
                errs[rec.algorithm].append(rec.error)
        l1, greedy, jac = (np.array(errs[k]) for k in ("l1", "greedy", "jacobi"))
        gap = l1.mean() - greedy.mean()
        print(f"\nm={m}: l1 {l1.mean():.4f} greedy {greedy.mean():.4f} jacobi {jac.mean():.4f}")
        assert gap <= 0 or gap <= np.std(l1 - greedy, ddof=1)
        assert np.sum(jac > l1) >= 7
    assert time.perf_counter() - t0 < 20 * 60


# ---------------------------------------------------------------------------
# 10


@acceptance(10, "applying a sequence costs one two-coordinate update per factor")
def test_apply_cost(tmp_path, capsys):
    d, n = 256, 5000
    seq = GivensSequence(d, random_rotations(d, n, make_rng(10)))
    x = np.random.default_rng(10).standard_normal((d, 2))
    seq_path, x_path, out = tmp_path / "s.seq", tmp_path / "x.txt", tmp_path / "y.txt"
    io.save_sequence(seq_path, seq)
    io.save_matrix(x_path, x)
    assert cli.main(["apply", "--sequence", str(seq_path), "--input", str(x_path), "--out", str(out)]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["updates"] == n == report["factors"]
    np.testing.assert_allclose(io.load_matrix(out, square=False), seq.materialize() @ x, atol=1e-10)
