import itertools
import math

import numpy as np
import pytest

from givensfact.matrix import GivensRotation, GivensSequence, hadamard, sample_haar_orthogonal
from givensfact.metrics import (
    SignedPermutation,
    error_curve,
    n_epsilon,
    off_diagonal,
    symnorm,
    symnorm_bruteforce,
)


def random_signed_perm(d, rng):
    return SignedPermutation(rng.permutation(d), rng.choice([-1.0, 1.0], size=d))


def rotation_2d(a):
    return np.array([[math.cos(a), -math.sin(a)], [math.sin(a), math.cos(a)]])


def test_identity_distance():
    value, p = symnorm(np.eye(5), np.eye(5))
    assert value == 0.0
    np.testing.assert_array_equal(p.to_matrix(), np.eye(5))
    assert symnorm_bruteforce(np.eye(4), np.eye(4)) == 0.0


def test_signed_permutation_equivalence():
    rng = np.random.default_rng(0)
    for _ in range(10):
        u = sample_haar_orthogonal(7, rng)
        p0 = random_signed_perm(7, rng)
        value, _ = symnorm(u, u @ p0.to_matrix())
        assert value < 1e-12


def test_quarter_pi_rotation_against_enumeration():
    r = rotation_2d(math.pi / 4)
    # every signed 2x2 permutation, enumerated by hand
    candidates = []
    for perm in ([[1, 0], [0, 1]], [[0, 1], [1, 0]]):
        for s in itertools.product((1, -1), repeat=2):
            candidates.append(np.array(perm, float) * np.array(s)[:, None])
    assert len(candidates) == 8
    oracle = min(np.linalg.norm(r - np.eye(2) @ p) for p in candidates)
    assert oracle == pytest.approx(math.sqrt(4 - 2 * math.sqrt(2)), abs=1e-14)
    assert symnorm(r, np.eye(2))[0] == pytest.approx(oracle, abs=1e-12)
    assert symnorm_bruteforce(r, np.eye(2)) == pytest.approx(oracle, abs=1e-12)


def test_matches_bruteforce():
    rng = np.random.default_rng(1)
    for _ in range(100):
        u, v = sample_haar_orthogonal(4, rng), sample_haar_orthogonal(4, rng)
        assert abs(symnorm(u, v)[0] - symnorm_bruteforce(u, v)) < 1e-12


def test_bruteforce_dimension_limit():
    with pytest.raises(ValueError):
        symnorm_bruteforce(np.eye(7), np.eye(7))


def test_hadamard_distance_ratio():
    dims = (4, 16, 64, 256, 1024)
    ratios = [symnorm(hadamard(d), np.eye(d))[0] / math.sqrt(d) for d in dims]
    assert all(a < b < math.sqrt(2) for a, b in zip(ratios, ratios[1:]))
    # every |H_ij| = 1/sqrt(d): the best assignment picks d entries of 1/sqrt(d)
    for d, r in zip(dims, ratios):
        assert r == pytest.approx(math.sqrt(2 - 2 / math.sqrt(d)), abs=1e-12)


def test_symmetry_and_range():
    rng = np.random.default_rng(2)
    for d in (4, 16, 64):
        for _ in range(100 if d < 64 else 30):
            u, v = sample_haar_orthogonal(d, rng), sample_haar_orthogonal(d, rng)
            a, p = symnorm(u, v)
            b, _ = symnorm(v, u)
            assert abs(a - b) < 1e-10
            assert 0 <= a < math.sqrt(2 * d)
            trace = np.trace(p.to_matrix().T @ v.T @ u)
            assert abs(a**2 + 2 * trace - 2 * d) < 1e-9


def test_argmin_permutation_is_valid():
    rng = np.random.default_rng(3)
    u, v = sample_haar_orthogonal(6, rng), sample_haar_orthogonal(6, rng)
    value, p = symnorm(u, v)
    pm = p.to_matrix()
    assert np.all(np.abs(pm).sum(axis=0) == 1) and np.all(np.abs(pm).sum(axis=1) == 1)
    assert np.linalg.norm(u - v @ pm) == pytest.approx(value)
    np.testing.assert_allclose(p.right_multiply(v), v @ pm)


def test_dimension_mismatch_and_warning():
    with pytest.raises(ValueError):
        symnorm(np.eye(3), np.eye(4))
    with pytest.warns(RuntimeWarning):
        symnorm(2 * np.eye(3), np.eye(3))


def test_signed_permutation_validation():
    with pytest.raises(ValueError):
        SignedPermutation([0, 0, 1], [1, 1, 1])
    with pytest.raises(ValueError):
        SignedPermutation([0, 1], [1, 0.5])


def test_n_epsilon_examples():
    seq = GivensSequence(5, [GivensRotation(1, 3, 0.8)])
    assert n_epsilon(seq.materialize(), seq, 0.1) == 1
    assert n_epsilon(np.eye(5), seq, 0.1) == 0
    with pytest.raises(ValueError):
        n_epsilon(np.eye(5), seq, 0.0)


def test_n_epsilon_none_when_unreached():
    u = sample_haar_orthogonal(6, 0)
    assert n_epsilon(u, GivensSequence(6, [GivensRotation(0, 1, 0.1)]), 1e-3) is None


def prefix_error_oracle(u, seq):
    d = u.shape[0]
    return [symnorm(u, seq.prefix(n).materialize(), check=False)[0] / math.sqrt(d) for n in range(len(seq) + 1)]


def test_n_epsilon_against_linear_scan():
    from givensfact.factorize import factorize_elimination

    rng = np.random.default_rng(4)
    for _ in range(5):
        u = sample_haar_orthogonal(8, rng)
        seq = factorize_elimination(u).sequence
        errors = prefix_error_oracle(u, seq)
        for eps in (0.5, 0.2, 1e-6):
            expected = next(n for n, e in enumerate(errors) if e < eps)
            assert n_epsilon(u, seq, eps) == expected


def test_error_curve_endpoints():
    u = sample_haar_orthogonal(6, 5)
    from givensfact.factorize import factorize_elimination

    seq = factorize_elimination(u).sequence
    curve = error_curve(u, seq, 4)
    oracle = prefix_error_oracle(u, seq)
    assert curve[0][0] == 0 and curve[-1][0] == len(seq)
    for n, e in curve:
        assert e == pytest.approx(oracle[n], abs=1e-12)


def test_off_diagonal():
    assert off_diagonal(np.diag([1.0, -2.0, 5.0])) == 0.0
    assert off_diagonal(np.array([[0.0, 1.0], [1.0, 0.0]])) == 2.0
    a = np.random.default_rng(6).standard_normal((5, 5))
    s = a + a.T
    oracle = sum(s[r, c] ** 2 for r in range(5) for c in range(5) if r != c)
    assert off_diagonal(s) == pytest.approx(oracle, rel=1e-14)
