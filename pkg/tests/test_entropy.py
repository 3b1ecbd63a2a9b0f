import itertools
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.optimize import linprog

from entropy_forge.bitdist import Dist, point_mass, statistical_distance, uniform
from entropy_forge.blocks import BlockDist, BlockSpec
from entropy_forge.entropy import (check_characterization, clip_excess, closeness_smoothing_check,
                                   entropy_gap, min_entropy, smooth_levels, smooth_min_entropy)
from entropy_forge.sources import random_dist
from strategies import dists


def lp_smooth_min_entropy(p: np.ndarray, eps: float) -> float:
    """Oracle: minimize the largest mass over the eps-ball by linear programming."""
    size = p.size
    # variables: y (size), e (size), u
    c = np.zeros(2 * size + 1)
    c[-1] = 1.0
    eye = np.eye(size)
    rows = [np.hstack([eye, np.zeros((size, size)), -np.ones((size, 1))]),   # y - u <= 0
            np.hstack([-eye, -eye, np.zeros((size, 1))]),                    # x - y <= e
            np.concatenate([np.zeros(size), np.ones(size), [0.0]])[None, :]]  # sum e <= eps
    b = np.concatenate([np.zeros(size), -p, [eps]])
    a_eq = np.concatenate([np.ones(size), np.zeros(size + 1)])[None, :]
    res = linprog(c, A_ub=np.vstack(rows), b_ub=b, A_eq=a_eq, b_eq=[1.0],
                  bounds=(0, None), method="highs")
    assert res.status == 0
    return -math.log2(res.x[-1])


def test_min_entropy_examples():
    assert min_entropy(uniform(5)) == 5.0
    assert min_entropy(point_mass(3, 2)) == 0.0
    assert min_entropy(Dist(2, [0.5, 0.25, 0.25, 0])) == 1.0


def test_entropy_gap_examples():
    assert entropy_gap(uniform(4)) == 0.0
    assert entropy_gap(point_mass(4, 7)) == 4.0
    assert entropy_gap(Dist(1, [0.75, 0.25])) == pytest.approx(1 - math.log2(4 / 3))


def test_smooth_examples():
    x = Dist(1, [0.75, 0.25])
    assert smooth_min_entropy(x, 0.25).value == pytest.approx(1.0)
    for n in (1, 3, 6):
        assert smooth_min_entropy(point_mass(n, 0), 0.5).value == pytest.approx(1.0)
    # the constant variable's smooth entropy is log(1/(1-eps)) in a large enough space
    assert smooth_min_entropy(point_mass(6, 0), 0.3).value == pytest.approx(math.log2(1 / 0.7))
    with pytest.raises(ValueError, match="eps"):
        smooth_min_entropy(x, 1.5)


def test_cap_is_reported():
    res = smooth_min_entropy(Dist(1, [0.6, 0.4]), 0.5)
    assert res.value == 1.0 and res.capped
    assert not smooth_min_entropy(Dist(1, [0.6, 0.4]), 0.05).capped


def test_matches_lp_oracle():
    rng = np.random.default_rng(7)
    for _ in range(200):
        n = int(rng.integers(0, 6))
        x = random_dist(n, rng, sparsity=rng.choice([0.0, 0.6]))
        eps = float(rng.choice([0.0, 0.01, 0.1, 0.3, 0.5, 0.9]))
        got = smooth_min_entropy(x, eps).value
        assert got == pytest.approx(lp_smooth_min_entropy(x.probs, eps), abs=1e-6)


def test_ties_are_grouped():
    x = Dist(2, [0.3, 0.3, 0.3, 0.1])
    for eps in (0.0, 0.05, 0.1, 0.15, 0.2):
        assert smooth_min_entropy(x, eps).value == pytest.approx(
            lp_smooth_min_entropy(x.probs, eps), abs=1e-7)


@given(dists(0, 5), st.floats(0, 1))
def test_witness_invariants(x, eps):
    res = smooth_min_entropy(x, eps)
    assert statistical_distance(x, res.witness) <= eps + 1e-9
    assert min_entropy(res.witness) >= res.value - 1e-6
    assert res.value >= min_entropy(x) - 1e-12


@given(dists(1, 5), st.lists(st.floats(0, 1), min_size=2, max_size=6))
def test_monotone_in_eps(x, epss):
    vals = [smooth_min_entropy(x, e).value for e in sorted(epss)]
    assert all(b >= a - 1e-12 for a, b in zip(vals, vals[1:]))


def test_smooth_levels_batches_rows():
    rng = np.random.default_rng(1)
    rows = np.stack([random_dist(4, rng).probs for _ in range(20)])
    vals, _ = smooth_levels(rows, 0.1)
    for r, v in zip(rows, vals):
        assert v == smooth_min_entropy(Dist(4, r), 0.1).value


def test_characterization_examples():
    rng = np.random.default_rng(5)
    x = random_dist(4, rng)
    assert check_characterization(x, 0.0, 0.0, sets=[range(16), [1, 2]]).agrees
    v = smooth_min_entropy(x, 0.1).value
    at = check_characterization(x, v, 0.1)
    assert at.heavy_ok and at.value_ok and abs(at.heavy_slack) <= 1e-9
    above = check_characterization(x, v + 0.01, 0.1)
    assert not above.heavy_ok and not above.value_ok and above.agrees
    with pytest.raises(ValueError, match="k must"):
        check_characterization(x, 5.0, 0.1)


def test_heavy_set_is_the_worst_set():
    rng = np.random.default_rng(9)
    for _ in range(100):
        x = random_dist(3, rng)
        k = float(rng.uniform(0, 3))
        worst = max(x.probs[list(s)].sum() - len(s) * 2.0 ** -k
                    for r in range(0, 9) for s in itertools.combinations(range(8), r))
        assert worst == pytest.approx(clip_excess(x.probs, k), abs=1e-12)


def _two_block(p: np.ndarray, a_bits: int, b_bits: int) -> BlockDist:
    return BlockDist(BlockSpec((a_bits, b_bits), (0, 0)), Dist(a_bits + b_bits, p))


def test_closeness_smoothing_examples():
    rng = np.random.default_rng(2)
    p = random_dist(4, rng).probs
    a = _two_block(p, 2, 2)
    lhs, rhs, ok = closeness_smoothing_check(a, a, 1.5, 0.1, 0.0)
    assert ok and lhs <= rhs
    indep = _two_block(np.outer(random_dist(2, rng).probs, np.full(4, 0.25)).reshape(-1), 2, 2)
    lhs, _, ok = closeness_smoothing_check(indep, indep, 2.0, 0.1, 0.0)
    assert lhs == 0.0 and ok
    with pytest.raises(ValueError, match="shape mismatch"):
        closeness_smoothing_check(a, _two_block(p, 1, 3), 1.0, 0.1, 0.0)
    with pytest.raises(ValueError, match="farther"):
        closeness_smoothing_check(a, _two_block(random_dist(4, rng).probs, 2, 2), 1.0, 0.1, 1e-6)


def test_closeness_smoothing_random_pairs():
    rng = np.random.default_rng(11)
    for _ in range(500):
        na, nb = int(rng.integers(1, 5)), int(rng.integers(1, 5))
        p = random_dist(na + nb, rng).probs
        q = random_dist(na + nb, rng).probs
        lam = float(rng.choice([0.0, 0.01, 0.1, 0.4]))
        q2 = (1 - lam) * p + lam * q
        eps = 0.5 * np.abs(p - q2).sum()
        gamma = float(rng.choice([0.05, 0.2, 0.5]))
        k = float(rng.uniform(0, nb))
        _, _, ok = closeness_smoothing_check(_two_block(p, na, nb), _two_block(q2, na, nb),
                                             k, gamma, eps + 1e-12)
        assert ok
