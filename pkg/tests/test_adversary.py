import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from entropy_forge.adversary import break_cg, break_general, c_eps
from entropy_forge.bitdist import FunctionTable, push_forward
from entropy_forge.blocks import verify_block_source
from entropy_forge.entropy import min_entropy, smooth_min_entropy


def test_c_eps():
    assert c_eps(0.0) == 0.0
    assert c_eps(0.5) == pytest.approx(1.0)


def test_identity_loses_exactly_g():
    f = FunctionTable(8, 8, np.arange(256))
    r = break_general(f, 2, 0.0)
    assert r.measured == pytest.approx(6.0) == r.bound
    assert min_entropy(r.source) == pytest.approx(6.0)


@given(st.integers(2, 8), st.integers(1, 5), st.integers(0, 8), st.sampled_from([0.0, 0.05, 0.25]),
       st.integers(0, 2 ** 32 - 1))
def test_break_general_random_functions(n, m, g, eps, seed):
    g = min(g, n)
    f = FunctionTable(n, m, np.random.default_rng(seed).integers(0, 1 << m, 1 << n))
    r = break_general(f, g, eps)
    assert min_entropy(r.source) >= n - g - 1e-9
    assert r.measured <= r.bound + 1e-9
    # the measured value is the smooth entropy of f(source)
    assert r.measured == pytest.approx(smooth_min_entropy(push_forward(f, r.source), eps).value)


def test_break_cg_last_block():
    # f reads only the last block: the adversary still costs g bits
    n, t, g = 3, 2, 1
    table = np.arange(1 << (t * n)) & ((1 << n) - 1)
    r = break_cg(FunctionTable(t * n, n, table), t, n, g, 0.0)
    assert verify_block_source(r.source)[0]
    assert r.measured == pytest.approx(n - g) == r.bound


def test_break_cg_random():
    rng = np.random.default_rng(0)
    for t, n in ((2, 3), (3, 2), (2, 4), (4, 2)):
        for g in range(n + 1):
            f = FunctionTable(t * n, 3, rng.integers(0, 8, 1 << (t * n)))
            r = break_cg(f, t, n, g, 0.1)
            ok, margins = verify_block_source(r.source)
            assert ok and min(margins) >= -1e-9
            assert r.source.spec.floors == (float(n - g),) * t
            assert r.slack >= -1e-9
            assert r.bound == pytest.approx(min(t * n, 3) - min(3, g) + math.log2(1 / 0.9))


def test_break_cg_validation():
    f = FunctionTable(6, 2, np.zeros(64, dtype=np.int64))
    with pytest.raises(ValueError, match="expected"):
        break_cg(f, 3, 3, 1, 0.0)
    with pytest.raises(ValueError, match="cap"):
        break_cg(FunctionTable(18, 1, np.zeros(1 << 18, dtype=np.int64)), 2, 9, 1, 0.0)
    with pytest.raises(ValueError, match="g="):
        break_general(f, 7, 0.0)
    with pytest.raises(ValueError, match="eps"):
        break_general(f, 1, 1.0)
