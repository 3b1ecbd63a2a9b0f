"""Hypothesis strategies shared by the property tests."""

import numpy as np
from hypothesis import strategies as st

from entropy_forge.bitdist import Dist, FunctionTable


@st.composite
def dists(draw, min_bits=0, max_bits=4):
    n = draw(st.integers(min_bits, max_bits))
    raw = draw(st.lists(st.floats(0.0, 1.0, allow_nan=False), min_size=1 << n, max_size=1 << n))
    p = np.asarray(raw)
    if p.sum() <= 1e-6:
        p = np.ones_like(p)
    return Dist(n, p / p.sum())


@st.composite
def dist_pairs(draw, min_bits=0, max_bits=4):
    a = draw(dists(min_bits, max_bits))
    raw = draw(st.lists(st.floats(0.0, 1.0, allow_nan=False), min_size=a.size, max_size=a.size))
    p = np.asarray(raw)
    if p.sum() <= 1e-6:
        p = np.ones_like(p)
    return a, Dist(a.n_bits, p / p.sum())


@st.composite
def tables(draw, in_bits, out_bits):
    vals = draw(st.lists(st.integers(0, (1 << out_bits) - 1),
                         min_size=1 << in_bits, max_size=1 << in_bits))
    return FunctionTable(in_bits, out_bits, vals)
