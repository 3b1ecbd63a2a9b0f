"""Instance builders and oracles shared by unit and acceptance tests."""

import networkx as nx
import numpy as np
from scipy.optimize import linprog

from entropy_forge.bitdist import Dist, FunctionTable
from entropy_forge.blocks import BlockSpec
from entropy_forge.compose import ChainConfig
from entropy_forge.entropy import clip_excess
from entropy_forge.primitives import CondenserParams, SeededPrimitive, verification_record
from entropy_forge.sources import random_block_source


def random_stage(n: int, d: int, m: int, rng: np.random.Generator) -> SeededPrimitive:
    k = int(rng.integers(1, n + 1))
    kprime = float(rng.choice([m, m - 0.5, m - 1]))
    kprime = max(kprime, 0.0)
    params = CondenserParams(n=n, m=m, k=k, kprime=kprime, eps=1.0, d=d)
    p = SeededPrimitive(FunctionTable(n + d, m, rng.integers(0, 1 << m, 1 << (n + d))), params)
    rec = verification_record(p)
    return SeededPrimitive(p.table, params, rec)


def random_chain(stages: int, rng: np.random.Generator) -> ChainConfig:
    n_t = int(rng.integers(2, 4))
    k_t = float(rng.integers(1, n_t + 1)) - float(rng.choice([0.0, 0.5]))
    built = []
    seed = n_t
    for _ in range(stages):
        n = int(rng.integers(2, 4))
        m = int(rng.integers(1, 4))
        built.append(random_stage(n, seed, m, rng))
        seed = m
    return ChainConfig(tuple(built[::-1]), (n_t, k_t))


def chain_source(cfg: ChainConfig, rng: np.random.Generator):
    return random_block_source(BlockSpec(cfg.lengths, cfg.floors), rng)


# -- independent oracle for hull_distance ----------------------------------

def overlap(s: np.ndarray, level: float, rows: int, m: int, w: np.ndarray) -> float:
    """Max of sum_u min(s(u), Q(u)) over hull points with mixture weights w,
    as a max-flow: u -> (row i, value v) capped by w_i 2^-r -> row i capped by w_i."""
    g = nx.DiGraph()
    size = s.size
    for u in range(size):
        g.add_edge("src", ("u", u), capacity=float(s[u]))
        for i in range(rows):
            v = (u >> ((rows - 1 - i) * m)) & ((1 << m) - 1)
            g.add_edge(("u", u), ("v", i, v), capacity=1.0)
    for i in range(rows):
        for v in range(1 << m):
            g.add_edge(("v", i, v), ("row", i), capacity=float(w[i] * level))
        g.add_edge(("row", i), "sink", capacity=float(w[i]))
    return nx.maximum_flow_value(g, "src", "sink")


def grid_hull_distance(s: Dist, r: float, rows: int) -> float:
    m = s.n_bits // rows
    level = 2.0 ** -r
    if rows == 1:
        return clip_excess(s.probs, r)
    assert rows == 2
    f = lambda a: overlap(s.probs, level, 2, m, np.array([a, 1 - a]))
    grid = np.linspace(0, 1, 101)
    vals = [f(a) for a in grid]
    j = int(np.argmax(vals))
    lo, hi = grid[max(j - 1, 0)], grid[min(j + 1, 100)]
    # the overlap is concave in the weight, so ternary search refines the grid
    for _ in range(60):
        a, b = lo + (hi - lo) / 3, hi - (hi - lo) / 3
        if f(a) < f(b):
            lo = a
        else:
            hi = b
    return 1.0 - max(max(vals), f((lo + hi) / 2))


def scipy_hull_distance(s: Dist, r: float, rows: int) -> float:
    m = s.n_bits // rows
    size = s.size
    nvar = rows * size + size
    c = np.r_[np.zeros(rows * size), np.ones(size)]
    a, b = [], []
    for u in range(size):
        row = np.zeros(nvar)
        row[[i * size + u for i in range(rows)]] = -1
        row[rows * size + u] = -1
        a.append(row)
        b.append(-s.probs[u])
    for i in range(rows):
        for v in range(1 << m):
            row = np.zeros(nvar)
            row[i * size:(i + 1) * size] = -2.0 ** -r
            for u in range(size):
                if (u >> ((rows - 1 - i) * m)) & ((1 << m) - 1) == v:
                    row[i * size + u] += 1
            a.append(row)
            b.append(0.0)
    res = linprog(c, A_ub=a, b_ub=b, A_eq=[np.r_[np.ones(rows * size), np.zeros(size)]],
                  b_eq=[1], bounds=(0, None), method="highs")
    return res.fun
