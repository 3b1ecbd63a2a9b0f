"""Seeded condensers fed by correlated seeds, and the iterated chain.

A chain over blocks (x_1, ..., x_t) evaluates y_t = x_t and
y_i = sCond_i(x_i, y_{i+1}); the output is y_1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .bitdist import TOL, Dist, FunctionTable, push_forward
from .blocks import BlockDist
from .primitives import CondenserParams, SeededPrimitive


def _record(p: SeededPrimitive) -> dict:
    if not p.verified:
        raise ValueError("primitive carries no verification record")
    return p.verified


def eval_on_block(p: SeededPrimitive, xy: BlockDist) -> tuple[Dist, float, float]:
    """Apply a seeded condenser whose seed block has gap g.

    Returns the output and the guarantee ``H^{2^g eps}(out) >= kprime - g``.
    """
    rec = _record(p)
    if xy.spec.lengths != (p.params.n, p.params.d):
        raise ValueError("shape mismatch: blocks %s, primitive expects (%d, %d)"
                         % (xy.spec.lengths, p.params.n, p.params.d))
    if xy.spec.floors[0] < rec["k"] - TOL:
        raise ValueError("source floor %g is below the verified k=%g"
                         % (xy.spec.floors[0], rec["k"]))
    g = p.params.d - xy.spec.floors[1]
    out = push_forward(p.table, xy.joint)
    return out, rec["kprime"] - g, (2.0 ** g) * rec["eps"]


@dataclass(frozen=True)
class ChainConfig:
    stages: tuple[SeededPrimitive, ...]
    final_block: tuple[int, float]

    def __post_init__(self):
        stages = tuple(self.stages)
        object.__setattr__(self, "stages", stages)
        n_t, k_t = self.final_block
        if not 0 <= k_t <= n_t:
            raise ValueError("final block floor %g outside [0, %d]" % (k_t, n_t))
        seed_len = n_t
        for i in range(len(stages) - 1, -1, -1):
            st = stages[i]
            _record(st)
            if st.params.d != seed_len:
                raise ValueError("stage %d reads a %d-bit seed but receives %d bits"
                                 % (i + 1, st.params.d, seed_len))
            seed_len = st.params.m

    @property
    def lengths(self) -> tuple[int, ...]:
        return tuple(s.params.n for s in self.stages) + (self.final_block[0],)

    @property
    def floors(self) -> tuple[float, ...]:
        return tuple(s.verified["k"] for s in self.stages) + (float(self.final_block[1]),)

    def gaps(self) -> list[float]:
        gs = [s.params.m - s.verified["kprime"] for s in self.stages]
        return gs + [self.final_block[0] - self.final_block[1]]

    def errors(self) -> list[float]:
        return [s.verified["eps"] for s in self.stages] + [0.0]


def chain_guarantee(gaps: Sequence[float], errors: Sequence[float]) -> tuple[float, float]:
    """Composed gap sum(g_i) and error sum_i eps_i 2^{sum_{j>i} g_j}."""
    g = float(sum(gaps))
    eps = 0.0
    for i, e in enumerate(errors):
        eps += e * 2.0 ** float(sum(gaps[i + 1:]))
    return g, eps


def compose_chain(cfg: ChainConfig) -> tuple[FunctionTable, CondenserParams]:
    lengths = cfg.lengths
    total = sum(lengths)
    idx = np.arange(1 << total, dtype=np.int64)
    shift = total
    blocks = []
    for n in lengths:
        shift -= n
        blocks.append((idx >> shift) & ((1 << n) - 1))
    y = blocks[-1]
    for i in range(len(cfg.stages) - 1, -1, -1):
        st = cfg.stages[i]
        y = st.table.table[(blocks[i] << st.params.d) | y]
    m1 = cfg.stages[0].params.m if cfg.stages else cfg.final_block[0]
    g, eps = chain_guarantee(cfg.gaps(), cfg.errors())
    params = CondenserParams(n=total, m=m1, k=float(sum(cfg.floors)), kprime=m1 - g,
                             eps=min(1.0, eps))
    return FunctionTable(total, m1, y), params


def log_star(t: int) -> int:
    """Number of log2 applications needed to bring t to at most 1."""
    count, v = 0, float(t)
    while v > 1:
        v = math.log2(v)
        count += 1
    return count


def _max_sum(count: int, last: int, cap: int) -> int:
    """Largest sum of ``count`` further buckets placed before one equal to ``last``."""
    total, cur = 0, last
    for _ in range(count):
        cur = min(1 << min(cur, 62), cap)
        total += cur
        if total >= cap:
            return cap
    return total


def bucket_schedule(t: int) -> tuple[int, ...]:
    """Shortest nonincreasing b with b[-1] = 2, b_i <= 2^{b_{i+1}}, sum = t."""
    if t < 2:
        raise ValueError("t must be >= 2, got %d" % t)

    def fill(count: int, last: int, rem: int) -> list[int] | None:
        # choose `count` values in front of `last`, each in [last, 2^last]
        if count == 0:
            return [] if rem == 0 else None
        hi = min(1 << min(last, 62), rem)
        for v in range(hi, last - 1, -1):
            rest = rem - v
            if rest < (count - 1) * v or rest > _max_sum(count - 1, v, t):
                continue
            sub = fill(count - 1, v, rest)
            if sub is not None:
                return sub + [v]
        return None

    start = 1
    while 2 + _max_sum(start - 1, 2, t) < t:
        start += 1
    for length in range(start, t // 2 + 1):
        front = fill(length - 1, 2, t - 2)
        if front is not None:
            return tuple(front) + (2,)
    raise ValueError("no bucket vector sums to t=%d (every bucket is >= 2 and the last is 2)" % t)
