"""Non-malleable condensers with advice, used to purify somewhere sources.

The non-malleable condenser reads

    nmCond(X, Y, Z, b) = sExt'_b(X, sExt_b(Y, Z[:p_b]))

and purification merges adjacent rows of a somewhere source by XOR-ing the two
branches on fresh blocks X, Y.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .bitdist import TOL, Dist, FunctionTable, push_forward
from .blocks import BlockDist, BlockSpec, verify_block_source
from .compose import ChainConfig, chain_guarantee
from .entropy import smooth_min_entropy
from .lp import simplex
from .primitives import (CondenserParams, SeededPrimitive, certify,
                         verify_seeded_extractor)
from .rng import stream

LP_VAR_CAP = 10_000


# -- extractor claims -------------------------------------------------------

def extractor_error(p: SeededPrimitive, k0: float) -> float:
    """Exact worst-case extractor error over all (n, k0)-sources.

    Below k0 = 0 every source qualifies and point masses are the extreme
    points, so the k = 0 value is exact there; fractional k0 is rounded down,
    which only enlarges the source class.
    """
    k = int(math.floor(min(max(k0, 0.0), p.params.n)))
    return verify_seeded_extractor(p, k, exhaustive_sets=(1 << p.params.m) <= 16)


def seed_xor_extractor(n: int, d: int, mask: Sequence[int]) -> SeededPrimitive:
    """sExt(x, s) = s XOR mask[x]. The output is uniform for every fixed x,
    so the error is 0 against every source."""
    mask = np.asarray(mask, dtype=np.int64)
    table = (np.arange(1 << d)[None, :] ^ mask[:, None]).reshape(-1)
    return SeededPrimitive(FunctionTable(n + d, d, table),
                           CondenserParams(n=n, m=d, k=0, kprime=d, eps=0.0, d=d))


# -- non-malleable condenser ------------------------------------------------

@dataclass(frozen=True)
class NmCondenser:
    ext1: SeededPrimitive
    ext1p: SeededPrimitive
    ext2: SeededPrimitive
    ext2p: SeededPrimitive
    w: int
    k: float   # floor for the X and Y blocks
    g: float   # seed gap of the good Z channel
    k0: float
    eps1: float
    eps2: float

    def __post_init__(self):
        n = self.ext1.params.n
        for e in (self.ext1p, self.ext2, self.ext2p):
            if e.params.n != n:
                raise ValueError("all four extractors must read the same source length")
        if self.ext1p.params.d != self.d1 or self.ext2p.params.d != self.d2:
            raise ValueError("inner outputs must match the outer seed lengths")
        if self.ext1p.params.m != self.ext2p.params.m:
            raise ValueError("both branches must output the same length")
        if max(self.p1, self.p2) > self.w:
            raise ValueError("prefix lengths exceed the Z width %d" % self.w)
        if not (0 < self.eps1 <= 1 and 0 < self.eps2 <= 1):
            raise ValueError("claimed errors must lie in (0, 1]")
        # the coupled claims eps1' = eps1 and eps2' = eps2 2^-2d1
        claims = [(self.ext1, self.eps1), (self.ext1p, self.eps1p),
                  (self.ext2, self.eps2), (self.ext2p, self.eps2p)]
        for i, (e, claim) in enumerate(claims):
            if extractor_error(e, self.k0) > claim + 1e-15:
                raise ValueError("extractor %d is not a (%g, %g)-extractor" % (i + 1, self.k0, claim))

    n = property(lambda self: self.ext1.params.n)
    p1 = property(lambda self: self.ext1.params.d)
    d1 = property(lambda self: self.ext1.params.m)
    p2 = property(lambda self: self.ext2.params.d)
    d2 = property(lambda self: self.ext2.params.m)
    m = property(lambda self: self.ext1p.params.m)

    @property
    def eps1p(self) -> float:
        return self.eps1

    @property
    def eps2p(self) -> float:
        return self.eps2 * 2.0 ** (-2 * self.d1)

    @property
    def deficit(self) -> float:
        return (self.g + 2 * self.d1 + self.p2
                + math.log2(1 / self.eps1) + math.log2(1 / self.eps2))

    @property
    def r(self) -> float:
        """Claimed output entropy."""
        return self.m - self.deficit

    @property
    def bound_eps(self) -> float:
        return (2.0 ** (self.g + self.p2 + 3) * self.eps1 ** 0.25
                + 2.0 ** (self.g + 4) * self.eps2 ** 0.25)

    @property
    def requirement_met(self) -> bool:
        need = (self.k0 + self.m + 2 * self.d1 + self.d2 + self.p2
                + math.log2(1 / self.eps1) + math.log2(1 / self.eps2))
        return self.k >= need - TOL

    def branch_table(self, b: int) -> np.ndarray:
        """Output of branch b over every (x, y, z), indexed x|y|z."""
        inner, outer = (self.ext1, self.ext1p) if b == 1 else (self.ext2, self.ext2p)
        n, w = self.n, self.w
        p = inner.params.d
        idx = np.arange(1 << (2 * n + w), dtype=np.int64)
        z = idx & ((1 << w) - 1)
        y = (idx >> w) & ((1 << n) - 1)
        x = idx >> (w + n)
        mid = inner.table.table[(y << p) | (z >> (w - p))]
        return outer.table.table[(x << outer.params.d) | mid]

    def to_json(self) -> dict:
        return {"ext1": self.ext1.to_json(), "ext1p": self.ext1p.to_json(),
                "ext2": self.ext2.to_json(), "ext2p": self.ext2p.to_json(),
                "w": self.w, "k": self.k, "g": self.g, "k0": self.k0,
                "eps1": self.eps1, "eps2": self.eps2}

    @classmethod
    def from_json(cls, obj: dict) -> "NmCondenser":
        try:
            return cls(*(SeededPrimitive.from_json(obj[key])
                         for key in ("ext1", "ext1p", "ext2", "ext2p")),
                       int(obj["w"]), float(obj["k"]), float(obj["g"]), float(obj["k0"]),
                       float(obj["eps1"]), float(obj["eps2"]))
        except KeyError as exc:
            raise ValueError("nm condenser JSON is missing field '%s'" % exc.args[0]) from None


def nm_eval(c: NmCondenser, x, y, z, advice: int):
    if advice not in (1, 2):
        raise ValueError("advice must be 1 or 2")
    x, y, z = (np.asarray(v, dtype=np.int64) for v in (x, y, z))
    for name, v, bits in (("x", x, c.n), ("y", y, c.n), ("z", z, c.w)):
        if np.any((v < 0) | (v >= 1 << bits)):
            raise ValueError("%s does not fit in %d bits" % (name, bits))
    inner, outer = (c.ext1, c.ext1p) if advice == 1 else (c.ext2, c.ext2p)
    p = inner.params.d
    mid = inner.table.table[(y << p) | (z >> (c.w - p))]
    out = outer.table.table[(x << outer.params.d) | mid]
    return int(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class NmInstance:
    """Joint (X, Y, Z1, Z2) with the index of the channel forming a block source."""

    joint: BlockDist
    good: int

    def to_json(self) -> dict:
        return {"joint": self.joint.to_json(), "good": self.good}

    @classmethod
    def from_json(cls, obj: dict) -> "NmInstance":
        for key in ("joint", "good"):
            if key not in obj:
                raise ValueError("nm instance JSON is missing field '%s'" % key)
        return cls(BlockDist.from_json(obj["joint"]), int(obj["good"]))


@dataclass(frozen=True)
class NmVerdict:
    measured_entropy: float
    bound_entropy: float
    bound_eps: float
    holds: bool
    vacuous: bool
    requirement_met: bool
    informative: bool  # non-vacuous with a positive entropy claim

    @property
    def counted(self) -> bool:
        return not self.vacuous and self.requirement_met

    def to_json(self) -> dict:
        return dict(self.__dict__)


def _channel_marginal(inst: NmInstance, c: NmCondenser, b: int) -> BlockDist:
    n, w = c.n, c.w
    p = inst.joint.joint.probs.reshape(1 << (2 * n), 1 << w, 1 << w)
    q = p.sum(axis=2) if b == 1 else p.sum(axis=1)
    spec = BlockSpec((n, n, w), (c.k if c.k > 0 else 0.0,) * 2 + (max(0.0, w - c.g),))
    return BlockDist(spec, Dist(2 * n + w, q.reshape(-1)))


def xor_output(c: NmCondenser, joint: Dist) -> Dist:
    """Distribution of nm(X,Y,Z1,1) XOR nm(X,Y,Z2,2)."""
    n, w = c.n, c.w
    idx = np.arange(1 << (2 * n + 2 * w), dtype=np.int64)
    z2 = idx & ((1 << w) - 1)
    z1 = (idx >> w) & ((1 << w) - 1)
    xy = idx >> (2 * w)
    t1, t2 = c.branch_table(1), c.branch_table(2)
    v = t1[(xy << w) | z1] ^ t2[(xy << w) | z2]
    return push_forward(FunctionTable(2 * n + 2 * w, c.m, v), joint)


def nm_verify(c: NmCondenser, inst: NmInstance) -> NmVerdict:
    n, w = c.n, c.w
    if inst.joint.spec.lengths != (n, n, w, w):
        raise ValueError("instance blocks %s do not match (%d, %d, %d, %d)"
                         % (inst.joint.spec.lengths, n, n, w, w))
    if inst.good not in (1, 2):
        raise ValueError("good channel index must be 1 or 2")
    if not verify_block_source(_channel_marginal(inst, c, inst.good))[0]:
        raise ValueError("precondition failed: (X, Y, Z%d) is not a block source "
                         "with the required floors" % inst.good)
    out = xor_output(c, inst.joint.joint)
    bound_eps = c.bound_eps
    measured = smooth_min_entropy(out, min(1.0, bound_eps)).value
    bound = c.r
    vacuous = bound_eps >= 1
    return NmVerdict(measured, bound, bound_eps, measured >= bound - TOL, vacuous,
                     c.requirement_met, (not vacuous) and bound > 0)


# -- somewhere sources ------------------------------------------------------

@dataclass(frozen=True)
class SomewhereSource:
    rows: int
    row_bits: int
    dist: Dist
    claimed_row_entropy: float
    claimed_eps: float = 0.0

    def __post_init__(self):
        if self.rows < 1 or self.rows & (self.rows - 1):
            raise ValueError("row count must be a power of two, got %d" % self.rows)
        if self.rows * self.row_bits != self.dist.n_bits:
            raise ValueError("rows x row_bits != dist.n_bits")

    def row(self, i: int) -> Dist:
        p = self.dist.probs.reshape([1 << self.row_bits] * self.rows)
        axes = tuple(j for j in range(self.rows) if j != i)
        return Dist(self.row_bits, p.sum(axis=axes).reshape(-1))


def row_worst_excess(table: FunctionTable, k: int, ell: float) -> float:
    """Worst heavy-set excess of f(X) at level 2^-ell over flat (n, k)-sources.

    For sets of a given size the best ones collect the largest preimages, and
    a flat source of size 2^k can hide inside min(2^k, |f^-1(S)|) of them.
    """
    sizes = np.sort(np.bincount(table.table, minlength=1 << table.out_bits))[::-1]
    big_k = 1 << k
    s = np.arange(1, sizes.size + 1)
    vals = np.minimum(np.cumsum(sizes), big_k) / big_k - s * 2.0 ** (-ell)
    return float(max(0.0, vals.max()))


@dataclass(frozen=True)
class SomewhereCondenser:
    rows: tuple[FunctionTable, ...]
    k: int
    ell: float
    eps: float
    good_row: int

    def to_json(self) -> dict:
        return {"rows": [r.to_json() for r in self.rows], "k": self.k, "ell": self.ell,
                "eps": self.eps, "good_row": self.good_row}

    @classmethod
    def from_json(cls, obj: dict) -> "SomewhereCondenser":
        try:
            return cls(tuple(FunctionTable.from_json(r) for r in obj["rows"]), int(obj["k"]),
                       float(obj["ell"]), float(obj["eps"]), int(obj["good_row"]))
        except KeyError as exc:
            raise ValueError("somewhere condenser JSON is missing field '%s'" % exc.args[0]) from None


def search_somewhere_condenser(n: int, k: int, rows: int, w: int, ell: float, eps: float,
                               trials: int, rng_seed: int,
                               balanced: bool = False) -> SomewhereCondenser | None:
    """Random row tables until some row condenses every flat (n, k)-source.

    With ``balanced`` each row is a random shuffle of a table hitting every
    output equally often.
    """
    def draw(rng):
        if balanced and n >= w:
            return rng.permutation(np.arange(1 << n) % (1 << w))
        return rng.integers(0, 1 << w, 1 << n)

    for trial in range(trials):
        rng = stream(rng_seed, trial)
        tables = tuple(FunctionTable(n, w, draw(rng)) for _ in range(rows))
        for i, tb in enumerate(tables):
            if row_worst_excess(tb, k, ell) <= eps + TOL:
                return SomewhereCondenser(tables, k, ell, eps, i)
    return None


def purify_rows(nm: NmCondenser, x: np.ndarray, y: np.ndarray,
                rows: Sequence[np.ndarray]) -> list[np.ndarray]:
    """Row i of the result is nm(x, y, rows[2i], 1) XOR nm(x, y, rows[2i+1], 2)."""
    if len(rows) < 2:
        raise ValueError("purification needs at least two rows")
    t1, t2 = nm.branch_table(1), nm.branch_table(2)
    base = ((np.asarray(x) << nm.n) | np.asarray(y)) << nm.w
    return [t1[base | rows[2 * i]] ^ t2[base | rows[2 * i + 1]] for i in range(len(rows) // 2)]


def purified_eps(eps_in: float, nm_eps: float) -> float:
    return eps_in + 4 * math.sqrt(nm_eps) + nm_eps


def purify_step(nm: NmCondenser, joint: BlockDist, rows: int,
                claimed_eps: float = 0.0) -> SomewhereSource:
    """Merge adjacent rows of a somewhere source carried in block 3 of ``joint``
    (blocks 1 and 2 are the fresh X and Y)."""
    if rows < 2:
        raise ValueError("purification needs D >= 2 rows")
    n, w = nm.n, nm.w
    if joint.spec.lengths != (n, n, rows * w):
        raise ValueError("joint blocks %s do not match (%d, %d, %d)"
                         % (joint.spec.lengths, n, n, rows * w))
    total = joint.spec.total_bits
    idx = np.arange(1 << total, dtype=np.int64)
    zs = [(idx >> ((rows - 1 - i) * w)) & ((1 << w) - 1) for i in range(rows)]
    x = idx >> (n + rows * w)
    y = (idx >> (rows * w)) & ((1 << n) - 1)
    merged = purify_rows(nm, x, y, zs)
    out = np.zeros_like(idx)
    for r in merged:
        out = (out << nm.m) | r
    dist = push_forward(FunctionTable(total, len(merged) * nm.m, out), joint.joint)
    return SomewhereSource(rows // 2, nm.m, dist, nm.r,
                           purified_eps(claimed_eps, nm.bound_eps))


# -- distance to convex hulls of somewhere sources --------------------------

def hull_distance(s: Dist, r: float, rows: int) -> float:
    """Exact distance from ``s`` to the convex hull of the union over rows i of
    {P : every value of row i has mass <= 2^-r}, by linear programming."""
    if s.n_bits % rows:
        raise ValueError("%d bits do not split into %d rows" % (s.n_bits, rows))
    m = s.n_bits // rows
    if not 0 <= r <= m:
        raise ValueError("r must lie in [0, %d]" % m)
    size = 1 << s.n_bits
    nvar = rows * size + size
    if nvar > LP_VAR_CAP:
        raise ValueError("LP needs %d variables, cap is %d" % (nvar, LP_VAR_CAP))
    level = 2.0 ** (-r)
    u = np.arange(size)
    c = np.concatenate([np.zeros(rows * size), np.ones(size)])
    a_ub, b_ub = [], []
    cover = np.zeros((size, nvar))
    for i in range(rows):
        cover[u, i * size + u] = -1.0
    cover[u, rows * size + u] = -1.0
    a_ub.append(cover)
    b_ub.append(-s.probs)
    for i in range(rows):
        vals = (u >> ((rows - 1 - i) * m)) & ((1 << m) - 1)
        cap = np.zeros((1 << m, nvar))
        cap[:, i * size:(i + 1) * size] = -level
        cap[vals, i * size + u] += 1.0
        a_ub.append(cap)
        b_ub.append(np.zeros(1 << m))
    a_eq = np.zeros((1, nvar))
    a_eq[0, :rows * size] = 1.0
    res = simplex(c, np.vstack(a_ub), np.concatenate(b_ub), a_eq, np.ones(1))
    return float(max(0.0, res.value))


# -- end-to-end toy pipeline ------------------------------------------------

@dataclass(frozen=True)
class PipelineRound:
    b: int
    eps: float
    nm: NmCondenser


@dataclass(frozen=True)
class PipelineConfig:
    baseline_blocks: int
    baseline: SomewhereCondenser
    rounds: tuple[PipelineRound, ...]
    post: tuple[SeededPrimitive, ...]

    @property
    def consumed(self) -> int:
        return self.baseline_blocks + 2 * sum(r.b for r in self.rounds)

    def to_json(self) -> dict:
        return {"baseline": {"blocks": self.baseline_blocks, **self.baseline.to_json()},
                "rounds": [{"b": r.b, "eps": r.eps, "nm": r.nm.to_json()} for r in self.rounds],
                "post": {"stages": [p.to_json() for p in self.post]}}

    @classmethod
    def from_json(cls, obj: dict) -> "PipelineConfig":
        for key in ("baseline", "rounds", "post"):
            if key not in obj:
                raise ValueError("pipeline JSON is missing field '%s'" % key)
        base = obj["baseline"]
        if "blocks" not in base:
            raise ValueError("pipeline JSON is missing field 'baseline.blocks'")
        rounds = []
        for i, r in enumerate(obj["rounds"]):
            for key in ("b", "eps", "nm"):
                if key not in r:
                    raise ValueError("pipeline JSON is missing field 'rounds[%d].%s'" % (i, key))
            rounds.append(PipelineRound(int(r["b"]), float(r["eps"]), NmCondenser.from_json(r["nm"])))
        post = obj["post"]
        if "stages" not in post:
            raise ValueError("pipeline JSON is missing field 'post.stages'")
        return cls(int(base["blocks"]), SomewhereCondenser.from_json(base), tuple(rounds),
                   tuple(SeededPrimitive.from_json(p) for p in post["stages"]))


def _validate(cfg: PipelineConfig, t: int, n: int):
    d = len(cfg.rounds)
    if len(cfg.baseline.rows) != 1 << d:
        raise ValueError("baseline has %d rows but %d rounds need %d"
                         % (len(cfg.baseline.rows), d, 1 << d))
    if cfg.baseline.rows[0].in_bits != cfg.baseline_blocks * n:
        raise ValueError("baseline reads %d bits, its %d blocks hold %d"
                         % (cfg.baseline.rows[0].in_bits, cfg.baseline_blocks, cfg.baseline_blocks * n))
    if cfg.consumed + len(cfg.post) != t:
        raise ValueError("insufficient blocks: schedule consumes %d + %d post stages, source has %d"
                         % (cfg.consumed, len(cfg.post), t))
    width = cfg.baseline.rows[0].out_bits
    for i, r in enumerate(cfg.rounds):
        if r.nm.n != r.b * n or r.nm.w != width:
            raise ValueError("round %d condenser shape does not fit its blocks" % (i + 1))
        if r.eps < r.nm.bound_eps - TOL:
            raise ValueError("round %d error budget %g is below the condenser bound %g"
                             % (i + 1, r.eps, r.nm.bound_eps))
        width = r.nm.m
    seed = width
    for i in range(len(cfg.post) - 1, -1, -1):
        st = cfg.post[i]
        if st.params.n != n or st.params.d != seed:
            raise ValueError("post stage %d shape does not fit" % (i + 1))
        seed = st.params.m


def toy_pipeline(src: BlockDist, cfg: PipelineConfig) -> tuple[Dist, dict]:
    """Baseline somewhere-condensing on the last blocks, purification rounds on
    the blocks before them, then a condensing chain over the remaining blocks
    with the purified row as its final block."""
    t, n = src.spec.t, src.spec.lengths[0]
    if len(set(src.spec.lengths)) != 1:
        raise ValueError("pipeline input must have equal block lengths")
    _validate(cfg, t, n)
    k_block = min(src.spec.floors)
    total = src.spec.total_bits
    idx = np.arange(1 << total, dtype=np.int64)

    def blocks(lo: int, hi: int) -> np.ndarray:
        return (idx >> ((t - hi) * n)) & ((1 << ((hi - lo) * n)) - 1)

    stages = []
    hi = t
    base_in = blocks(hi - cfg.baseline_blocks, hi)
    hi -= cfg.baseline_blocks
    rows = [tb.table[base_in] for tb in cfg.baseline.rows]
    width = cfg.baseline.rows[0].out_bits
    ell, eps = cfg.baseline.ell, cfg.baseline.eps

    def row_dist(rs: list[np.ndarray], bits: int) -> Dist:
        out = np.zeros_like(idx)
        for r in rs:
            out = (out << bits) | r
        return push_forward(FunctionTable(total, len(rs) * bits, out), src.joint)

    def measure(rs, bits, r_claim, e_claim) -> dict:
        rec = {"rows": len(rs), "row_bits": bits, "guaranteed_entropy": r_claim,
               "guaranteed_eps": e_claim, "vacuous": e_claim >= 1}
        e = min(1.0, e_claim)
        per_row = [smooth_min_entropy(row_dist([r], bits), e).value for r in rs]
        rec["measured_row_entropy"] = per_row
        if len(rs) > 1 and len(rs) * bits <= 8 and 0 <= r_claim <= bits:
            rec["hull_distance"] = hull_distance(row_dist(rs, bits), r_claim, len(rs))
        return rec

    stages.append({"stage": "baseline", "blocks": cfg.baseline_blocks,
                   "input_floor": cfg.baseline_blocks * k_block,
                   **measure(rows, width, ell, eps)})
    for i, rd in enumerate(cfg.rounds):
        y = blocks(hi - rd.b, hi)
        x = blocks(hi - 2 * rd.b, hi - rd.b)
        hi -= 2 * rd.b
        rows = purify_rows(rd.nm, x, y, rows)
        width = rd.nm.m
        ell, eps = rd.nm.r, purified_eps(eps, rd.eps)
        stages.append({"stage": "purify", "round": i + 1, "b": rd.b,
                       "nm_bound_eps": rd.nm.bound_eps, **measure(rows, width, ell, eps)})
    final_row = rows[0]
    row_rec = stages[-1]
    row_rec["holds"] = (row_rec["vacuous"]
                        or row_rec["measured_row_entropy"][0] >= ell - TOL)

    # post-processing chain, the purified row acting as the final block
    k_t = float(min(max(ell, 0.0), width))
    y = final_row
    for i in range(len(cfg.post) - 1, -1, -1):
        st = cfg.post[i]
        y = st.table.table[(blocks(i, i + 1) << st.params.d) | y]
    out_bits = cfg.post[0].params.m if cfg.post else width
    out = push_forward(FunctionTable(total, out_bits, y), src.joint)
    if cfg.post:
        chain = ChainConfig(cfg.post, (width, k_t))
        gap, chain_eps = chain_guarantee(chain.gaps(), chain.errors())
    else:
        gap, chain_eps = width - k_t, 0.0
    total_eps = chain_eps + eps
    guaranteed = out_bits - gap
    measured = smooth_min_entropy(out, min(1.0, total_eps)).value
    final = {"stage": "post", "stages": len(cfg.post), "out_bits": out_bits,
             "guaranteed_entropy": guaranteed, "guaranteed_gap": gap,
             "guaranteed_eps": total_eps, "vacuous": total_eps >= 1,
             "measured_entropy": measured, "measured_gap": out_bits - measured,
             "holds": total_eps >= 1 or measured >= guaranteed - TOL}
    stages.append(final)
    report = {"t": t, "n": n, "tau": cfg.consumed, "rows": len(cfg.baseline.rows),
              "stages": stages, "holds": bool(row_rec["holds"] and final["holds"])}
    return out, report


def micro_pipeline_config(rng_seed: int = 2024) -> PipelineConfig:
    """The shipped micro schedule for t = 6 blocks of 3 bits with D = 2."""
    n, k = 3, 2
    base = search_somewhere_condenser(2 * n, 2 * k, rows=2, w=3, ell=1.0, eps=0.0,
                                      trials=200, rng_seed=rng_seed, balanced=True)
    nm = zero_error_nm(n=n, w=3, m=2, g=base.rows[0].out_bits - base.ell,
                       eps1=2.0 ** -64, eps2=2.0 ** -64, rng_seed=rng_seed + 1)
    stages = []
    seed_bits = nm.m
    for i in range(2):
        params = CondenserParams(n=n, m=2, k=k, kprime=1, eps=1.0, d=seed_bits)
        rng = stream(rng_seed + 2, i)
        table = FunctionTable(n + seed_bits, 2, rng.integers(0, 4, 1 << (n + seed_bits)))
        stages.append(certify(SeededPrimitive(table, params, rng_seed=rng_seed + 2)))
        seed_bits = 2
    return PipelineConfig(2, base, (PipelineRound(1, nm.bound_eps, nm),), tuple(stages[::-1]))


def zero_error_nm(n: int, w: int, m: int, g: float, eps1: float, eps2: float,
                  rng_seed: int, k: float = 0.0) -> NmCondenser:
    """Non-malleable condenser from seed-XOR extractors (p = d = m).

    These extractors have error 0 against every source, so they certify any
    claimed error for any k0; k0 is set to the largest value meeting the
    entropy requirement.
    """
    rng = stream(rng_seed)
    exts = [seed_xor_extractor(n, m, rng.integers(0, 1 << m, 1 << n)) for _ in range(4)]
    need = m + 2 * m + m + m + math.log2(1 / eps1) + math.log2(1 / eps2)
    return NmCondenser(exts[0], exts[1], exts[2], exts[3], w=w, k=k, g=g,
                       k0=k - need, eps1=eps1, eps2=eps2)
