"""Block sources and the structural lemmas about them, as exact checks.

A ``BlockDist`` is a joint distribution over the concatenation of blocks
together with claimed per-block conditional min-entropy floors. Chor-Goldreich
sources are simply block sources with equal lengths.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .bitdist import TOL, Dist, prefix, statistical_distance
from .entropy import clip_witness, conditional_rows, min_entropy


@dataclass(frozen=True)
class BlockSpec:
    lengths: tuple[int, ...]
    floors: tuple[float, ...]

    def __post_init__(self):
        lengths = tuple(int(v) for v in self.lengths)
        floors = tuple(float(v) for v in self.floors)
        if not lengths:
            raise ValueError("a block spec needs at least one block")
        if len(floors) != len(lengths):
            raise ValueError("floors and lengths differ in count")
        for n, k in zip(lengths, floors):
            if n < 0 or not -TOL <= k <= n + TOL:
                raise ValueError("floor %g outside [0, %d]" % (k, n))
        object.__setattr__(self, "lengths", lengths)
        object.__setattr__(self, "floors", floors)

    @property
    def t(self) -> int:
        return len(self.lengths)

    @property
    def total_bits(self) -> int:
        return sum(self.lengths)

    def offset(self, i: int) -> int:
        """Number of bits before block ``i`` (0-based)."""
        return sum(self.lengths[:i])


@dataclass(frozen=True)
class BlockDist:
    spec: BlockSpec
    joint: Dist

    def __post_init__(self):
        if self.joint.n_bits != self.spec.total_bits:
            raise ValueError("joint has %d bits but blocks total %d"
                             % (self.joint.n_bits, self.spec.total_bits))

    def conditionals(self, i: int) -> tuple[np.ndarray, np.ndarray]:
        """Prefix masses and conditional rows of block ``i`` given blocks before it."""
        upto = prefix(self.joint, self.spec.offset(i + 1))
        return conditional_rows(upto, self.spec.offset(i))

    def with_floors(self, floors: Sequence[float]) -> "BlockDist":
        return BlockDist(BlockSpec(self.spec.lengths, tuple(floors)), self.joint)

    def to_json(self) -> dict:
        return {"lengths": list(self.spec.lengths), "floors": list(self.spec.floors),
                "joint": self.joint.to_json()}

    @classmethod
    def from_json(cls, obj: dict) -> "BlockDist":
        for key in ("lengths", "floors", "joint"):
            if key not in obj:
                raise ValueError("BlockDist JSON is missing field '%s'" % key)
        return cls(BlockSpec(tuple(obj["lengths"]), tuple(obj["floors"])),
                   Dist.from_json(obj["joint"]))


@dataclass(frozen=True)
class AlmostBlockParams:
    etas: tuple[float, ...]
    gammas: tuple[float, ...]

    def __post_init__(self):
        if len(self.etas) != len(self.gammas):
            raise ValueError("etas and gammas differ in count")
        for v in self.etas + self.gammas:
            if not -TOL <= v <= 1 + TOL:
                raise ValueError("almost-block parameter %g outside [0, 1]" % v)


def _row_min_entropy(rows: np.ndarray) -> np.ndarray:
    return -np.log2(rows.max(axis=1))


def _row_excess(rows: np.ndarray, k: float) -> np.ndarray:
    return np.clip(rows - 2.0 ** (-k), 0.0, None).sum(axis=1)


def verify_block_source(x: BlockDist) -> tuple[bool, list[float]]:
    margins = []
    for i, k in enumerate(x.spec.floors):
        mass, rows = x.conditionals(i)
        live = mass > 0
        margins.append(float(np.min(_row_min_entropy(rows[live]) - k)))
    return all(m >= -TOL for m in margins), margins


def measure_almost_params(x: BlockDist, gammas: Sequence[float] | None = None) -> AlmostBlockParams:
    """Mass of prefixes whose conditional is farther than gamma_i from every
    distribution with min-entropy k_i."""
    gammas = tuple(float(g) for g in (gammas if gammas is not None else [0.0] * x.spec.t))
    if len(gammas) != x.spec.t:
        raise ValueError("need one gamma per block")
    etas = []
    for i, (k, g) in enumerate(zip(x.spec.floors, gammas)):
        mass, rows = x.conditionals(i)
        bad = (mass > 0) & (_row_excess(rows, k) > g + TOL)
        etas.append(float(min(1.0, mass[bad].sum())))
    return AlmostBlockParams(tuple(etas), gammas)


def _assemble(spec: BlockSpec, kernels: list[np.ndarray]) -> Dist:
    """Joint distribution from per-block conditional kernels indexed by prefix."""
    p = np.ones(1)
    for rows in kernels:
        p = (p[:, None] * rows).reshape(-1)
    return Dist(spec.total_bits, p)


def repair_almost_block(x: BlockDist, p: AlmostBlockParams) -> tuple[BlockDist, float]:
    """Build a true block source near an almost-block source.

    Step one swaps every bad conditional (and every conditional at a prefix
    outside the support) for uniform; step two clips each conditional to the
    floor with the smooth-entropy witness.
    """
    measured = measure_almost_params(x, p.gammas)
    for have, allowed in zip(measured.etas, p.etas):
        if have > allowed + TOL:
            raise ValueError("parameter domination violated: measured eta %.6g > %.6g"
                             % (have, allowed))
    kernels = []
    for i, (n, k, g) in enumerate(zip(x.spec.lengths, x.spec.floors, p.gammas)):
        mass, rows = x.conditionals(i)
        good = (mass > 0) & (_row_excess(rows, k) <= g + TOL)
        step1 = np.where(good[:, None], rows, 1.0 / (1 << n))
        step2 = clip_witness(step1, k)
        kernels.append(step2 / step2.sum(axis=1, keepdims=True))
    y = BlockDist(x.spec, _assemble(x.spec, kernels))
    return y, float(sum(p.etas) + sum(p.gammas))


def local_to_global_check(x: BlockDist, y: BlockDist) -> tuple[list[float], float, float, bool]:
    if x.spec.lengths != y.spec.lengths:
        raise ValueError("spec mismatch: %s vs %s" % (x.spec.lengths, y.spec.lengths))
    eps = []
    for i in range(x.spec.t):
        mx, rx = x.conditionals(i)
        my, ry = y.conditionals(i)
        shared = (mx > 0) & (my > 0)
        d = 0.5 * np.abs(rx[shared] - ry[shared]).sum(axis=1)
        eps.append(float(d.max()) if d.size else 0.0)
    lhs = statistical_distance(x.joint, y.joint)
    rhs = float(sum(eps))
    return eps, lhs, rhs, lhs <= rhs + TOL


def chain_rule_check(joint_xy: BlockDist, eps: float) -> tuple[float, bool]:
    """Mass of y with H(X|Y=y) >= H(X) - log|Y| - log(1/eps)."""
    if joint_xy.spec.t != 2:
        raise ValueError("chain rule check needs a two-block joint")
    if not 0 < eps <= 1:
        raise ValueError("eps must lie in (0, 1]")
    nx, ny = joint_xy.spec.lengths
    h_x = min_entropy(prefix(joint_xy.joint, nx))
    threshold = h_x - ny - math.log2(1 / eps)
    cols = joint_xy.joint.probs.reshape(1 << nx, 1 << ny)
    py = cols.sum(axis=0)
    live = py > 0
    h_cond = -np.log2(cols[:, live].max(axis=0) / py[live])
    good = float(py[live][h_cond >= threshold - TOL].sum())
    return good, good >= 1 - eps - TOL


def almost_block_certificate(x: BlockDist) -> float:
    """Upper bound on the distance from ``x`` to the block sources with its
    floors: sum over blocks of min over gamma of (eta(gamma) + gamma)."""
    total = 0.0
    for i, k in enumerate(x.spec.floors):
        mass, rows = x.conditionals(i)
        live = mass > 0
        e = _row_excess(rows[live], max(k, 0.0))
        w = mass[live]
        order = np.argsort(e)
        e, w = e[order], w[order]
        # gamma = e[j] leaves every entry after j bad
        tail = np.concatenate([np.cumsum(w[::-1])[::-1][1:], [0.0]])
        options = np.concatenate([[w[e > TOL].sum()], e + tail])
        total += float(options.min())
    return total


def _independence_holds(joint: Dist, lengths: Sequence[int], xlengths: Sequence[int]) -> bool:
    """(X_i | X_<i, X'_>=i) is independent of (X'_<i | same) for every i."""
    t = len(lengths)
    shape = [1 << n for n in lengths] + [1 << n for n in xlengths]
    p = joint.probs.reshape(shape)
    for i in range(t):
        q = p.sum(axis=tuple(range(i + 1, t))) if i + 1 < t else p
        # axes now: X_0..X_i, X'_0..X'_{t-1}
        a_axes = list(range(i))
        c_axis = [i]
        d_axes = list(range(i + 1, i + 1 + i))
        b_axes = list(range(i + 1 + i, i + 1 + t))
        q = np.transpose(q, a_axes + b_axes + c_axis + d_axes)
        sa = int(np.prod([q.shape[j] for j in range(len(a_axes))]))
        sb = int(np.prod([1 << xlengths[j] for j in range(i, t)]))
        q = q.reshape(sa, sb, 1 << lengths[i], -1)
        tot = q.sum(axis=(2, 3))
        lhs = q * tot[:, :, None, None]
        rhs = q.sum(axis=3)[:, :, :, None] * q.sum(axis=2)[:, :, None, :]
        if np.abs(lhs - rhs).max() > TOL:
            return False
    return True


def fixing_lemma_check(x: BlockDist, xprime_bits: Sequence[int], joint: Dist,
                       eps: float) -> tuple[float, float, bool]:
    """Fix correlated side information X' and measure how often the source
    stops being close to a block source with the degraded floors."""
    t = x.spec.t
    xprime_bits = tuple(int(b) for b in xprime_bits)
    if len(xprime_bits) != t:
        raise ValueError("need one side-information width per block")
    if not 0 < eps <= 1:
        raise ValueError("eps must lie in (0, 1]")
    nx = x.spec.total_bits
    if joint.n_bits != nx + sum(xprime_bits):
        raise ValueError("joint has %d bits, expected %d" % (joint.n_bits, nx + sum(xprime_bits)))
    if statistical_distance(prefix(joint, nx), x.joint) > TOL:
        raise ValueError("structural precondition violated: X-marginal of joint differs from x")
    if not verify_block_source(x)[0]:
        raise ValueError("structural precondition violated: x is not a block source")
    if not _independence_holds(joint, x.spec.lengths, xprime_bits):
        raise ValueError("structural precondition violated: independence bullet fails")

    log_inv = math.log2(1 / eps)
    floors = []
    for i, (n, k) in enumerate(zip(x.spec.lengths, x.spec.floors)):
        ell = k - sum(xprime_bits[i:]) - log_inv
        floors.append(min(max(ell, 0.0), float(n)))
    spec = BlockSpec(x.spec.lengths, tuple(floors))
    bound = t * math.sqrt(eps)

    cols = joint.probs.reshape(1 << nx, -1)
    px = cols.sum(axis=0)
    bad = 0.0
    for j in np.flatnonzero(px > 0):
        cond = BlockDist(spec, Dist(nx, cols[:, j] / px[j]))
        if almost_block_certificate(cond) > bound + TOL:
            bad += float(px[j])
    return bad, bound, bad <= bound + TOL
