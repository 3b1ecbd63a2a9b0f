"""Min-entropy and its exact smoothed version, with the entropy gap.

Smooth min-entropy uses the heavy-set criterion: for k <= n,

    H^eps(X) >= k   iff   sum_{p_i > 2^-k} (p_i - 2^-k) <= eps.

The left side (the clip-excess) is continuous and nondecreasing in k and
piecewise of the form ``S_j - j * 2^-k`` between consecutive sorted
probabilities, so the supremum has a closed form once the binding piece is
located.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING, Iterable, Sequence

import numpy as np

from .bitdist import TOL, Dist

if TYPE_CHECKING:
    from .blocks import BlockDist

# slack for detecting ties among sorted probabilities
_TIE = 1e-13


@dataclass(frozen=True)
class SmoothEntropyResult:
    value: float
    witness: Dist
    heavy_set_size: int
    eps: float
    capped: bool  # the unconstrained supremum exceeds n_bits

    def to_json(self) -> dict:
        return {"value": self.value, "eps": self.eps,
                "heavy_set_size": self.heavy_set_size, "capped": self.capped}


def min_entropy(x: Dist) -> float:
    return float(max(0.0, -np.log2(x.probs.max())))


def entropy_gap(x: Dist) -> float:
    return x.n_bits - min_entropy(x)


def clip_excess(probs: np.ndarray, k: float) -> float:
    """Mass above the level ``2^-k``; equals the distance to the nearest
    distribution of min-entropy ``k`` whenever ``k <= n``."""
    t = 2.0 ** (-k)
    return float(np.clip(np.asarray(probs) - t, 0.0, None).sum())


def _check_eps(eps: float):
    if not 0.0 <= eps <= 1.0:
        raise ValueError("eps must lie in [0, 1], got %r" % (eps,))


def smooth_levels(rows: np.ndarray, eps: float) -> tuple[np.ndarray, np.ndarray]:
    """Row-wise smooth min-entropy of a stack of probability vectors.

    Returns ``(values, capped)``; each row must have length ``2^n``.
    """
    rows = np.atleast_2d(np.asarray(rows, dtype=np.float64))
    size = rows.shape[1]
    n = int(size).bit_length() - 1
    q = -np.sort(-rows, axis=1)
    s = np.cumsum(q, axis=1)
    j = np.arange(size)
    # excess at the level of the j-th largest value (0-based j)
    s_before = np.concatenate([np.zeros((q.shape[0], 1)), s[:, :-1]], axis=1)
    e = s_before - j * q
    big_j = np.sum(e <= eps + _TIE, axis=1)
    t_star = (s[np.arange(q.shape[0]), big_j - 1] - eps) / big_j
    floor = 2.0 ** (-n)
    capped = t_star < floor
    with np.errstate(divide="ignore"):
        vals = np.where(capped, float(n), -np.log2(np.maximum(t_star, floor)))
    return np.clip(vals, 0.0, float(n)), capped


def clip_witness(probs: np.ndarray, k: float) -> np.ndarray:
    """Clip every mass above ``2^-k`` and spread the excess over the light
    outcomes in proportion to their remaining room. Needs ``k <= n``."""
    p = np.asarray(probs, dtype=np.float64)
    t = 2.0 ** (-k)
    w = np.minimum(p, t)
    excess = p.sum(axis=-1, keepdims=True) - w.sum(axis=-1, keepdims=True)
    room = t - w
    total = room.sum(axis=-1, keepdims=True)
    share = np.divide(room, total, out=np.zeros_like(room), where=total > 0)
    return w + excess * share


def smooth_min_entropy(x: Dist, eps: float) -> SmoothEntropyResult:
    _check_eps(eps)
    vals, capped = smooth_levels(x.probs[None, :], eps)
    value = float(vals[0])
    witness = clip_witness(x.probs, value)
    witness = witness / witness.sum()
    heavy = int(np.count_nonzero(x.probs > 2.0 ** (-value)))
    return SmoothEntropyResult(value, Dist(x.n_bits, witness), heavy, eps, bool(capped[0]))


@dataclass(frozen=True)
class CharacterizationVerdict:
    sets_ok: bool
    heavy_ok: bool
    heavy_slack: float
    value_ok: bool  # smooth_min_entropy(x, eps) >= k
    agrees: bool


def check_characterization(x: Dist, k: float, eps: float,
                           sets: Sequence[Iterable[int]] = ()) -> CharacterizationVerdict:
    """Test ``Pr[X in S] <= |S| 2^-k + eps`` on the supplied sets and on the
    heavy set at level ``2^-k``; the heavy set is the worst one."""
    if not 0 <= k <= x.n_bits:
        raise ValueError("k must lie in [0, n_bits] for the set characterization")
    _check_eps(eps)
    level = 2.0 ** (-k)
    sets_ok = True
    for s in sets:
        idx = np.unique(np.fromiter(s, dtype=np.int64))
        if x.probs[idx].sum() > idx.size * level + eps + TOL:
            sets_ok = False
    heavy = x.probs > level
    slack = eps - (x.probs[heavy].sum() - heavy.sum() * level)
    heavy_ok = slack >= -TOL
    value_ok = smooth_min_entropy(x, eps).value >= k - TOL
    return CharacterizationVerdict(sets_ok, bool(heavy_ok), float(slack), value_ok,
                                   bool(heavy_ok) == value_ok and (sets_ok or not value_ok))


def conditional_rows(joint: Dist, first_bits: int) -> tuple[np.ndarray, np.ndarray]:
    """Marginal of the first ``first_bits`` coordinates and the matrix of
    conditionals of the rest (rows with zero mass are left as zeros)."""
    m = joint.probs.reshape(1 << first_bits, -1)
    marg = m.sum(axis=1)
    rows = np.divide(m, marg[:, None], out=np.zeros_like(m), where=marg[:, None] > 0)
    return marg, rows


def closeness_smoothing_check(joint_ab: "BlockDist", joint_ab2: "BlockDist", k: float,
                              gamma: float, eps: float) -> tuple[float, float, bool]:
    """Exact check of: if (A,B) is eps-close to (A',B') then
    Pr_a[H^gamma(B|A=a) < k] <= Pr_a[H^{gamma/2}(B'|A'=a) < k] + 4 eps/gamma + eps."""
    la, lb = tuple(joint_ab.spec.lengths), tuple(joint_ab2.spec.lengths)
    if len(la) != 2 or la != lb:
        raise ValueError("shape mismatch: need equal two-block joints, got %s and %s" % (la, lb))
    _check_eps(gamma)
    from .bitdist import statistical_distance
    if statistical_distance(joint_ab.joint, joint_ab2.joint) > eps + TOL:
        raise ValueError("joints are farther apart than eps")
    ma, ra = conditional_rows(joint_ab.joint, la[0])
    mb, rb = conditional_rows(joint_ab2.joint, la[0])
    live_a, live_b = ma > 0, mb > 0
    ha, _ = smooth_levels(ra[live_a], gamma)
    hb, _ = smooth_levels(rb[live_b], gamma / 2)
    lhs = float(ma[live_a][ha < k - TOL].sum())
    if eps == 0:
        slack = 0.0
    else:
        slack = np.inf if gamma == 0 else 4 * eps / gamma + eps
    rhs = float(mb[live_b][hb < k - TOL].sum()) + slack
    return lhs, rhs, bool(lhs <= rhs + TOL)
