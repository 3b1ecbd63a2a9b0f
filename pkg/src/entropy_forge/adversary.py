"""Adversarial sources that defeat any would-be condenser.

Fixing the first g' = min(m, g) output bits to a constant costs the source only
g' bits of entropy, and the output then lives on 2^{m-g'} strings, so its
smooth min-entropy is at most m - g' + log(1/(1-eps)).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .bitdist import Dist, FunctionTable, push_forward
from .blocks import BlockDist, BlockSpec
from .entropy import smooth_min_entropy


def c_eps(eps: float) -> float:
    return math.log2(1.0 / (1.0 - eps))


@dataclass(frozen=True)
class AdversaryResult:
    source: Dist | BlockDist
    measured: float
    bound: float
    c_eps: float

    @property
    def slack(self) -> float:
        return self.bound - self.measured

    def to_json(self) -> dict:
        return {"measured": self.measured, "bound": self.bound, "c_eps": self.c_eps,
                "slack": self.slack, "source": self.source.to_json()}


def _check(g: int, n: int, eps: float):
    if not 0 <= g <= n:
        raise ValueError("g=%d must lie in [0, n=%d]" % (g, n))
    if not 0 <= eps < 1:
        raise ValueError("eps must lie in [0, 1), got %r" % eps)


def _flat_on_prefix(values: np.ndarray, m: int, gp: int, keep: int) -> tuple[np.ndarray, int]:
    """Indicator of the first `keep` inputs whose output starts with the modal prefix."""
    pre = values >> (m - gp)
    sigma = int(np.argmax(np.bincount(pre, minlength=1 << gp)))
    members = np.flatnonzero(pre == sigma)
    assert members.size >= keep, "modal prefix has too small a preimage"
    mask = np.zeros(values.size)
    mask[members[:keep]] = 1.0
    return mask, sigma


def break_general(f: FunctionTable, g: int, eps: float) -> AdversaryResult:
    n, m = f.in_bits, f.out_bits
    _check(g, n, eps)
    gp = min(m, g)
    mask, _ = _flat_on_prefix(f.table, m, gp, 1 << (n - gp))
    x = Dist(n, mask / mask.sum())
    measured = smooth_min_entropy(push_forward(f, x), eps).value
    ce = c_eps(eps)
    return AdversaryResult(x, measured, min(n, m) - gp + ce, ce)


def _break_blocks(values: np.ndarray, t: int, n: int, m: int, gp: int) -> tuple[np.ndarray, int]:
    if t == 1:
        return _flat_on_prefix(values, m, gp, 1 << (n - gp))
    sub = values.reshape(1 << n, -1)
    kids = [_break_blocks(row, t - 1, n, m, gp) for row in sub]
    sigmas = np.array([s for _, s in kids])
    sigma = int(np.argmax(np.bincount(sigmas, minlength=1 << gp)))
    group = np.flatnonzero(sigmas == sigma)[:1 << (n - gp)]
    out = np.zeros_like(sub, dtype=np.float64)
    for a in group:
        child = kids[a][0]
        out[a] = child / child.sum() / group.size
    return out.reshape(-1), sigma


def break_cg(f: FunctionTable, t: int, n: int, g: int, eps: float) -> AdversaryResult:
    """Adversarial (t, n, n-g) block source for a function of t n-bit blocks."""
    if t < 1:
        raise ValueError("t must be >= 1")
    if f.in_bits != t * n:
        raise ValueError("function reads %d bits, expected t*n=%d" % (f.in_bits, t * n))
    if t * n > 16:
        raise ValueError("t*n=%d exceeds the cap of 16" % (t * n))
    _check(g, n, eps)
    m = f.out_bits
    gp = min(m, g)
    probs, _ = _break_blocks(np.asarray(f.table), t, n, m, gp)
    spec = BlockSpec((n,) * t, (float(n - g),) * t)
    src = BlockDist(spec, Dist(t * n, probs / probs.sum()))
    measured = smooth_min_entropy(push_forward(f, src.joint), eps).value
    ce = c_eps(eps)
    return AdversaryResult(src, measured, min(t * n, m) - gp + ce, ce)
