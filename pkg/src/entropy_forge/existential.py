"""Explicit failure bounds for random condensers, and Monte Carlo checks.

A uniformly random f: {0,1}^n -> {0,1}^m with m = k - ell + g fails on an
(n, k)-source X when H^eps(f(X)) < k - ell. Two constant-free upper bounds on
the failure probability are evaluated here:

    part I : 2^{-(eps K / 2)(g - (1/L)(3G/g) log(2Gg/eps))}
    part II: 4 * 2^{-(eps K / 6)(g - (1/floor L) log(1/eps) - 16)}
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.stats import binomtest

from .bitdist import TOL, Dist
from .blocks import BlockSpec
from .entropy import min_entropy, smooth_levels
from .primitives import CondenserParams
from .rng import stream

LOG2E = math.log2(math.e)
LN2 = math.log(2)


@dataclass(frozen=True)
class BoundInputs:
    eps: float
    k: float
    ell: float
    g: float
    C: float | None = None
    c: float | None = None

    def __post_init__(self):
        if not 0 < self.eps <= 1:
            raise ValueError("eps must lie in (0, 1], got %r" % self.eps)
        if self.ell < 0:
            raise ValueError("ell must be >= 0")

    K = property(lambda self: 2.0 ** self.k)
    L = property(lambda self: 2.0 ** self.ell)
    G = property(lambda self: 2.0 ** self.g)

    @property
    def floor_L(self) -> int:
        return int(math.floor(self.L))


def _need_gap(b: BoundInputs):
    if b.g <= 0:
        raise ValueError("g must be > 0, got %r" % b.g)


def psi(b: BoundInputs) -> tuple[float, int]:
    """Both branches of psi; returns (value, winning branch 1 or 2)."""
    _need_gap(b)
    if b.C is None:
        raise ValueError("psi needs the constant C")
    inv_l = 1.0 / b.floor_L
    first = b.g - inv_l * math.log2(1 / b.eps) - b.C
    a = b.C * b.G
    # a * log(a g / eps) -> 0 as C -> 0
    term = 0.0 if a == 0 else math.log2(a * b.g / b.eps) * a / b.g
    second = b.g - inv_l * term
    return (first, 1) if first >= second else (second, 2)


def part1_exponent(b: BoundInputs) -> float:
    _need_gap(b)
    inner = b.g - (1.0 / b.L) * (3 * b.G / b.g) * math.log2(2 * b.G * b.g / b.eps)
    return b.eps * b.K / 2 * inner


def part1_bound(b: BoundInputs) -> float:
    e = part1_exponent(b)
    return 1.0 if e <= 0 else min(1.0, 2.0 ** (-e))


def part2_bound(b: BoundInputs) -> float:
    _need_gap(b)
    e = b.eps * b.K / 6 * (b.g - math.log2(1 / b.eps) / b.floor_L - 16)
    return 1.0 if e <= 2 else 2.0 ** (2 - e)


def chernoff_value(mu: float, delta: float) -> float:
    """(e^delta / (1+delta)^(1+delta))^mu, evaluated in the log domain."""
    if delta <= 0 or mu < 0:
        raise ValueError("need delta > 0 and mu >= 0")
    return math.exp(mu * (delta - (1 + delta) * math.log1p(delta)))


# -- phi sandwiches ---------------------------------------------------------

def _x_minus_1_plus_exp_neg(x: np.ndarray) -> np.ndarray:
    """x - 1 + e^-x without cancellation near 0."""
    x = np.asarray(x, dtype=np.float64)
    shape = x.shape
    x = x.reshape(-1)
    out = x + np.expm1(-x)
    small = x < 1e-2
    if np.any(small):
        xs = x[small]
        series = np.zeros_like(xs)
        term = np.ones_like(xs)
        for j in range(1, 12):
            term = term * (-xs) / j
            if j >= 2:
                series += term
        out[small] = series
    return out.reshape(shape)


def phi_scalar(g) -> np.ndarray:
    """phi = (ln G - 1 + 1/G) log e."""
    return _x_minus_1_plus_exp_neg(np.asarray(g, dtype=np.float64) * LN2) * LOG2E


def phi_alpha(alpha, g) -> np.ndarray:
    """phi(alpha, g) = (1 + alpha)(ln G + ln(1 + 1/alpha) - 1) + alpha / G."""
    alpha = np.asarray(alpha, dtype=np.float64)
    g = np.asarray(g, dtype=np.float64)
    return (1 + alpha) * (g * LN2 + np.log1p(1 / alpha) - 1) + alpha * np.exp2(-g)


def default_phi_grid(points: int = 100) -> tuple[np.ndarray, np.ndarray]:
    return np.linspace(20.0 / points, 20.0, points), np.logspace(-3, 3, points)


def phi_margins(g_values=None, alpha_values=None) -> tuple[np.ndarray, dict[str, np.ndarray]]:
    """Per-point margins of the three inequality families on the product grid.

    Returned arrays have shape (len(g_values), len(alpha_values)).
    """
    if g_values is None or alpha_values is None:
        g_values, alpha_values = default_phi_grid()
    gg, aa = np.meshgrid(np.asarray(g_values, float), np.asarray(alpha_values, float),
                         indexing="ij")
    m1 = phi_alpha(aa, gg) - gg * LN2
    ph = phi_scalar(gg)
    m2_lo = ph - (gg - LOG2E)
    m2_hi = gg - ph
    ratio = gg / ph
    lo, hi = 2 / (gg * LN2), 2 * np.exp2(gg) / (gg * LN2)
    m3_lo = (ratio - lo) / np.maximum(1.0, lo)
    m3_hi = (hi - ratio) / np.maximum(1.0, hi)
    return gg, {"phi_alpha_ge_g_ln2": m1, "phi_sandwich": np.minimum(m2_lo, m2_hi),
                "ratio_sandwich": np.minimum(m3_lo, m3_hi)}


def phi_checks(g_values=None, alpha_values=None) -> dict:
    """Violation counts and worst margins, tolerance 1e-9."""
    gg, families = phi_margins(g_values, alpha_values)
    out = {"points": int(gg.size)}
    for name, margin in families.items():
        out[name] = {"violations": int(np.sum(margin < -1e-9)),
                     "worst_margin": float(margin.min())}
    out["violations"] = sum(v["violations"] for v in out.values() if isinstance(v, dict))
    return out


# -- Monte Carlo ------------------------------------------------------------

@dataclass(frozen=True)
class McResult:
    failures: int
    trials: int
    rate: float
    part1: float
    part2: float
    binom_pvalue: float

    @property
    def bound(self) -> float:
        return min(self.part1, self.part2)

    def to_json(self) -> dict:
        return {"failures": self.failures, "trials": self.trials, "rate": self.rate,
                "part1": self.part1, "part2": self.part2, "bound": self.bound,
                "pvalue": self.binom_pvalue}


def bound_inputs(params: CondenserParams) -> BoundInputs:
    return BoundInputs(eps=params.eps, k=params.k, ell=params.k - params.kprime, g=params.g)


def trial_outputs(x: Dist, m: int, seed: int, lo: int, hi: int) -> np.ndarray:
    """Output distributions f_i(X) for trials lo..hi-1, one table per stream."""
    out = np.empty((hi - lo, 1 << m))
    for j, i in enumerate(range(lo, hi)):
        table = stream(seed, i).integers(0, 1 << m, x.size)
        out[j] = np.bincount(table, weights=x.probs, minlength=1 << m)
    return out


def mc_failure_rate(x: Dist, params: CondenserParams, trials: int, rng_seed: int,
                    jobs: int = 1, batch: int = 500) -> McResult:
    if params.d != 0:
        raise ValueError("the single-source theorem concerns seedless functions")
    if x.n_bits != params.n:
        raise ValueError("source has %d bits, params say n=%d" % (x.n_bits, params.n))
    if min_entropy(x) < params.k - TOL:
        raise ValueError("source fails the entropy floor: H=%.6g < k=%g" % (min_entropy(x), params.k))
    if params.m > 16:
        raise ValueError("m=%d too large for exact evaluation" % params.m)

    def count(lo: int) -> int:
        hi = min(trials, lo + batch)
        vals, _ = smooth_levels(trial_outputs(x, params.m, rng_seed, lo, hi), params.eps)
        return int(np.sum(vals < params.kprime - TOL))

    starts = range(0, trials, batch)
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            failures = sum(pool.map(count, starts))
    else:
        failures = sum(count(lo) for lo in starts)
    b = bound_inputs(params)
    if b.g > 0:
        p1, p2 = part1_bound(b), part2_bound(b)
    else:
        p1 = p2 = 1.0
    bound = min(p1, p2)
    pval = 1.0 if bound >= 1 else float(binomtest(failures, trials, bound,
                                                   alternative="greater").pvalue)
    return McResult(failures, trials, failures / trials if trials else 0.0, p1, p2, pval)


# -- many-block bound -------------------------------------------------------

@dataclass(frozen=True)
class MultiblockBound:
    gap: float
    requirement_ok: bool
    slacks: tuple[float, ...]  # k_{i+1} minus its requirement, i = 1..t-1


def multiblock_gap_bound(blocks: BlockSpec, ell: float, tau: float, eps: float,
                         C: float) -> MultiblockBound:
    if tau < 1:
        raise ValueError("tau must be >= 1")
    if not 0 < eps <= 1:
        raise ValueError("eps must lie in (0, 1]")
    if ell < 0:
        raise ValueError("ell must be >= 0")
    t = blocks.t
    gaps = [n - k for n, k in zip(blocks.lengths, blocks.floors)]
    g_t = gaps[-1]
    floor_l = math.floor(2.0 ** ell)
    a = 6 * tau / floor_l
    gap = g_t + math.exp(a) * a * (g_t + math.log2(1 / eps) + C * t) + C * t
    slacks = []
    for i in range(1, t):
        g_i = gaps[i - 1]
        lead = -math.inf if g_i <= 0 else math.log2(g_i / eps)
        need = lead + ell + math.floor((t - (i + 1)) / tau) + C
        slacks.append(blocks.floors[i] - need)
    return MultiblockBound(gap, all(s >= -TOL for s in slacks), tuple(slacks))
