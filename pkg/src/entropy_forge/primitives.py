"""Seeded extractors and condensers at micro parameters.

Worst-case verification runs over flat sources only. For a fixed output set
S the worst flat source of size 2^k is the top 2^k rows of Pr_seed[out in S],
and every (n, k)-source with integral k is a mixture of flat ones, so the
maximum over all output sets is exact once every set is enumerated.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .bitdist import TOL, Dist, FunctionTable
from .rng import stream

_SET_CHUNK = 4096


@dataclass(frozen=True)
class CondenserParams:
    """Parameter vocabulary of a (seeded) condenser.

    ``kprime`` is the output entropy, ``g = m - kprime`` the output gap and
    ``ell = k + d - kprime`` the entropy loss (the seed counts as input).
    """

    n: int
    m: int
    k: float
    kprime: float
    eps: float
    d: int = 0

    def __post_init__(self):
        if not 0 <= self.k <= self.n + TOL:
            raise ValueError("k=%g must lie in [0, n=%d]" % (self.k, self.n))
        if not 0 <= self.eps <= 1:
            raise ValueError("eps=%g must lie in [0, 1]" % self.eps)
        if self.kprime > self.m + TOL:
            raise ValueError("kprime=%g exceeds m=%d" % (self.kprime, self.m))

    @property
    def g(self) -> float:
        return self.m - self.kprime

    @property
    def ell(self) -> float:
        return self.k + self.d - self.kprime

    @property
    def N(self) -> int:
        return 1 << self.n

    @property
    def M(self) -> int:
        return 1 << self.m

    @property
    def K(self) -> float:
        return 2.0 ** self.k

    @property
    def L(self) -> float:
        return 2.0 ** self.ell

    @property
    def G(self) -> float:
        return 2.0 ** self.g

    def to_json(self) -> dict:
        return {"n": self.n, "d": self.d, "m": self.m, "k": self.k,
                "kprime": self.kprime, "eps": self.eps}

    @classmethod
    def from_json(cls, obj: dict) -> "CondenserParams":
        for key in ("n", "m", "k", "kprime", "eps"):
            if key not in obj:
                raise ValueError("CondenserParams JSON is missing field '%s'" % key)
        return cls(int(obj["n"]), int(obj["m"]), float(obj["k"]), float(obj["kprime"]),
                   float(obj["eps"]), int(obj.get("d", 0)))


@dataclass(frozen=True)
class SeededPrimitive:
    table: FunctionTable
    params: CondenserParams
    verified: dict | None = None
    rng_seed: int | None = None

    def __post_init__(self):
        p = self.params
        if self.table.in_bits != p.n + p.d or self.table.out_bits != p.m:
            raise ValueError("table shape (%d -> %d) does not match params (%d+%d -> %d)"
                             % (self.table.in_bits, self.table.out_bits, p.n, p.d, p.m))

    def to_json(self) -> dict:
        return {"params": self.params.to_json(), "table": self.table.to_json(),
                "verified": self.verified, "rng_seed": self.rng_seed}

    @classmethod
    def from_json(cls, obj: dict) -> "SeededPrimitive":
        for key in ("params", "table"):
            if key not in obj:
                raise ValueError("primitive JSON is missing field '%s'" % key)
        return cls(FunctionTable.from_json(obj["table"]),
                   CondenserParams.from_json(obj["params"]),
                   obj.get("verified"), obj.get("rng_seed"))


def ip_extractor(n_half: int) -> SeededPrimitive:
    """Inner product over GF(2) of an n_half-bit source and seed."""
    n = n_half
    x = np.arange(1 << n)[:, None]
    s = np.arange(1 << n)[None, :]
    v = x & s
    parity = np.zeros_like(v)
    for b in range(n):
        parity ^= (v >> b) & 1
    table = FunctionTable(2 * n, 1, parity.reshape(-1))
    return SeededPrimitive(table, CondenserParams(n=n, m=1, k=n, kprime=1, eps=1.0, d=n))


def seed_counts(p: SeededPrimitive) -> np.ndarray:
    """Matrix of Pr_seed[out = v | source = x]."""
    n, d, m = p.params.n, p.params.d, p.params.m
    t = p.table.table.reshape(1 << n, 1 << d)
    rows = np.arange(1 << n)[:, None]
    c = np.zeros((1 << n, 1 << m))
    np.add.at(c, (np.broadcast_to(rows, t.shape), t), 1.0)
    return c / (1 << d)


def _all_sets(m: int) -> np.ndarray:
    size = 1 << m
    codes = np.arange(1 << size, dtype=np.int64)
    return ((codes[:, None] >> np.arange(size)[None, :]) & 1).astype(np.float64)


def _top_mean(values: np.ndarray, count: int) -> np.ndarray:
    rows = values.shape[0]
    if count >= rows:
        return values.mean(axis=0)
    return np.partition(values, rows - count, axis=0)[rows - count:].mean(axis=0)


def _check_k(p: SeededPrimitive, k: float) -> int:
    if abs(k - round(k)) > 1e-12:
        raise ValueError("k must be integral for flat-source verification, got %r" % (k,))
    k = int(round(k))
    if not 0 <= k <= p.params.n:
        raise ValueError("k=%d outside [0, n=%d]" % (k, p.params.n))
    return k


def _worst_excess(p: SeededPrimitive, k: int, level: float, exhaustive: bool) -> float:
    """max over S of (top-2^k mean of Pr[out in S]) - |S| * level."""
    c = seed_counts(p)
    count = 1 << k
    m = p.params.m
    if exhaustive:
        if (1 << m) > 16:
            raise ValueError("exhaustive set enumeration needs 2^m <= 16, got m=%d" % m)
        sets = _all_sets(m)
        best = -np.inf
        for lo in range(0, sets.shape[0], _SET_CHUNK):
            chunk = sets[lo:lo + _SET_CHUNK]
            vals = _top_mean(c @ chunk.T, count) - chunk.sum(axis=1) * level
            best = max(best, float(vals.max()))
        return best
    # certified lower bound: for each output symbol, the flat source most
    # biased toward it, scored with its own heavy set
    best = 0.0
    for v in range(1 << m):
        top = np.argsort(-c[:, v], kind="stable")[:count]
        out = c[top].mean(axis=0)
        best = max(best, float(np.clip(out - level, 0.0, None).sum()))
    return best


def verify_seeded_extractor(p: SeededPrimitive, k: float, exhaustive_sets: bool = True) -> float:
    k = _check_k(p, k)
    return max(0.0, _worst_excess(p, k, 1.0 / p.params.M, exhaustive_sets))


def verify_seeded_condenser(p: SeededPrimitive, k: float, kprime: float | None = None,
                            exhaustive_sets: bool = True) -> float:
    """Exact minimal eps such that every (n, k)-source gives H^eps(out) >= kprime."""
    k = _check_k(p, k)
    kprime = p.params.kprime if kprime is None else kprime
    if kprime > p.params.m + TOL:
        raise ValueError("kprime=%g exceeds output length %d" % (kprime, p.params.m))
    return max(0.0, _worst_excess(p, k, 2.0 ** (-kprime), exhaustive_sets))


def verification_record(p: SeededPrimitive, k: float | None = None,
                        kprime: float | None = None) -> dict:
    k = p.params.k if k is None else k
    kprime = p.params.kprime if kprime is None else kprime
    exhaustive = (1 << p.params.m) <= 16
    eps = verify_seeded_condenser(p, k, kprime, exhaustive)
    return {"k": float(k), "kprime": float(kprime), "eps": eps, "exact": exhaustive}


def certify(p: SeededPrimitive) -> SeededPrimitive:
    """Attach an exact record and tighten the claimed error to it."""
    rec = verification_record(p)
    return replace(p, params=replace(p.params, eps=min(1.0, rec["eps"])), verified=rec)


def search_primitive(params: CondenserParams, trials: int, rng_seed: int) -> SeededPrimitive | None:
    if params.M > 16:
        raise ValueError("search needs exact verification: 2^m <= 16, got m=%d" % params.m)
    size = 1 << (params.n + params.d)
    for trial in range(trials):
        rng = stream(rng_seed, trial)
        table = FunctionTable(params.n + params.d, params.m, rng.integers(0, params.M, size))
        cand = SeededPrimitive(table, params, rng_seed=rng_seed)
        rec = verification_record(cand)
        if rec["eps"] <= params.eps + TOL:
            rec["trial"] = trial
            return replace(cand, verified=rec)
    return None


def _passes_family(tables: np.ndarray, family: np.ndarray, m: int, kprime: float,
                   eps: float) -> np.ndarray:
    """Heavy-set test of H^eps(f(X)) >= kprime for each table row and each X."""
    onehot = tables[:, :, None] == np.arange(1 << m)[None, None, :]
    out = np.einsum("tnm,fn->tfm", onehot.astype(np.float64), family)
    excess = np.clip(out - 2.0 ** (-kprime), 0.0, None).sum(axis=2)
    return np.all(excess <= eps + TOL, axis=1)


def search_family_condenser(family: Sequence[Dist], params: CondenserParams,
                            mode: str = "exhaustive", budget: int = 1 << 24,
                            rng_seed: int = 0) -> FunctionTable | None:
    """Seedless table meeting H^eps(f(X)) >= k - ell for every X in the family."""
    if not family:
        raise ValueError("family is empty")
    n, m = params.n, params.m
    size = 1 << n
    fam = np.stack([x.probs for x in family])
    if fam.shape[1] != size:
        raise ValueError("family members must live on %d bits" % n)
    kprime = params.kprime
    chunk = max(1, (1 << 22) // ((size + len(family)) << m))
    if mode == "exhaustive":
        total = (1 << m) ** size
        if total > min(budget, 1 << 24):
            raise ValueError("exhaustive search over %d tables exceeds the budget" % total)
        weights = (1 << m) ** np.arange(size - 1, -1, -1, dtype=np.int64)
        for lo in range(0, total, chunk):
            idx = np.arange(lo, min(total, lo + chunk), dtype=np.int64)
            tables = (idx[:, None] // weights[None, :]) % (1 << m)
            ok = _passes_family(tables, fam, m, kprime, params.eps)
            if ok.any():
                return FunctionTable(n, m, tables[int(np.argmax(ok))])
        return None
    if mode != "random":
        raise ValueError("mode must be 'exhaustive' or 'random', got %r" % mode)
    done = 0
    while done < budget:
        batch = min(chunk, budget - done)
        rng = stream(rng_seed, done)
        tables = rng.integers(0, 1 << m, size=(batch, size))
        ok = _passes_family(tables, fam, m, kprime, params.eps)
        if ok.any():
            return FunctionTable(n, m, tables[int(np.argmax(ok))])
        done += batch
    return None


def all_flat_sources(n: int, k: int) -> list[Dist]:
    size = 1 << n
    out = []
    for support in itertools.combinations(range(size), 1 << k):
        p = np.zeros(size)
        p[list(support)] = 1.0 / (1 << k)
        out.append(Dist(n, p))
    return out
