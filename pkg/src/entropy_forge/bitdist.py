"""Exact distributions over bit-string spaces.

Outcome indices encode bit strings with coordinate 1 as the most significant
bit, so the marginal on the first ``p`` coordinates is obtained by shifting
indices right by ``n - p``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

TOL = 1e-9


@dataclass(frozen=True, eq=False)
class Dist:
    """A probability vector over ``{0,1}^n_bits``."""

    n_bits: int
    probs: np.ndarray

    def __post_init__(self):
        if self.n_bits < 0:
            raise ValueError("n_bits must be >= 0, got %d" % self.n_bits)
        p = np.array(self.probs, dtype=np.float64).reshape(-1)
        if p.size != 1 << self.n_bits:
            raise ValueError(
                "probs has %d entries, expected 2^%d" % (p.size, self.n_bits))
        if np.any(p < -TOL):
            raise ValueError("probs has negative entries")
        if abs(p.sum() - 1.0) > TOL:
            raise ValueError("probs sum to %.12g, not 1" % p.sum())
        p = np.clip(p, 0.0, None)
        p.setflags(write=False)
        object.__setattr__(self, "probs", p)

    @property
    def size(self) -> int:
        return 1 << self.n_bits

    def to_json(self) -> dict:
        return {"n_bits": self.n_bits, "probs": [float(v) for v in self.probs]}

    @classmethod
    def from_json(cls, obj: dict) -> "Dist":
        for key in ("n_bits", "probs"):
            if key not in obj:
                raise ValueError("Dist JSON is missing field '%s'" % key)
        return cls(int(obj["n_bits"]), np.asarray(obj["probs"], dtype=np.float64))

    def __repr__(self):
        return "Dist(n_bits=%d, support=%d)" % (self.n_bits, int(np.count_nonzero(self.probs)))


@dataclass(frozen=True, eq=False)
class FunctionTable:
    """An explicit map ``{0,1}^in_bits -> {0,1}^out_bits``."""

    in_bits: int
    out_bits: int
    table: np.ndarray

    def __post_init__(self):
        t = np.array(self.table, dtype=np.int64).reshape(-1)
        if t.size != 1 << self.in_bits:
            raise ValueError(
                "table has %d entries, expected 2^%d" % (t.size, self.in_bits))
        if t.size and (t.min() < 0 or t.max() >= 1 << self.out_bits):
            raise ValueError("table entries must lie in [0, 2^%d)" % self.out_bits)
        t.setflags(write=False)
        object.__setattr__(self, "table", t)

    def __call__(self, idx):
        return self.table[idx]

    def to_json(self) -> dict:
        return {"in_bits": self.in_bits, "out_bits": self.out_bits,
                "table": [int(v) for v in self.table]}

    @classmethod
    def from_json(cls, obj: dict) -> "FunctionTable":
        for key in ("in_bits", "out_bits", "table"):
            if key not in obj:
                raise ValueError("FunctionTable JSON is missing field '%s'" % key)
        return cls(int(obj["in_bits"]), int(obj["out_bits"]), np.asarray(obj["table"]))


def uniform(n_bits: int) -> Dist:
    return Dist(n_bits, np.full(1 << n_bits, 1.0 / (1 << n_bits)))


def point_mass(n_bits: int, index: int) -> Dist:
    p = np.zeros(1 << n_bits)
    p[index] = 1.0
    return Dist(n_bits, p)


def flat(n_bits: int, support: Iterable[int]) -> Dist:
    """Uniform distribution on the given outcome indices."""
    s = np.unique(np.fromiter(support, dtype=np.int64))
    if s.size == 0:
        raise ValueError("flat source needs a nonempty support")
    p = np.zeros(1 << n_bits)
    p[s] = 1.0 / s.size
    return Dist(n_bits, p)


def _check_same(a: Dist, b: Dist):
    if a.n_bits != b.n_bits:
        raise ValueError("dimension mismatch: %d vs %d bits" % (a.n_bits, b.n_bits))


def statistical_distance(a: Dist, b: Dist) -> float:
    _check_same(a, b)
    return 0.5 * float(np.abs(a.probs - b.probs).sum())


def push_forward(f: FunctionTable, x: Dist) -> Dist:
    if f.in_bits != x.n_bits:
        raise ValueError("dimension mismatch: table reads %d bits, Dist has %d"
                         % (f.in_bits, x.n_bits))
    out = np.bincount(f.table, weights=x.probs, minlength=1 << f.out_bits)
    return Dist(f.out_bits, out)


def condition(x: Dist, event: Iterable[int]) -> Dist:
    idx = np.unique(np.fromiter(event, dtype=np.int64))
    mass = float(x.probs[idx].sum()) if idx.size else 0.0
    if mass <= 0.0:
        raise ValueError("cannot condition on a zero-probability event")
    p = np.zeros_like(x.probs)
    p[idx] = x.probs[idx] / mass
    return Dist(x.n_bits, p)


def mix(components: Sequence[tuple[float, Dist]]) -> Dist:
    if not components:
        raise ValueError("mix needs at least one component")
    w = np.array([c[0] for c in components], dtype=np.float64)
    if np.any(w < 0):
        raise ValueError("mixture weights must be nonnegative")
    if abs(w.sum() - 1.0) > TOL:
        raise ValueError("mixture weights sum to %.12g, not 1" % w.sum())
    n = components[0][1].n_bits
    for _, d in components:
        if d.n_bits != n:
            raise ValueError("dimension mismatch in mixture components")
    w = w / w.sum()
    p = sum(wi * d.probs for wi, (_, d) in zip(w, components))
    return Dist(n, p)


def product(a: Dist, b: Dist) -> Dist:
    return Dist(a.n_bits + b.n_bits, np.outer(a.probs, b.probs).reshape(-1))


def prefix(x: Dist, p: int) -> Dist:
    if not 0 <= p <= x.n_bits:
        raise ValueError("prefix length %d out of range [0, %d]" % (p, x.n_bits))
    return Dist(p, x.probs.reshape(1 << p, -1).sum(axis=1))


def bits_of(index: int, n_bits: int) -> tuple[int, ...]:
    """Coordinates of an outcome index, coordinate 1 first."""
    return tuple((index >> (n_bits - 1 - i)) & 1 for i in range(n_bits))
