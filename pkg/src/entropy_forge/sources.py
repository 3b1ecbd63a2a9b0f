"""Random generators for sources and instances used by experiments and tests."""

from __future__ import annotations

import numpy as np

from .bitdist import Dist
from .blocks import BlockDist, BlockSpec, _assemble
from .entropy import clip_witness
from .nonmal import NmCondenser, NmInstance


def random_dist(n: int, rng: np.random.Generator, sparsity: float = 0.0) -> Dist:
    """Dirichlet draw with an optional fraction of zeroed atoms."""
    p = rng.dirichlet(np.full(1 << n, rng.choice([0.2, 1.0, 5.0])))
    if sparsity > 0:
        p[rng.random(p.size) < sparsity] = 0.0
        if p.sum() == 0:
            p[rng.integers(p.size)] = 1.0
    return Dist(n, p / p.sum())


def random_source(n: int, k: float, rng: np.random.Generator, flat: bool = False) -> Dist:
    """Random distribution with min-entropy at least k."""
    if flat:
        size = 1 << int(np.ceil(k - 1e-12))
        p = np.zeros(1 << n)
        p[rng.choice(1 << n, size, replace=False)] = 1.0 / size
        return Dist(n, p)
    return Dist(n, clip_witness(rng.dirichlet(np.ones(1 << n)), k))


def _kernel_rows(count: int, n: int, k: float, rng: np.random.Generator) -> np.ndarray:
    rows = rng.dirichlet(np.ones(1 << n), size=count)
    return clip_witness(rows, k)


def random_block_source(spec: BlockSpec, rng: np.random.Generator) -> BlockDist:
    """Block source whose every conditional kernel meets its floor."""
    kernels = []
    for i, (n, k) in enumerate(zip(spec.lengths, spec.floors)):
        kernels.append(_kernel_rows(1 << spec.offset(i), n, k, rng))
    return BlockDist(spec, _assemble(spec, kernels))


def side_information(x: BlockDist, xprime_bits, rng: np.random.Generator) -> Dist:
    """Joint of X followed by X' where X'_j is a random kernel of X_1..X_j.

    Each X'_j sees only blocks up to j plus its own fresh randomness, which is
    the independence pattern needed to fix X' and keep X a block source.
    """
    nx = x.spec.total_bits
    ix = np.arange(1 << nx)
    joint = x.joint.probs.copy()
    shape = [1 << nx]
    for j, bits in enumerate(xprime_bits):
        upto = x.spec.offset(j + 1)
        kern = rng.dirichlet(np.full(1 << bits, 0.5), size=1 << upto)
        k_full = kern[ix >> (nx - upto)]                    # (2^nx, 2^bits)
        joint = joint[..., None] * k_full.reshape([1 << nx] + [1] * (len(shape) - 1) + [1 << bits])
        shape.append(1 << bits)
    return Dist(nx + int(sum(xprime_bits)), joint.reshape(-1))


def adversarial_nm_instance(c: NmCondenser, rng: np.random.Generator, good: int = 1,
                            cancel: float = 1.0) -> NmInstance:
    """(X, Y, Z1, Z2) where Z_good meets its floor given (X, Y) and the other
    channel is chosen, with probability `cancel`, to cancel the good branch.

    Cancelling means picking z so that the bad branch output equals the good
    one, which drives the XOR to 0 whenever such a z exists.
    """
    n, w = c.n, c.w
    xs = _kernel_rows(1, n, max(c.k, 0.0), rng)[0]
    ys = _kernel_rows(1 << n, n, max(c.k, 0.0), rng)
    zg = _kernel_rows(1 << (2 * n), w, max(0.0, w - c.g), rng)
    bad = 3 - good
    tg, tb = c.branch_table(good), c.branch_table(bad)
    xy = np.arange(1 << (2 * n))[:, None]
    zz = np.arange(1 << w)[None, :]
    out_g = tg[(xy << w) | zz]                         # (xy, z_good)
    out_b = tb[(xy << w) | zz]                         # (xy, z_bad)
    joint = np.zeros((1 << (2 * n), 1 << w, 1 << w))
    for a in range(1 << (2 * n)):
        for z in range(1 << w):
            hit = np.flatnonzero(out_b[a] == out_g[a, z])
            if hit.size and rng.random() < cancel:
                zb = int(hit[rng.integers(hit.size)])
            else:
                zb = int(rng.integers(1 << w))
            joint[a, z, zb] = zg[a, z]
    joint *= (xs[:, None] * ys).reshape(-1)[:, None, None]
    if good == 2:
        joint = joint.transpose(0, 2, 1)
    spec = BlockSpec((n, n, w, w), (0.0,) * 4)
    return NmInstance(BlockDist(spec, Dist(2 * n + 2 * w, joint.reshape(-1))), good)
