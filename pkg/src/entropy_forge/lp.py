"""Small dense two-phase simplex with Bland's anti-cycling rule.

Solves ``min c.x  s.t.  A_ub x <= b_ub,  A_eq x = b_eq,  x >= 0``. Intended
for a few hundred variables; determinism matters more than speed here.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_EPS = 1e-11


class InfeasibleError(ValueError):
    pass


class UnboundedError(ValueError):
    pass


@dataclass(frozen=True)
class LPResult:
    x: np.ndarray
    value: float
    iterations: int


def _pivot(t: np.ndarray, r: int, c: int):
    t[r] /= t[r, c]
    col = t[:, c].copy()
    col[r] = 0.0
    t -= np.outer(col, t[r])


def _run(t: np.ndarray, basis: list[int], allowed: int, max_iter: int) -> int:
    """Minimise the objective in the last row; columns >= allowed never enter."""
    rows = t.shape[0] - 1
    it = 0
    while True:
        reduced = t[-1, :allowed]
        cand = np.flatnonzero(reduced < -_EPS)
        if cand.size == 0:
            return it
        c = int(cand[0])
        col = t[:rows, c]
        pos = col > _EPS
        if not pos.any():
            raise UnboundedError("objective is unbounded below")
        ratios = np.full(rows, np.inf)
        ratios[pos] = t[:rows, -1][pos] / col[pos]
        best = ratios.min()
        ties = np.flatnonzero(ratios <= best + _EPS * max(1.0, abs(best)))
        r = int(min(ties, key=lambda i: basis[i]))
        _pivot(t, r, c)
        basis[r] = c
        it += 1
        if it > max_iter:
            raise RuntimeError("simplex did not terminate within %d pivots" % max_iter)


def simplex(c, A_ub=None, b_ub=None, A_eq=None, b_eq=None, max_iter: int = 100000) -> LPResult:
    c = np.asarray(c, dtype=np.float64)
    nv = c.size
    A_ub = np.zeros((0, nv)) if A_ub is None else np.asarray(A_ub, dtype=np.float64)
    b_ub = np.zeros(0) if b_ub is None else np.asarray(b_ub, dtype=np.float64)
    A_eq = np.zeros((0, nv)) if A_eq is None else np.asarray(A_eq, dtype=np.float64)
    b_eq = np.zeros(0) if b_eq is None else np.asarray(b_eq, dtype=np.float64)
    n_ub, n_eq = A_ub.shape[0], A_eq.shape[0]
    rows = n_ub + n_eq
    # structural | slack | artificial | rhs
    width = nv + n_ub + rows + 1
    t = np.zeros((rows + 1, width))
    t[:n_ub, :nv] = A_ub
    t[:n_ub, nv:nv + n_ub] = np.eye(n_ub)
    t[n_ub:rows, :nv] = A_eq
    t[:rows, -1] = np.concatenate([b_ub, b_eq])
    neg = t[:rows, -1] < 0
    t[:rows][neg] *= -1.0
    art0 = nv + n_ub
    t[:rows, art0:art0 + rows] = np.eye(rows)
    basis = list(range(art0, art0 + rows))
    t[-1] = -t[:rows].sum(axis=0)
    t[-1, art0:art0 + rows] = 0.0
    iters = _run(t, basis, art0, max_iter)
    if -t[-1, -1] > 1e-9:
        raise InfeasibleError("constraints are infeasible (phase one residual %.3g)" % -t[-1, -1])

    keep = []
    for r in range(rows):
        if basis[r] >= art0:
            nz = np.flatnonzero(np.abs(t[r, :art0]) > 1e-9)
            if nz.size:
                _pivot(t, r, int(nz[0]))
                basis[r] = int(nz[0])
                keep.append(r)
        else:
            keep.append(r)
    t = np.vstack([t[keep], t[-1:]])
    basis = [basis[r] for r in keep]
    t = np.delete(t, np.s_[art0:art0 + rows], axis=1)
    t[-1] = 0.0
    t[-1, :nv] = c
    for r, b in enumerate(basis):
        if t[-1, b] != 0.0:
            t[-1] -= t[-1, b] * t[r]
    iters += _run(t, basis, art0, max_iter)
    x = np.zeros(art0)
    for r, b in enumerate(basis):
        x[b] = t[r, -1]
    x = x[:nv]
    return LPResult(x, float(c @ x), iters)
