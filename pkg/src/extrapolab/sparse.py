"""Sparse collections and the stopping-time construction for ``M_r``.

A collection is *sparse* when every cube ``Q`` carries a set ``E_Q`` of at
least half its cells and the sets are pairwise disjoint.  The construction
below takes the maximal dyadic cubes of the level sets
``{M_r f > c0 * 2^(2k/r)}`` and dominates ``M_r f`` pointwise by
``2^(2/r) sum_Q prod_j <f_j>_{r_j,Q} 1_{E_Q}``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .dyadic import DyadicCube, StepFunction, grid_blocks
from .exponents import constant_cpr
from .maximal import cube_products, maximal
from .weights import symmetric_constant, v_weights

__all__ = [
    "SparseEntry",
    "SparseCollection",
    "validate_sparse",
    "cz_sparse",
    "cube_value",
    "stopping_violations",
    "domination_ratio",
    "sparse_operator",
    "lambda_form",
    "random_sparse",
    "lambda_weight_bound",
    "WeightedSparseReport",
]


@dataclass
class SparseEntry:
    cube: DyadicCube
    cells: np.ndarray  # sorted cell indices of E_Q
    k: int | None = None

    @property
    def e_measure(self) -> float:
        return self.cells.size * 2.0**-self.cube.L


@dataclass
class SparseCollection:
    L: int
    entries: list = field(default_factory=list)
    anchor: float = 1.0  # thresholds are anchor * base**k
    base: float = 4.0

    def __len__(self):
        return len(self.entries)

    def threshold(self, k: int) -> float:
        return self.anchor * self.base**k


def validate_sparse(S: SparseCollection, eta: float = 0.5) -> list[str]:
    """Problems with ``S`` as an ``eta``-sparse collection (empty list if valid)."""
    problems = []
    seen = set()
    used = np.zeros(2**S.L, dtype=bool)
    for e in S.entries:
        q = e.cube
        key = (q.grid, q.level, q.index)
        if key in seen:
            problems.append(f"duplicate cube {key}")
        seen.add(key)
        if not q.inside():
            problems.append(f"cube {key} outside [0,1)")
            continue
        if e.cells.size and (e.cells.min() < q.start or e.cells.max() >= q.stop):
            problems.append(f"E not inside cube {key}")
        if np.unique(e.cells).size != e.cells.size:
            problems.append(f"repeated cells in E for {key}")
        if np.any(used[e.cells]):
            problems.append(f"E for {key} overlaps an earlier E")
        used[e.cells] = True
        if e.cells.size < eta * q.size:
            problems.append(f"|E|/|Q| = {e.cells.size / q.size:.3g} < {eta} for {key}")
    return problems


def cube_value(fs: Sequence, recips: Sequence, cube: DyadicCube) -> float:
    return float(cube_products(fs, recips, cube.start, cube.size, 1)[0])


def _level_products(fs, recips, L):
    out = []
    for k in range(L + 1):
        first, size, count, _ = grid_blocks(0, k, L)
        out.append(cube_products(fs, recips, first, size, count))
    return out


def _build(mvals, G, L, base, anchor):
    S = SparseCollection(L, [], anchor, base)
    pos = mvals > 0
    if not np.any(pos):
        return S

    def thr(k):
        return anchor * base**k

    mp = mvals[pos]
    kx = np.ceil(np.log(mp / anchor) / math.log(base)).astype(int) - 1
    # the logarithm can be off by one at exact powers; settle by comparison
    for _ in range(3):
        kx = np.where(mp > anchor * base ** (kx + 1.0), kx + 1, kx)
        kx = np.where(mp <= anchor * base ** kx.astype(float), kx - 1, kx)
    for k in range(int(kx.min()), int(kx.max()) + 1):
        t, t1 = thr(k), thr(k + 1)
        outside_next = ~(mvals > t1)
        covered = np.zeros(2**L, dtype=bool)
        for lv in range(L + 1):
            size = 2 ** (L - lv)
            sel = (G[lv] > t) & ~covered[::size]
            if not np.any(sel):
                continue
            for i in np.flatnonzero(sel):
                cells = np.arange(i * size, (i + 1) * size)
                S.entries.append(SparseEntry(DyadicCube(lv, int(i), L), cells[outside_next[cells]], k))
            covered |= np.repeat(sel, size)
    return S


def cz_sparse(fs: Sequence, recips: Sequence) -> SparseCollection:
    """Stopping-time sparse collection dominating ``M_r f`` with constant ``2^(2/r)``.

    Thresholds start at ``2^(2k/r)``.  The top cube has no parent, so the
    upper stopping bound may fail for it and with it the sparseness of its
    set ``E``.  In that case the thresholds are re-anchored at the value of
    the top cube, which restores both for every cube.
    """
    L = fs[0].level
    rsum = float(sum(recips))
    base = 2.0 ** (2.0 * rsum)
    G = _level_products(fs, recips, L)
    mvals = maximal(fs, recips).values
    S = _build(mvals, G, L, base, 1.0)
    root = [e for e in S.entries if e.cube.level == 0]
    if root and 2 * root[0].cells.size < root[0].cube.size:
        S = _build(mvals, G, L, base, float(G[0][0]) * 2.0**rsum / base)
    return S


def stopping_violations(S: SparseCollection, fs: Sequence, recips: Sequence, include_root: bool = False) -> list:
    """Entries breaking ``t_k < <f>_Q <= t_(k+1) / 2^(1/r)`` with ``t_k = anchor * base^k``."""
    rsum = float(sum(recips))
    bad = []
    for e in S.entries:
        if e.cube.level == 0 and not include_root:
            continue
        g = cube_value(fs, recips, e.cube)
        lo, hi = S.threshold(e.k), S.threshold(e.k + 1) / 2.0**rsum
        if not (lo < g <= hi * (1 + 1e-12)):
            bad.append((e.cube, e.k, g, lo, hi))
    return bad


def sparse_operator(S: SparseCollection, fs: Sequence, recips: Sequence, on: str = "E") -> StepFunction:
    """``sum_Q prod_j <f_j>_{r_j,Q} 1_{E_Q}`` (``on='E'``) or with ``1_Q`` (``on='Q'``)."""
    out = np.zeros(2**S.L)
    for e in S.entries:
        g = cube_value(fs, recips, e.cube)
        if on == "E":
            out[e.cells] += g
        else:
            out[e.cube.start : e.cube.stop] += g
    return StepFunction(S.L, out)


def domination_ratio(S: SparseCollection, fs: Sequence, recips: Sequence) -> float:
    """``max M_r f / sum_Q <f>_Q 1_{E_Q}`` over cells where ``M_r f > 0``."""
    m = maximal(fs, recips).values
    a = sparse_operator(S, fs, recips).values
    pos = m > 0
    if not np.any(pos):
        return 0.0
    with np.errstate(divide="ignore"):
        return float(np.max(m[pos] / a[pos]))


def lambda_form(S: SparseCollection, fs: Sequence, recips: Sequence) -> float:
    """``sum_{Q in S} prod_j <f_j>_{r_j,Q} |Q|``."""
    return float(sum(cube_value(fs, recips, e.cube) * e.cube.measure for e in S.entries))


def random_sparse(L: int, rng: np.random.Generator, candidates: int = 200) -> SparseCollection:
    """Random valid 1/2-sparse collection of standard-grid cubes."""
    free = np.ones(2**L, dtype=bool)
    S = SparseCollection(L)
    seen = set()
    for _ in range(candidates):
        k = int(rng.integers(0, L + 1))
        i = int(rng.integers(0, 2**k))
        if (k, i) in seen:
            continue
        q = DyadicCube(k, i, L)
        avail = np.flatnonzero(free[q.start : q.stop]) + q.start
        need = (q.size + 1) // 2
        if avail.size < need:
            continue
        cells = np.sort(rng.choice(avail, size=need, replace=False))
        free[cells] = False
        seen.add((k, i))
        S.entries.append(SparseEntry(q, cells))
    return S


@dataclass
class WeightedSparseReport:
    constant: float  # symmetric characteristic
    gamma: float
    cpr: float
    cube_ratio: float  # max over Q of LHS / ([w]^gamma prod v_j(E_Q)^(1/p_j))
    cube_bound: float  # 2^(1 - sum beta_j)
    form_ratio: float  # Lambda / (c [w]^gamma prod ||f_j||)


def lambda_weight_bound(S: SparseCollection, fs: Sequence, ws: Sequence, p: Sequence, r: Sequence) -> WeightedSparseReport:
    """Weighted bounds for the sparse form of a symmetric tuple.

    Cube by cube, ``prod <v_j>_Q^(1/r_j) |Q| <= 2^(1 - sum beta_j) [w]^gamma prod v_j(E_Q)^(1/p_j)``
    with ``beta_j = 1/r_j - (1/r_j - 1/p_j) gamma <= 0``.  Globally the
    form is compared with ``c_{p,r} [w]^gamma prod ||f_j||_{L^{p_j}(w_j^{p_j})}``.
    """
    from .dyadic import weighted_norm

    pf = [float(x) for x in p]
    rf = [float(x) for x in r]
    gamma = max(rj / (rj - pj) for pj, rj in zip(pf, rf))
    beta = [rj - (rj - pj) * gamma for pj, rj in zip(pf, rf)]
    const = symmetric_constant(ws, pf, rf).value
    vs = v_weights(ws, pf, rf)
    worst = 0.0
    for e in S.entries:
        q = e.cube
        lhs = q.measure
        rhs = const**gamma
        for v, pj, rj in zip(vs, pf, rf):
            vq = float(v.block_integrals(q.start, q.size, 1)[0])
            lhs *= (vq / q.measure) ** rj
            rhs *= float(np.sum(v.values[e.cells]) * v.h) ** pj
        worst = max(worst, lhs / rhs)
    cpr = constant_cpr(pf, rf)
    norms = 1.0
    for f, w, pj in zip(fs, ws, pf):
        norms *= weighted_norm(f, w, pj)
    form = lambda_form(S, fs, rf)
    return WeightedSparseReport(const, gamma, cpr, worst, 2.0 ** (1.0 - sum(beta)), form / (cpr * const**gamma * norms))
