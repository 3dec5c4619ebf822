"""Dyadic multilinear maximal operators and their quantitative bounds.

``M_r(f)(x) = sup_{Q ni x} prod_j <f_j>_{r_j, Q}`` is evaluated per cell by
sweeping the levels of a grid: the product of power means on every cube
of the level is computed in one shot and spread back onto its cells.

Exponents are passed as reciprocals throughout.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .dyadic import PowerFunction, StepFunction, grid_blocks, row_power_means, weighted_norm
from .exponents import ScaleSetup, constant_cpr, sparse_exponent
from .weights import family_grids, product, symmetric_constant, v_weights, weight_constant

__all__ = [
    "cube_products",
    "maximal",
    "maximal_three_grid",
    "weighted_dyadic_maximal",
    "n_operator",
    "n_operator_bound",
    "doob_constant",
    "sharp_maximal",
    "bmo_norm",
    "weak_norm",
    "WeakTypeReport",
    "weak_norm_experiment",
    "StrongReport",
    "strong_bound_check",
    "power_maximal_norm",
    "SweepRow",
    "power_sweep",
]


def cube_products(fs: Sequence, recips: Sequence, first: int, size: int, count: int) -> np.ndarray:
    """``prod_j <f_j>_{r_j, Q}`` for a run of blocks."""
    out = fs[0].block_power_means(first, size, count, float(recips[0]))
    for f, rc in zip(fs[1:], recips[1:]):
        out = out * f.block_power_means(first, size, count, float(rc))
    return out


def _grid_maximal(fs: Sequence, recips: Sequence, grid: int) -> np.ndarray:
    L = fs[0].level
    out = np.zeros(2**L)
    for k in range(L + 1):
        first, size, count, _ = grid_blocks(grid, k, L)
        if count == 0:
            continue
        g = np.repeat(cube_products(fs, recips, first, size, count), size)
        sl = slice(first, first + size * count)
        np.maximum(out[sl], g, out=out[sl])
    return out


def _check(fs, recips):
    if len(fs) != len(recips) or not fs:
        raise ValueError("need one reciprocal exponent per function")
    L = fs[0].level
    for f in fs:
        if f.level != L:
            raise ValueError("all functions must share the level")
    for rc in recips:
        if not rc > 0:
            raise ValueError("averaging exponents must be finite (1/r_j > 0)")


def maximal(fs: Sequence, recips: Sequence) -> StepFunction:
    """Standard-grid dyadic ``M_r`` as a step function."""
    _check(fs, recips)
    return StepFunction(fs[0].level, _grid_maximal(fs, recips, 0))


def maximal_three_grid(fs: Sequence, recips: Sequence) -> tuple[list, StepFunction]:
    """Per-grid maximal functions over the three shifted grids and their sum."""
    _check(fs, recips)
    per = [StepFunction(fs[0].level, _grid_maximal(fs, recips, g)) for g in family_grids("three-grid")]
    return per, StepFunction(fs[0].level, per[0].values + per[1].values + per[2].values)


def weighted_dyadic_maximal(u: StepFunction, recip: float, h: StepFunction) -> StepFunction:
    """``sup_{Q ni x} (int_Q h^r u / u(Q))^(1/r)``; cubes with ``u(Q) = 0`` contribute 0.

    With ``u`` identically one this reproduces :func:`maximal` bitwise.
    """
    if not recip > 0:
        raise ValueError("need 1/r > 0")
    L = h.level
    out = np.zeros(2**L)
    for k in range(L + 1):
        first, size, count, _ = grid_blocks(0, k, L)
        urows = u.rows(first, size, count)
        if np.all(urows.sum(axis=1) > 0):
            g = row_power_means(h.rows(first, size, count), recip, urows)
        else:
            good = urows.sum(axis=1) > 0
            g = np.zeros(count)
            g[good] = row_power_means(h.rows(first, size, count)[good], recip, urows[good])
        np.maximum(out, np.repeat(g, size), out=out)
    return StepFunction(L, out)


def doob_constant(recip_r: float, recip_q: float) -> float:
    """Norm bound of ``M^u_r`` on ``L^q(u)``: ``((1/r)/(1/r - 1/q))^(1/r)``."""
    return (recip_r / (recip_r - recip_q)) ** recip_r


def n_operator_bound(p: Sequence, r: Sequence, j: int) -> float:
    """A priori bound ``e^(1/r_j) ((1/r_j)/(1/r_j - 1/p_j))^(1/r_j)`` for ``N_j``."""
    rj, pj = float(r[j]), float(p[j])
    return math.exp(rj) * (rj / (rj - pj)) ** rj


def n_operator(p: Sequence, r: Sequence, ws: Sequence, j: int, f: StepFunction) -> StepFunction:
    """The operator ``N_j`` associated with ``(p, r, s = inf)`` and weights ``ws``.

    It is bounded on ``L^{p_j}(w_j^{p_j})`` and satisfies, pointwise,
    ``M_r(f) <= [w]^gamma prod_j N_j(f_j)``.  Reciprocals ``p``, ``r`` have
    length ``m``; ``j`` is 0-based.
    """
    rj, pj = float(r[j]), float(p[j])
    if not pj < rj:
        raise ValueError("N_j needs 1/p_j < 1/r_j")
    vj = ws[j].pow(-1.0 / (rj - pj))
    inner = weighted_dyadic_maximal(vj, rj, f * vj.pow(-rj))
    winv = ws[j].pow(-1.0)
    if pj == 0:
        return winv * float(inner.values.max())
    ps = float(sum(p))
    w = product(ws)
    a = pj / ps
    mid = inner * vj.pow(pj) * w.pow(-a)
    outer_recip = pj * rj / (rj - pj)
    outer = weighted_dyadic_maximal(w.pow(1.0 / ps), outer_recip, mid)
    return outer * w.pow(a) * winv


def sharp_maximal(f: StepFunction) -> StepFunction:
    """Dyadic ``M^# f = sup_{Q ni x} <|f - <f>_Q|>_Q``."""
    L = f.level
    out = np.zeros(2**L)
    for k in range(L):
        first, size, count, _ = grid_blocks(0, k, L)
        rows = f.rows(first, size, count)
        osc = np.abs(rows - rows.mean(axis=1, keepdims=True)).mean(axis=1)
        np.maximum(out, np.repeat(osc, size), out=out)
    return StepFunction(L, out)


def bmo_norm(f: StepFunction, w: StepFunction | None = None) -> float:
    """``||(M^# f) w||_inf``."""
    s = sharp_maximal(f)
    return float((s.values if w is None else s.values * w.values).max())


def weak_norm(g: StepFunction, u: StepFunction | None = None) -> float:
    """``sup_lambda lambda u({g > lambda})`` computed exactly from the level sets.

    The supremum over ``lambda`` is approached from below each attained
    value ``v``, where it equals ``v u({g >= v})``.
    """
    mass = np.full(g.ncells, g.h) if u is None else u.cell_integrals()
    order = np.argsort(-g.values, kind="stable")
    vals = g.values[order]
    cum = np.cumsum(mass[order])
    # last index of each run of equal values
    last = np.r_[vals[1:] != vals[:-1], True]
    return float(np.max(vals[last] * cum[last]))


# --------------------------------------------------------------------------
# Experiments
# --------------------------------------------------------------------------


@dataclass
class WeakTypeReport:
    constant: float
    upper_ratio: float
    lower_ratio: float
    lambda_grid_ratio: float


def _symmetric_norms(fs, ws, p) -> float:
    out = 1.0
    for f, w, pj in zip(fs, ws, p):
        out *= weighted_norm(f, w, float(pj))
    return out


def weak_norm_experiment(
    ws: Sequence, p: Sequence, r: Sequence, rng: np.random.Generator, trials: int = 20, top: int = 4
) -> WeakTypeReport:
    """Test the dyadic weak-type bound ``M_r : prod L^{p_j}(w_j^{p_j}) -> L^{1,inf}``.

    ``(ws, p, r)`` is a symmetric tuple (reciprocals of ``p`` sum to 1 and
    the weights multiply to 1).  Random inputs bound the operator norm from
    below by at most ``[w]``; the extremal test functions
    ``f_j = v_j^(1/r_j) 1_Q`` on the best cubes give at least ``[w]``.
    """
    L = ws[0].level
    const = symmetric_constant(ws, p, r)
    vs = v_weights(ws, p, r)
    upper, grid_upper = 0.0, 0.0
    lam = None
    for t in range(trials):
        if t % 2 == 0:
            fs = [StepFunction(L, rng.lognormal(0.0, 1.5, 2**L)) for _ in ws]
        else:
            k = int(rng.integers(0, L + 1))
            i = int(rng.integers(0, 2**k))
            fs = [_test_function(v, float(rj), k, i) for v, rj in zip(vs, r)]
        m = maximal(fs, r)
        norms = _symmetric_norms(fs, ws, p)
        upper = max(upper, weak_norm(m) / norms)
        pos = m.values[m.values > 0]
        lam = np.geomspace(pos.min(), pos.max(), 64, endpoint=False)
        grid_upper = max(grid_upper, max(lv * np.mean(m.values > lv) for lv in lam) / norms)
    lower = 0.0
    for k, i in _top_cubes(vs, p, r, L, top, const.cube):
        fs = [_test_function(v, float(rj), k, i) for v, rj in zip(vs, r)]
        lower = max(lower, weak_norm(maximal(fs, r)) / _symmetric_norms(fs, ws, p))
    return WeakTypeReport(const.value, upper, lower, grid_upper)


def _test_function(v: StepFunction, rj: float, k: int, i: int) -> StepFunction:
    L = v.level
    size = 2 ** (L - k)
    vals = np.zeros(2**L)
    vals[i * size : (i + 1) * size] = v.values[i * size : (i + 1) * size] ** rj
    return StepFunction(L, vals)


def _top_cubes(vs, p, r, L, top, best_cube):
    terms = []
    for k in range(L + 1):
        first, size, count, _ = grid_blocks(0, k, L)
        t = np.ones(count)
        for v, pj, rj in zip(vs, p, r):
            t = t * v.block_power_means(first, size, count, 1.0) ** float(rj - pj)
        for i in np.argsort(-t)[:top]:
            terms.append((float(t[i]), k, int(i)))
    terms.sort(reverse=True)
    picks = [(best_cube.level, best_cube.index)]
    for _, k, i in terms:
        if len(picks) >= top:
            break
        if (k, i) not in picks:
            picks.append((k, i))
    return picks


@dataclass
class StrongReport:
    ratio: float
    constant: float
    cpr: float
    gamma: float
    multiplier: float  # ratio / (c_{p,r} [w]^gamma)


def strong_bound_check(ws: Sequence, p: Sequence, r: Sequence, fs: Sequence) -> StrongReport:
    """``||M_r f||_{L^p(w^p)} / prod ||f_j||_{L^{p_j}(w_j^{p_j})}`` against ``c_{p,r} [w]^gamma``.

    ``p``, ``r`` are reciprocals of length ``m`` with ``s = inf``.
    """
    setup = ScaleSetup(tuple(r), 0.0, tuple(p))
    const = weight_constant(ws, setup).value
    gamma = float(sparse_exponent(p, r, 0.0))
    cpr = constant_cpr(p, r)
    m = maximal(fs, r)
    lhs = weighted_norm(m, product(ws), float(sum(p)))
    rhs = 1.0
    for f, w, pj in zip(fs, ws, p):
        rhs *= weighted_norm(f, w, float(pj))
    ratio = lhs / rhs
    return StrongReport(ratio, const, cpr, gamma, ratio / (cpr * const**gamma))


# --------------------------------------------------------------------------
# Power-law data
# --------------------------------------------------------------------------


def power_maximal_norm(fs: Sequence, recips: Sequence, w: PowerFunction, recip_p: float) -> float:
    """``||M_r f||_{L^p(w^p)}`` for power functions ``f_j`` and power weight ``w``.

    ``M_r f`` over the full dyadic filtration is self-similar towards 0:
    with ``A = sum_j a_j < 0`` the degree of ``prod f_j``, halving ``x``
    multiplies it by ``2^-A``.  So the norm is the contribution of
    ``[1/2, 1)`` times a geometric series.  On ``[1/2, 1)`` the operator is
    resolved by all cubes down to the cells of the level.
    """
    A = sum(f.exponent for f in fs)
    if A >= 0:
        raise ValueError("self-similar evaluation needs a singular product (degree < 0)")
    _check(fs, recips)
    L = fs[0].level
    p = 1.0 / recip_p
    half = 2 ** (L - 1)
    mvals = _grid_maximal(fs, recips, 0)[half:]
    shell = float(np.sum(mvals**p * w.pow(p).cell_integrals()[half:]))
    rho = 2.0 ** (-A * p - w.exponent * p - 1.0)
    if rho >= 1:
        return math.inf
    return (shell / (1.0 - rho)) ** recip_p


@dataclass
class SweepRow:
    eps: float
    wconst: float
    lhs: float
    norms: float
    ratio: float


def power_sweep(eps_values: Sequence[float], r: Sequence, p: Sequence, level: int) -> list[SweepRow]:
    """Power-weight family that saturates the sharp exponent at index 1.

    ``w_1 = x^((1-eps)(1/r_1 - 1/p_1))``, other weights 1,
    ``f_1 = x^(-(1-eps)/r_1) 1_(0,1)`` and ``f_j = x^(-(1-eps)/p_j)``.
    Then ``prod ||f_j w_j||_{p_j} = eps^(-1/p)`` and ``[w]`` grows like
    ``eps^(1/p_1 - 1/r_1)``.
    """
    r = [float(x) for x in r]
    p = [float(x) for x in p]
    m = len(r)
    rows = []
    for eps in eps_values:
        ws = [PowerFunction(level, (1 - eps) * (r[0] - p[0]))]
        ws += [PowerFunction(level, 0.0) for _ in range(m - 1)]
        fs = [PowerFunction(level, -(1 - eps) * r[0])]
        fs += [PowerFunction(level, -(1 - eps) * p[j]) for j in range(1, m)]
        wc = weight_constant(ws, ScaleSetup(tuple(r), 0.0, tuple(p))).value
        lhs = power_maximal_norm(fs, r, product(ws), sum(p))
        norms = 1.0
        for f, w, pj in zip(fs, ws, p):
            norms *= weighted_norm(f, w, pj)
        rows.append(SweepRow(eps, wc, lhs, norms, lhs / norms))
    return rows
