"""Multilinear weight characteristics on the dyadic model.

For ``w = (w_1, ..., w_m)`` and ``w = prod w_j`` the characteristic is

    sup_Q  prod_j <w_j^-1>_{1/(1/r_j - 1/p_j), Q} * <w>_{1/(1/p - 1/s), Q}

where an infinite exponent means the essential supremum over ``Q``.  The
symmetric form appends ``w_{m+1} = w^-1`` so that all ``m + 1`` factors look
alike.  Everything is computed one dyadic level at a time.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .dyadic import DyadicCube, StepFunction, grid_blocks
from .exponents import ScaleSetup, validate_setup

__all__ = [
    "WeightConstant",
    "family_grids",
    "product",
    "weight_constant",
    "symmetric_constant",
    "classical_ap",
    "rescale_weights",
    "v_weights",
    "wconst_char_check",
    "random_weight",
    "random_weights",
    "random_symmetric_weights",
]


@dataclass(frozen=True)
class WeightConstant:
    value: float
    cube: DyadicCube

    def __float__(self):
        return self.value


def family_grids(family: str) -> tuple:
    if family == "dyadic":
        return (0,)
    if family == "three-grid":
        return (0, 1, 2)
    raise ValueError(f"unknown family {family!r}")


def product(ws: Sequence):
    out = ws[0]
    for w in ws[1:]:
        out = out * w
    return out


def _sup_of_factors(factors: Sequence, L: int, family: str, canonical: bool = False) -> WeightConstant:
    """``sup_Q prod_i <g_i>_{recip_i, Q}`` over a cube family.

    ``factors`` is a list of ``(g, recip)``.  With ``canonical`` the factors
    of each cube are sorted before multiplying, so the result does not
    depend on their order at all.
    """
    best, arg = -np.inf, None
    for g in family_grids(family):
        for k in range(L + 1):
            first, size, count, i0 = grid_blocks(g, k, L)
            if count == 0:
                continue
            vals = [f.block_power_means(first, size, count, rc) for f, rc in factors]
            if canonical:
                prod = np.prod(np.sort(np.vstack(vals), axis=0), axis=0)
            else:
                prod = vals[0].copy()
                for v in vals[1:]:
                    prod = prod * v
            i = int(np.argmax(prod))
            if prod[i] > best:
                best, arg = float(prod[i]), DyadicCube(k, i0 + i, L, g)
    return WeightConstant(best, arg)


def weight_constant(ws: Sequence, setup: ScaleSetup, family: str = "dyadic") -> WeightConstant:
    """The characteristic ``[w]_{p,(r,s)}`` and a cube attaining it."""
    if len(ws) != setup.m:
        raise ValueError(f"expected {setup.m} weights, got {len(ws)}")
    rep = validate_setup(setup, "le")
    if not rep:
        raise ValueError(f"inadmissible setup: {rep.message}")
    L = ws[0].level
    factors = [(w.pow(-1.0), float(rj - pj)) for w, rj, pj in zip(ws, setup.r, setup.p)]
    factors.append((product(ws), float(setup.p_sum - setup.s)))
    return _sup_of_factors(factors, L, family)


def symmetric_constant(ws: Sequence, p: Sequence, r: Sequence, family: str = "dyadic") -> WeightConstant:
    """``sup_Q prod_{j<=m+1} <w_j^-1>_{1/(1/r_j - 1/p_j), Q}``.

    Invariant under simultaneous permutation of ``(w_j, p_j, r_j)``, exactly.
    """
    if not (len(ws) == len(p) == len(r)):
        raise ValueError("length mismatch")
    for j, (rj, pj) in enumerate(zip(r, p)):
        if pj > rj:
            raise ValueError(f"need 1/p_j <= 1/r_j at index {j + 1}")
    L = ws[0].level
    factors = [(w.pow(-1.0), float(rj - pj)) for w, rj, pj in zip(ws, r, p)]
    return _sup_of_factors(factors, L, family, canonical=True)


def classical_ap(w, recip_p: float, family: str = "dyadic") -> WeightConstant:
    """Muckenhoupt ``[w]_{A_p} = sup_Q <w>_Q <w^(1-p')>_Q^(p-1)``; ``recip_p = 1`` gives A_1."""
    if not 0 < recip_p <= 1:
        raise ValueError("need 1 <= p < inf")
    # <w^(1-p')>^(p-1) is the power mean of w^-1 with 1/t = p - 1
    factors = [(w, 1.0), (w.pow(-1.0), (1.0 - recip_p) / recip_p)]
    return _sup_of_factors(factors, w.level, family)


def rescale_weights(ws: Sequence, alpha: float) -> tuple:
    """``w_j -> w_j^(1/alpha)``, the companion of multiplying reciprocals by ``alpha``."""
    return tuple(w.pow(1.0 / alpha) for w in ws)


def v_weights(ws: Sequence, p: Sequence, r: Sequence) -> tuple:
    """``v_j = w_j^(-1/(1/r_j - 1/p_j))``; needs every ``1/p_j < 1/r_j``."""
    out = []
    for w, pj, rj in zip(ws, p, r):
        d = float(rj - pj)
        if d <= 0:
            raise ValueError("v_j needs 1/p_j < 1/r_j")
        out.append(w.pow(-1.0 / d))
    return tuple(out)


def wconst_char_check(ws: Sequence, p: Sequence, r: Sequence) -> tuple[float, float]:
    """Compare the best constant in ``prod <v_j>^(1/r_j) |Q| <= c prod v_j(Q)^(1/p_j)``
    with the symmetric characteristic.  Returns ``(c_best, [w])``.
    """
    vs = v_weights(ws, p, r)
    L = ws[0].level
    best = 0.0
    for k in range(L + 1):
        first, size, count, _ = grid_blocks(0, k, L)
        meas = 2.0**-k
        lhs = np.full(count, meas)
        rhs = np.ones(count)
        for v, pj, rj in zip(vs, p, r):
            vq = v.block_integrals(first, size, count)
            lhs = lhs * (vq / meas) ** float(rj)
            rhs = rhs * vq ** float(pj)
        best = max(best, float(np.max(lhs / rhs)))
    return best, symmetric_constant(ws, p, r).value


# --------------------------------------------------------------------------
# Random weights
# --------------------------------------------------------------------------


def random_weight(level: int, rng: np.random.Generator, sigma: float = 0.6) -> StepFunction:
    """Log-normal weight with independent jumps at every dyadic scale."""
    logw = np.zeros(2**level)
    for k in range(level + 1):
        n = 2**k
        logw += np.repeat(rng.normal(0.0, sigma, n), 2 ** (level - k)) * rng.uniform(0.3, 1.0)
    return StepFunction(level, np.exp(logw))


def random_weights(level: int, m: int, rng: np.random.Generator, sigma: float = 0.6) -> tuple:
    return tuple(random_weight(level, rng, sigma) for _ in range(m))


def random_symmetric_weights(level: int, m1: int, rng: np.random.Generator, sigma: float = 0.6) -> tuple:
    """``m1`` weights whose product is identically 1."""
    ws = list(random_weights(level, m1 - 1, rng, sigma))
    ws.append(product(ws).pow(-1.0))
    return tuple(ws)
