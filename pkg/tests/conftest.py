"""Brute-force oracles shared by the tests.

They loop over standard dyadic intervals in plain Python and never touch
the vectorized block machinery of the package.
"""
import numpy as np
import pytest


def oracle_intervals(L):
    for k in range(L + 1):
        size = 2 ** (L - k)
        for i in range(2**k):
            yield k, i * size, (i + 1) * size


def oracle_mean(vals, lo, hi, recip):
    seg = np.asarray(vals[lo:hi], dtype=float)
    top = float(seg.max())
    if recip == 0 or top == 0:
        return top
    # scale by the maximum so tiny or huge values neither underflow nor overflow
    return top * float(np.mean((seg / top) ** (1.0 / recip)) ** recip)


def oracle_maximal(fs, recips):
    L = int(np.log2(len(fs[0])))
    out = np.zeros(len(fs[0]))
    for _, lo, hi in oracle_intervals(L):
        v = 1.0
        for f, rc in zip(fs, recips):
            v *= oracle_mean(f, lo, hi, rc)
        out[lo:hi] = np.maximum(out[lo:hi], v)
    return out


def oracle_wconst(ws, r, s, p):
    """``sup_Q prod <w_j^-1>_{1/(1/r_j - 1/p_j)} <prod w>_{1/(1/p - 1/s)}``."""
    L = int(np.log2(len(ws[0])))
    w = np.prod(np.vstack(ws), axis=0)
    best = 0.0
    for _, lo, hi in oracle_intervals(L):
        v = oracle_mean(w, lo, hi, sum(p) - s)
        for wj, rj, pj in zip(ws, r, p):
            v *= oracle_mean(1.0 / np.asarray(wj), lo, hi, rj - pj)
        best = max(best, v)
    return best


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
