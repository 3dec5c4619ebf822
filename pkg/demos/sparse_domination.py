"""Sparse domination of the multilinear maximal function on a random input.

Run: python3 demos/sparse_domination.py
"""
import numpy as np

from extrapolab.dyadic import StepFunction
from extrapolab.maximal import maximal
from extrapolab.sparse import cz_sparse, domination_ratio, lambda_form, validate_sparse

rng = np.random.default_rng(1)
L, r = 10, [1.0, 0.5]
fs = [StepFunction(L, rng.lognormal(0, 2, 2**L) * (rng.random(2**L) < 0.5)) for _ in r]

S = cz_sparse(fs, r)
print(f"{len(S)} cubes, validator problems: {validate_sparse(S) or 'none'}")
print(f"max M / A_S = {domination_ratio(S, fs, r):.4f} (bound 2^(2 sum r) = {2 ** (2 * sum(r)):.0f})")
print(f"||M||_1 = {maximal(fs, r).total():.5g}, Lambda_S = {lambda_form(S, fs, r):.5g}")
