"""Build extrapolated weights for a three-function tuple and report the transfer.

Run: python3 demos/extrapolation_walkthrough.py
"""
import numpy as np

from extrapolab.dyadic import StepFunction
from extrapolab.rdf import build_weights
from extrapolab.weights import product, random_symmetric_weights, symmetric_constant

rng = np.random.default_rng(7)
L = 8
p = (0.5, 0.25, 0.25)  # reciprocal exponents, summing to 1
q = (0.25, 0.25, 0.5)
r = (1.0, 1.0, 1.0)
ws = random_symmetric_weights(L, 3, rng, 0.4)
fs = [StepFunction(L, rng.lognormal(size=2**L)) for _ in range(3)]

res = build_weights(fs, p, q, r, ws)
print(f"path through {len(res.stages)} stage(s), gamma product {res.path.gamma_product()}")
print(f"[w]_p = {symmetric_constant(ws, p, r).value:.5g}, [W]_q = {symmetric_constant(res.W, q, r).value:.5g}")
print(f"max |prod W_j - 1| = {np.abs(product(list(res.W)).values - 1).max():.2e}")
print(f"norm transfer lhs/rhs = {res.lhs / res.rhs:.5g} (recorded {res.transfer:.5g})")
