"""Power-weight sweep: how the operator ratio grows with the weight constant.

Run: python3 demos/sharpness_sweep.py
"""
import numpy as np

from extrapolab.suites import power_sweep

eps = [2.0**-k for k in range(2, 10)]
r, p = [1.0, 1.0], [1 / 3, 1 / 6]  # reciprocals of p = (3, 6)
rows = power_sweep(eps, r, p, 14)

print(f"{'eps':>10} {'[w]':>12} {'ratio':>12}")
for row in rows:
    print(f"{row.eps:10.3g} {row.wconst:12.5g} {row.ratio:12.5g}")

lw = np.log([row.wconst for row in rows])
lr = np.log([row.ratio for row in rows])
slope = np.polyfit(lw[-6:], lr[-6:], 1)[0]
print(f"fitted log-log slope {slope:.4f}; index-1 exponent r/(r - p) = {r[0] / (r[0] - p[0]):.4f}")
