"""Regenerates tests/data/lowess_statsmodels.json from statsmodels' LOWESS.

Usage: python3 lowess_statsmodels.py OUTPUT.json
"""
import json
import math
import sys

from statsmodels.nonparametric.smoothers_lowess import lowess

n = 40
x = [((i * 17) % n) * 0.25 - 3.0 for i in range(n)]
x[5] = x[6]  # one tied abscissa
y = [math.sin(v) + (((i * 7919) % 101) / 101.0 - 0.5) * 0.4 for i, v in enumerate(x)]
y[10] += 3.0  # outliers exercise the robustness passes
y[23] -= 2.5

fits = {}
for frac, it in [(0.3, 1), (0.3, 0), (0.5, 3)]:
    r = lowess(y, x, frac=frac, it=it, delta=0.0, return_sorted=False)
    fits[f"{frac}_{it}"] = [float(v) for v in r]

with open(sys.argv[1], "w") as out:
    json.dump({"x": x, "y": y, "fits": fits}, out, indent=1)
    out.write("\n")
