"""The ceiling on next-state prediction accuracy.

Given an entropy rate S over N observed states, no predictor can beat the
root of  binary_entropy(p) + (1 - p) * log2(N - 1) = S  on [1/N, 1]. This
script shows the solver's anchors and how the ceiling moves with S and N.
"""

import math

from tickpred.predictability import fano_objective, fano_solve

print("=" * 72)
print("1. Anchors")
print("=" * 72)
print(f"S = 0 over 5 states  -> bound {fano_solve(0.0, 5):.4f}   (zero entropy: fully predictable)")
print(f"S = 1 over 2 states  -> bound {fano_solve(1.0, 2):.4f}   (a fair coin: no better than chance)")
p = fano_solve(2.0, 10)
print(f"S = 2 over 10 states -> bound {p:.4f}   (residual {abs(fano_objective(p, 10) - 2.0):.1e})")

print()
print("=" * 72)
print("2. The bound falls as entropy rises (fixed N = 10)")
print("=" * 72)
print(f"{'S (bits)':>10}  {'bound':>8}")
for s in (0.25, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0, math.log2(10)):
    print(f"{s:>10.3f}  {fano_solve(s, 10):>8.4f}")
print("at S = log2(N) the sequence looks uniform and the bound hits 1/N")

print()
print("=" * 72)
print("3. The same entropy over more states is relatively more structure")
print("=" * 72)
print(f"{'N':>6}  {'bound at S=1.5':>15}")
for n in (3, 5, 10, 50, 500):
    print(f"{n:>6}  {fano_solve(1.5, n):>15.4f}")

print()
print("tick-data reading: a stock whose quantized series has S around 1 bit")
print("over a few hundred states leaves room for very accurate prediction,")
print("and the gap between this ceiling and a model's accuracy is the")
print("improvement still on the table.")
