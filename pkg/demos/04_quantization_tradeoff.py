"""The accuracy/precision trade-off of the price bucket width.

Coarser buckets merge states: sequences get more predictable (higher
accuracy, higher theoretical ceiling) but each state covers more price, so
the price-space error grows. A fixed per-stock state count splits the
difference by adapting the width to each stock's training range.
"""

import numpy as np

from tickpred.entropy import estimate_entropy
from tickpred.evaluate import accuracy, rmse
from tickpred.predict import run_protocol
from tickpred.predictability import fano_solve
from tickpred.quantize import quantize_fixed, quantize_fixed_count
from tickpred.synthetic import random_walk_series

N_STOCKS = 10

print("building", N_STOCKS, "seeded range-bound random walks (2 days x 900 ticks)...")
stocks = [random_walk_series(f"w{k}", days=2, ticks_per_day=900, seed=300 + k) for k in range(N_STOCKS)]

rows = []
for label in ("T=0.01", "T=0.05", "SP=10"):
    accs, rmses, ratios, bounds, n_states = [], [], [], [], []
    for series in stocks:
        if label == "SP=10":
            seq = quantize_fixed_count(series, sp=10, train_end=series.day_boundaries[1])
        else:
            seq = quantize_fixed(series, float(label.split("=")[1]))
        est = estimate_entropy(seq)
        bounds.append(fano_solve(est.s_est, seq.n_distinct))
        n_states.append(seq.n_distinct)
        trace = run_protocol(seq, series.day_boundaries, "dk", seed=9)
        accs.append(accuracy(trace))
        raw = series.prices_cny[trace.start_index :]
        r = rmse(trace, seq.scheme, raw_prices=raw)
        rmses.append(r)
        ratios.append(1000.0 * r / series.mean_price())
    rows.append((label, np.mean(n_states), np.mean(accs), np.mean(bounds), np.mean(rmses), np.mean(ratios)))

print()
print(f"{'setting':>8} {'states':>8} {'mean ACC':>10} {'mean bound':>11} {'mean RMSE':>10} {'RMSE/price (permille)':>22}")
for label, ns, acc, bound, err, ratio in rows:
    print(f"{label:>8} {ns:>8.1f} {acc:>10.3f} {bound:>11.3f} {err:>10.4f} {ratio:>22.2f}")

print()
print("reading the table:")
print(" - widening the bucket (0.01 -> 0.05) lifts accuracy and the ceiling")
print("   but costs price precision")
print(" - fixing a 10-state space per stock adapts the bucket width to each")
print("   stock's own training range and lands between the two fixed widths")
print(" - the RMSE-to-price ratio makes stocks at different price levels")
print("   comparable: the same error matters far more at 5 CNY than at 500")
