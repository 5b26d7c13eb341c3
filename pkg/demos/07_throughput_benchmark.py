"""Throughput of the per-stock analysis path against the 50k ticks/s/core budget.

Measures each stage on one synthetic stock (one training day plus test days)
and reports ticks per second per core. The budget is a target, not a test
gate: stages built on counting and indexing clear it comfortably, while the
embedding model's per-tick coordinate updates are the known bottleneck in
pure Python.
"""

import time

import numpy as np

from tickpred.entropy import estimate_entropy
from tickpred.evaluate import evaluate_trace
from tickpred.predict import run_protocol
from tickpred.quantize import quantize_fixed
from tickpred.synthetic import random_walk_series

BUDGET = 50_000  # ticks per second per core
TICKS_PER_DAY = 3_800
DAYS = 5

series = random_walk_series("bench", days=DAYS, ticks_per_day=TICKS_PER_DAY, seed=1)
n = len(series)
print(f"benchmark stock: {n} ticks ({DAYS} days x {TICKS_PER_DAY})")
print(f"budget: {BUDGET:,} ticks/second/core\n")

results = {}

t0 = time.perf_counter()
seq = quantize_fixed(series, 0.01)
results["quantize"] = n / (time.perf_counter() - t0)

t0 = time.perf_counter()
est = estimate_entropy(seq)
results["entropy"] = n / (time.perf_counter() - t0)

t0 = time.perf_counter()
trace_mc = run_protocol(seq, series.day_boundaries, "mc")
results["markov online loop"] = n / (time.perf_counter() - t0)

t0 = time.perf_counter()
trace_dk = run_protocol(seq, series.day_boundaries, "dk", seed=2)
results["embedding online loop"] = n / (time.perf_counter() - t0)

t0 = time.perf_counter()
for trace in (trace_mc, trace_dk):
    evaluate_trace(trace, seq.scheme, raw_prices=series.prices_cny[trace.start_index :], avgprice=series.mean_price())
results["evaluate"] = n / (time.perf_counter() - t0)

total_rate = 1.0 / sum(1.0 / r for r in results.values())

print(f"{'stage':>24} {'ticks/s/core':>14} {'vs budget':>10}")
for stage, rate in results.items():
    verdict = "PASS" if rate >= BUDGET else "below"
    print(f"{stage:>24} {rate:>14,.0f} {verdict:>10}")
print(f"{'full per-stock path':>24} {total_rate:>14,.0f} {'PASS' if total_rate >= BUDGET else 'below':>10}")

print()
if total_rate < BUDGET:
    print("the count-based path clears the budget; the embedding model's")
    print("sequential margin-gated updates (5 negatives x several vector ops per")
    print("tick) dominate the full path and fall short in pure Python. Distinct")
    print("stocks run in parallel (workers = N), so market-scale wall time")
    print("scales with cores even though one stock stays single-core.")
else:
    print("all stages clear the budget on this machine.")
