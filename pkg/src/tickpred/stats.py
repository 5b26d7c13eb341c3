"""Per-stock features and cross-stock statistics.

Features: average price and historical volatility (sample standard deviation
of log-returns). Cross-stock: Spearman rank correlation for quantitative
features, one-way ANOVA with partial eta squared for categorical ones, and
the preset distribution bins used to group stocks by price and volatility.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import special

# preset half-open bin edges for grouped accuracy summaries (last bin open above)
PRICE_BIN_EDGES = (0.0, 3.0, 4.0, 5.0, 6.0, 8.0, 10.0, 13.0, 17.0, 25.0, 50.0)
VOLATILITY_BIN_EDGES = (0.0, 0.01, 0.016, 0.021, 0.027, 0.033, 0.04, 0.05, 0.07)

N_CATEGORIES = 20
N_REGIONS = 32


@dataclass(frozen=True)
class StockFeatures:
    stock_code: str
    avgprice: float
    volatility: float
    life: float | None = None  # years listed
    scale: float | None = None  # employee count
    category: int | None = None  # industry index, 1..20
    region: int | None = None  # region index, 1..32


@dataclass(frozen=True)
class AnovaResult:
    F: float
    p: float
    ssb: float
    sst: float
    eta2p: float  # between-group share of total variance, SSB/SST


def volatility(prices, n_convention: str = "returns") -> float:
    """Sample standard deviation of log-returns.

    ``n_convention`` picks the denominator: "returns" uses (number of returns
    - 1), "sequence" uses (sequence length - 1), which equals the number of
    returns.
    """
    p = np.asarray(getattr(prices, "prices_cny", prices), dtype=np.float64)
    if len(p) < 3:
        raise ValueError(f"need at least 3 prices, got {len(p)}")
    if np.any(p <= 0):
        raise ValueError("prices must be positive for log-returns")
    x = np.log(p[1:] / p[:-1])
    m = len(x)
    if n_convention == "returns":
        denom = m - 1
    elif n_convention == "sequence":
        denom = m
    else:
        raise ValueError(f"unknown n_convention {n_convention!r}")
    xbar = x.mean()
    return float(np.sqrt(np.sum((x - xbar) ** 2) / denom))


def average_ranks(values) -> np.ndarray:
    """1-based ranks with ties assigned the mean of their rank range."""
    v = np.asarray(values, dtype=np.float64)
    order = np.argsort(v, kind="stable")
    ranks = np.empty(len(v), dtype=np.float64)
    i = 0
    while i < len(v):
        j = i
        while j + 1 < len(v) and v[order[j + 1]] == v[order[i]]:
            j += 1
        ranks[order[i : j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    return ranks


def spearman(x, y) -> float:
    """Rank correlation: Pearson correlation of average-ranked data."""
    xa = np.asarray(x, dtype=np.float64)
    ya = np.asarray(y, dtype=np.float64)
    if len(xa) != len(ya):
        raise ValueError(f"length mismatch: {len(xa)} vs {len(ya)}")
    if len(xa) < 3:
        raise ValueError("need at least 3 observations")
    rx = average_ranks(xa)
    ry = average_ranks(ya)
    dx = rx - rx.mean()
    dy = ry - ry.mean()
    sx = np.sqrt(np.sum(dx * dx))
    sy = np.sqrt(np.sum(dy * dy))
    if sx == 0.0 or sy == 0.0:
        raise ValueError("correlation undefined: zero rank variance")
    return float(np.sum(dx * dy) / (sx * sy))


def anova_oneway(groups) -> AnovaResult:
    """One-way analysis of variance over a mapping of group id to values.

    The p-value comes from the F distribution via the regularized incomplete
    beta function.
    """
    if hasattr(groups, "values"):
        arrays = [np.asarray(g, dtype=np.float64) for g in groups.values()]
    else:
        arrays = [np.asarray(g, dtype=np.float64) for g in groups]
    k = len(arrays)
    if k < 2:
        raise ValueError("need at least 2 groups")
    if any(len(a) == 0 for a in arrays):
        raise ValueError("groups must be non-empty")
    n = sum(len(a) for a in arrays)
    if n <= k:
        raise ValueError(f"need more observations ({n}) than groups ({k})")
    pooled = np.concatenate(arrays)
    grand = pooled.mean()
    ssb = float(sum(len(a) * (a.mean() - grand) ** 2 for a in arrays))
    ssw = float(sum(np.sum((a - a.mean()) ** 2) for a in arrays))
    sst = float(np.sum((pooled - grand) ** 2))
    d1, d2 = k - 1, n - k
    if ssb == 0.0:
        f_stat, p = 0.0, 1.0
    elif ssw == 0.0:
        f_stat, p = float("inf"), 0.0
    else:
        f_stat = (ssb / d1) / (ssw / d2)
        p = float(special.betainc(d2 / 2.0, d1 / 2.0, d2 / (d2 + d1 * f_stat)))
    eta2p = ssb / sst if sst > 0 else 0.0
    return AnovaResult(F=f_stat, p=p, ssb=ssb, sst=sst, eta2p=eta2p)


def bin_feature(values, edges) -> list[int]:
    """1-based half-open binning [e_k, e_k+1); the last bin is open above.

    Values below the first edge clamp to bin 1, so every finite value maps to
    exactly one index.
    """
    e = np.asarray(edges, dtype=np.float64)
    if len(e) == 0:
        raise ValueError("empty bin edges")
    if np.any(np.diff(e) <= 0):
        raise ValueError("bin edges must be strictly increasing")
    idx = np.searchsorted(e, np.asarray(values, dtype=np.float64), side="right")
    return np.maximum(idx, 1).astype(int).tolist()


def normalize_minmax(values) -> np.ndarray:
    """Scale to [0, 1]; a constant input maps to all 0.5."""
    v = np.asarray(values, dtype=np.float64)
    if len(v) == 0:
        raise ValueError("empty input")
    lo, hi = v.min(), v.max()
    if hi == lo:
        return np.full(len(v), 0.5)
    return (v - lo) / (hi - lo)


def compute_stock_features(series, n_convention: str = "returns") -> StockFeatures:
    """Average price and volatility straight from a price series."""
    return StockFeatures(
        stock_code=series.stock_code,
        avgprice=series.mean_price(),
        volatility=volatility(series.prices_cny, n_convention=n_convention),
    )
