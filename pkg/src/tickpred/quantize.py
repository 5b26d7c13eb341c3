"""Map prices to discrete state ids and back.

Two modes: a fixed bucket width in CNY, or a fixed number of buckets spanning
the training range of each stock. All binning is done in integer hundredths of
CNY so that state boundaries fall exactly on price ticks.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Sequence

import numpy as np

MIN_INTERVAL_CNY = 0.01  # price precision of the tick feed

FIXED_INTERVAL = "fixed_interval"
FIXED_COUNT = "fixed_count"


@dataclass(frozen=True)
class QuantizationScheme:
    """How prices are bucketed into states.

    mode:             FIXED_INTERVAL or FIXED_COUNT
    t_hundredths:     bucket width in hundredths (FIXED_INTERVAL only)
    sp:               target state count (FIXED_COUNT only)
    origin_hundredths: lower edge of state 0
    span_hundredths:  training price range max-min (FIXED_COUNT only);
                      the derived width is span/sp, kept as an exact ratio
    """

    mode: str
    t_hundredths: int | None = None
    sp: int | None = None
    origin_hundredths: int = 0
    span_hundredths: int | None = None

    @property
    def interval_cny(self) -> float:
        """Bucket width in CNY (derived width for FIXED_COUNT)."""
        if self.mode == FIXED_INTERVAL:
            return self.t_hundredths / 100.0
        return self.span_hundredths / (100.0 * self.sp)

    @property
    def origin_cny(self) -> float:
        return self.origin_hundredths / 100.0

    @property
    def label(self) -> str:
        if self.mode == FIXED_INTERVAL:
            return f"T={self.t_hundredths / 100:.2f}"
        return f"SP={self.sp}"

    def state_of(self, price_hundredths: int) -> int:
        """State id of one price given in integer hundredths."""
        if self.mode == FIXED_INTERVAL:
            return int(price_hundredths) // self.t_hundredths
        shifted = int(price_hundredths) - self.origin_hundredths
        if shifted < 0:
            return 0
        return (shifted * self.sp) // self.span_hundredths

    def states_of(self, prices_hundredths: np.ndarray) -> np.ndarray:
        """Vectorised ``state_of`` over an int64 price array."""
        p = np.asarray(prices_hundredths, dtype=np.int64)
        if self.mode == FIXED_INTERVAL:
            return p // self.t_hundredths
        shifted = np.maximum(p - self.origin_hundredths, 0)
        return (shifted * self.sp) // self.span_hundredths

    def price_of(self, state: int) -> float:
        """Representative price of a state: the bucket midpoint, in CNY."""
        if state < 0:
            raise ValueError("state ids are non-negative")
        if self.mode == FIXED_INTERVAL:
            return (state + 0.5) * self.t_hundredths / 100.0
        return self.origin_hundredths / 100.0 + (state + 0.5) * self.span_hundredths / (100.0 * self.sp)

    def prices_of(self, states: np.ndarray) -> np.ndarray:
        s = np.asarray(states, dtype=np.float64)
        if np.any(s < 0):
            raise ValueError("state ids are non-negative")
        if self.mode == FIXED_INTERVAL:
            return (s + 0.5) * (self.t_hundredths / 100.0)
        return self.origin_hundredths / 100.0 + (s + 0.5) * (self.span_hundredths / (100.0 * self.sp))

    def to_json(self) -> str:
        return json.dumps(
            {
                "mode": self.mode,
                "t_hundredths": self.t_hundredths,
                "sp": self.sp,
                "origin_hundredths": self.origin_hundredths,
                "span_hundredths": self.span_hundredths,
            }
        )

    @classmethod
    def from_json(cls, text: str) -> "QuantizationScheme":
        d = json.loads(text)
        return cls(
            mode=d["mode"],
            t_hundredths=d.get("t_hundredths"),
            sp=d.get("sp"),
            origin_hundredths=d.get("origin_hundredths", 0),
            span_hundredths=d.get("span_hundredths"),
        )


@dataclass(frozen=True)
class QuantizedSequence:
    """A state-id sequence plus the scheme that produced it."""

    states: np.ndarray
    scheme: QuantizationScheme
    n_distinct: int

    def __len__(self) -> int:
        return len(self.states)


def fixed_interval_scheme(t_cny: float) -> QuantizationScheme:
    """Scheme with a fixed bucket width, which must be a whole number of hundredths >= 0.01."""
    if t_cny < MIN_INTERVAL_CNY:
        raise ValueError(f"quantification interval must be >= {MIN_INTERVAL_CNY} CNY, got {t_cny}")
    t_hundredths = int(round(t_cny * 100))
    if abs(t_hundredths - t_cny * 100) > 1e-6:
        raise ValueError(f"interval {t_cny} is not a multiple of 0.01 CNY")
    return QuantizationScheme(mode=FIXED_INTERVAL, t_hundredths=t_hundredths)


def fixed_count_scheme(train_prices_hundredths: Sequence[int], sp: int) -> QuantizationScheme:
    """Scheme anchored to a training slice: sp buckets spanning its price range."""
    if sp < 2:
        raise ValueError(f"state count must be >= 2, got {sp}")
    p = np.asarray(train_prices_hundredths, dtype=np.int64)
    if len(p) < 2:
        raise ValueError("training slice must contain at least 2 prices")
    lo, hi = int(p.min()), int(p.max())
    if hi <= lo:
        raise ValueError("training slice has a degenerate (constant) price range")
    return QuantizationScheme(mode=FIXED_COUNT, sp=int(sp), origin_hundredths=lo, span_hundredths=hi - lo)


def _series_prices(series) -> np.ndarray:
    prices = getattr(series, "prices_hundredths", series)
    return np.asarray(prices, dtype=np.int64)


def quantize_with(series, scheme: QuantizationScheme) -> QuantizedSequence:
    """Quantize a price series (or raw hundredths array) under an existing scheme."""
    states = scheme.states_of(_series_prices(series))
    return QuantizedSequence(states=states, scheme=scheme, n_distinct=int(len(np.unique(states))))


def quantize_fixed(series, t_cny: float) -> QuantizedSequence:
    """Quantize with a fixed bucket width: state = floor(price / T)."""
    return quantize_with(series, fixed_interval_scheme(t_cny))


def quantize_fixed_count(series, sp: int, train_end: int) -> QuantizedSequence:
    """Quantize with sp buckets spanning the training slice ``[:train_end]``.

    Test prices above the training range keep extending the state space;
    prices below it clamp to state 0.
    """
    prices = _series_prices(series)
    if train_end < 2:
        raise ValueError("train_end must be >= 2")
    scheme = fixed_count_scheme(prices[:train_end], sp)
    return quantize_with(prices, scheme)


def dequantize(state: int, scheme: QuantizationScheme) -> float:
    """Representative price (bucket midpoint) of a state, in CNY."""
    return scheme.price_of(state)
