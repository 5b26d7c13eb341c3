"""Parse tick files into per-stock price series and filter out unusable ones.

Prices are held as integer hundredths of CNY (the feed's precision is 0.01),
so downstream binning and round trips stay exact. Trading days are detected
by calendar-date changes and concatenated with no gap markers: one stock is
one continuous sequence across its whole sample.
"""

from __future__ import annotations

import csv
import io
import re
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterable

import numpy as np

from .errors import EmptyInputError, SchemaError
from .quantize import QuantizationScheme

DEFAULT_MIN_LENGTH = 1000  # ticks; roughly a quarter trading day
DEFAULT_MIN_STATES = 10

_PRICE_RE = re.compile(r"^(\d+)(?:\.(\d{1,2}))?$")


@dataclass(frozen=True)
class TickRecord:
    """One exchange snapshot."""

    stock_code: str
    timestamp: datetime
    price_hundredths: int
    extra: dict[str, float] = field(default_factory=dict)

    @property
    def last_price(self) -> float:
        return self.price_hundredths / 100.0


@dataclass(frozen=True)
class ColumnSchema:
    """Which input columns hold the code, timestamp and price.

    Each selector is a 1-based column index or a header name. ``extra`` maps
    output field names to selectors for pass-through columns (e.g. turnover).
    """

    code: int | str = 1
    time: int | str = 2
    price: int | str = 3
    extra: dict[str, int | str] = field(default_factory=dict)

    def resolve(self, header: list[str]) -> tuple[int, int, int, dict[str, int]]:
        def col(sel, what):
            if isinstance(sel, int):
                if not 1 <= sel <= len(header):
                    raise SchemaError(f"{what} column {sel} out of range (file has {len(header)} columns)")
                return sel - 1
            names = [h.strip() for h in header]
            if sel not in names:
                raise SchemaError(f"{what} column {sel!r} not found in header {names}")
            return names.index(sel)

        return (
            col(self.code, "code"),
            col(self.time, "time"),
            col(self.price, "price"),
            {name: col(sel, name) for name, sel in self.extra.items()},
        )


@dataclass
class PriceSeries:
    """Ordered per-stock price sequence across concatenated trading days."""

    stock_code: str
    epoch_seconds: np.ndarray
    prices_hundredths: np.ndarray
    day_boundaries: list[int]

    def __len__(self) -> int:
        return len(self.prices_hundredths)

    @property
    def prices_cny(self) -> np.ndarray:
        return self.prices_hundredths / 100.0

    @property
    def n_days(self) -> int:
        return len(self.day_boundaries)

    def mean_price(self) -> float:
        return float(self.prices_hundredths.mean() / 100.0)

    def to_interchange(self, path) -> None:
        """Write the per-stock interchange file: epoch_seconds,price_hundredths lines."""
        with open(path, "w", encoding="utf-8", newline="") as f:
            f.write("epoch_seconds,price_hundredths\n")
            for t, p in zip(self.epoch_seconds.tolist(), self.prices_hundredths.tolist()):
                f.write(f"{t},{p}\n")

    @classmethod
    def from_interchange(cls, path, stock_code: str | None = None) -> "PriceSeries":
        path = Path(path)
        times: list[int] = []
        prices: list[int] = []
        with open(path, "r", encoding="utf-8") as f:
            header = f.readline()
            if not header.strip():
                raise EmptyInputError(f"{path}: empty interchange file")
            for line in f:
                line = line.strip()
                if not line:
                    continue
                t, p = line.split(",")
                times.append(int(t))
                prices.append(int(p))
        if not times:
            raise EmptyInputError(f"{path}: no data rows")
        epoch = np.asarray(times, dtype=np.int64)
        return cls(
            stock_code=stock_code if stock_code is not None else path.stem,
            epoch_seconds=epoch,
            prices_hundredths=np.asarray(prices, dtype=np.int64),
            day_boundaries=_boundaries_from_epochs(epoch),
        )


@dataclass(frozen=True)
class FilterDecision:
    keep: bool
    reason: str | None = None


def parse_price_hundredths(text: str) -> int:
    """Exact decimal-string parse of a positive price with <= 2 decimals."""
    m = _PRICE_RE.match(text.strip())
    if m is None:
        raise ValueError(f"unparseable price {text!r}")
    whole, frac = m.group(1), m.group(2) or ""
    value = int(whole) * 100 + int(frac.ljust(2, "0") or 0)
    if value <= 0:
        raise ValueError(f"price must be positive, got {text!r}")
    return value


def _parse_timestamp(text: str) -> datetime:
    try:
        return datetime.fromisoformat(text.strip())
    except ValueError as exc:
        raise ValueError(f"unparseable timestamp {text!r}") from exc


def _epoch_seconds(ts: datetime) -> int:
    # naive timestamps are pinned to UTC so epoch round trips are exact
    if ts.tzinfo is None:
        ts = ts.replace(tzinfo=timezone.utc)
    return int(ts.timestamp())


def _boundaries_from_epochs(epoch: np.ndarray) -> list[int]:
    days = epoch // 86400
    return [0] + (np.flatnonzero(np.diff(days) != 0) + 1).tolist()


def _detect_delimiter(header_line: str) -> str:
    return "\t" if "\t" in header_line else ","


def parse_ticks(source, schema: ColumnSchema) -> tuple[list[TickRecord], int]:
    """Parse delimiter-separated tick text into records.

    ``source`` is a path, byte string, text string or open text stream with a
    header row. Malformed rows are counted and skipped; the count is returned
    alongside the records. Raises SchemaError when a mapped column is missing
    and EmptyInputError when nothing parses.
    """
    if isinstance(source, Path) or (isinstance(source, str) and "\n" not in source and Path(source).is_file()):
        with open(source, "r", encoding="utf-8", newline="") as f:
            return _parse_stream(f, schema, str(source))
    if isinstance(source, bytes):
        return _parse_stream(io.StringIO(source.decode("utf-8")), schema, "<bytes>")
    if isinstance(source, str):
        return _parse_stream(io.StringIO(source), schema, "<string>")
    return _parse_stream(source, schema, getattr(source, "name", "<stream>"))


def _parse_stream(f, schema: ColumnSchema, origin: str) -> tuple[list[TickRecord], int]:
    header_line = f.readline()
    if not header_line.strip():
        raise EmptyInputError(f"{origin}: empty input")
    delimiter = _detect_delimiter(header_line)
    header = next(csv.reader([header_line], delimiter=delimiter))
    code_i, time_i, price_i, extra_i = schema.resolve(header)
    needed = max([code_i, time_i, price_i, *extra_i.values()]) + 1

    records: list[TickRecord] = []
    malformed = 0
    for row in csv.reader(f, delimiter=delimiter):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) < needed:
            malformed += 1
            continue
        try:
            code = row[code_i].strip()
            if not code:
                raise ValueError("empty stock code")
            ts = _parse_timestamp(row[time_i])
            price = parse_price_hundredths(row[price_i])
            extra = {name: float(row[i]) for name, i in extra_i.items()}
        except ValueError:
            malformed += 1
            continue
        records.append(TickRecord(stock_code=code, timestamp=ts, price_hundredths=price, extra=extra))
    if not records:
        raise EmptyInputError(f"{origin}: no parseable rows ({malformed} malformed)")
    return records, malformed


def build_series(records: Iterable[TickRecord]) -> dict[str, PriceSeries]:
    """Group records per stock, sort by time (stable, so duplicates keep input order)."""
    grouped: dict[str, list[TickRecord]] = {}
    for rec in records:
        grouped.setdefault(rec.stock_code, []).append(rec)
    out: dict[str, PriceSeries] = {}
    for code, recs in grouped.items():
        recs.sort(key=lambda r: r.timestamp)  # stable
        epoch = np.asarray([_epoch_seconds(r.timestamp) for r in recs], dtype=np.int64)
        dates = [r.timestamp.date() for r in recs]
        boundaries = [0] + [i for i in range(1, len(recs)) if dates[i] != dates[i - 1]]
        out[code] = PriceSeries(
            stock_code=code,
            epoch_seconds=epoch,
            prices_hundredths=np.asarray([r.price_hundredths for r in recs], dtype=np.int64),
            day_boundaries=boundaries,
        )
    return out


def filter_series(
    series: PriceSeries,
    scheme: QuantizationScheme,
    min_length: int = DEFAULT_MIN_LENGTH,
    min_states: int = DEFAULT_MIN_STATES,
) -> FilterDecision:
    """Drop series that are too short or collapse to too few states under ``scheme``."""
    n = len(series)
    if n < min_length:
        return FilterDecision(keep=False, reason=f"too short ({n} < {min_length} ticks)")
    distinct = len(np.unique(scheme.states_of(series.prices_hundredths)))
    if distinct < min_states:
        return FilterDecision(keep=False, reason=f"too few states ({distinct} < {min_states})")
    return FilterDecision(keep=True)
