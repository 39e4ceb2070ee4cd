"""Price-series ingestion, min-max scaling, windowing and chronological splits."""

import csv
import datetime as dt
import json
import math
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

import numpy as np

from .errors import (
    DegenerateRange,
    DuplicateDate,
    EmptyFile,
    InvalidRatio,
    MalformedRow,
    ManifestError,
    TooShort,
    UnknownTicker,
)

WINDOW = 10
TRAIN_RATIO = 0.7


class Group(str, Enum):
    BANK = "bank"
    OTHER = "other"

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).strip().lower())
        except ValueError:
            raise ManifestError(f"unknown group {value!r}; expected 'bank' or 'other'") from None


@dataclass(frozen=True, eq=False)
class PriceSeries:
    ticker: str
    group: Group
    dates: tuple
    closes: np.ndarray

    def __post_init__(self):
        closes = np.asarray(self.closes, dtype=float)
        closes.setflags(write=False)
        object.__setattr__(self, "closes", closes)
        object.__setattr__(self, "dates", tuple(self.dates))
        object.__setattr__(self, "group", Group.parse(self.group))
        if len(self.dates) != len(closes):
            raise MalformedRow(f"{self.ticker}: {len(self.dates)} dates but {len(closes)} closes")
        if len(closes) < 2:
            raise TooShort(f"{self.ticker}: need at least 2 observations, got {len(closes)}")
        if not np.all(np.isfinite(closes)) or np.any(closes <= 0):
            raise MalformedRow(f"{self.ticker}: closes must be finite and positive")
        if any(b <= a for a, b in zip(self.dates, self.dates[1:])):
            raise MalformedRow(f"{self.ticker}: dates must be strictly increasing")

    def __len__(self):
        return len(self.closes)

    def __eq__(self, other):
        if not isinstance(other, PriceSeries):
            return NotImplemented
        return (
            self.ticker == other.ticker
            and self.group == other.group
            and self.dates == other.dates
            and np.array_equal(self.closes, other.closes)
        )

    __hash__ = None

    def segment(self, start, stop):
        return PriceSeries(self.ticker, self.group, self.dates[start:stop], self.closes[start:stop])


@dataclass(frozen=True)
class ScalerParams:
    observed_min: float
    observed_max: float
    target_range: tuple = (-1.0, 1.0)

    def forward(self, values):
        lo, hi = self.target_range
        x = np.asarray(values, dtype=float)
        unit = (x - self.observed_min) / (self.observed_max - self.observed_min)
        return unit * (hi - lo) + lo

    def inverse(self, scaled):
        lo, hi = self.target_range
        y = np.asarray(scaled, dtype=float)
        unit = (y - lo) / (hi - lo)
        return unit * (self.observed_max - self.observed_min) + self.observed_min


@dataclass(frozen=True, eq=False)
class WindowedDataset:
    inputs: np.ndarray
    targets: np.ndarray

    def __len__(self):
        return len(self.targets)

    def __eq__(self, other):
        if not isinstance(other, WindowedDataset):
            return NotImplemented
        return np.array_equal(self.inputs, other.inputs) and np.array_equal(self.targets, other.targets)

    __hash__ = None


@dataclass(frozen=True)
class SplitSeries:
    train: PriceSeries
    test: PriceSeries


@dataclass
class Manifest:
    """Loaded datasets in manifest order, plus the optional flagged target."""

    series: dict = field(default_factory=dict)
    target: str = None

    def __getitem__(self, ticker):
        try:
            return self.series[ticker]
        except KeyError:
            raise UnknownTicker(f"ticker {ticker!r} not in manifest") from None

    def __contains__(self, ticker):
        return ticker in self.series

    def tickers(self, group=None):
        if group is None:
            return list(self.series)
        group = Group.parse(group)
        return [t for t, s in self.series.items() if s.group is group]


def _parse_date(text, where):
    try:
        return dt.date.fromisoformat(text.strip())
    except (ValueError, AttributeError):
        raise MalformedRow(f"{where}: bad date {text!r}") from None


def _parse_close(text, where):
    try:
        value = float(text)
    except (TypeError, ValueError):
        raise MalformedRow(f"{where}: non-numeric close {text!r}") from None
    if not np.isfinite(value) or value <= 0:
        raise MalformedRow(f"{where}: close must be finite and positive, got {text!r}")
    return value


def load_price_series(csv_path, ticker, group):
    """Read a ``date,close`` CSV into a date-sorted :class:`PriceSeries`."""
    path = Path(csv_path)
    # newline="" lets csv handle both LF and CRLF
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise EmptyFile(f"{path}: empty file")
        header = [h.strip().lower() for h in header]
        if header[:2] != ["date", "close"]:
            raise MalformedRow(f"{path}: expected header 'date,close', got {','.join(header)!r}")
        rows = {}
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            where = f"{path}:{lineno}"
            if len(row) < 2:
                raise MalformedRow(f"{where}: expected 2 fields, got {len(row)}")
            day = _parse_date(row[0], where)
            close = _parse_close(row[1], where)
            if day in rows:
                raise DuplicateDate(f"{where}: duplicate date {day.isoformat()}")
            rows[day] = close
    if not rows:
        raise EmptyFile(f"{path}: no data rows")
    dates = sorted(rows)
    return PriceSeries(ticker, group, dates, np.array([rows[d] for d in dates]))


def write_price_series(series, csv_path):
    with open(csv_path, "w", newline="", encoding="utf-8") as fh:
        fh.write("date,close\n")
        for day, close in zip(series.dates, series.closes):
            fh.write(f"{day.isoformat()},{float(close)!r}\n")


def load_manifest(manifest_path):
    """Load every dataset listed in a JSON manifest.

    Relative ``path`` entries resolve against the manifest's directory.
    """
    manifest_path = Path(manifest_path)
    try:
        entries = json.loads(manifest_path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ManifestError(f"manifest not found: {manifest_path}") from None
    except json.JSONDecodeError as exc:
        raise ManifestError(f"{manifest_path}: invalid JSON ({exc})") from None
    if not isinstance(entries, list) or not entries:
        raise ManifestError(f"{manifest_path}: expected a non-empty JSON array")

    manifest = Manifest()
    for i, entry in enumerate(entries):
        if not isinstance(entry, dict) or not {"ticker", "group", "path"} <= entry.keys():
            raise ManifestError(f"{manifest_path}: entry {i} needs ticker, group and path")
        ticker = str(entry["ticker"])
        if ticker in manifest.series:
            raise ManifestError(f"{manifest_path}: duplicate ticker {ticker!r}")
        path = Path(entry["path"])
        if not path.is_absolute():
            path = manifest_path.parent / path
        if not path.exists():
            raise ManifestError(f"{manifest_path}: data file for {ticker!r} not found: {path}")
        manifest.series[ticker] = load_price_series(path, ticker, Group.parse(entry["group"]))
        if entry.get("target"):
            if manifest.target is not None:
                raise ManifestError(f"{manifest_path}: more than one entry marked target")
            manifest.target = ticker
    return manifest


def fit_minmax(train_values):
    values = np.asarray(train_values, dtype=float)
    if values.size == 0:
        raise TooShort("cannot fit a scaler on an empty sequence")
    lo, hi = float(values.min()), float(values.max())
    if lo == hi:
        raise DegenerateRange(f"constant series (all values {lo}); nothing to scale")
    return ScalerParams(lo, hi)


def apply_scaler(params, values):
    # out-of-range values are deliberately not clamped
    return params.forward(values)


def inverse_scale(params, scaled):
    return params.inverse(scaled)


def make_windows(scaled, window=WINDOW):
    """Stride-1 windows: row ``i`` is ``scaled[i:i+window]``, target ``scaled[i+window]``."""
    x = np.asarray(scaled, dtype=float)
    if len(x) <= window:
        raise TooShort(f"series of length {len(x)} yields no windows of size {window}")
    inputs = np.lib.stride_tricks.sliding_window_view(x, window)[:-1].copy()
    return WindowedDataset(inputs, x[window:].copy())


def split_train_test(series, ratio=TRAIN_RATIO):
    if not 0.0 < ratio < 1.0:
        raise InvalidRatio(f"train ratio must lie in (0, 1), got {ratio}")
    n = len(series)
    # round first: 0.7 * 70 evaluates to 48.999...
    n_train = math.floor(round(ratio * n, 9))
    if n_train < 1 or n_train >= n:
        raise TooShort(f"{series.ticker}: length {n} cannot be split at ratio {ratio}")
    return SplitSeries(series.segment(0, n_train), series.segment(n_train, n))


@dataclass(frozen=True)
class PreparedSeries:
    """A series split, scaled with its own training fit, and windowed."""

    series: PriceSeries
    scaler: ScalerParams
    train: WindowedDataset
    test: WindowedDataset
    train_scaled: np.ndarray


def prepare(series, ratio=TRAIN_RATIO, window=WINDOW):
    split = split_train_test(series, ratio)
    scaler = fit_minmax(split.train.closes)
    train_scaled = apply_scaler(scaler, split.train.closes)
    return PreparedSeries(
        series=series,
        scaler=scaler,
        train=make_windows(train_scaled, window),
        test=make_windows(apply_scaler(scaler, split.test.closes), window),
        train_scaled=train_scaled,
    )
