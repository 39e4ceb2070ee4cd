"""Seeded synthetic price universe for exercising the full pipeline offline."""

import datetime as dt
import json
from pathlib import Path

import numpy as np

from .data import Group, Manifest, PriceSeries, write_price_series


def business_days(start, n):
    days, day = [], start
    while len(days) < n:
        if day.weekday() < 5:
            days.append(day)
        day += dt.timedelta(days=1)
    return days


def random_walk_universe(n_bank=10, n_other=10, length=490, seed=2024, start=dt.date(2022, 1, 3)):
    """Geometric random walks sharing a market factor and a per-sector factor.

    The first bank series is the target. Tickers are ``BNK00..`` (target is
    ``BNK00``) and ``OTH01..``.
    """
    rng = np.random.default_rng(seed)
    dates = business_days(start, length)
    market = rng.normal(0.0, 0.008, length)
    sector = {Group.BANK: rng.normal(0.0, 0.006, length), Group.OTHER: rng.normal(0.0, 0.010, length)}
    out = []
    specs = [(Group.BANK, f"BNK{i:02d}") for i in range(n_bank + 1)]
    specs += [(Group.OTHER, f"OTH{i:02d}") for i in range(1, n_other + 1)]
    for group, ticker in specs:
        beta_m = rng.uniform(0.5, 1.5)
        beta_s = rng.uniform(0.3, 1.2)
        idio = rng.normal(0.0, rng.uniform(0.006, 0.02), length)
        drift = rng.normal(0.0, 0.0004)
        log_ret = drift + beta_m * market + beta_s * sector[group] + idio
        log_ret[0] = 0.0
        price0 = rng.uniform(5.0, 400.0)
        closes = np.round(price0 * np.exp(np.cumsum(log_ret)), 4)
        out.append(PriceSeries(ticker, group, dates, closes))
    return out


def write_manifest(series, directory, target=None):
    """Write one CSV per series plus ``manifest.json``; returns the manifest path."""
    directory = Path(directory)
    (directory / "data").mkdir(parents=True, exist_ok=True)
    entries = []
    for s in series:
        rel = f"data/{s.ticker}.csv"
        write_price_series(s, directory / rel)
        entry = {"ticker": s.ticker, "group": s.group.value, "path": rel}
        if s.ticker == target:
            entry["target"] = True
        entries.append(entry)
    path = directory / "manifest.json"
    path.write_text(json.dumps(entries, indent=2) + "\n", encoding="utf-8")
    return path


def synthetic_manifest(**kwargs):
    """The synthetic universe as an in-memory :class:`Manifest` (target ``BNK00``)."""
    series = random_walk_universe(**kwargs)
    return Manifest({s.ticker: s for s in series}, target=series[0].ticker)


def bundled_manifest_path():
    """Path of the synthetic manifest shipped with the package (21 series, target ``BNK00``)."""
    return Path(__file__).parent / "datasets" / "synthetic" / "manifest.json"
