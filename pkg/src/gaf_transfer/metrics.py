"""Forecast accuracy metrics, computed in price space."""

from dataclasses import asdict, dataclass

import numpy as np

from .errors import ConstantActual, LengthMismatch, TooShort, ZeroActual


@dataclass(frozen=True)
class ForecastMetrics:
    mape: float
    rmse: float
    r2: float

    def as_dict(self):
        return asdict(self)


def _pair(actual, predicted, min_len=1):
    y = np.asarray(actual, dtype=float).ravel()
    yhat = np.asarray(predicted, dtype=float).ravel()
    if len(y) != len(yhat):
        raise LengthMismatch(f"{len(y)} actual values vs {len(yhat)} predictions")
    if len(y) < min_len:
        raise TooShort(f"need at least {min_len} values, got {len(y)}")
    return y, yhat


def mape(actual, predicted):
    """Mean absolute percentage error, in percent."""
    y, yhat = _pair(actual, predicted)
    if np.any(y == 0):
        raise ZeroActual("MAPE is undefined when an actual value is 0")
    return float(100.0 * np.mean(np.abs((y - yhat) / y)))


def rmse(actual, predicted):
    y, yhat = _pair(actual, predicted)
    return float(np.sqrt(np.mean((y - yhat) ** 2)))


def r_squared(actual, predicted):
    """Coefficient of determination; negative values are returned as-is."""
    y, yhat = _pair(actual, predicted, min_len=2)
    ss_tot = np.sum((y - y.mean()) ** 2)
    if ss_tot == 0:
        raise ConstantActual("R^2 is undefined for a constant actual series")
    return float(1.0 - np.sum((y - yhat) ** 2) / ss_tot)


def forecast_metrics(actual, predicted):
    return ForecastMetrics(mape(actual, predicted), rmse(actual, predicted), r_squared(actual, predicted))
