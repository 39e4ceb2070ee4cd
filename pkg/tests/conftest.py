import datetime as dt
import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from gaf_transfer.data import Manifest, PriceSeries  # noqa: E402
from gaf_transfer.synthetic import business_days, write_manifest  # noqa: E402


def make_series(ticker, closes, group="bank", start=dt.date(2022, 1, 3)):
    return PriceSeries(ticker, group, business_days(start, len(closes)), np.asarray(closes, dtype=float))


def random_walk(rng, n, start=50.0, vol=0.02):
    return start * np.exp(np.cumsum(rng.normal(0, vol, n)))


@pytest.fixture
def planted():
    """Target plus a positive-affine copy hidden among random-walk candidates.

    Bank pool: BNK01, COPY, BNK02, BNK03. Other pool: OTH01..OTH03.
    """
    rng = np.random.default_rng(11)
    n = 120
    target = random_walk(rng, n, 80.0)
    series = [make_series("TGT", target)]
    series.append(make_series("BNK01", random_walk(rng, n, 40.0)))
    series.append(make_series("COPY", 2.5 * target + 7.0))
    series.append(make_series("BNK02", random_walk(rng, n, 60.0)))
    series.append(make_series("BNK03", random_walk(rng, n, 20.0)))
    for i in range(1, 4):
        series.append(make_series(f"OTH0{i}", random_walk(rng, n, 30.0 * i), group="other"))
    return Manifest({s.ticker: s for s in series}, target="TGT")


@pytest.fixture
def planted_dir(planted, tmp_path):
    return write_manifest(list(planted.series.values()), tmp_path / "planted", target="TGT")


def gradient_error(kind, seed, hidden=8, n_coords=None, batch=5):
    """Worst per-tensor relative gap between analytic and central-difference gradients.

    The gap for a tensor is max|numeric - analytic| over the probed entries,
    divided by the largest magnitude among either gradient on those entries.
    ``n_coords`` limits probing to that many random entries per tensor.
    """
    from gaf_transfer.model import init_model
    from oracles import finite_difference_grads

    rng = np.random.default_rng([seed, 99])
    model = init_model(kind, seed, hidden=hidden, dtype=np.float64)
    x = rng.uniform(-1, 1, (batch, 10))
    y = rng.uniform(-1, 1, batch)
    _, grads = model.loss_and_grads(x, y)
    coords = None
    if n_coords is not None:
        coords = {
            k: sorted(rng.choice(v.size, min(n_coords, v.size), replace=False).tolist())
            for k, v in model.params.items()
        }
    numeric = finite_difference_grads(lambda: model.loss_and_grads(x, y)[0], model.params, 1e-5, coords)
    worst = 0.0
    for name, (idx, vals) in numeric.items():
        num = np.asarray(vals)
        ana = grads[name].reshape(-1)[idx]
        scale = max(np.abs(num).max(), np.abs(ana).max(), 1e-12)
        worst = max(worst, float(np.abs(num - ana).max() / scale))
    return worst


def overfit_ratio(kind, seed=0, epochs=200, hidden=256):
    """First-epoch MSE over last-epoch MSE when training on one window."""
    from gaf_transfer.data import WindowedDataset
    from gaf_transfer.model import TrainConfig, init_model, train

    rng = np.random.default_rng([seed, 7])
    ds = WindowedDataset(rng.uniform(-1, 1, (1, 10)), rng.uniform(-1, 1, 1))
    model = init_model(kind, seed, hidden=hidden, dtype=np.float64)
    _, losses = train(model, ds, TrainConfig(epochs=epochs, learning_rate=1e-3))
    return losses[0] / max(losses[-1], 1e-300), losses


_CRITERIA = []


@pytest.fixture
def criterion():
    """Record one acceptance line: ``criterion(n, ok, detail)``; printed in the summary."""

    def record(number, ok, detail=""):
        line = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}".rstrip()
        _CRITERIA.append((number, line))
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if _CRITERIA:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(_CRITERIA):
            terminalreporter.write_line(line)
