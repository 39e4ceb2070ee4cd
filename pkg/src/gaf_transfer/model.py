"""Numpy DNN and LSTM forecasters with exact gradients and Adam.

Both networks map a window of 10 scaled prices to the next scaled price.

* DNN: 10 -> 256 -> 256 -> 1, ReLU hidden activations.
* LSTM: the window is read as a length-10 sequence of scalars through two
  stacked LSTM layers of 256 units; the last hidden state of the top layer
  feeds a 256 -> 1 linear readout. Gate order inside the packed weight
  matrices is input, forget, cell, output.

Training is plain mini-batch Adam on the MSE loss. Everything is
deterministic given the integer seed.
"""

import hashlib
import json
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path

import numpy as np

from .errors import NonFiniteInput, NonFiniteLoss, NoSource

WINDOW = 10
HIDDEN = 256
PRETRAIN_LR = 1e-3
FINETUNE_LR = 1e-5


class Kind(str, Enum):
    DNN = "dnn"
    LSTM = "lstm"


_KIND_CODE = {Kind.DNN: 1, Kind.LSTM: 2}


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 100
    batch_size: int = 200
    learning_rate: float = PRETRAIN_LR
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    loss: str = "mse"

    def __post_init__(self):
        if self.epochs < 1 or self.batch_size < 1:
            raise ValueError("epochs and batch_size must be positive")
        if self.learning_rate < 0:
            raise ValueError("learning_rate must be >= 0")
        if self.loss != "mse":
            raise ValueError(f"unsupported loss {self.loss!r}")


PRETRAIN = TrainConfig(learning_rate=PRETRAIN_LR)
FINETUNE = TrainConfig(learning_rate=FINETUNE_LR)


def _glorot(rng, fan_in, fan_out, dtype):
    bound = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-bound, bound, size=(fan_in, fan_out)).astype(dtype)


class Model:
    """Parameter container plus forward/backward passes for one architecture."""

    def __init__(self, kind, params, seed=None, hidden=HIDDEN):
        self.kind = Kind(kind)
        self.params = params
        self.seed = seed
        self.hidden = hidden

    @property
    def dtype(self):
        return next(iter(self.params.values())).dtype

    def copy(self):
        return Model(self.kind, {k: v.copy() for k, v in self.params.items()}, self.seed, self.hidden)

    def digest(self):
        h = hashlib.sha256()
        for name in sorted(self.params):
            h.update(name.encode())
            h.update(np.ascontiguousarray(self.params[name], dtype=np.float64).tobytes())
        return h.hexdigest()

    def n_parameters(self):
        return sum(p.size for p in self.params.values())

    # -- forward / backward ------------------------------------------------

    def _check(self, inputs):
        x = np.asarray(inputs, dtype=self.dtype)
        if x.ndim != 2 or x.shape[1] != WINDOW:
            raise ValueError(f"expected inputs of shape (n, {WINDOW}), got {x.shape}")
        if not np.all(np.isfinite(x)):
            raise NonFiniteInput("inputs contain NaN or inf")
        return x

    def forward(self, inputs):
        x = self._check(inputs)
        if self.kind is Kind.DNN:
            return _dnn_forward(self.params, x)[0]
        return _lstm_forward(self.params, x, self.hidden)[0]

    def loss_and_grads(self, inputs, targets):
        """MSE loss on a batch and its exact gradient for every parameter.

        A non-finite loss comes back with ``None`` in place of the gradients.
        """
        x = self._check(inputs)
        y = np.asarray(targets, dtype=self.dtype).ravel()
        if self.kind is Kind.DNN:
            pred, cache = _dnn_forward(self.params, x)
        else:
            pred, cache = _lstm_forward(self.params, x, self.hidden)
        err = pred - y
        loss = float(np.mean(err.astype(np.float64) ** 2))
        if not np.isfinite(loss):
            return loss, None
        dpred = (2.0 / len(y)) * err
        if self.kind is Kind.DNN:
            grads = _dnn_backward(self.params, cache, dpred)
        else:
            grads = _lstm_backward(self.params, cache, dpred, self.hidden)
        return loss, grads


def init_model(kind, seed, hidden=HIDDEN, dtype=np.float64):
    """Glorot-uniform weights, zero biases (LSTM forget-gate bias 1)."""
    kind = Kind(kind)
    rng = np.random.default_rng([int(seed), _KIND_CODE[kind]])
    p = {}
    if kind is Kind.DNN:
        sizes = [WINDOW, hidden, hidden, 1]
        for i, (a, b) in enumerate(zip(sizes, sizes[1:]), start=1):
            p[f"W{i}"] = _glorot(rng, a, b, dtype)
            p[f"b{i}"] = np.zeros(b, dtype=dtype)
    else:
        for layer, n_in in ((1, 1), (2, hidden)):
            p[f"Wx{layer}"] = _glorot(rng, n_in, 4 * hidden, dtype)
            p[f"Wh{layer}"] = _glorot(rng, hidden, 4 * hidden, dtype)
            bias = np.zeros(4 * hidden, dtype=dtype)
            bias[hidden : 2 * hidden] = 1.0
            p[f"b{layer}"] = bias
        p["Wout"] = _glorot(rng, hidden, 1, dtype)
        p["bout"] = np.zeros(1, dtype=dtype)
    return Model(kind, p, seed=int(seed), hidden=hidden)


def _dnn_forward(p, x):
    z1 = x @ p["W1"] + p["b1"]
    a1 = np.maximum(z1, 0)
    z2 = a1 @ p["W2"] + p["b2"]
    a2 = np.maximum(z2, 0)
    out = (a2 @ p["W3"] + p["b3"])[:, 0]
    return out, (x, z1, a1, z2, a2)


def _dnn_backward(p, cache, dout):
    x, z1, a1, z2, a2 = cache
    d3 = dout[:, None]
    g = {"W3": a2.T @ d3, "b3": d3.sum(0)}
    d2 = (d3 @ p["W3"].T) * (z2 > 0)
    g["W2"] = a1.T @ d2
    g["b2"] = d2.sum(0)
    d1 = (d2 @ p["W2"].T) * (z1 > 0)
    g["W1"] = x.T @ d1
    g["b1"] = d1.sum(0)
    return g


def _gate_scale(hidden, dtype):
    # sigmoid(z) = 0.5 + 0.5 * tanh(z / 2): one tanh covers all four gates
    scale = np.full(4 * hidden, 0.5, dtype=dtype)
    scale[2 * hidden : 3 * hidden] = 1.0
    return scale


def _lstm_layer_forward(xproj, wh, hidden):
    """Run one LSTM layer over a time-major input projection ``(T, n, 4H)``."""
    steps, n, _ = xproj.shape
    H = hidden
    dtype = xproj.dtype
    scale = _gate_scale(H, dtype)
    h = np.zeros((n, H), dtype=dtype)
    c = np.zeros((n, H), dtype=dtype)
    hs = np.empty((steps, n, H), dtype=dtype)
    cs = np.zeros((steps + 1, n, H), dtype=dtype)
    tcs = np.empty((steps, n, H), dtype=dtype)
    gates = np.empty((steps, n, 4 * H), dtype=dtype)
    for t in range(steps):
        z = xproj[t] + h @ wh
        z *= scale
        a = gates[t]
        np.tanh(z, out=a)
        for sl in (slice(0, 2 * H), slice(3 * H, 4 * H)):
            a[:, sl] *= 0.5
            a[:, sl] += 0.5
        c = a[:, H : 2 * H] * c + a[:, :H] * a[:, 2 * H : 3 * H]
        cs[t + 1] = c
        np.tanh(c, out=tcs[t])
        h = a[:, 3 * H :] * tcs[t]
        hs[t] = h
    return hs, (cs, tcs, gates)


def _lstm_layer_backward(dhs, wh, hs, cache, hidden):
    """BPTT through one layer; returns d(pre-activation) for every step and dWh."""
    cs, tcs, gates = cache
    steps, n, H = dhs.shape
    dz = np.empty((steps, n, 4 * H), dtype=dhs.dtype)
    dh_next = np.zeros((n, H), dtype=dhs.dtype)
    dc_next = np.zeros((n, H), dtype=dhs.dtype)
    for t in reversed(range(steps)):
        a = gates[t]
        i, f, g, o = a[:, :H], a[:, H : 2 * H], a[:, 2 * H : 3 * H], a[:, 3 * H :]
        tc = tcs[t]
        dh = dhs[t] + dh_next
        dc = dc_next + dh * o * (1.0 - tc * tc)
        d = dz[t]
        d[:, :H] = dc * g * i * (1.0 - i)
        d[:, H : 2 * H] = dc * cs[t] * f * (1.0 - f)
        d[:, 2 * H : 3 * H] = dc * i * (1.0 - g * g)
        d[:, 3 * H :] = dh * tc * o * (1.0 - o)
        dc_next = dc * f
        dh_next = d @ wh.T
    # h_{t-1} is zero at t = 0, so only steps 1.. contribute to dWh
    dwh = hs[:-1].reshape(-1, H).T @ dz[1:].reshape(-1, 4 * H)
    return dz, dwh


def _lstm_forward(p, x, hidden):
    n, steps = x.shape
    xt = np.ascontiguousarray(x.T)
    xproj1 = xt[:, :, None] * p["Wx1"][0] + p["b1"]
    hs1, c1 = _lstm_layer_forward(xproj1, p["Wh1"], hidden)
    xproj2 = (hs1.reshape(steps * n, hidden) @ p["Wx2"]).reshape(steps, n, -1) + p["b2"]
    hs2, c2 = _lstm_layer_forward(xproj2, p["Wh2"], hidden)
    out = (hs2[-1] @ p["Wout"] + p["bout"])[:, 0]
    return out, (xt, hs1, c1, hs2, c2)


def _lstm_backward(p, cache, dout, hidden):
    xt, hs1, c1, hs2, c2 = cache
    steps, n = xt.shape
    H = hidden
    g = {"Wout": hs2[-1].T @ dout[:, None], "bout": np.atleast_1d(dout.sum())}
    dhs2 = np.zeros_like(hs2)
    dhs2[-1] = dout[:, None] @ p["Wout"].T
    dz2, g["Wh2"] = _lstm_layer_backward(dhs2, p["Wh2"], hs2, c2, H)
    flat2 = dz2.reshape(steps * n, 4 * H)
    g["Wx2"] = hs1.reshape(steps * n, H).T @ flat2
    g["b2"] = flat2.sum(0)
    dhs1 = (flat2 @ p["Wx2"].T).reshape(steps, n, H)
    dz1, g["Wh1"] = _lstm_layer_backward(dhs1, p["Wh1"], hs1, c1, H)
    flat1 = dz1.reshape(steps * n, 4 * H)
    g["Wx1"] = xt.reshape(1, steps * n) @ flat1
    g["b1"] = flat1.sum(0)
    return g


def forward(model, batch_inputs):
    return model.forward(batch_inputs)


def predict(model, test_inputs):
    """Pure forward pass; predictions are in scaled space."""
    return model.forward(test_inputs)


# -- optimisation -----------------------------------------------------------


@dataclass
class AdamState:
    learning_rate: float
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    step: int = 0
    m: dict = field(default_factory=dict)
    v: dict = field(default_factory=dict)

    @classmethod
    def for_model(cls, model, config):
        return cls(
            learning_rate=config.learning_rate,
            beta1=config.beta1,
            beta2=config.beta2,
            epsilon=config.epsilon,
            m={k: np.zeros_like(v) for k, v in model.params.items()},
            v={k: np.zeros_like(v) for k, v in model.params.items()},
        )

    def update(self, params, grads):
        """One bias-corrected Adam step, in place."""
        self.step += 1
        b1, b2 = self.beta1, self.beta2
        c1 = 1.0 - b1**self.step
        c2 = 1.0 - b2**self.step
        for name, g in grads.items():
            m, v = self.m[name], self.v[name]
            m *= b1
            m += (1.0 - b1) * g
            v *= b2
            v += (1.0 - b2) * (g * g)
            params[name] -= (self.learning_rate * (m / c1) / (np.sqrt(v / c2) + self.epsilon)).astype(
                params[name].dtype, copy=False
            )


def stage_rng(seed, kind, stage_index, role):
    """Independent shuffling stream for one training stage.

    ``role`` is 0 for pre-training stages and 1 for fine-tuning, so a stage's
    stream depends only on (seed, architecture, position in the chain).
    """
    return np.random.default_rng([int(seed), _KIND_CODE[Kind(kind)], int(stage_index), int(role)])


def train(model, dataset, config, rng=None, stage=None):
    """Mini-batch Adam on MSE. Mutates ``model`` and returns (model, per-epoch mean losses).

    Each epoch reshuffles with ``rng``; the final partial batch is kept.
    """
    x = np.asarray(dataset.inputs, dtype=model.dtype)
    y = np.asarray(dataset.targets, dtype=model.dtype)
    n = len(y)
    if n == 0:
        raise ValueError("cannot train on an empty dataset")
    if rng is None:
        rng = stage_rng(model.seed or 0, model.kind, 0, 0)
    adam = AdamState.for_model(model, config)
    history = []
    for epoch in range(1, config.epochs + 1):
        order = rng.permutation(n)
        total = 0.0
        for start in range(0, n, config.batch_size):
            idx = order[start : start + config.batch_size]
            loss, grads = model.loss_and_grads(x[idx], y[idx])
            if not np.isfinite(loss):
                raise NonFiniteLoss(epoch, stage)
            total += loss * len(idx)
            if config.learning_rate > 0:
                adam.update(model.params, grads)
        history.append(total / n)
    return model, history


@dataclass
class StageLog:
    name: str
    role: str
    learning_rate: float
    losses: list
    digest: str = ""


def pretrain_then_finetune(
    kind,
    sources,
    target_train,
    seed,
    pretrain=PRETRAIN,
    finetune=FINETUNE,
    source_keys=None,
    cache=None,
    dtype=np.float64,
    hidden=HIDDEN,
):
    """Pre-train sequentially on ``sources`` then fine-tune on ``target_train``.

    A fresh Adam state starts every stage and all layers stay trainable.
    Returns ``(model, stages)`` where ``stages`` is a list of :class:`StageLog`.

    If ``cache`` (a dict) and ``source_keys`` are given, the model after each
    pre-training prefix is memoised under ``(kind, seed, keys[:k+1])`` so
    chains that share a prefix train it only once.
    """
    sources = list(sources)
    if not sources:
        raise NoSource("at least one source dataset is required")
    kind = Kind(kind)
    keys = list(source_keys) if source_keys is not None else None
    if keys is not None and len(keys) != len(sources):
        raise ValueError("source_keys must match sources one-to-one")

    model, stages = None, []
    start = 0
    if cache is not None and keys is not None:
        for k in range(len(sources), 0, -1):
            hit = cache.get((kind, int(seed), hidden, np.dtype(dtype).str, tuple(keys[:k])))
            if hit is not None:
                model = hit[0].copy()
                stages = [replace(s) for s in hit[1]]
                start = k
                break
    if model is None:
        model = init_model(kind, seed, hidden=hidden, dtype=dtype)

    for k in range(start, len(sources)):
        name = keys[k] if keys is not None else f"source{k + 1}"
        _, losses = train(model, sources[k], pretrain, stage_rng(seed, kind, k, 0), stage=name)
        stages.append(StageLog(name, "pretrain", pretrain.learning_rate, losses, model.digest()))
        if cache is not None and keys is not None:
            cache[(kind, int(seed), hidden, np.dtype(dtype).str, tuple(keys[: k + 1]))] = (
                model.copy(),
                [replace(s) for s in stages],
            )

    _, losses = train(model, target_train, finetune, stage_rng(seed, kind, len(sources), 1), stage="target")
    stages.append(StageLog("target", "finetune", finetune.learning_rate, losses, model.digest()))
    return model, stages


# -- checkpoints ------------------------------------------------------------


def save_checkpoint(model, path, config=None):
    """JSON tensor dump with shapes, seed, training config and digest."""
    doc = {
        "kind": model.kind.value,
        "seed": model.seed,
        "hidden": model.hidden,
        "dtype": np.dtype(model.dtype).str,
        "config": None if config is None else config.__dict__,
        "digest": model.digest(),
        "tensors": {
            k: {"shape": list(v.shape), "data": v.astype(np.float64).ravel().tolist()}
            for k, v in model.params.items()
        },
    }
    Path(path).write_text(json.dumps(doc), encoding="utf-8")


def load_checkpoint(path):
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    dtype = np.dtype(doc["dtype"])
    params = {
        k: np.asarray(t["data"], dtype=np.float64).reshape(t["shape"]).astype(dtype)
        for k, t in doc["tensors"].items()
    }
    model = Model(doc["kind"], params, seed=doc["seed"], hidden=doc["hidden"])
    if model.digest() != doc["digest"]:
        raise ValueError(f"{path}: checkpoint digest mismatch")
    return model
