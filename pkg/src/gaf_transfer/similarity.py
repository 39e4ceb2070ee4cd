"""Domain-distance functions over raw series, GAF matrices and GAF images.

Every function here is pure. Distances (direction ``MINIMIZE``) are zero on
identical inputs; Pearson, PSNR and SSIM are similarities (``MAXIMIZE``).
:func:`evaluate` is the single dispatch point used by source selection.
"""

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from . import gaf as gaf_mod
from .data import WINDOW, fit_minmax, make_windows, split_train_test
from .errors import (
    DimensionMismatch,
    EmptySample,
    EmptySeries,
    InvalidCombination,
    InvalidParameter,
    LengthMismatch,
    NegativeParameter,
    TooFewSamples,
    TooShort,
    ZeroVariance,
)

CMD_MOMENTS = 5
TWED_LAMBDA = 1.0
TWED_NU = 0.001
SSIM_K1 = 0.01
SSIM_K2 = 0.03
DYNAMIC_RANGE = 255.0
ARE_ALPHA = 0.5


class Function(str, Enum):
    EUCLIDEAN = "euclidean"
    PEARSON = "pearson"
    MMD = "mmd"
    CMD = "cmd"
    CORAL = "coral"
    DTW = "dtw"
    TWED = "twed"
    WASSERSTEIN = "wasserstein"
    ARE = "are"
    PSNR = "psnr"
    SSIM = "ssim"

    @property
    def label(self):
        return _LABELS[self]


_LABELS = {
    Function.EUCLIDEAN: "Euclidean",
    Function.PEARSON: "Pearson",
    Function.MMD: "MMD",
    Function.CMD: "CMD",
    Function.CORAL: "Coral",
    Function.DTW: "DTW",
    Function.TWED: "TWED",
    Function.WASSERSTEIN: "Wasserstein",
    Function.ARE: "ARE",
    Function.PSNR: "PSNR",
    Function.SSIM: "SSIM",
}


class Mode(str, Enum):
    RAW = "raw"
    GAF_MATRIX = "gaf_matrix"
    GAF_IMAGE = "gaf_image"


class Direction(str, Enum):
    MINIMIZE = "minimize"
    MAXIMIZE = "maximize"


ALLOWED = {
    Mode.RAW: (
        Function.EUCLIDEAN,
        Function.PEARSON,
        Function.MMD,
        Function.CMD,
        Function.CORAL,
        Function.DTW,
        Function.TWED,
        Function.WASSERSTEIN,
    ),
    Mode.GAF_MATRIX: (Function.EUCLIDEAN, Function.CORAL, Function.CMD, Function.WASSERSTEIN),
    Mode.GAF_IMAGE: (Function.ARE, Function.PSNR, Function.SSIM),
}

MAXIMIZED = frozenset({Function.PEARSON, Function.PSNR, Function.SSIM})


@dataclass(frozen=True)
class SimilaritySpec:
    function: Function
    mode: Mode = Mode.RAW

    def __post_init__(self):
        try:
            object.__setattr__(self, "function", Function(self.function))
            object.__setattr__(self, "mode", Mode(self.mode))
        except ValueError as exc:
            raise InvalidCombination(str(exc)) from None
        if self.function not in ALLOWED[self.mode]:
            raise InvalidCombination(
                f"{self.function.label} is not available in {self.mode.value} mode"
            )

    @classmethod
    def of(cls, function, gaf=False):
        """Build a spec from a function name; ``gaf`` picks matrix or image mode."""
        try:
            function = Function(str(getattr(function, "value", function)).lower())
        except ValueError:
            raise InvalidCombination(f"unknown similarity function {function!r}") from None
        if not gaf:
            return cls(function, Mode.RAW)
        mode = Mode.GAF_IMAGE if function in ALLOWED[Mode.GAF_IMAGE] else Mode.GAF_MATRIX
        return cls(function, mode)

    @classmethod
    def parse(cls, text):
        """Inverse of :attr:`id`."""
        function, _, mode = text.partition("@")
        return cls(function, mode or Mode.RAW)

    @property
    def direction(self):
        return Direction.MAXIMIZE if self.function in MAXIMIZED else Direction.MINIMIZE

    @property
    def uses_gaf(self):
        return self.mode is not Mode.RAW

    @property
    def id(self):
        return f"{self.function.value}@{self.mode.value}"

    @property
    def label(self):
        return self.function.label


BASELINE_SPECS = tuple(SimilaritySpec(f, Mode.RAW) for f in ALLOWED[Mode.RAW])
GAF_SPECS = tuple(SimilaritySpec(f, Mode.GAF_MATRIX) for f in ALLOWED[Mode.GAF_MATRIX]) + tuple(
    SimilaritySpec(f, Mode.GAF_IMAGE) for f in ALLOWED[Mode.GAF_IMAGE]
)
ALL_SPECS = BASELINE_SPECS + GAF_SPECS


@dataclass(frozen=True, eq=False)
class AlignedPair:
    a: np.ndarray
    b: np.ndarray


def align(a, b):
    """Truncate both series to their most recent common length."""
    a = np.asarray(a, dtype=float).ravel()
    b = np.asarray(b, dtype=float).ravel()
    n = min(len(a), len(b))
    if n < 2:
        raise TooShort(f"aligned length {n} < 2")
    return AlignedPair(a[len(a) - n :], b[len(b) - n :])


def _pair(a, b):
    if isinstance(a, AlignedPair):
        return a.a, a.b
    x = np.asarray(a, dtype=float)
    y = np.asarray(b, dtype=float)
    if x.shape != y.shape:
        raise LengthMismatch(f"shapes differ: {x.shape} vs {y.shape}; align first")
    return x.ravel(), y.ravel()


def euclidean(a, b=None):
    x, y = _pair(a, b)
    return float(np.sqrt(np.sum((x - y) ** 2)))


def pearson(a, b=None):
    x, y = _pair(a, b)
    dx = x - x.mean()
    dy = y - y.mean()
    sxx, syy = np.dot(dx, dx), np.dot(dy, dy)
    if sxx == 0 or syy == 0:
        raise ZeroVariance("Pearson correlation needs non-constant inputs")
    r = np.dot(dx, dy) / np.sqrt(sxx * syy)
    return float(np.clip(r, -1.0, 1.0))


def _samples(x, name):
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    if x.ndim != 2 or x.shape[0] == 0:
        raise EmptySample(f"{name}: expected a non-empty sample matrix, got shape {x.shape}")
    return x


def _sq_dists(x, y):
    d = (x * x).sum(1)[:, None] + (y * y).sum(1)[None, :] - 2.0 * x @ y.T
    return np.maximum(d, 0.0)


def median_bandwidth(pooled):
    """Median of squared pairwise distances among distinct pooled samples."""
    n = len(pooled)
    if n < 2:
        return 1.0
    d = _sq_dists(pooled, pooled)[np.triu_indices(n, k=1)]
    med = float(np.median(d))
    return med if med > 0 else 1.0


def mmd(source_windows, target_windows, bandwidth=None):
    """Biased (V-statistic) MMD with an RBF kernel ``exp(-d^2 / bandwidth)``.

    ``bandwidth`` defaults to the median heuristic over the pooled sample.
    Returns the square root of the clipped MMD^2 estimate.
    """
    x = _samples(source_windows, "source")
    y = _samples(target_windows, "target")
    if x.shape[1] != y.shape[1]:
        raise DimensionMismatch(f"feature dims differ: {x.shape[1]} vs {y.shape[1]}")
    if bandwidth is None:
        bandwidth = median_bandwidth(np.vstack([x, y]))
    kxx = np.exp(-_sq_dists(x, x) / bandwidth).mean()
    kyy = np.exp(-_sq_dists(y, y) / bandwidth).mean()
    kxy = np.exp(-_sq_dists(x, y) / bandwidth).mean()
    return float(np.sqrt(max(kxx + kyy - 2.0 * kxy, 0.0)))


def cmd(a, b, n_moments=CMD_MOMENTS, bounds=(-1.0, 1.0)):
    """Central moment discrepancy of order ``n_moments`` on samples in ``bounds``.

    1-D inputs are scalar samples; 2-D inputs are ``(n, d)`` sample matrices
    whose per-coordinate moment vectors are compared in Euclidean norm.
    """
    x = _samples(a, "a")
    y = _samples(b, "b")
    if x.shape[1] != y.shape[1]:
        raise DimensionMismatch(f"feature dims differ: {x.shape[1]} vs {y.shape[1]}")
    span = abs(bounds[1] - bounds[0])
    mx, my = x.mean(0), y.mean(0)
    total = np.linalg.norm(mx - my) / span
    cx, cy = x - mx, y - my
    for k in range(2, n_moments + 1):
        diff = (cx**k).mean(0) - (cy**k).mean(0)
        total += np.linalg.norm(diff) / span**k
    return float(total)


def coral(source_features, target_features):
    """CORAL distance ``||C_s - C_t||_F^2 / (4 d^2)`` with unbiased covariances."""
    xs = np.asarray(source_features, dtype=float)
    xt = np.asarray(target_features, dtype=float)
    if xs.ndim != 2 or xt.ndim != 2:
        raise DimensionMismatch("CORAL expects 2-D sample matrices")
    if xs.shape[1] != xt.shape[1]:
        raise DimensionMismatch(f"feature dims differ: {xs.shape[1]} vs {xt.shape[1]}")
    if xs.shape[0] < 2 or xt.shape[0] < 2:
        raise TooFewSamples("CORAL needs at least 2 samples per domain")
    d = xs.shape[1]
    cs = np.cov(xs, rowvar=False, ddof=1).reshape(d, d)
    ct = np.cov(xt, rowvar=False, ddof=1).reshape(d, d)
    return float(np.sum((cs - ct) ** 2) / (4.0 * d * d))


def _series(x, name):
    x = np.asarray(x, dtype=float).ravel()
    if len(x) == 0:
        raise EmptySeries(f"{name} is empty")
    return x


def dtw(a, b):
    """Unconstrained DTW with absolute local cost."""
    x = _series(a, "a").tolist()
    y = _series(b, "b").tolist()
    m = len(y)
    inf = math.inf
    prev = [inf] * (m + 1)
    prev[0] = 0.0
    for xi in x:
        cur = [inf] * (m + 1)
        left = inf
        for j in range(1, m + 1):
            p = prev[j - 1]
            u = prev[j]
            best = p if p < u else u
            if left < best:
                best = left
            left = abs(xi - y[j - 1]) + best
            cur[j] = left
        prev = cur
    return prev[m]


def twed(a, b, lam=TWED_LAMBDA, nu=TWED_NU):
    """Time warp edit distance with 1-based index timestamps.

    Both series are padded with a 0 value at timestamp 0.
    """
    if lam < 0 or nu < 0:
        raise NegativeParameter(f"lambda and nu must be >= 0, got {lam}, {nu}")
    x = [0.0] + _series(a, "a").tolist()
    y = [0.0] + _series(b, "b").tolist()
    n, m = len(x) - 1, len(y) - 1
    inf = math.inf
    prev = [0.0] + [inf] * m
    for i in range(1, n + 1):
        cur = [inf] * (m + 1)
        del_a = abs(x[i] - x[i - 1]) + nu + lam
        for j in range(1, m + 1):
            match = (
                prev[j - 1]
                + abs(x[i] - y[j])
                + abs(x[i - 1] - y[j - 1])
                + nu * (abs(i - j) + abs((i - 1) - (j - 1)))
            )
            da = prev[j] + del_a
            db = cur[j - 1] + abs(y[j] - y[j - 1]) + nu + lam
            best = match if match < da else da
            cur[j] = db if db < best else best
        prev = cur
    return prev[m]


def wasserstein(a, b):
    """1-D Wasserstein-1 distance between two empirical distributions."""
    u = np.sort(_series(a, "a"))
    v = np.sort(_series(b, "b"))
    if len(u) == len(v):
        return float(np.mean(np.abs(u - v)))
    grid = np.concatenate([u, v])
    grid.sort(kind="mergesort")
    widths = np.diff(grid)
    cdf_u = np.searchsorted(u, grid[:-1], side="right") / len(u)
    cdf_v = np.searchsorted(v, grid[:-1], side="right") / len(v)
    return float(np.sum(np.abs(cdf_u - cdf_v) * widths))


def _pixels(img):
    return np.asarray(getattr(img, "pixels", img), dtype=float)


def _same_shape(x, y):
    x, y = _pixels(x), _pixels(y)
    if x.shape != y.shape:
        raise DimensionMismatch(f"image shapes differ: {x.shape} vs {y.shape}")
    if x.size == 0:
        raise EmptySample("empty image")
    return x, y


def adapted_rand_error(test, truth, alpha=ARE_ALPHA):
    """Adapted Rand error between two images after half-up quantization to 0..255.

    Every pixel counts; no label is ignored. Not symmetric unless ``alpha`` is 0.5.
    """
    if not 0.0 <= alpha <= 1.0:
        raise InvalidParameter(f"alpha must lie in [0, 1], got {alpha}")
    x, y = _same_shape(test, truth)
    lt = gaf_mod.quantize(x).ravel()
    lu = gaf_mod.quantize(y).ravel()
    n = lt.size
    joint = np.bincount(lt * 256 + lu, minlength=256 * 256).astype(float) / n
    s = np.bincount(lt, minlength=256).astype(float) / n
    t = np.bincount(lu, minlength=256).astype(float) / n
    return float(1.0 - np.sum(joint**2) / (alpha * np.sum(s**2) + (1.0 - alpha) * np.sum(t**2)))


def ssim(x, y, data_range=DYNAMIC_RANGE, k1=SSIM_K1, k2=SSIM_K2):
    """Single-window SSIM over whole-image statistics (sample variances)."""
    x, y = _same_shape(x, y)
    c1 = (k1 * data_range) ** 2
    c2 = (k2 * data_range) ** 2
    mx, my = x.mean(), y.mean()
    ddof = 1 if x.size > 1 else 0
    vx = x.var(ddof=ddof)
    vy = y.var(ddof=ddof)
    cxy = np.sum((x - mx) * (y - my)) / (x.size - ddof)
    num = (2 * mx * my + c1) * (2 * cxy + c2)
    den = (mx**2 + my**2 + c1) * (vx + vy + c2)
    return float(num / den)


def psnr(x, y, max_value=DYNAMIC_RANGE):
    """Peak signal-to-noise ratio in dB; ``inf`` for identical images."""
    x, y = _same_shape(x, y)
    mse = np.mean((x - y) ** 2)
    if mse == 0:
        return math.inf
    return float(10.0 * np.log10(max_value**2 / mse))


# -- dispatch ---------------------------------------------------------------


def scaled_train(series):
    """Training split of a series, min-max scaled with its own fit."""
    train = split_train_test(series).train.closes
    return fit_minmax(train).forward(train)


def gaf_pair(source, target):
    """Equal-size GASF matrices of the most recent common stretch of both training splits."""
    s = split_train_test(source).train.closes
    t = split_train_test(target).train.closes
    n = min(len(s), len(t))
    return gaf_mod.gasf_from_series(s[-n:]), gaf_mod.gasf_from_series(t[-n:])


def evaluate(spec, source, target):
    """Score ``source`` against ``target`` (both :class:`PriceSeries`) under ``spec``."""
    if not isinstance(spec, SimilaritySpec):
        spec = SimilaritySpec.parse(str(spec))
    f = spec.function

    if spec.mode is Mode.RAW:
        s, t = scaled_train(source), scaled_train(target)
        if f in (Function.MMD, Function.CORAL):
            ws = make_windows(s, WINDOW).inputs
            wt = make_windows(t, WINDOW).inputs
            return mmd(ws, wt) if f is Function.MMD else coral(ws, wt)
        if f is Function.DTW:
            return dtw(s, t)
        if f is Function.TWED:
            return twed(s, t)
        pair = align(s, t)
        return {
            Function.EUCLIDEAN: euclidean,
            Function.PEARSON: pearson,
            Function.CMD: lambda p: cmd(p.a, p.b),
            Function.WASSERSTEIN: lambda p: wasserstein(p.a, p.b),
        }[f](pair)

    gs, gt = gaf_pair(source, target)
    if spec.mode is Mode.GAF_MATRIX:
        if f is Function.EUCLIDEAN:
            return euclidean(gs.values, gt.values)
        if f is Function.CORAL:
            return coral(gs.values, gt.values)
        if f is Function.CMD:
            return cmd(gs.values.ravel(), gt.values.ravel())
        return wasserstein(gs.values.ravel(), gt.values.ravel())

    img_s, img_t = gaf_mod.gaf_to_image(gs), gaf_mod.gaf_to_image(gt)
    if f is Function.ARE:
        return adapted_rand_error(img_s, img_t)
    if f is Function.PSNR:
        return psnr(img_s, img_t)
    return ssim(img_s, img_t)


def score_record(spec, source, target, score):
    """JSON-ready score record; infinite scores serialize as ``"inf"``."""
    return {
        "function": spec.function.value,
        "mode": spec.mode.value,
        "source": source,
        "target": target,
        "score": encode_score(score),
    }


def encode_score(score):
    if score is None:
        return None
    if math.isinf(score):
        return "inf" if score > 0 else "-inf"
    return float(score)


def decode_score(value):
    if value in ("inf", "-inf"):
        return float(value)
    return value
