"""Gramian Angular Summation Field encoding of 1-D series.

A series is rescaled into [-1, 1], mapped to polar coordinates
(angle ``arccos(x)``, radius ``t/N``) and encoded as the matrix
``cos(phi_i + phi_j)``. Images are the affine map of that matrix onto
[0, 255]; values stay at full precision until they are exported.
"""

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DegenerateRange, OutOfRange, TooShort

CLAMP_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class PolarSeries:
    phi: np.ndarray
    r: np.ndarray

    @property
    def N(self):
        return len(self.phi)


@dataclass(frozen=True, eq=False)
class GafMatrix:
    values: np.ndarray

    @property
    def source_length(self):
        return self.values.shape[0]


@dataclass(frozen=True, eq=False)
class GafImage:
    pixels: np.ndarray

    @property
    def shape(self):
        return self.pixels.shape


def gaf_rescale(values):
    x = np.asarray(values, dtype=float)
    if x.ndim != 1 or len(x) < 2:
        raise TooShort(f"GAF rescale needs a 1-D series of length >= 2, got shape {x.shape}")
    lo, hi = x.min(), x.max()
    if lo == hi:
        raise DegenerateRange(f"constant series (all values {lo}); GAF is undefined")
    out = ((x - hi) + (x - lo)) / (hi - lo)
    # the two endpoints can land a few ulps outside [-1, 1]
    return np.clip(out, -1.0, 1.0)


def _checked_unit(rescaled):
    x = np.asarray(rescaled, dtype=float)
    if x.ndim != 1 or len(x) == 0:
        raise TooShort("expected a non-empty 1-D array")
    if not np.all(np.isfinite(x)) or np.any(np.abs(x) > 1.0 + CLAMP_TOL):
        bad = x[~(np.abs(x) <= 1.0 + CLAMP_TOL)][0]
        raise OutOfRange(f"value {bad!r} lies outside [-1, 1]")
    return np.clip(x, -1.0, 1.0)


def to_polar(rescaled):
    x = _checked_unit(rescaled)
    n = len(x)
    return PolarSeries(phi=np.arccos(x), r=np.arange(1, n + 1) / n)


def gasf(rescaled):
    phi = to_polar(rescaled).phi
    return GafMatrix(np.cos(np.add.outer(phi, phi)))


def gasf_from_series(values):
    """Rescale a raw series and encode it in one step."""
    return gasf(gaf_rescale(values))


def gaf_to_image(gaf):
    return GafImage(gaf.values * 127.5 + 127.5)


def quantize(pixels):
    """Round half-up onto the integer grid 0..255."""
    return np.clip(np.floor(np.asarray(pixels, dtype=float) + 0.5), 0, 255).astype(np.int64)


def export_image(image, path):
    """Write an image as a plain-text (P2) PGM with maxval 255."""
    q = quantize(image.pixels)
    if q.ndim != 2 or q.size == 0:
        raise ValueError(f"expected a non-empty 2-D image, got shape {q.shape}")
    rows, cols = q.shape
    lines = ["P2", f"{cols} {rows}", "255"]
    lines += [" ".join(str(v) for v in row) for row in q]
    Path(path).write_text("\n".join(lines) + "\n", encoding="ascii")


def read_pgm(path):
    """Read a P2 PGM back into an integer array (comments allowed)."""
    tokens = []
    for line in Path(path).read_text(encoding="ascii").splitlines():
        tokens += line.split("#", 1)[0].split()
    if not tokens or tokens[0] != "P2":
        raise ValueError(f"{path}: not a P2 PGM file")
    cols, rows, maxval = int(tokens[1]), int(tokens[2]), int(tokens[3])
    body = np.array([int(t) for t in tokens[4:]], dtype=np.int64)
    if body.size != rows * cols or np.any(body > maxval):
        raise ValueError(f"{path}: pixel payload does not match header")
    return body.reshape(rows, cols)
