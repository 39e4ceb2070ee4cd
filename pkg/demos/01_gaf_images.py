"""
Turning a price series into a Gramian angular field
===================================================

A window of closing prices is rescaled to [-1, 1], read as angles, and
expanded into the matrix of pairwise angle sums. The result is symmetric,
its diagonal holds the rescaled values, and it does not change when the
prices are scaled or shifted.
"""

import tempfile
from pathlib import Path

import numpy as np

from gaf_transfer.gaf import export_image, gaf_rescale, gaf_to_image, gasf_from_series, read_pgm, to_polar
from gaf_transfer.synthetic import synthetic_manifest

manifest = synthetic_manifest()
closes = manifest["BNK00"].closes[:40]

# Rescale, then take arccos: x = 1 is angle 0, x = -1 is angle pi.
x = gaf_rescale(closes)
polar = to_polar(x)
print("first angles:", np.round(polar.phi[:5], 3))

# cos(phi_i + phi_j) for every pair of time steps
field = gasf_from_series(closes)
print("shape:", field.values.shape, "symmetric:", np.allclose(field.values, field.values.T))
print("diagonal equals 2x^2 - 1:", np.allclose(np.diag(field.values), 2 * x**2 - 1))

# Rescaling the prices leaves the field unchanged
same = gasf_from_series(3.0 * closes + 100.0)
print("max change under 3x + 100:", np.abs(same.values - field.values).max())

# Pixels are 127.5 * value + 127.5; PGM export rounds half up
image = gaf_to_image(field)
out = Path(tempfile.mkdtemp()) / "BNK00.pgm"
export_image(image, out)
print("wrote", out, "pixel range", read_pgm(out).min(), read_pgm(out).max())
