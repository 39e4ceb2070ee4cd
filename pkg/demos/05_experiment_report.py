"""
Running an experiment and comparing GAF with the baseline
=========================================================

An experiment selects sources for every similarity function, trains both
model families on each distinct source chain, and tabulates the metrics.
Rows whose functions picked the same sources share one cell and the best
value of each column is bold. The comparison asks whether the best GAF row
beats the best baseline row.

The full configuration (256 units, 100 epochs) is what ``gaf-tl experiment``
runs; here a small network keeps the demo to a few seconds.
"""

from gaf_transfer.model import TrainConfig
from gaf_transfer.pipeline import render_comparison, render_report, run_grid
from gaf_transfer.synthetic import synthetic_manifest

manifest = synthetic_manifest()
grid = run_grid(
    manifest, seed=0, experiments=(3,),
    pretrain=TrainConfig(epochs=5), finetune=TrainConfig(epochs=5, learning_rate=1e-5),
    hidden=16,
)
baseline, gaf, summary = grid[3]
print(render_report(baseline))
print(render_report(gaf))
print(render_comparison(summary))
