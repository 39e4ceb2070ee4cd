"""
Choosing source domains
=======================

Single-source selection takes the best-scoring candidate of a pool. Two-source
selection takes the best, removes it, and takes the best of the rest. The
cross-pool variant takes one source from the bank pool and one from the
other-industry pool.
"""

from gaf_transfer.pipeline import pools
from gaf_transfer.selection import select_cross_pool, select_multi, select_single
from gaf_transfer.similarity import SimilaritySpec
from gaf_transfer.synthetic import synthetic_manifest

manifest = synthetic_manifest()
target = manifest[manifest.target]
by_group = pools(manifest, target.ticker)
bank, other = by_group["bank"], by_group["other"]

for text in ("euclidean@raw", "euclidean@gaf_matrix", "ssim@gaf_image"):
    spec = SimilaritySpec.parse(text)
    one = select_single(bank, target, spec)
    two = select_multi(bank, target, spec)
    mixed = select_cross_pool(bank, other, target, spec)
    print(f"{text:<22} single {one.chosen}  two {two.chosen}  cross-pool {mixed.chosen}")

# The full score table is kept for auditing
spec = SimilaritySpec.parse("dtw@raw")
result = select_single(bank, target, spec)
for ticker, score in sorted(result.scores.items(), key=lambda kv: kv[1])[:3]:
    print(f"  {ticker}: {score:.4f}")
