"""
Scoring a candidate source against the target
=============================================

Eight functions compare raw (min-max scaled) series and seven compare GAF
matrices or images. Pearson, PSNR and SSIM grow with similarity; the others
are distances.
"""

from gaf_transfer.similarity import ALL_SPECS, evaluate
from gaf_transfer.synthetic import synthetic_manifest

manifest = synthetic_manifest()
target = manifest["BNK00"]
candidates = ["BNK01", "OTH01"]

print(f"{'spec':<24}{'direction':<10}" + "".join(f"{c:>14}" for c in candidates))
for spec in ALL_SPECS:
    scores = [evaluate(spec, manifest[c], target) for c in candidates]
    print(f"{spec.id:<24}{spec.direction.value:<10}" + "".join(f"{s:>14.5g}" for s in scores))

# A ticker compared with itself sits at the optimum of every function
print("self-similarity under ssim@gaf_image:", evaluate("ssim@gaf_image", target, target))
