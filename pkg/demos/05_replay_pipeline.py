"""The full pipeline on the shipped replay fixtures, with zero network use.

Runs ingest -> fit -> index -> extract(replay) -> all three analysis suites
-> projection -> report into a temporary directory and narrates the headline
numbers. Pass an output directory as the first argument to keep the
artifacts (and render them with vecont-figs).
"""

import json
import sys
import tempfile
from pathlib import Path

from vecont.pipeline import load_config, run_stages

FIXTURES = Path(__file__).resolve().parent.parent / "tests" / "fixtures"

out_dir = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(tempfile.mkdtemp(prefix="vecont-"))
cfg = load_config(FIXTURES / "config.toml", out_override=str(out_dir))
stages = ["ingest", "fit", "index", "extract", "consistency", "accuracy", "shift",
          "project", "report"]
print(f"running {' -> '.join(stages)} into {out_dir}")
run_stages(stages, cfg)

cons = json.loads((out_dir / "analysis" / "consistency.json").read_text())["consistency"]
acc = json.loads((out_dir / "analysis" / "accuracy.json").read_text())["accuracy"]
shift = json.loads((out_dir / "analysis" / "shift.json").read_text())["shift"]

print(f"\ngenres analyzed: {len(cons['per_genre'])}")
print(f"mean unique locations per genre: {cons['aggregate']['unique_locations']['mean']:.1f} of 47 queries")

c = cons["baselines"]["mean_centroid_distance"]
print("\nconsistency (distance to own centroid):")
print(f"  observed {c['observed_mean']:.3f} vs random {c['baseline_mean']:.3f}"
      f"  (p={c['p_value']:.2g}, d={c['cohens_d']:.1f})")
v = cons["baselines"]["volume_fraction_mean_radius"]
print(f"  covered volume fraction {v['observed_mean']:.2e} vs random {v['baseline_mean']:.3f}")

a = acc["baselines"]["cosine_shifted"]
print("\naccuracy (extraction centroid vs ground-truth centroid, shifted cosine):")
print(f"  observed {a['observed_mean']:.3f} vs mismatched-pair random {a['baseline_mean']:.3f}"
      f"  (p={a['p_value']:.2g}, d={a['cohens_d']:.2f})")

fids = sorted(shift["per_formulation"])
knn = [shift["per_formulation"][f]["knn_mean_cosine"] for f in fids]
print("\nformulation shifts:")
print(f"  {len(fids)} formulations scored; mean 5-NN local cosine {sum(knn) / len(knn):.3f}"
      f" vs random {shift['baseline_knn_mean']:.3f}")
print(f"\nfigure data written to {out_dir / 'figures'} (render with: "
      f"vecont-figs --in {out_dir / 'figures'} --out {out_dir / 'png'})")
