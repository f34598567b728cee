"""Build a discretized feature ontology over a corpus, step by step.

Generates a synthetic music corpus, fits equal-frequency bin edges, shows
how one song becomes a grid position, and runs the density-driven
resolution search.
"""

import numpy as np

from vecont.dataset import synthesize
from vecont.defaults import default_synth_spec
from vecont.ontology import (
    assign_bin,
    bin_center,
    fit_edges,
    occupancy,
    search_resolution,
)

spec = default_synth_spec(songs_per_genre=100, seed=7)
records = synthesize(spec)
features = np.asarray([r.features for r in records])
print(f"synthesized {len(records)} songs across {len(spec.clusters)} genre hotspots")

ontology = fit_edges(features, n=6)
print("\nequal-frequency ranges per dimension (6 bins):")
for spec_ in ontology.dimensions:
    ranges = ", ".join(
        f"{spec_.edges[i]:.2f}-{spec_.edges[i + 1]:.2f}" for i in range(6)
    )
    print(f"  {spec_.name:>16}: {ranges}")

song = records[0]
position = assign_bin(ontology, song.features)
print(f"\n{song.title!r} features: {[round(v, 3) for v in song.features]}")
print(f"grid position: {position}")
print(f"unit-cube center: {np.round(bin_center(ontology, position), 4).tolist()}")
print(f"\naddressable positions: 6^8 = {ontology.total_bins():,}")
print(f"occupancy at n=6: {occupancy(ontology, features):.2%}")

n, occ = search_resolution(features, density_threshold=0.5, n_max=8)
print(f"largest n keeping at least half the grid populated: n={n} (occupancy {occ:.2%})")
