"""Tour of the numeric kernel: distances, affine rank, ball volumes, PCA,
and 2-D hulls, on small hand-made point clouds."""

import numpy as np

from vecont.geometry import (
    affine_dimension,
    ball_volume_fraction,
    centroid,
    cosine_similarity,
    fit_pca,
    hull_2d,
    mean_centroid_distance,
    mean_pairwise_distance,
    project,
)

rng = np.random.default_rng(0)

cloud = rng.random((47, 8))
print("47 random points in the unit 8-cube:")
print(f"  centroid[:3]           {np.round(centroid(cloud)[:3], 3).tolist()}")
print(f"  mean centroid distance {mean_centroid_distance(cloud):.4f}")
print(f"  mean pairwise distance {mean_pairwise_distance(cloud):.4f}")
print(f"  affine dimension       {affine_dimension(cloud)}")

plane = rng.random(8) + rng.random((20, 2)) @ rng.random((2, 8))
print(f"\n20 points confined to a plane in 8-D: affine dimension = {affine_dimension(plane)}")

print("\nball volume as a fraction of the unit cube (radius 0.765):")
for d in (2, 4, 8):
    print(f"  d={d}: {ball_volume_fraction(d, 0.765):.4f}")
print("  (an 8-ball of radius ~1.07 exceeds the cube entirely:"
      f" {ball_volume_fraction(8, 1.07):.2f})")

a, b = np.array([0.7, 0.6, 0.55]), np.array([0.65, 0.62, 0.58])
print(f"\ncosine of two nearby positive vectors: {cosine_similarity(a, b):.4f}")
print(f"same pair after recentering on 0.5:     {cosine_similarity(a, b, shift=0.5):.4f}")

stretched = rng.standard_normal((200, 8)) * np.array([5, 3, 1, 0.5, 0.2, 0.1, 0.05, 0.02])
model = fit_pca(stretched, k=2)
share = model.explained_variance.sum() / np.trace(np.cov(stretched, rowvar=False, ddof=1))
print(f"\nPCA on an anisotropic cloud: top-2 components explain {share:.1%} of variance")
flat = project(model, stretched)
ring = hull_2d(flat)
print(f"projected to 2-D; convex hull has {len(ring)} vertices")
