"""Seeded random baselines over the discrete space plus the significance and
effect-size machinery used by the analysis suites.

All randomness flows from one master seed through named sub-streams so any
stage can be reproduced in isolation.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np
from scipy.special import stdtr

from .errors import DegenerateSample, ZeroVariance
from .ontology import Ontology


def derive_rng(master_seed: int, stream: str) -> np.random.Generator:
    """Deterministic generator for a named sub-stream of the master seed."""
    tag = int.from_bytes(hashlib.sha256(stream.encode("utf-8")).digest()[:8], "big")
    return np.random.default_rng(np.random.SeedSequence([master_seed, tag]))


def derive_seed(master_seed: int, stream: str) -> int:
    """Deterministic integer seed for a named sub-stream of the master seed."""
    tag = int.from_bytes(hashlib.sha256(stream.encode("utf-8")).digest()[:8], "big")
    return int(np.random.SeedSequence([master_seed, tag]).generate_state(1, np.uint64)[0])


@dataclass(frozen=True)
class BaselineSpec:
    """How to draw uniform random groups from an ontology's discrete space."""

    space: Ontology
    points_per_group: int = 47
    groups: int = 1000
    seed: int = 0

    def __post_init__(self):
        if self.points_per_group < 2:
            raise ValueError("points_per_group must be >= 2")
        if self.groups < 1:
            raise ValueError("groups must be >= 1")


def sample_uniform_positions(spec: BaselineSpec) -> list[np.ndarray]:
    """Uniform groups over all ``n ** d`` positions, as unit-cube centers.

    Each coordinate index is drawn independently and uniformly from
    ``[0, n)``; positions are then mapped to bin centers. Deterministic for
    a fixed seed.
    """
    n = spec.space.bins_per_dim
    d = spec.space.dim
    rng = derive_rng(spec.seed, "baseline")
    idx = rng.integers(0, n, size=(spec.groups, spec.points_per_group, d))
    centers = (idx + 0.5) / n
    return [centers[g] for g in range(spec.groups)]


def welch_t_test(sample_a, sample_b) -> float:
    """Two-sided p-value of Welch's unequal-variance t-test.

    Uses the Welch-Satterthwaite degrees of freedom and the regularized
    incomplete beta function (via the Student-t CDF).
    """
    a = np.asarray(sample_a, dtype=float)
    b = np.asarray(sample_b, dtype=float)
    na, nb = a.size, b.size
    if na < 2 or nb < 2:
        raise DegenerateSample("both samples need at least 2 values")
    va = float(a.var(ddof=1))
    vb = float(b.var(ddof=1))
    if va == 0.0 and vb == 0.0:
        raise DegenerateSample("at least one sample must have non-zero variance")
    sa, sb = va / na, vb / nb
    t = (float(a.mean()) - float(b.mean())) / np.sqrt(sa + sb)
    df = (sa + sb) ** 2 / (sa**2 / (na - 1) + sb**2 / (nb - 1))
    return float(2.0 * stdtr(df, -abs(t)))


def cohens_d(sample_a, sample_b) -> float:
    """Classic pooled-standard-deviation effect size, sample_a minus sample_b."""
    a = np.asarray(sample_a, dtype=float)
    b = np.asarray(sample_b, dtype=float)
    na, nb = a.size, b.size
    if na < 1 or nb < 1 or na + nb < 3:
        raise DegenerateSample("need at least 3 values across both samples")
    va = float(a.var(ddof=1)) if na > 1 else 0.0
    vb = float(b.var(ddof=1)) if nb > 1 else 0.0
    pooled = np.sqrt(((na - 1) * va + (nb - 1) * vb) / (na + nb - 2))
    if pooled == 0.0:
        raise ZeroVariance("pooled standard deviation is zero")
    return float((a.mean() - b.mean()) / pooled)


@dataclass(frozen=True)
class ComparisonResult:
    """Observed-vs-baseline summary for one metric."""

    observed_mean: float
    observed_median: float
    baseline_mean: float
    baseline_median: float
    p_value: float | None
    cohens_d: float | None

    def to_dict(self) -> dict:
        return {
            "observed_mean": self.observed_mean,
            "observed_median": self.observed_median,
            "baseline_mean": self.baseline_mean,
            "baseline_median": self.baseline_median,
            "p_value": self.p_value,
            "cohens_d": self.cohens_d,
        }


def compare_to_baseline(observed, baseline) -> ComparisonResult:
    """Bundle means/medians with Welch p and Cohen's d (observed minus baseline).

    When a statistic is undefined for the given samples (too few values,
    zero variance everywhere) its field is None rather than a fabricated
    number.
    """
    obs = np.asarray(observed, dtype=float)
    base = np.asarray(baseline, dtype=float)
    try:
        p = welch_t_test(obs, base)
    except DegenerateSample:
        p = None
    try:
        d = cohens_d(obs, base)
    except (DegenerateSample, ZeroVariance):
        d = None
    return ComparisonResult(
        observed_mean=float(obs.mean()),
        observed_median=float(np.median(obs)),
        baseline_mean=float(base.mean()),
        baseline_median=float(np.median(base)),
        p_value=p,
        cohens_d=d,
    )
