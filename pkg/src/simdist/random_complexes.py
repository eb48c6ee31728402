"""Random complexes with a complete skeleton and independent top simplices.

Sampling is driven by the counter-based Philox generator keyed by the seed:
the uniform draw at position r decides the (k+2)-subset of colexicographic
rank r, so inclusion decisions are reproducible regardless of iteration order
and generation can be split across subset ranges.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from itertools import chain, combinations

import numpy as np

from .complexes import SimplicialComplex, build_complex

__all__ = [
    "ConcentrationReport",
    "LmParams",
    "colex_rank",
    "concentration_report",
    "linial_meshulam",
    "skeleton_statistics",
    "top_simplex_sample",
]


@dataclass(frozen=True)
class LmParams:
    """Parameters of the X_{k+1}(N, p) model: complete k-skeleton on N
    vertices, each (k+2)-subset a top simplex independently with probability p."""

    num_vertices: int
    p: float
    k: int
    seed: int

    def __post_init__(self):
        if self.k < 0:
            raise ValueError("skeleton dimension k must be >= 0")
        if self.num_vertices < self.k + 2:
            raise ValueError(
                f"need at least k+2 = {self.k + 2} vertices, got {self.num_vertices}"
            )
        if not 0.0 <= self.p <= 1.0:
            raise ValueError(f"probability p={self.p} outside [0, 1]")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must fit in 64 bits")

    def to_dict(self) -> dict:
        return {
            "n": self.num_vertices,
            "p": self.p,
            "k": self.k,
            "seed": self.seed,
        }


def colex_rank(subset) -> int:
    """Colexicographic rank of a sorted subset: sum of C(a_j, j+1)."""
    return sum(math.comb(a, j + 1) for j, a in enumerate(subset))


def _comb_table(n: int, max_size: int) -> np.ndarray:
    table = np.zeros((n + 1, max_size + 1), dtype=np.int64)
    table[:, 0] = 1
    for v in range(1, n + 1):
        for j in range(1, max_size + 1):
            table[v, j] = table[v - 1, j - 1] + table[v - 1, j]
    return table


def _all_subsets(n: int, size: int) -> np.ndarray:
    flat = np.fromiter(
        chain.from_iterable(combinations(range(n), size)), dtype=np.int64
    )
    return flat.reshape(-1, size)


def _subset_ranks(subsets: np.ndarray, table: np.ndarray) -> np.ndarray:
    ranks = np.zeros(len(subsets), dtype=np.int64)
    for j in range(subsets.shape[1]):
        ranks += table[subsets[:, j], j + 1]
    return ranks


@lru_cache(maxsize=8)
def _subset_rank_cache(n: int, size: int) -> tuple[np.ndarray, np.ndarray]:
    """Subsets plus colex ranks; shared across trials with the same shape."""
    subsets = _all_subsets(n, size)
    ranks = _subset_ranks(subsets, _comb_table(n, size))
    return subsets, ranks


def top_simplex_sample(params: LmParams) -> np.ndarray:
    """Included (k+2)-subsets as a sorted-row integer array."""
    n, size = params.num_vertices, params.k + 2
    total = math.comb(n, size)
    rng = np.random.Generator(np.random.Philox(key=params.seed))
    uniforms = rng.random(total)
    subsets, ranks = _subset_rank_cache(n, size)
    return subsets[uniforms[ranks] < params.p]


def linial_meshulam(params: LmParams) -> SimplicialComplex:
    """Sample the model as a full complex (complete k-skeleton plus the tops)."""
    skeleton = combinations(range(params.num_vertices), params.k + 1)
    tops = [tuple(int(v) for v in row) for row in top_simplex_sample(params)]
    return build_complex(list(skeleton) + tops)


def skeleton_statistics(params: LmParams) -> tuple[int, int, int]:
    """(top simplex count, max k-face degree, min k-face degree) without
    materializing the complex; degrees run over all C(N, k+1) k-subsets."""
    n, k = params.num_vertices, params.k
    tops = top_simplex_sample(params)
    table = _comb_table(n, k + 2)
    n_faces = math.comb(n, k + 1)
    degrees = np.zeros(n_faces, dtype=np.int64)
    for drop in range(k + 2):
        cols = [j for j in range(k + 2) if j != drop]
        facet_ranks = _subset_ranks(tops[:, cols], table)
        degrees += np.bincount(facet_ranks, minlength=n_faces)
    if len(tops) == 0:
        return 0, 0, 0
    return int(len(tops)), int(degrees.max()), int(degrees.min())


@dataclass
class ConcentrationReport:
    """Empirical frequencies of the three concentration events with the
    matching tail bounds: top-count at most p*C(N,k+2)(1+eps), max degree at
    most p(N-k-1)(1+eps), min degree at least p(N-k-1)(1-eps)."""

    params: LmParams
    epsilon: float
    trials: int
    count_event_frequency: float
    degree_event_frequency: float
    min_degree_event_frequency: float
    count_tail_bound: float
    degree_tail_bound: float
    min_degree_tail_bound: float
    mean_top_count: float
    expected_top_count: float
    top_count_std_error: float
    purity_frequency: float
    counts: list[int]

    def to_dict(self) -> dict:
        return {
            "params": self.params.to_dict(),
            "epsilon": self.epsilon,
            "trials": self.trials,
            "count_event_frequency": self.count_event_frequency,
            "degree_event_frequency": self.degree_event_frequency,
            "min_degree_event_frequency": self.min_degree_event_frequency,
            "count_tail_bound": self.count_tail_bound,
            "degree_tail_bound": self.degree_tail_bound,
            "min_degree_tail_bound": self.min_degree_tail_bound,
            "mean_top_count": self.mean_top_count,
            "expected_top_count": self.expected_top_count,
            "top_count_std_error": self.top_count_std_error,
            "purity_frequency": self.purity_frequency,
            "counts": self.counts,
        }

    def csv_rows(self) -> tuple[list[str], list[list]]:
        header = [
            "n", "p", "k", "seed", "epsilon", "trials",
            "count_event_frequency", "degree_event_frequency",
            "min_degree_event_frequency", "count_tail_bound",
            "degree_tail_bound", "min_degree_tail_bound",
            "mean_top_count", "expected_top_count", "top_count_std_error",
            "purity_frequency",
        ]
        row = [
            self.params.num_vertices, self.params.p, self.params.k,
            self.params.seed, self.epsilon, self.trials,
            self.count_event_frequency, self.degree_event_frequency,
            self.min_degree_event_frequency, self.count_tail_bound,
            self.degree_tail_bound, self.min_degree_tail_bound,
            self.mean_top_count, self.expected_top_count,
            self.top_count_std_error, self.purity_frequency,
        ]
        return header, [row]


def concentration_report(
    params: LmParams, epsilon: float, trials: int
) -> ConcentrationReport:
    """Monte Carlo over seeds seed..seed+trials-1 of the three tail events."""
    if not 0.0 < epsilon < 1.0:
        raise ValueError("epsilon must lie strictly between 0 and 1")
    if trials < 1:
        raise ValueError("need at least one trial")
    n, p, k = params.num_vertices, params.p, params.k
    expected = p * math.comb(n, k + 2)
    degree_mean = p * (n - k - 1)

    counts = []
    count_hits = degree_hits = min_degree_hits = purity_hits = 0
    for trial in range(trials):
        trial_params = LmParams(n, p, k, params.seed + trial)
        top_count, max_degree, min_degree = skeleton_statistics(trial_params)
        counts.append(top_count)
        count_hits += top_count <= expected * (1 + epsilon)
        degree_hits += max_degree <= degree_mean * (1 + epsilon)
        min_degree_hits += min_degree >= degree_mean * (1 - epsilon)
        purity_hits += min_degree >= 1

    mean = float(np.mean(counts))
    binom_var = math.comb(n, k + 2) * p * (1 - p)
    std_error = math.sqrt(binom_var / trials)

    count_bound = math.exp(-(epsilon**2) * expected / (2 + epsilon))
    union = math.comb(n, k + 1)
    degree_bound = min(1.0, union * math.exp(-(epsilon**2) * degree_mean / (2 + epsilon)))
    min_degree_bound = min(1.0, union * math.exp(-(epsilon**2) * degree_mean / 2))

    return ConcentrationReport(
        params=params,
        epsilon=epsilon,
        trials=trials,
        count_event_frequency=count_hits / trials,
        degree_event_frequency=degree_hits / trials,
        min_degree_event_frequency=min_degree_hits / trials,
        count_tail_bound=count_bound,
        degree_tail_bound=degree_bound,
        min_degree_tail_bound=min_degree_bound,
        mean_top_count=mean,
        expected_top_count=expected,
        top_count_std_error=std_error,
        purity_frequency=purity_hits / trials,
        counts=counts,
    )
