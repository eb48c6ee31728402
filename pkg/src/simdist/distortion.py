"""Boundary families, spectral filling inequalities, and distortion bounds.

The pipeline: a family of oriented polytope boundaries inside a complex plus
an embedding of the vertices yields, for every member, a combinatorial
filling number and an enclosed projection volume. The distortion of the
embedding is the product of the two suprema of their ratios; a spectral gap
of the upper Laplacian turns counting data into a lower bound for it.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations

import numpy as np

from .cochains import (
    DEFAULT_TOLERANCE,
    Cochain,
    adjoint_differential,
    cohomology_dim,
    differential,
    differential_matrix,
    inner_product,
    norm,
    random_cochain,
    spectrum,
    upper_laplacian,
)
from .complexes import DegreeError, NotPureError, SimplicialComplex
from .gallery import GalleryGraph, UnfillableError, fill_number, is_gallery_connected
from .geometry import (
    Embedding,
    GeometryError,
    OrientedBoundary,
    enclosed_projection_volume,
    simplex_boundary_oriented,
    simplex_boundary_projection_volumes,
    stokes_check,
)
from .random_complexes import LmParams, linial_meshulam

__all__ = [
    "BoundaryFamily",
    "DistortionBound",
    "DistortionReport",
    "EmbeddingSpec",
    "ExperimentReport",
    "FillBoundUndefinedError",
    "HypothesisReport",
    "InequalityCheck",
    "TrialRecord",
    "boundary_pairing",
    "cochain_energy_inequality",
    "combinatorial_fill_bound",
    "compute_hypotheses",
    "distortion_constant",
    "distortion_lower_bound",
    "evaluate_distortion",
    "lm_distortion_experiment",
    "projection_volume_inequality",
    "spectral_embedding",
    "verify_instance",
    "vertex_set_family",
]


class FillBoundUndefinedError(ValueError):
    """The counting bound's logarithm base is degenerate."""


@dataclass
class HypothesisReport:
    """Flags feeding the spectral inequalities and the distortion bound."""

    k: int
    pure: bool
    gallery_connected: bool
    cohomology_zero: bool
    lambda_min_nonzero: float | None
    spectral_zero_multiplicity: int | None
    tolerance: float

    @property
    def lambda_at_least_half(self) -> bool:
        return self.lambda_min_nonzero is not None and self.lambda_min_nonzero >= 0.5

    def all_hold(self, *, require_gallery: bool = True) -> bool:
        ok = self.pure and self.cohomology_zero and self.lambda_min_nonzero is not None
        if require_gallery:
            ok = ok and self.gallery_connected
        return ok

    def flags_string(self) -> str:
        """Compact CSV form: pure, gallery, cohomology, lambda>=1/2."""
        bits = (
            self.pure,
            self.gallery_connected,
            self.cohomology_zero,
            self.lambda_at_least_half,
        )
        return "".join("1" if b else "0" for b in bits)

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "pure": self.pure,
            "gallery_connected": self.gallery_connected,
            "cohomology_zero": self.cohomology_zero,
            "lambda_min_nonzero": self.lambda_min_nonzero,
            "spectral_zero_multiplicity": self.spectral_zero_multiplicity,
            "lambda_at_least_half": self.lambda_at_least_half,
            "tolerance": self.tolerance,
        }


def compute_hypotheses(
    complex_: SimplicialComplex, k: int, tolerance: float = DEFAULT_TOLERANCE
) -> HypothesisReport:
    """Evaluate purity, gallery connectivity, vanishing cohomology, and the
    verified spectral gap at level k. Degenerate instances (no k-simplices or
    no (k+1)-simplices) report the corresponding flags as failing."""
    pure = complex_.is_pure
    if k > complex_.dim:
        return HypothesisReport(k, pure, False, True, None, None, tolerance)
    gallery_connected = is_gallery_connected(complex_, k)
    cohomology_zero = cohomology_dim(complex_, k, tolerance) == 0
    lam = None
    zero_mult = None
    if pure and k <= complex_.dim - 1:
        spectral = spectrum(complex_, k, tolerance)
        lam = spectral.lambda_min_nonzero
        zero_mult = spectral.zero_multiplicity
    return HypothesisReport(
        k, pure, gallery_connected, cohomology_zero, lam, zero_mult, tolerance
    )


class BoundaryFamily:
    """A set of oriented k-dimensional polytope boundaries inside a complex.

    Caches the statistics the inequalities need: s (max faces per member),
    the per-simplex membership counts, and l (min over counted k-simplices of
    weight/count, exact as a Fraction). Statistics are recomputed from the
    members, never user-supplied.
    """

    def __init__(self, complex_: SimplicialComplex, k: int, members, *,
                 vertex_sets: np.ndarray | None = None,
                 covers_all_simplex_boundaries: bool = False):
        members = tuple(members)
        if not members:
            raise ValueError("a boundary family needs at least one member")
        counts = np.zeros(complex_.simplex_count(k), dtype=np.int64)
        s = 0
        for member in members:
            if member.k != k:
                raise DegreeError(f"member of dimension {member.k}, expected {k}")
            if len(member.faces) < 2:
                raise ValueError("polytope boundaries have at least two faces")
            for face, _ in member.faces:
                counts[complex_.index_of(face)] += 1
            s = max(s, len(member.faces))
        self.complex = complex_
        self.k = k
        self.members = members
        self.s = s
        self.counts = counts
        self.vertex_sets = vertex_sets
        self.covers_all_simplex_boundaries = covers_all_simplex_boundaries

    @property
    def size(self) -> int:
        return len(self.members)

    @property
    def l_exact(self) -> Fraction:
        """min over k-simplices belonging to some member of weight/count."""
        weights = self.complex.weights_of_dim(self.k)
        best = None
        for i, count in enumerate(self.counts):
            if count == 0:
                continue
            ratio = Fraction(weights[i], int(count))
            if best is None or ratio < best:
                best = ratio
        if best is None:
            raise ValueError("no k-simplex belongs to any member")
        return best

    @property
    def l(self) -> float:
        return float(self.l_exact)


def vertex_set_family(complex_: SimplicialComplex, k: int) -> BoundaryFamily:
    """All C(N, k+2) simplex boundaries on the vertex set, with the standard
    alternating orientation. Requires the complete k-skeleton, so every face
    exists; each k-simplex then belongs to exactly N-k-1 members."""
    n = complex_.num_vertices
    if complex_.simplex_count(k) != math.comb(n, k + 1):
        raise DegreeError(f"complex lacks a complete {k}-skeleton")
    if n < k + 2:
        raise DegreeError("not enough vertices for any boundary")
    subsets = list(combinations(range(n), k + 2))
    members = [simplex_boundary_oriented(s) for s in subsets]
    return BoundaryFamily(
        complex_, k, members,
        vertex_sets=np.array(subsets, dtype=np.int64),
        covers_all_simplex_boundaries=True,
    )


def boundary_pairing(phi: Cochain, boundary: OrientedBoundary) -> float:
    """Signed sum of a k-cochain over the oriented faces of a boundary.

    Vanishes on coboundaries; on the boundary of a simplex it equals the
    differential evaluated there.
    """
    if boundary.k != phi.k:
        raise DegreeError(f"cochain degree {phi.k} vs boundary dimension {boundary.k}")
    complex_ = phi.complex
    return float(
        sum(sign * phi.values[complex_.index_of(face)]
            for face, sign in boundary.faces)
    )


@dataclass
class InequalityCheck:
    """One evaluation of a spectral filling inequality."""

    lhs: float | None
    rhs: float | None
    margin: float | None
    l: float | None
    s: int
    lam: float | None
    hypotheses: HypothesisReport
    applicable: bool

    def to_dict(self) -> dict:
        return {
            "lhs": self.lhs,
            "rhs": self.rhs,
            "margin": self.margin,
            "l": self.l,
            "s": self.s,
            "lambda": self.lam,
            "applicable": self.applicable,
            "hypotheses": self.hypotheses.to_dict(),
        }


def cochain_energy_inequality(
    complex_: SimplicialComplex,
    family: BoundaryFamily,
    phi: Cochain,
    *,
    hypotheses: HypothesisReport | None = None,
    tolerance: float = DEFAULT_TOLERANCE,
) -> InequalityCheck:
    """Margin of ||d phi||^2 >= (l*lambda/s) * sum over members of the squared
    boundary pairing. Hypothesis failures are reported, not asserted."""
    if phi.k != family.k:
        raise DegreeError("cochain degree must match the family dimension")
    hyp = hypotheses or compute_hypotheses(complex_, family.k, tolerance)
    applicable = hyp.all_hold(require_gallery=False)
    lhs = rhs = margin = None
    l_value = None
    if hyp.pure and family.k <= complex_.dim - 1:
        d_phi = differential(complex_, phi)
        lhs = inner_product(complex_, d_phi, d_phi)
    if applicable and lhs is not None:
        l_value = family.l
        coefficient = l_value * hyp.lambda_min_nonzero / family.s
        rhs = coefficient * sum(
            boundary_pairing(phi, member) ** 2 for member in family.members
        )
        margin = lhs - rhs
    return InequalityCheck(lhs, rhs, margin, l_value, family.s,
                           hyp.lambda_min_nonzero, hyp, applicable and lhs is not None)


def projection_volume_inequality(
    complex_: SimplicialComplex,
    family: BoundaryFamily,
    embedding: Embedding,
    *,
    hypotheses: HypothesisReport | None = None,
    tolerance: float = DEFAULT_TOLERANCE,
) -> InequalityCheck:
    """Margin of sum over (k+1)-simplices of m * volume(boundary image)^2
    >= (l*lambda/s) * sum over members of volume(member image)^2."""
    k = family.k
    if embedding.num_vertices != complex_.num_vertices:
        raise GeometryError("embedding does not cover the vertex set")
    hyp = hypotheses or compute_hypotheses(complex_, k, tolerance)
    applicable = hyp.all_hold(require_gallery=True)
    lhs = rhs = margin = None
    l_value = None
    if hyp.pure and k <= complex_.dim - 1 and complex_.simplex_count(k + 1) > 0:
        tops = np.array(complex_.simplices(k + 1), dtype=np.int64)
        volumes = simplex_boundary_projection_volumes(tops, embedding.points)
        weights = np.asarray(complex_.weights_of_dim(k + 1), dtype=float)
        lhs = float(np.dot(weights, volumes**2))
    if applicable and lhs is not None:
        l_value = family.l
        coefficient = l_value * hyp.lambda_min_nonzero / family.s
        if family.vertex_sets is not None:
            member_volumes = simplex_boundary_projection_volumes(
                family.vertex_sets, embedding.points
            )
            total = float(np.sum(member_volumes**2))
        else:
            total = sum(
                enclosed_projection_volume(member, embedding) ** 2
                for member in family.members
            )
        rhs = coefficient * total
        margin = lhs - rhs
    return InequalityCheck(lhs, rhs, margin, l_value, family.s,
                           hyp.lambda_min_nonzero, hyp, applicable and lhs is not None)


def combinatorial_fill_bound(
    family_size: int, num_k_simplices: int, s: int, max_degree: int, k: int
) -> float:
    """Counting lower bound: some member has filling number at least
    (ln(|B|/|X^(k)|) - s ln 2)/((s-1) ln(D max(k,1))) - 1."""
    if min(family_size, num_k_simplices, s, max_degree) <= 0:
        raise ValueError("all counting inputs must be positive")
    if s < 2:
        raise FillBoundUndefinedError("bound needs members with at least 2 faces")
    base = max_degree * max(k, 1)
    if base <= 1:
        raise FillBoundUndefinedError(
            f"gallery branching base D*max(k,1) = {base} <= 1"
        )
    numerator = math.log(family_size / num_k_simplices) - s * math.log(2.0)
    return numerator / ((s - 1) * math.log(base)) - 1.0


def _max_gallery_degree(complex_: SimplicialComplex, k: int) -> int:
    if k >= complex_.dim:
        return 0
    return max(
        (len(complex_.coface_indices(k, i)) for i in range(complex_.simplex_count(k))),
        default=0,
    )


@dataclass
class DistortionBound:
    """Evaluation of the spectral-counting lower bound for one family."""

    k: int
    n: int
    family_size: int
    num_k_simplices: int
    num_top_simplices: int
    s: int
    d_max: int
    l: float | None
    lam: float | None
    first_factor: float | None
    second_factor: float | None
    second_factor_cap: float | None
    counting_chain_ok: bool | None
    vacuous: bool
    applicable: bool
    bound: float | None
    hypotheses: HypothesisReport

    def to_dict(self) -> dict:
        out = {
            "k": self.k,
            "n": self.n,
            "family_size": self.family_size,
            "num_k_simplices": self.num_k_simplices,
            "num_top_simplices": self.num_top_simplices,
            "s": self.s,
            "d_max": self.d_max,
            "l": self.l,
            "lambda": self.lam,
            "first_factor": self.first_factor,
            "second_factor": self.second_factor,
            "second_factor_cap": self.second_factor_cap,
            "counting_chain_ok": self.counting_chain_ok,
            "vacuous": self.vacuous,
            "applicable": self.applicable,
            "bound": self.bound,
            "hypotheses": self.hypotheses.to_dict(),
        }
        return out


def distortion_lower_bound(
    complex_: SimplicialComplex,
    family: BoundaryFamily,
    *,
    hypotheses: HypothesisReport | None = None,
    tolerance: float = DEFAULT_TOLERANCE,
) -> DistortionBound:
    """Evaluate the counting/spectral lower bound for the family's distortion.

    Refuses to produce a bound when any hypothesis (purity, gallery
    connectivity, vanishing cohomology, verified spectral gap) fails. The
    second factor is always capped by sqrt(2(k+2)*lambda); the exact integer
    counting chain l*|A|/s <= (n+1)!/(k+1)! * |X^(n)| backs that cap and both
    are re-checked on every evaluation.
    """
    k = family.k
    n = complex_.dim
    hyp = hypotheses or compute_hypotheses(complex_, k, tolerance)
    applicable = hyp.all_hold(require_gallery=True)
    d_max = _max_gallery_degree(complex_, k)
    num_k = complex_.simplex_count(k)
    num_top = complex_.simplex_count(n)
    size = family.size

    first = None
    half = size // 2
    base = d_max * max(k, 1)
    vacuous = False
    if half >= 1 and base > 1 and family.s >= 2:
        first = (math.log(half / num_k) - family.s * math.log(2.0)) / (
            (family.s - 1) * math.log(base)
        ) - 1.0
        vacuous = first <= 0.0
    else:
        vacuous = True

    l_value = second = cap = None
    counting_ok = None
    bound = None
    if applicable:
        l_exact = family.l_exact
        l_value = float(l_exact)
        lam = hyp.lambda_min_nonzero
        ratio = (
            2 * math.factorial(k + 2) * l_value * lam * size
            / (math.factorial(n + 1) * family.s * num_top)
        )
        second = math.sqrt(ratio)
        cap = math.sqrt(2 * (k + 2) * lam)
        counting_ok = (
            l_exact * size * Fraction(1, family.s)
            <= Fraction(math.factorial(n + 1), math.factorial(k + 1)) * num_top
        )
        if not counting_ok or second > cap * (1.0 + 1e-9):
            raise RuntimeError(
                "counting-chain invariant violated; family statistics are inconsistent"
            )
        if first is not None:
            bound = first * second
    return DistortionBound(
        k=k, n=n, family_size=size, num_k_simplices=num_k,
        num_top_simplices=num_top, s=family.s, d_max=d_max, l=l_value,
        lam=hyp.lambda_min_nonzero, first_factor=first, second_factor=second,
        second_factor_cap=cap, counting_chain_ok=counting_ok, vacuous=vacuous,
        applicable=applicable, bound=bound, hypotheses=hyp,
    )


@dataclass
class MemberEvaluation:
    """Fill bounds and embedded volume for one family member."""

    faces: tuple
    volume: float
    fill_lower: int
    fill_upper: int
    fill_exact: int | None


@dataclass
class DistortionReport:
    """Distortion of one embedding against one boundary family.

    Filling numbers may only be bracketed, so both suprema and the
    distortion are intervals; `infinite` marks a member whose embedded
    volume vanishes (the distortion is then unbounded by convention).
    """

    k: int
    family_size: int
    evaluated_members: int
    sup_forward_lo: float | None
    sup_forward_hi: float | None
    sup_backward_lo: float | None
    sup_backward_hi: float | None
    distortion_lo: float | None
    distortion_hi: float | None
    infinite: bool
    exact_fill: bool
    hypotheses: HypothesisReport
    bound: DistortionBound | None
    members: list[MemberEvaluation] = field(default_factory=list, repr=False)

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "family_size": self.family_size,
            "evaluated_members": self.evaluated_members,
            "sup_forward_lo": self.sup_forward_lo,
            "sup_forward_hi": self.sup_forward_hi,
            "sup_backward_lo": self.sup_backward_lo,
            "sup_backward_hi": self.sup_backward_hi,
            "distortion_lo": self.distortion_lo,
            "distortion_hi": self.distortion_hi,
            "infinite": self.infinite,
            "exact_fill": self.exact_fill,
            "hypotheses": self.hypotheses.to_dict(),
            "bound": None if self.bound is None else self.bound.to_dict(),
        }


def evaluate_distortion(
    complex_: SimplicialComplex,
    family: BoundaryFamily,
    embedding: Embedding,
    *,
    fill_budget: int = 10_000_000,
    tolerance: float = DEFAULT_TOLERANCE,
    hypotheses: HypothesisReport | None = None,
    include_bound: bool = True,
    keep_members: bool = False,
) -> DistortionReport:
    """Measure the two suprema of volume/filling ratios over the family.

    Boundaries of (k+1)-simplices present in the complex are always included
    alongside the family (they are the members whose filling number is 1);
    for vertex-set families they are already covered. Filling numbers that
    the search could not pin down propagate as intervals.
    """
    k = family.k
    if embedding.num_vertices != complex_.num_vertices:
        raise GeometryError("embedding does not cover the vertex set")
    hyp = hypotheses or compute_hypotheses(complex_, k, tolerance)

    members = list(family.members)
    if family.vertex_sets is not None:
        volumes = simplex_boundary_projection_volumes(
            family.vertex_sets, embedding.points
        ).tolist()
    else:
        volumes = [enclosed_projection_volume(mb, embedding) for mb in members]

    if not family.covers_all_simplex_boundaries:
        present = {frozenset(s for s, _ in mb.faces) for mb in members}
        extra = []
        for sigma in complex_.simplices(k + 1):
            key = frozenset(combinations(sigma, k + 1))
            if key not in present:
                extra.append(simplex_boundary_oriented(sigma))
        if extra:
            members.extend(extra)
            extra_sets = np.array([mb.vertex_set() for mb in extra])
            volumes.extend(
                simplex_boundary_projection_volumes(
                    extra_sets, embedding.points
                ).tolist()
            )

    graph = GalleryGraph(complex_, k)
    evaluations = []
    infinite = False
    exact_fill = True
    for member, volume in zip(members, volumes):
        faces = tuple(s for s, _ in member.faces)
        fill = fill_number(complex_, faces, budget=fill_budget, graph=graph)
        if fill.exact is None:
            exact_fill = False
        if volume == 0.0:
            infinite = True
        evaluations.append(
            MemberEvaluation(faces, volume, fill.lower, fill.upper, fill.exact)
        )

    fwd_lo = fwd_hi = bwd_lo = bwd_hi = 0.0
    for ev in evaluations:
        lo = ev.fill_exact if ev.fill_exact is not None else ev.fill_lower
        hi = ev.fill_exact if ev.fill_exact is not None else ev.fill_upper
        fwd_lo = max(fwd_lo, ev.volume / hi)
        fwd_hi = max(fwd_hi, ev.volume / lo)
        if ev.volume > 0.0:
            bwd_lo = max(bwd_lo, lo / ev.volume)
            bwd_hi = max(bwd_hi, hi / ev.volume)

    bound = None
    if include_bound:
        bound = distortion_lower_bound(
            complex_, family, hypotheses=hyp, tolerance=tolerance
        )

    if infinite:
        distortion_lo = distortion_hi = None
    else:
        distortion_lo = fwd_lo * bwd_lo
        distortion_hi = fwd_hi * bwd_hi

    return DistortionReport(
        k=k,
        family_size=family.size,
        evaluated_members=len(evaluations),
        sup_forward_lo=fwd_lo,
        sup_forward_hi=fwd_hi,
        sup_backward_lo=None if infinite else bwd_lo,
        sup_backward_hi=None if infinite else bwd_hi,
        distortion_lo=distortion_lo,
        distortion_hi=distortion_hi,
        infinite=infinite,
        exact_fill=exact_fill,
        hypotheses=hyp,
        bound=bound,
        members=evaluations if keep_members else [],
    )


def spectral_embedding(complex_: SimplicialComplex, m: int) -> Embedding:
    """Vertex coordinates from the m lowest nonzero degree-0 eigenvectors."""
    lap = upper_laplacian(complex_, 0)
    values, vectors = np.linalg.eigh(lap.dense())
    nonzero = np.nonzero(values > DEFAULT_TOLERANCE)[0]
    if len(nonzero) < m:
        raise GeometryError(
            f"only {len(nonzero)} nonzero eigenvectors available, wanted {m}"
        )
    columns = vectors[:, nonzero[:m]]
    coords = columns / np.sqrt(lap.weights_k)[:, None]
    return Embedding(coords)


@dataclass(frozen=True)
class EmbeddingSpec:
    """Parsed `gaussian:m:seed`, `spectral:m`, or `file:path` embedding source."""

    kind: str
    m: int | None = None
    seed: int | None = None
    path: str | None = None

    @classmethod
    def parse(cls, text: str) -> "EmbeddingSpec":
        parts = text.split(":", 1)
        kind = parts[0]
        if kind == "gaussian":
            try:
                m_text, seed_text = parts[1].split(":")
                return cls("gaussian", m=int(m_text), seed=int(seed_text))
            except (IndexError, ValueError):
                raise ValueError("expected gaussian:<m>:<seed>") from None
        if kind == "spectral":
            try:
                return cls("spectral", m=int(parts[1]))
            except (IndexError, ValueError):
                raise ValueError("expected spectral:<m>") from None
        if kind == "file":
            if len(parts) != 2 or not parts[1]:
                raise ValueError("expected file:<path>")
            return cls("file", path=parts[1])
        raise ValueError(f"unknown embedding kind {kind!r}")

    def describe(self) -> str:
        if self.kind == "gaussian":
            return f"gaussian:{self.m}:{self.seed}"
        if self.kind == "spectral":
            return f"spectral:{self.m}"
        return f"file:{self.path}"

    def realize(self, complex_: SimplicialComplex, trial: int = 0) -> Embedding:
        if self.kind == "gaussian":
            return Embedding.gaussian(
                complex_.num_vertices, self.m, self.seed + trial
            )
        if self.kind == "spectral":
            return spectral_embedding(complex_, self.m)
        if self.path.endswith(".json"):
            return Embedding.from_json(self.path, complex_)
        return Embedding.from_csv(self.path, complex_)


def distortion_constant(k: int) -> float:
    """Explicit constant in the ln(N)/ln(pN) lower bound for the random model."""
    return 1.0 / (2.0 * (k + 1) * math.sqrt(3.0 * (k + 2)))


@dataclass
class TrialRecord:
    """One random-complex distortion trial."""

    trial: int
    seed: int
    n: int
    p: float
    lam: float | None
    l: float | None
    s: int
    d_max: int
    bound: float | None
    measured_lo: float | None
    measured_hi: float | None
    hypotheses: HypothesisReport
    exact_fill: bool
    infinite: bool
    applicable: bool
    consistent: bool | None

    def to_dict(self) -> dict:
        return {
            "trial": self.trial,
            "seed": self.seed,
            "n": self.n,
            "p": self.p,
            "lambda": self.lam,
            "l": self.l,
            "s": self.s,
            "d_max": self.d_max,
            "bound": self.bound,
            "measured_lo": self.measured_lo,
            "measured_hi": self.measured_hi,
            "hypotheses": self.hypotheses.to_dict(),
            "exact_fill": self.exact_fill,
            "infinite": self.infinite,
            "applicable": self.applicable,
            "consistent": self.consistent,
        }

    def csv_row(self) -> list:
        return [
            self.seed, self.n, self.p, self.lam, self.l, self.s, self.d_max,
            self.bound, self.measured_lo, self.measured_hi,
            self.hypotheses.flags_string(), self.trial, self.exact_fill,
            self.infinite, self.consistent,
        ]


CSV_HEADER = [
    "seed", "N", "p", "lambda", "l", "s", "D", "bound", "measured_lo",
    "measured_hi", "hypotheses", "trial", "exact_fill", "infinite",
    "consistent",
]


@dataclass
class ExperimentReport:
    """Aggregated random-complex distortion trials."""

    params: LmParams
    embedding: str
    trials: int
    records: list[TrialRecord]
    hypotheses_ok: int
    checked: int
    consistent: int
    reference_constant: float
    reference_bound: float | None

    @property
    def pass_rate(self) -> float | None:
        return None if self.checked == 0 else self.consistent / self.checked

    def to_dict(self) -> dict:
        return {
            "params": self.params.to_dict(),
            "embedding": self.embedding,
            "trials": self.trials,
            "hypotheses_ok": self.hypotheses_ok,
            "checked": self.checked,
            "consistent": self.consistent,
            "pass_rate": self.pass_rate,
            "reference_constant": self.reference_constant,
            "reference_bound": self.reference_bound,
            "records": [r.to_dict() for r in self.records],
        }


def _experiment_workers() -> int:
    raw = os.environ.get("DISTORTION_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def lm_distortion_experiment(
    params: LmParams,
    spec: EmbeddingSpec,
    trials: int,
    *,
    fill_budget: int = 10_000_000,
    tolerance: float = DEFAULT_TOLERANCE,
) -> ExperimentReport:
    """Sample complexes, verify hypotheses, and compare measured distortion
    against the spectral-counting bound (trial i uses seed+i; gaussian
    embeddings advance their own seed the same way). Trials whose spectral
    gap is below 1/2 are flagged through the hypothesis string rather than
    counted as failures."""
    if trials < 1:
        raise ValueError("need at least one trial")

    def run_trial(trial: int) -> TrialRecord:
        trial_params = LmParams(
            params.num_vertices, params.p, params.k, params.seed + trial
        )
        complex_ = linial_meshulam(trial_params)
        k = params.k
        hyp = compute_hypotheses(complex_, k, tolerance)
        bound_value = l_value = None
        measured_lo = measured_hi = None
        applicable = False
        consistent = None
        d_max, s = 0, params.k + 2
        exact_fill = infinite = False
        try:
            embedding = spec.realize(complex_, trial)
            family = vertex_set_family(complex_, k)
            report = evaluate_distortion(
                complex_, family, embedding,
                fill_budget=fill_budget, tolerance=tolerance, hypotheses=hyp,
            )
        except (UnfillableError, NotPureError, GeometryError):
            # degenerate sample: hypotheses cannot all hold; keep the trial
            # as data with empty measurements
            pass
        else:
            bound_obj = report.bound
            bound_value = bound_obj.bound if bound_obj else None
            if hyp.pure:
                l_value = family.l
            measured_lo = report.distortion_lo
            measured_hi = report.distortion_hi
            applicable = (
                bound_value is not None and report.exact_fill and not report.infinite
            )
            if applicable:
                consistent = measured_lo >= bound_value - 1e-9 * (abs(bound_value) + 1)
            d_max = bound_obj.d_max if bound_obj else 0
            s = family.s
            exact_fill = report.exact_fill
            infinite = report.infinite
        return TrialRecord(
            trial=trial, seed=trial_params.seed, n=params.num_vertices,
            p=params.p, lam=hyp.lambda_min_nonzero, l=l_value, s=s,
            d_max=d_max, bound=bound_value, measured_lo=measured_lo,
            measured_hi=measured_hi, hypotheses=hyp, exact_fill=exact_fill,
            infinite=infinite, applicable=applicable, consistent=consistent,
        )

    workers = _experiment_workers()
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(run_trial, range(trials)))
    else:
        records = [run_trial(t) for t in range(trials)]

    k = params.k
    n = params.num_vertices
    p_n = params.p * n
    reference = (
        distortion_constant(k) * math.log(n) / math.log(p_n) if p_n > 1.0 else None
    )
    return ExperimentReport(
        params=params,
        embedding=spec.describe(),
        trials=trials,
        records=records,
        hypotheses_ok=sum(r.hypotheses.all_hold() for r in records),
        checked=sum(r.applicable for r in records),
        consistent=sum(1 for r in records if r.consistent),
        reference_constant=distortion_constant(k),
        reference_bound=reference,
    )


def verify_instance(
    complex_: SimplicialComplex,
    k: int,
    embedding: Embedding | None,
    *,
    seed: int = 0,
    tolerance: float = DEFAULT_TOLERANCE,
    num_random_cochains: int = 5,
) -> dict:
    """Run the full identity/inequality battery on one instance.

    Covers exact d(d(.)) = 0, adjointness and the Rayleigh identity on random
    cochains, per-simplex Stokes residuals for the embedding, and both
    spectral filling inequalities. Returns a report dict with an `ok` flag
    (identities within tolerances) and `hypotheses_ok`.
    """
    rng = np.random.Generator(np.random.Philox(key=seed))
    report: dict = {"k": k, "checks": {}}
    ok = True

    dd_ok = True
    for degree in range(max(complex_.dim - 1, 0)):
        product = differential_matrix(complex_, degree + 1) @ differential_matrix(
            complex_, degree
        )
        if product.nnz and np.any(product.data != 0):
            dd_ok = False
    report["checks"]["dd_zero"] = dd_ok
    ok &= dd_ok

    hyp = compute_hypotheses(complex_, k, tolerance)
    report["hypotheses"] = hyp.to_dict()

    adj_worst = ray_worst = 0.0
    if complex_.is_pure and k <= complex_.dim - 1:
        lap = upper_laplacian(complex_, k)
        for _ in range(num_random_cochains):
            phi = random_cochain(complex_, k, rng)
            psi = random_cochain(complex_, k + 1, rng)
            lhs = inner_product(complex_, differential(complex_, phi), psi)
            rhs = inner_product(complex_, phi, adjoint_differential(complex_, psi))
            scale = norm(complex_, phi) * norm(complex_, psi) + 1.0
            adj_worst = max(adj_worst, abs(lhs - rhs) / scale)
            d_phi = differential(complex_, phi)
            energy = inner_product(complex_, d_phi, d_phi)
            rayleigh = float(
                np.dot(lap.weights_k * lap.apply(phi.values), phi.values)
            )
            ray_worst = max(
                ray_worst, abs(energy - rayleigh) / (abs(energy) + 1.0)
            )
        report["checks"]["adjoint_residual"] = adj_worst
        report["checks"]["rayleigh_residual"] = ray_worst
        ok &= adj_worst <= 1e-10 and ray_worst <= 1e-9

    stokes_worst = None
    if embedding is not None and k <= complex_.dim - 1:
        tops = complex_.simplices(k + 1)
        sample = tops if len(tops) <= 20 else [
            tops[i] for i in rng.choice(len(tops), size=20, replace=False)
        ]
        stokes_worst = 0.0
        for sigma in sample:
            boundary = simplex_boundary_oriented(sigma)
            residual = stokes_check(boundary, [(sigma, 1)], embedding)
            stokes_worst = max(stokes_worst, residual)
        report["checks"]["stokes_residual"] = stokes_worst
        scale = float(np.abs(embedding.points).max()) ** (k + 1) + 1.0
        ok &= stokes_worst <= 1e-9 * scale

    energy_ok = volume_ok = None
    if hyp.all_hold(require_gallery=False) and complex_.simplex_count(
        k
    ) == math.comb(complex_.num_vertices, k + 1):
        family = vertex_set_family(complex_, k)
        margins = []
        for _ in range(num_random_cochains):
            phi = random_cochain(complex_, k, rng)
            check = cochain_energy_inequality(
                complex_, family, phi, hypotheses=hyp, tolerance=tolerance
            )
            margins.append((check.margin, check.lhs))
        energy_ok = all(m >= -1e-8 * (abs(lhs) + 1.0) for m, lhs in margins)
        report["checks"]["energy_margin_min"] = min(m for m, _ in margins)
        ok &= energy_ok
        if embedding is not None and hyp.gallery_connected:
            check = projection_volume_inequality(
                complex_, family, embedding, hypotheses=hyp, tolerance=tolerance
            )
            volume_ok = check.margin is not None and check.margin >= -1e-8 * (
                abs(check.lhs) + 1.0
            )
            report["checks"]["volume_margin"] = check.margin
            ok &= volume_ok

    report["ok"] = bool(ok)
    report["hypotheses_ok"] = hyp.all_hold()
    return report
