"""
Consensus aggregation of approximate rank-r decompositions.

Terms of every decomposition are matched to those of a reference decomposition by
minimum-cost assignment on geodesic distances, and each matched group is replaced by its
Frechet mean on the warped Segre-Veronese manifold.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, model_validator
from scipy.optimize import linear_sum_assignment

from warped_segre.covering import (
    DEFAULT_ENTRY_CAP,
    apply_deck,
    deck_transforms,
    match_representatives,
    tensor_embed,
)
from warped_segre.exceptions import ValidationError
from warped_segre.frechet import frechet_mean
from warped_segre.models import ManifoldShape, MeanConfig, TruthReport
from warped_segre.presegre import PreSegrePoint
from warped_segre.random import random_segre_point
from warped_segre.segre import (
    Connectedness,
    SegrePoint,
    auto_alpha,
    connectedness_class,
    segre_distance,
)
from warped_segre.sphere import UnitVector

logger = logging.getLogger(__name__)

AUTO = "auto"


class Decomposition(BaseModel):
    """A sum of r rank-1 tensors sharing one shape."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    terms: Tuple[SegrePoint, ...]

    @model_validator(mode="after")
    def _check_terms(self) -> "Decomposition":
        if not self.terms:
            raise ValueError("a decomposition needs at least one term")
        shape = self.terms[0].shape
        if any(term.shape != shape for term in self.terms):
            raise ValueError("all terms must share one shape")
        return self

    @property
    def shape(self) -> ManifoldShape:
        return self.terms[0].shape

    @property
    def rank(self) -> int:
        return len(self.terms)

    def rewarped(self, alpha: float) -> "Decomposition":
        return Decomposition(terms=tuple(term.rewarped(alpha) for term in self.terms))

    def permuted(self, order: Sequence[int]) -> "Decomposition":
        return Decomposition(terms=tuple(self.terms[i] for i in order))

    def to_dense(self, max_entries: int = DEFAULT_ENTRY_CAP) -> np.ndarray:
        """The summed dense tensor."""
        return sum(tensor_embed(term.rep, max_entries).data for term in self.terms)


class AggregationResult(BaseModel):
    """Aggregated decomposition with its matching and per-term spread."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    decomposition: Decomposition
    alpha: float
    permutations: List[List[int]]
    term_distances: List[List[float]]
    truth: Optional[TruthReport] = None


# ========== Matching ==========


def distance_matrix(reference: Decomposition, other: Decomposition) -> np.ndarray:
    """Geodesic distances between every reference term (rows) and every other term."""
    return np.array(
        [[segre_distance(a, b).value for b in other.terms] for a in reference.terms]
    )


def match_terms(reference: Decomposition, other: Decomposition) -> List[int]:
    """
    Optimal assignment of ``other``'s terms to the reference terms.

    Returns:
        ``perm`` such that ``other.terms[perm[i]]`` is matched to ``reference.terms[i]``

    Raises:
        ValidationError: If the ranks differ
    """
    if reference.rank != other.rank:
        raise ValidationError(f"rank mismatch: {reference.rank} vs {other.rank}")
    rows, cols = linear_sum_assignment(distance_matrix(reference, other))
    return [int(c) for _, c in sorted(zip(rows, cols))]


def resolve_alpha(shape: ManifoldShape, alpha: Union[str, float]) -> float:
    """Turn ``"auto"`` into ``1/sqrt(sum k) - sqrt(eps)``; numbers pass through."""
    if isinstance(alpha, str):
        if alpha != AUTO:
            raise ValidationError(f"alpha must be 'auto' or a positive number, got {alpha!r}")
        return auto_alpha(shape)
    return float(alpha)


def matched_groups(
    decompositions: Sequence[Decomposition],
) -> Tuple[List[List[SegrePoint]], List[List[int]]]:
    """Group the terms of every decomposition by their match in decomposition 0."""
    reference = decompositions[0]
    groups: List[List[SegrePoint]] = [[term] for term in reference.terms]
    permutations = [list(range(reference.rank))]
    for other in decompositions[1:]:
        perm = match_terms(reference, other)
        permutations.append(perm)
        for i, j in enumerate(perm):
            groups[i].append(other.terms[j])
    return groups, permutations


# ========== Aggregation ==========


def aggregate_decompositions(
    decompositions: Sequence[Decomposition],
    alpha: Union[str, float] = AUTO,
    cfg: Optional[MeanConfig] = None,
    workers: int = 1,
) -> AggregationResult:
    """
    Aggregate M decompositions into one by Frechet means of matched terms.

    Args:
        decompositions: The decompositions; the first one is the matching reference
        alpha: Warping factor, or ``"auto"`` for the largest one with a connected manifold
        cfg: Frechet mean settings
        workers: Threads used to aggregate the term groups

    Raises:
        ValidationError: If no decomposition is given or ranks differ
        NotConnectedError: If an explicit alpha leaves a group disconnected
        MaxItersExceeded: If a Frechet mean does not converge
    """
    if not decompositions:
        raise ValidationError("at least one decomposition is required")
    cfg = cfg or MeanConfig()
    shape = decompositions[0].shape
    chosen = resolve_alpha(shape, alpha)
    warped = [d.rewarped(chosen) for d in decompositions]

    connectedness = connectedness_class(warped[0].shape)
    if connectedness is not Connectedness.CONNECTED:
        logger.warning(
            "alpha = %.6g is outside the guaranteed connected range (%s); "
            "Frechet means may fail",
            chosen,
            connectedness.value,
        )
    logger.info(
        "Aggregating %d decompositions of rank %d at alpha = %.17g",
        len(warped),
        warped[0].rank,
        chosen,
    )

    groups, permutations = matched_groups(warped)
    logger.info("Term permutations: %s", permutations)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            means = list(pool.map(lambda group: frechet_mean(group, cfg), groups))
    else:
        means = [frechet_mean(group, cfg) for group in groups]

    term_distances = [
        [segre_distance(mean, term).value for term in group] for mean, group in zip(means, groups)
    ]
    return AggregationResult(
        decomposition=Decomposition(terms=tuple(means)),
        alpha=chosen,
        permutations=permutations,
        term_distances=term_distances,
    )


def median_consensus(group: Sequence[SegrePoint], reference: SegrePoint) -> SegrePoint:
    """
    Elementwise-median aggregate of a group of terms.

    Each term's representative is first matched to ``reference`` so that factor signs
    agree; the scale is the median scale.
    """
    reps = [match_representatives(reference.rep, term.rep) for term in group]
    lam = float(np.median([rep.lam for rep in reps]))
    factors = tuple(
        UnitVector.normalized(np.median(np.stack([rep.factors[i].coords for rep in reps]), axis=0))
        for i in range(reference.shape.order)
    )
    return SegrePoint(rep=PreSegrePoint(shape=reference.shape, lam=lam, factors=factors))


def median_decomposition(decompositions: Sequence[Decomposition]) -> Decomposition:
    groups, _ = matched_groups(decompositions)
    return Decomposition(terms=tuple(median_consensus(group, group[0]) for group in groups))


def relative_error(
    estimate: Decomposition, truth: Decomposition, max_entries: int = DEFAULT_ENTRY_CAP
) -> float:
    """Relative Frobenius error of the summed dense tensors."""
    target = truth.to_dense(max_entries)
    error = estimate.to_dense(max_entries) - target
    return float(np.linalg.norm(error) / np.linalg.norm(target))


def compare_to_truth(
    result: AggregationResult,
    decompositions: Sequence[Decomposition],
    truth: Decomposition,
    max_entries: int = DEFAULT_ENTRY_CAP,
) -> TruthReport:
    """Errors of the aggregate, the median baseline and every single decomposition."""
    alpha = result.alpha
    truth = truth.rewarped(alpha)
    warped = [d.rewarped(alpha) for d in decompositions]
    aggregated = result.decomposition

    singles = [relative_error(d, truth, max_entries) for d in warped]
    baseline = median_decomposition(warped)

    perm = match_terms(truth, aggregated)
    term_distances = [
        segre_distance(term, aggregated.terms[j]).value for term, j in zip(truth.terms, perm)
    ]
    single_distances = []
    for d in warped:
        order = match_terms(truth, d)
        single_distances.append(
            [segre_distance(term, d.terms[j]).value for term, j in zip(truth.terms, order)]
        )
    median_single = np.median(np.asarray(single_distances), axis=0)

    report = TruthReport(
        relative_error=relative_error(aggregated, truth, max_entries),
        median_consensus_error=relative_error(baseline, truth, max_entries),
        median_single_error=float(np.median(singles)),
        single_relative_errors=singles,
        term_distances=term_distances,
        median_single_term_distances=[float(x) for x in median_single],
    )
    logger.info(
        "Relative error %.3e (median baseline %.3e, median single %.3e)",
        report.relative_error,
        report.median_consensus_error,
        report.median_single_error,
    )
    return report


# ========== Synthetic benchmark ==========


def synthetic_decompositions(
    shape: ManifoldShape,
    rank: int,
    count: int,
    noise: float,
    rng: np.random.Generator,
) -> Tuple[Decomposition, List[Decomposition]]:
    """
    A ground-truth decomposition and ``count`` noisy, shuffled copies of it.

    Each copy perturbs every factor vector and scale by Gaussian noise of relative size
    ``noise``, permutes its terms and applies a random deck transform to every term.
    """
    if rank < 1 or count < 1:
        raise ValidationError("rank and count must be positive")
    truth = Decomposition(
        terms=tuple(random_segre_point(shape, rng, lam_range=(1.0, 2.0)) for _ in range(rank))
    )
    patterns = deck_transforms(shape)
    copies = []
    for _ in range(count):
        terms = []
        for term in truth.terms:
            vectors = [u.coords + noise * rng.standard_normal(u.dim) for u in term.rep.factors]
            lam = term.lam * abs(1.0 + noise * float(rng.standard_normal()))
            noisy = PreSegrePoint.from_vectors(shape, vectors, lam=lam)
            flipped = apply_deck(noisy, patterns[int(rng.integers(len(patterns)))])
            terms.append(SegrePoint(rep=flipped))
        order = rng.permutation(rank)
        copies.append(Decomposition(terms=tuple(terms[i] for i in order)))
    return truth, copies
