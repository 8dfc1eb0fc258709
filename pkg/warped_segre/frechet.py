"""Frechet means of rank-1 tensors on the warped Segre-Veronese manifold."""

import logging
from typing import List, Optional, Sequence

import numpy as np

from warped_segre.exceptions import MaxItersExceeded, ValidationError
from warped_segre.models import MeanConfig
from warped_segre.segre import SegrePoint, SegreTangent, segre_distance, segre_exp, segre_log

logger = logging.getLogger(__name__)


def _require_points(points: Sequence[SegrePoint]) -> List[SegrePoint]:
    items = list(points)
    if not items:
        raise ValidationError("at least one point is required")
    return items


def _tree_sum(tangents: Sequence[SegreTangent]) -> SegreTangent:
    items = list(tangents)
    while len(items) > 1:
        paired = [items[i] + items[i + 1] for i in range(0, len(items) - 1, 2)]
        if len(items) % 2 == 1:
            paired.append(items[-1])
        items = paired
    return items[0]


def inductive_mean(points: Sequence[SegrePoint], cfg: Optional[MeanConfig] = None) -> SegrePoint:
    """
    Approximate the Frechet mean by successive geodesic interpolation.

    ``m_1 = x_1`` and ``m_j`` is the point a fraction ``1/j`` of the way from ``m_{j-1}``
    to ``x_j``. With ``cfg.shuffle_seed`` set, the points are visited in a seeded
    random order.

    Raises:
        ValidationError: If ``points`` is empty
        NotConnectedError: If an intermediate mean and the next point are not connected
    """
    cfg = cfg or MeanConfig()
    order = _require_points(points)
    if cfg.shuffle_seed is not None:
        rng = np.random.default_rng(cfg.shuffle_seed)
        order = [order[i] for i in rng.permutation(len(order))]

    mean = order[0]
    for j, x in enumerate(order[1:], start=2):
        mean = segre_exp(mean, segre_log(mean, x) * (1.0 / j))
    return mean


def mean_gradient(points: Sequence[SegrePoint], m: SegrePoint) -> SegreTangent:
    """Average of the logarithms ``log_m(x_i)``, the descent direction of the objective."""
    items = _require_points(points)
    return _tree_sum([segre_log(m, x) for x in items]) * (1.0 / len(items))


def refine_mean(
    points: Sequence[SegrePoint], init: SegrePoint, cfg: Optional[MeanConfig] = None
) -> SegrePoint:
    """
    Gradient descent on the Frechet objective, starting from ``init``.

    Iterates ``m <- exp_m(step * mean_gradient(points, m))`` until the gradient norm in
    the warped metric is at most ``cfg.grad_tol``.

    Raises:
        NotConnectedError: If an iterate is not connected to every point
        MaxItersExceeded: If ``cfg.max_iters`` steps do not reach the tolerance; the last
            iterate is attached
    """
    cfg = cfg or MeanConfig()
    items = _require_points(points)
    mean = init
    grad_norm = float("inf")
    for iteration in range(1, cfg.max_iters + 1):
        gradient = mean_gradient(items, mean)
        grad_norm = gradient.norm()
        logger.debug("refine_mean iteration %d: gradient norm %.3e", iteration, grad_norm)
        if grad_norm <= cfg.grad_tol:
            return mean
        mean = segre_exp(mean, gradient * cfg.step)

    raise MaxItersExceeded(
        f"Frechet mean did not reach gradient norm {cfg.grad_tol:g} in {cfg.max_iters} "
        f"iterations (last {grad_norm:.3e})",
        last_iterate=mean,
        grad_norm=grad_norm,
        iterations=cfg.max_iters,
    )


def frechet_objective(points: Sequence[SegrePoint], m: SegrePoint) -> float:
    """Sum of squared geodesic distances from ``m`` to the points."""
    return float(sum(segre_distance(m, x).value ** 2 for x in _require_points(points)))


def frechet_variance(points: Sequence[SegrePoint], m: SegrePoint) -> float:
    items = _require_points(points)
    return frechet_objective(items, m) / len(items)


def frechet_mean(points: Sequence[SegrePoint], cfg: Optional[MeanConfig] = None) -> SegrePoint:
    """Inductive warm start followed by gradient refinement."""
    cfg = cfg or MeanConfig()
    items = _require_points(points)
    return refine_mean(items, inductive_mean(items, cfg), cfg)
