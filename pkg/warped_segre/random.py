"""Random points and tangents for property tests and synthetic data."""

import math
from typing import Optional, Tuple

import numpy as np

from warped_segre.exceptions import ValidationError
from warped_segre.models import ManifoldShape
from warped_segre.presegre import PreSegrePoint, PreSegreTangent
from warped_segre.segre import SegrePoint
from warped_segre.sphere import SphereTangent, UnitVector, sphere_exp

DEFAULT_LAM_RANGE = (0.5, 2.0)
MAX_REJECTIONS = 100


def random_unit(n: int, rng: np.random.Generator) -> UnitVector:
    """A uniformly distributed unit vector of R^n."""
    return UnitVector.normalized(rng.standard_normal(n))


def random_point(
    shape: ManifoldShape,
    rng: np.random.Generator,
    lam_range: Tuple[float, float] = DEFAULT_LAM_RANGE,
) -> PreSegrePoint:
    factors = tuple(random_unit(n, rng) for n in shape.dims)
    return PreSegrePoint(shape=shape, lam=float(rng.uniform(*lam_range)), factors=factors)


def random_segre_point(
    shape: ManifoldShape,
    rng: np.random.Generator,
    lam_range: Tuple[float, float] = DEFAULT_LAM_RANGE,
) -> SegrePoint:
    return SegrePoint(rep=random_point(shape, rng, lam_range))


def random_tangent(
    p: PreSegrePoint, rng: np.random.Generator, scale: float = 1.0
) -> PreSegreTangent:
    """Gaussian tangent at ``p`` with entries of standard deviation ``scale``."""
    dots = [scale * rng.standard_normal(u.dim) for u in p.factors]
    return PreSegreTangent.project(p, scale * float(rng.standard_normal()), dots)


def _random_direction(u: UnitVector, rng: np.random.Generator) -> np.ndarray:
    while True:
        direction = SphereTangent.project(u, rng.standard_normal(u.dim))
        if direction.norm > 1e-6:
            return direction.vec / direction.norm


def random_neighbor(
    p: PreSegrePoint,
    big_m: float,
    rng: np.random.Generator,
    margin: float = 1e-3,
    lam: Optional[float] = None,
) -> PreSegrePoint:
    """
    A random point at spherical distance ``big_m`` from ``p``.

    Every factor angle stays below ``pi - margin``, so no factor pair is antipodal.

    Raises:
        ValidationError: If no angle split satisfies the margin
    """
    mults = np.asarray(p.shape.mults, dtype=float)
    limit = math.pi - margin
    if big_m < 0 or big_m > limit * math.sqrt(mults.sum()):
        raise ValidationError(
            f"spherical distance {big_m!r} is out of reach with factor angles below {limit!r}"
        )

    thetas = np.full(len(mults), big_m / math.sqrt(mults.sum()))
    for _ in range(MAX_REJECTIONS):
        weights = np.abs(rng.standard_normal(len(mults)))
        candidate = big_m * weights / math.sqrt(float(np.sum(mults * weights**2)))
        if np.all(candidate < limit):
            thetas = candidate
            break

    factors = tuple(
        sphere_exp(u, SphereTangent(base=u, vec=theta * _random_direction(u, rng)))
        for u, theta in zip(p.factors, thetas)
    )
    scale = float(rng.uniform(*DEFAULT_LAM_RANGE)) if lam is None else lam
    return PreSegrePoint(shape=p.shape, lam=scale, factors=factors)
