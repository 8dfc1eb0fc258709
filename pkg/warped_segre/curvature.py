"""Sectional curvature of the warped Segre-Veronese manifold."""

import math
from typing import Any, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, model_validator

from warped_segre.exceptions import UnsupportedPlaneError, ValidationError
from warped_segre.presegre import (
    PreSegrePoint,
    PreSegreTangent,
    coordinate_distances,
    exp_coordinates,
    metric,
    norm,
)

ORTHONORMAL_TOL = 1e-10
SUPPORT_TOL = 1e-12
DEFAULT_SAMPLES = 2048
DEFAULT_RADIUS_FACTOR = 0.01
MAX_RADIUS_FACTOR = 0.05


class CurvaturePlane(BaseModel):
    """A tangent 2-plane at ``at`` spanned by a metric-orthonormal pair."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    at: PreSegrePoint
    first: PreSegreTangent
    second: PreSegreTangent

    @model_validator(mode="after")
    def _check_orthonormal(self) -> "CurvaturePlane":
        for v in (self.first, self.second):
            if v.base is not self.at and v.base != self.at:
                raise ValueError("spanning vectors must be based at the plane's point")
        gram = (
            metric(self.first, self.first) - 1.0,
            metric(self.second, self.second) - 1.0,
            metric(self.first, self.second),
        )
        if max(abs(g) for g in gram) > ORTHONORMAL_TOL:
            raise ValueError(f"spanning vectors are not orthonormal (deviations {gram})")
        return self

    @classmethod
    def from_directions(
        cls, at: PreSegrePoint, first: PreSegreTangent, second: PreSegreTangent
    ) -> "CurvaturePlane":
        """Gram-Schmidt two independent tangents in the warped metric."""
        e1 = first * (1.0 / norm(first))
        rest = second - e1 * metric(second, e1)
        length = norm(rest)
        if length == 0.0:
            raise ValidationError("directions are linearly dependent")
        return cls(at=at, first=e1, second=rest * (1.0 / length))


def _support(v: PreSegreTangent) -> Tuple[bool, Tuple[int, ...]]:
    scale = max(1.0, float(np.max(np.abs(v.as_array()))))
    radial = abs(v.lam_dot) > SUPPORT_TOL * scale
    spherical = tuple(i for i, s in enumerate(v.speeds) if s > SUPPORT_TOL * scale)
    return radial, spherical


def sectional_curvature(plane: CurvaturePlane) -> float:
    """
    Closed-form sectional curvature of an axis-aligned plane.

    Two directions on the same sphere ``i`` give ``(1 - k_i alpha^2) / (k_i alpha^2 lam^2)``,
    on different spheres ``-1 / lam^2``. A radial direction together with a direction on at
    most one sphere gives 0.

    Raises:
        UnsupportedPlaneError: If a direction mixes radial and spherical components or
            spans several spheres
    """
    p = plane.at
    first_radial, first_support = _support(plane.first)
    second_radial, second_support = _support(plane.second)

    for radial, support in ((first_radial, first_support), (second_radial, second_support)):
        if len(support) > 1 or (radial and support):
            raise UnsupportedPlaneError(
                "curvature is only available for planes spanned by radial and single-sphere "
                "directions"
            )

    if first_radial or second_radial:
        return 0.0

    i, j = first_support[0], second_support[0]
    lam = p.lam
    if i == j:
        k_alpha2 = p.shape.mults[i] * p.alpha**2
        return (1.0 - k_alpha2) / (k_alpha2 * lam**2)
    return -1.0 / lam**2


def geodesic_circle(
    plane: CurvaturePlane, r: float, samples: int
) -> Tuple[np.ndarray, Sequence[np.ndarray]]:
    """Coordinates of ``exp_p(r (cos t e1 + sin t e2))`` at ``samples`` equispaced angles."""
    thetas = np.linspace(0.0, 2.0 * math.pi, samples, endpoint=False)
    c = r * np.cos(thetas)
    s = r * np.sin(thetas)
    lam_dots = c * plane.first.lam_dot + s * plane.second.lam_dot
    dots = [
        np.outer(c, a.vec) + np.outer(s, b.vec)
        for a, b in zip(plane.first.factor_dots, plane.second.factor_dots)
    ]
    return exp_coordinates(plane.at, lam_dots, dots)


def circumference(plane: CurvaturePlane, r: float, samples: int) -> float:
    """Length of the geodesic polygon inscribed in the circle of radius ``r``."""
    radii, factors = geodesic_circle(plane, r, samples)
    chords = coordinate_distances(
        plane.at.shape,
        radii,
        factors,
        np.roll(radii, -1),
        [np.roll(f, -1, axis=0) for f in factors],
    )
    return float(np.sum(chords))


def estimate_curvature_bdp(
    plane: CurvaturePlane, r: Optional[float] = None, samples: int = DEFAULT_SAMPLES
) -> float:
    """
    Estimate sectional curvature from the circumference defect of a small geodesic circle.

    Returns ``6 (2 pi r - C(r)) / (2 pi r^3)``. The inscribed-polygon circumference is
    measured at ``samples`` and ``2 * samples`` vertices and Richardson-extrapolated, which
    removes its leading ``1/samples^2`` error.

    Args:
        plane: The 2-plane
        r: Circle radius; defaults to ``0.01 * lam``
        samples: Vertices of the coarser polygon (at least 2048)

    Raises:
        ValidationError: If ``r`` is not in ``(0, 0.05 lam]`` or ``samples`` is too small
    """
    lam = plane.at.lam
    radius = DEFAULT_RADIUS_FACTOR * lam if r is None else float(r)
    if not 0.0 < radius <= MAX_RADIUS_FACTOR * lam:
        raise ValidationError(
            f"circle radius must lie in (0, {MAX_RADIUS_FACTOR} * lambda], got {radius!r}"
        )
    if samples < DEFAULT_SAMPLES:
        raise ValidationError(f"at least {DEFAULT_SAMPLES} samples are required, got {samples}")

    coarse = circumference(plane, radius, samples)
    fine = circumference(plane, radius, 2 * samples)
    length = (4.0 * fine - coarse) / 3.0
    return 6.0 * (2.0 * math.pi * radius - length) / (2.0 * math.pi * radius**3)


def axis_plane(
    at: PreSegrePoint, first: Tuple[Any, ...], second: Tuple[Any, ...]
) -> CurvaturePlane:
    """
    Plane spanned by two axis directions, each ``("radial",)`` or ``("sphere", i, w)``.

    Sphere directions ``w`` are projected to the tangent space and both vectors are
    normalized in the warped metric.
    """

    def build(spec: Tuple[Any, ...]) -> PreSegreTangent:
        if spec[0] == "radial":
            return PreSegreTangent.zero(at, lam_dot=1.0)
        _, index, direction = spec
        dots = [np.zeros(u.dim) for u in at.factors]
        dots[index] = np.asarray(direction, dtype=float)
        return PreSegreTangent.project(at, 0.0, dots)

    return CurvaturePlane.from_directions(at, build(first), build(second))
