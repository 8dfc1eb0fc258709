"""
Geometry of the alpha-warped pre-Segre-Veronese manifold.

The manifold is the warped product ``R_+ x_{alpha Id} (S^{n_1-1} x ... x S^{n_d-1})`` in
which sphere ``i`` is weighted by its multiplicity ``k_i``::

    g((l1, u1...), (l2, v2...)) = l1 * l2 + (alpha * lam)^2 * sum_i k_i <u_i, v_i>

Points and tangent vectors are immutable pydantic models; every operation is a pure
function of its arguments.
"""

import math
from typing import Any, List, NamedTuple, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, field_validator, model_validator

from warped_segre.exceptions import (
    AntipodalFactorError,
    BaseMismatchError,
    DomainError,
    IncompatibleError,
    ShapeMismatchError,
    ValidationError,
)
from warped_segre.models import ManifoldShape
from warped_segre.sphere import ANTIPODAL_TOL, SphereTangent, UnitVector, angles, logs

DOMAIN_TOL = 1e-12


class PreSegrePoint(BaseModel):
    """
    A point ``(lam, u_1, ..., u_d)`` of the pre-Segre-Veronese manifold.

    Example:
        >>> shape = ManifoldShape(dims=(2,), mults=(1,), alpha=1.0)
        >>> p = PreSegrePoint.from_arrays(shape, 2.0, [[0.0, 1.0]])
        >>> p.lam
        2.0
    """

    model_config = ConfigDict(arbitrary_types_allowed=True)

    shape: ManifoldShape
    lam: float
    factors: Tuple[UnitVector, ...]

    @field_validator("lam")
    @classmethod
    def _check_lam(cls, lam: float) -> float:
        if not math.isfinite(lam) or lam <= 0:
            raise ValueError(f"lambda must be a positive real, got {lam!r}")
        return lam

    @model_validator(mode="after")
    def _check_factors(self) -> "PreSegrePoint":
        if len(self.factors) != self.shape.order:
            raise ValueError(f"expected {self.shape.order} factors, got {len(self.factors)}")
        for i, (factor, n) in enumerate(zip(self.factors, self.shape.dims)):
            if factor.dim != n:
                raise ValueError(f"factor {i} has dimension {factor.dim}, expected {n}")
        return self

    @classmethod
    def from_arrays(
        cls, shape: ManifoldShape, lam: float, factors: Sequence[Any]
    ) -> "PreSegrePoint":
        """Build a point from a scale and unit-norm factor arrays."""
        return cls(shape=shape, lam=lam, factors=tuple(UnitVector(coords=f) for f in factors))

    @classmethod
    def from_vectors(
        cls, shape: ManifoldShape, vectors: Sequence[Any], lam: float = 1.0
    ) -> "PreSegrePoint":
        """
        Build a point from arbitrary nonzero factor vectors.

        The factor norms (raised to their multiplicities) are folded into the scale. A
        negative scale is absorbed by negating the first factor of odd multiplicity.

        Raises:
            ValueError: If a vector is zero, or the scale is negative and every
                multiplicity is even
        """
        factors: List[UnitVector] = []
        scale = float(lam)
        for vector, k in zip(vectors, shape.mults):
            array = np.asarray(vector, dtype=float)
            length = float(np.linalg.norm(array))
            if length == 0.0:
                raise ValueError("factor vectors must be nonzero")
            scale *= length**k
            factors.append(UnitVector(coords=array / length))
        if scale < 0:
            odd = shape.odd_indices
            if not odd:
                raise ValueError("a negative scale cannot be represented when all k_i are even")
            factors[odd[0]] = -factors[odd[0]]
            scale = -scale
        return cls(shape=shape, lam=scale, factors=tuple(factors))

    @property
    def alpha(self) -> float:
        return self.shape.alpha

    def rewarped(self, alpha: float) -> "PreSegrePoint":
        """The same coordinates on the manifold with another warping factor."""
        return PreSegrePoint(shape=self.shape.with_alpha(alpha), lam=self.lam, factors=self.factors)


class PreSegreTangent(BaseModel):
    """A tangent vector ``(lam_dot, u_dot_1, ..., u_dot_d)`` at ``base``."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    base: PreSegrePoint
    lam_dot: float
    factor_dots: Tuple[SphereTangent, ...]

    @field_validator("lam_dot")
    @classmethod
    def _check_lam_dot(cls, value: float) -> float:
        if not math.isfinite(value):
            raise ValueError("lambda_dot must be finite")
        return value

    @model_validator(mode="after")
    def _check_bases(self) -> "PreSegreTangent":
        if len(self.factor_dots) != len(self.base.factors):
            raise ValueError(
                f"expected {len(self.base.factors)} factor directions, got {len(self.factor_dots)}"
            )
        for i, (dot, factor) in enumerate(zip(self.factor_dots, self.base.factors)):
            if dot.base is not factor and dot.base != factor:
                raise ValueError(f"factor direction {i} is not attached to factor {i} of the base")
        return self

    @classmethod
    def from_arrays(
        cls, base: PreSegrePoint, lam_dot: float, factor_dots: Sequence[Any]
    ) -> "PreSegreTangent":
        """Build a tangent from already-tangent factor directions."""
        dots = tuple(SphereTangent(base=u, vec=w) for u, w in zip(base.factors, factor_dots))
        return cls(base=base, lam_dot=lam_dot, factor_dots=dots)

    @classmethod
    def project(
        cls, base: PreSegrePoint, lam_dot: float, factor_dots: Sequence[Any]
    ) -> "PreSegreTangent":
        """Build a tangent, projecting each ambient direction onto its sphere's tangent space."""
        dots = tuple(SphereTangent.project(u, w) for u, w in zip(base.factors, factor_dots))
        return cls(base=base, lam_dot=lam_dot, factor_dots=dots)

    @classmethod
    def zero(cls, base: PreSegrePoint, lam_dot: float = 0.0) -> "PreSegreTangent":
        dots = tuple(SphereTangent.zero(u) for u in base.factors)
        return cls(base=base, lam_dot=lam_dot, factor_dots=dots)

    @property
    def speeds(self) -> np.ndarray:
        """Euclidean norms of the factor directions."""
        return np.array([dot.norm for dot in self.factor_dots])

    def as_array(self) -> np.ndarray:
        """Flatten to ``(lam_dot, u_dot_1..., u_dot_d...)``."""
        return np.concatenate([[self.lam_dot], *[dot.vec for dot in self.factor_dots]])

    def _combine(self, other: "PreSegreTangent", sign: float) -> "PreSegreTangent":
        _require_same_base(self.base, other.base)
        dots = tuple(
            SphereTangent(base=a.base, vec=a.vec + sign * b.vec)
            for a, b in zip(self.factor_dots, other.factor_dots)
        )
        return PreSegreTangent(
            base=self.base, lam_dot=self.lam_dot + sign * other.lam_dot, factor_dots=dots
        )

    def __add__(self, other: "PreSegreTangent") -> "PreSegreTangent":
        return self._combine(other, 1.0)

    def __sub__(self, other: "PreSegreTangent") -> "PreSegreTangent":
        return self._combine(other, -1.0)

    def __mul__(self, factor: float) -> "PreSegreTangent":
        dots = tuple(dot.scaled(factor) for dot in self.factor_dots)
        return PreSegreTangent(base=self.base, lam_dot=self.lam_dot * factor, factor_dots=dots)

    __rmul__ = __mul__

    def __neg__(self) -> "PreSegreTangent":
        return self * -1.0


class GeodesicCoefficients(BaseModel):
    """Spherical speed aggregate ``N`` and per-factor angles ``a_i`` of a geodesic."""

    big_n: float
    a: Tuple[float, ...]


class Distance(NamedTuple):
    """Geodesic distance together with whether a minimizing geodesic exists."""

    value: float
    connected: bool


def _require_same_shape(p: PreSegrePoint, q: PreSegrePoint) -> None:
    if p.shape != q.shape:
        raise ShapeMismatchError(f"shape mismatch: {p.shape!r} vs {q.shape!r}")


def _require_same_base(p: PreSegrePoint, q: PreSegrePoint) -> None:
    if p is not q and p != q:
        raise BaseMismatchError("tangent vectors are attached to different base points")


# ========== Metric ==========


def metric(x: PreSegreTangent, y: PreSegreTangent) -> float:
    """Warped inner product of two tangent vectors at the same base point."""
    _require_same_base(x.base, y.base)
    p = x.base
    spherical = sum(
        k * float(a.vec @ b.vec) for k, a, b in zip(p.shape.mults, x.factor_dots, y.factor_dots)
    )
    return x.lam_dot * y.lam_dot + (p.alpha * p.lam) ** 2 * spherical


def norm(v: PreSegreTangent) -> float:
    """Length of a tangent vector in the warped metric."""
    return math.sqrt(max(metric(v, v), 0.0))


# ========== Exponential map ==========


def _big_n(v: PreSegreTangent) -> float:
    speeds = v.speeds
    return float(np.sqrt(np.sum(np.asarray(v.base.shape.mults) * speeds**2)))


def geodesic_coefficients(v: PreSegreTangent) -> GeodesicCoefficients:
    """Coefficients ``N`` and ``a_i`` of the geodesic launched by ``v``."""
    p = v.base
    big_n = _big_n(v)
    if big_n == 0.0:
        return GeodesicCoefficients(big_n=0.0, a=tuple(0.0 for _ in p.factors))
    theta = math.atan2(p.lam * p.alpha * big_n, p.lam + v.lam_dot)
    speeds = v.speeds
    return GeodesicCoefficients(
        big_n=big_n, a=tuple(float(s / (p.alpha * big_n) * theta) for s in speeds)
    )


def in_exp_domain(p: PreSegrePoint, v: PreSegreTangent) -> bool:
    """Whether ``v`` avoids the half-line ``{(l, 0, ..., 0) | l <= -lam}``."""
    return _big_n(v) > 0.0 or v.lam_dot > -p.lam + DOMAIN_TOL


def geodesic_coordinates(
    v: PreSegreTangent, ts: Any
) -> Tuple[np.ndarray, List[np.ndarray]]:
    """
    Evaluate the geodesic ``t -> exp_p(t v)`` at several parameters at once.

    Args:
        v: Initial velocity; its base point is the start of the geodesic
        ts: Scalar or 1-D array of parameters

    Returns:
        Radii of shape (T,) and one (T, n_i) array of unit vectors per factor

    Raises:
        DomainError: If some ``t v`` lies on the half-line through the puncture
    """
    t = np.atleast_1d(np.asarray(ts, dtype=float))
    return exp_coordinates(
        v.base, t * v.lam_dot, [np.outer(t, dot.vec) for dot in v.factor_dots]
    )


def exp_coordinates(
    p: PreSegrePoint, lam_dots: Any, factor_dots: Sequence[np.ndarray]
) -> Tuple[np.ndarray, List[np.ndarray]]:
    """
    Batched exponential map at ``p`` for T tangent vectors given as raw arrays.

    Args:
        p: Base point
        lam_dots: Radial components, shape (T,)
        factor_dots: Per factor, a (T, n_i) array of directions tangent to ``u_i``

    Returns:
        Radii of shape (T,) and one (T, n_i) array of unit vectors per factor

    Raises:
        DomainError: If some tangent has N = 0 and lambda_dot <= -lambda
    """
    lam_dots = np.atleast_1d(np.asarray(lam_dots, dtype=float))
    speeds = [np.linalg.norm(w, axis=1) for w in factor_dots]
    mults = np.asarray(p.shape.mults, dtype=float)
    big_n = np.sqrt(sum(k * s**2 for k, s in zip(mults, speeds)))
    lam = p.lam

    x = lam + lam_dots
    radial = big_n == 0.0
    if np.any(radial & (x <= DOMAIN_TOL)):
        worst = float(np.min(lam_dots[radial]))
        raise DomainError(
            f"geodesic reaches the origin: lambda_dot = {worst!r} <= -lambda = {-lam!r} "
            "with no spherical component"
        )
    y = lam * p.alpha * big_n
    radii = np.hypot(x, y)
    theta = np.arctan2(y, x)
    safe_n = np.where(radial, 1.0, big_n)

    factors = []
    for u, w, speed in zip(p.factors, factor_dots, speeds):
        moving = speed > 0.0
        a = speed / (p.alpha * safe_n) * theta
        direction = w / np.where(moving, speed, 1.0)[:, np.newaxis]
        moved = np.cos(a)[:, np.newaxis] * u.coords + np.sin(a)[:, np.newaxis] * direction
        moved = moved / np.linalg.norm(moved, axis=1, keepdims=True)
        factors.append(np.where(moving[:, np.newaxis], moved, u.coords))
    return radii, factors


def pre_exp(p: PreSegrePoint, v: PreSegreTangent) -> PreSegrePoint:
    """
    Exponential map of the pre-Segre-Veronese manifold.

    Raises:
        BaseMismatchError: If ``v`` is not attached to ``p``
        DomainError: If N = 0 and lambda_dot <= -lambda
    """
    _require_same_base(p, v.base)
    radii, factors = geodesic_coordinates(v, 1.0)
    return _point_from_coordinates(p, float(radii[0]), [f[0] for f in factors])


def geodesic(p: PreSegrePoint, v: PreSegreTangent, ts: Sequence[float]) -> List[PreSegrePoint]:
    """Points ``exp_p(t v)`` for every ``t`` in ``ts``."""
    _require_same_base(p, v.base)
    radii, factors = geodesic_coordinates(v, ts)
    return [
        _point_from_coordinates(p, float(radii[j]), [f[j] for f in factors])
        for j in range(radii.shape[0])
    ]


def geodesic_sample(p: PreSegrePoint, v: PreSegreTangent, t: float) -> PreSegrePoint:
    """
    The point ``exp_p(t v)`` for ``t`` in [0, 1]; ``t = 0`` returns ``p`` itself.

    Raises:
        ValidationError: If ``t`` lies outside [0, 1]
    """
    if not 0.0 <= t <= 1.0:
        raise ValidationError(f"geodesic parameter t = {t!r} is outside [0, 1]")
    if t == 0:
        _require_same_base(p, v.base)
        return p
    return geodesic(p, v, [t])[0]


def _point_from_coordinates(
    p: PreSegrePoint, lam: float, factors: Sequence[np.ndarray]
) -> PreSegrePoint:
    units = tuple(
        u if np.array_equal(u.coords, f) else UnitVector(coords=f)
        for u, f in zip(p.factors, factors)
    )
    return PreSegrePoint(shape=p.shape, lam=lam, factors=units)


# ========== Distances and the logarithmic map ==========


def factor_angles(p: PreSegrePoint, q: PreSegrePoint) -> np.ndarray:
    """Angles between corresponding factors of two points."""
    _require_same_shape(p, q)
    return np.array(
        [float(angles(u.coords, v.coords)) for u, v in zip(p.factors, q.factors)]
    )


def _spherical_distance(p: PreSegrePoint, thetas: np.ndarray) -> float:
    return float(np.sqrt(np.sum(np.asarray(p.shape.mults) * thetas**2)))


def spherical_distance(p: PreSegrePoint, q: PreSegrePoint) -> float:
    """Distance ``M(p, q) = sqrt(sum_i k_i angle(u_i, v_i)^2)`` of the sphere parts."""
    return _spherical_distance(p, factor_angles(p, q))


def is_compatible(p: PreSegrePoint, q: PreSegrePoint) -> bool:
    """Whether ``alpha * M(p, q) < pi``, i.e. a minimizing geodesic joins the points."""
    return p.alpha * spherical_distance(p, q) < math.pi


def pre_log(p: PreSegrePoint, q: PreSegrePoint) -> PreSegreTangent:
    """
    Logarithmic map: the initial velocity of the minimizing geodesic from ``p`` to ``q``.

    Raises:
        ShapeMismatchError: If the points have different shapes
        IncompatibleError: If alpha * M(p, q) >= pi
        AntipodalFactorError: If some pair of factors is (nearly) antipodal
    """
    thetas = factor_angles(p, q)
    big_m = _spherical_distance(p, thetas)
    alpha_m = p.alpha * big_m
    if alpha_m >= math.pi:
        raise IncompatibleError(
            f"points are not alpha-compatible: alpha*M = {alpha_m!r} >= pi = {math.pi!r}",
            alpha_m=alpha_m,
        )
    for i, theta in enumerate(thetas):
        if theta >= math.pi - ANTIPODAL_TOL:
            raise AntipodalFactorError(
                f"factor {i} is antipodal (angle {theta!r}); the connecting geodesic is not unique",
                index=i,
            )

    mu = q.lam
    if big_m == 0.0:
        return PreSegreTangent.zero(p, lam_dot=mu - p.lam)

    coefficient = (mu / p.lam) * float(np.sinc(alpha_m / math.pi))
    dots = tuple(
        SphereTangent(base=u, vec=coefficient * logs(u.coords, v.coords))
        for u, v in zip(p.factors, q.factors)
    )
    return PreSegreTangent(base=p, lam_dot=mu * math.cos(alpha_m) - p.lam, factor_dots=dots)


def pre_distance(p: PreSegrePoint, q: PreSegrePoint) -> Distance:
    """
    Geodesic distance on the pre-Segre-Veronese manifold.

    For compatible points this is ``sqrt((lam - mu)^2 + 4 lam mu sin^2(alpha M / 2))``,
    the cancellation-free form of the law of cosines. Incompatible points are joined by
    no minimizing geodesic; their distance is the infimum ``lam + mu``.
    """
    alpha_m = p.alpha * spherical_distance(p, q)
    value, connected = distance_values(p.lam, q.lam, alpha_m)
    return Distance(float(value), bool(connected))


def distance_values(lam: Any, mu: Any, alpha_m: Any) -> Tuple[np.ndarray, np.ndarray]:
    """Elementwise distances and connectedness flags from scales and warped sphere distances."""
    lam, mu, alpha_m = np.broadcast_arrays(
        np.asarray(lam, dtype=float), np.asarray(mu, dtype=float), np.asarray(alpha_m, dtype=float)
    )
    connected = alpha_m < math.pi
    chord = np.sqrt((lam - mu) ** 2 + 4.0 * lam * mu * np.sin(alpha_m / 2.0) ** 2)
    return np.where(connected, chord, lam + mu), connected


def coordinate_distances(
    shape: ManifoldShape,
    radii: np.ndarray,
    factors: Sequence[np.ndarray],
    other_radii: np.ndarray,
    other_factors: Sequence[np.ndarray],
) -> np.ndarray:
    """Distances between batches of points given as radii and (T, n_i) factor arrays."""
    mults = np.asarray(shape.mults, dtype=float)
    thetas = [angles(a, b) for a, b in zip(factors, other_factors)]
    big_m = np.sqrt(sum(k * theta**2 for k, theta in zip(mults, thetas)))
    values, _ = distance_values(radii, other_radii, shape.alpha * big_m)
    return values


def injectivity_radius(p: PreSegrePoint) -> float:
    """Local injectivity radius at ``p``, which equals its distance ``lam`` to the puncture."""
    return p.lam
