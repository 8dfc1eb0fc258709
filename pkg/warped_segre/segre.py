"""
Geometry of the alpha-warped Segre-Veronese manifold of partially symmetric rank-1 tensors.

A tensor is handled through a canonical representative of its fiber in the
pre-Segre-Veronese manifold; exp, log and distance are computed on matched
representatives.
"""

import math
import sys
from enum import Enum
from typing import Any, Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, field_validator, model_validator

from warped_segre.covering import (
    DenseTensor,
    SignPattern,
    match_representatives,
    pushforward,
    tensor_embed,
)
from warped_segre.exceptions import BaseMismatchError, IncompatibleError, NotConnectedError
from warped_segre.models import ManifoldShape
from warped_segre.presegre import (
    Distance,
    PreSegrePoint,
    PreSegreTangent,
    metric,
    pre_distance,
    pre_exp,
    pre_log,
)

CANONICAL_TOL = 1e-12
EQUALITY_TOL = 1e-10


def _leading_sign(coords: np.ndarray) -> int:
    for x in coords:
        if abs(x) > CANONICAL_TOL:
            return 1 if x > 0 else -1
    return 1


def canonical_pattern(p: PreSegrePoint) -> SignPattern:
    """
    The deck transform that makes the leading coordinate of every factor positive.

    When that is infeasible, the last odd-multiplicity factor is left with a negative
    leading coordinate instead, so every member of a fiber maps to the same representative.
    """
    signs = [_leading_sign(u.coords) for u in p.factors]
    odd = p.shape.odd_indices
    if math.prod(signs[i] for i in odd) != 1:
        last = odd[-1]
        signs[last] = -signs[last]
    return SignPattern(signs=tuple(signs))


def canonicalize(p: PreSegrePoint) -> PreSegrePoint:
    pattern = canonical_pattern(p)
    if all(s == 1 for s in pattern.signs):
        return p
    factors = tuple(u if s == 1 else -u for u, s in zip(p.factors, pattern.signs))
    return PreSegrePoint(shape=p.shape, lam=p.lam, factors=factors)


class SegrePoint(BaseModel):
    """
    A rank-1 tensor, stored as the canonical representative of its fiber.

    Two points are equal when their dense embeddings agree within 1e-10.

    Example:
        >>> shape = ManifoldShape(dims=(2, 2), mults=(1, 1), alpha=1.0)
        >>> P = SegrePoint.from_factors(shape, 1.0, [[0.0, -1.0], [-1.0, 0.0]])
        >>> [float(u.coords.sum()) for u in P.rep.factors]
        [1.0, 1.0]
    """

    model_config = ConfigDict(arbitrary_types_allowed=True)

    rep: PreSegrePoint

    @field_validator("rep")
    @classmethod
    def _canonical(cls, rep: PreSegrePoint) -> PreSegrePoint:
        return canonicalize(rep)

    @classmethod
    def from_factors(
        cls, shape: ManifoldShape, lam: float, vectors: Sequence[Any]
    ) -> "SegrePoint":
        """Build a tensor from arbitrary nonzero factor vectors; norms fold into the scale."""
        return cls(rep=PreSegrePoint.from_vectors(shape, vectors, lam=lam))

    @property
    def shape(self) -> ManifoldShape:
        return self.rep.shape

    @property
    def lam(self) -> float:
        return self.rep.lam

    def dense(self) -> DenseTensor:
        return tensor_embed(self.rep)

    def rewarped(self, alpha: float) -> "SegrePoint":
        return SegrePoint(rep=self.rep.rewarped(alpha))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SegrePoint):
            return NotImplemented
        if self is other:
            return True
        return self.shape == other.shape and self.dense().allclose(other.dense(), EQUALITY_TOL)

    __hash__ = None  # type: ignore[assignment]


class SegreTangent(BaseModel):
    """A tangent vector at ``at``, in coordinates of its canonical representative."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    at: SegrePoint
    coords: PreSegreTangent

    @model_validator(mode="after")
    def _check_base(self) -> "SegreTangent":
        if self.coords.base is not self.at.rep and self.coords.base != self.at.rep:
            raise ValueError("tangent coordinates are not based at the canonical representative")
        return self

    @classmethod
    def zero(cls, at: SegrePoint) -> "SegreTangent":
        return cls(at=at, coords=PreSegreTangent.zero(at.rep))

    def to_dense(self) -> DenseTensor:
        """The tangent as a dense tensor."""
        return pushforward(self.coords)

    def norm(self) -> float:
        return math.sqrt(max(metric(self.coords, self.coords), 0.0))

    def _require_same_point(self, other: "SegreTangent") -> None:
        if other.at.rep is not self.at.rep and other.at.rep != self.at.rep:
            raise BaseMismatchError("tangent vectors are attached to different tensors")

    def __add__(self, other: "SegreTangent") -> "SegreTangent":
        self._require_same_point(other)
        return SegreTangent(at=self.at, coords=self.coords + other.coords)

    def __sub__(self, other: "SegreTangent") -> "SegreTangent":
        self._require_same_point(other)
        return SegreTangent(at=self.at, coords=self.coords - other.coords)

    def __mul__(self, factor: float) -> "SegreTangent":
        return SegreTangent(at=self.at, coords=self.coords * factor)

    __rmul__ = __mul__

    def __neg__(self) -> "SegreTangent":
        return self * -1.0


def segre_exp(P: SegrePoint, V: SegreTangent) -> SegrePoint:
    """
    Exponential map on the Segre-Veronese manifold.

    Raises:
        BaseMismatchError: If ``V`` is not attached to ``P``
        DomainError: If the lifted tangent points into the puncture
    """
    if V.at.rep is not P.rep and V.at.rep != P.rep:
        raise BaseMismatchError("tangent vector is not attached to the given tensor")
    return SegrePoint(rep=pre_exp(P.rep, V.coords))


def segre_log(P: SegrePoint, Q: SegrePoint) -> SegreTangent:
    """
    Logarithmic map on the Segre-Veronese manifold, computed on matched representatives.

    Raises:
        NotConnectedError: If no minimizing geodesic joins the tensors
        AntipodalFactorError: If a pair of matched factors is antipodal
    """
    q_star = match_representatives(P.rep, Q.rep)
    try:
        coords = pre_log(P.rep, q_star)
    except IncompatibleError as e:
        raise NotConnectedError(
            f"tensors are not geodesically connected: alpha*M = {e.alpha_m!r} >= pi = "
            f"{math.pi!r} for the matched representatives",
            alpha_m=e.alpha_m,
        ) from e
    return SegreTangent(at=P, coords=coords)


def segre_distance(P: SegrePoint, Q: SegrePoint) -> Distance:
    """Geodesic distance on the Segre-Veronese manifold (infimum when not connected)."""
    return pre_distance(P.rep, match_representatives(P.rep, Q.rep))


class Connectedness(str, Enum):
    """Geodesic connectedness of a Segre-Veronese manifold."""

    CONNECTED = "connected"
    NOT_CONNECTED = "not_connected"
    UNKNOWN = "unknown"


def connectedness_class(shape: ManifoldShape) -> Connectedness:
    """
    Classify ``shape`` by its warping factor.

    Connected below ``1/sqrt(sum k)``, not connected from ``2/sqrt(sum k)`` on; the band
    in between is unresolved.
    """
    root = math.sqrt(shape.total_mult)
    if shape.alpha < 1.0 / root:
        return Connectedness.CONNECTED
    if shape.alpha >= 2.0 / root:
        return Connectedness.NOT_CONNECTED
    return Connectedness.UNKNOWN


def auto_alpha(shape: ManifoldShape) -> float:
    """Warping factor ``1/sqrt(sum k) - sqrt(eps)``, just inside the connected range."""
    return 1.0 / math.sqrt(shape.total_mult) - math.sqrt(sys.float_info.epsilon)
