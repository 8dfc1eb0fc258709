"""Unit-sphere primitives used factor-wise by the warped manifolds."""

from typing import Any

import numpy as np
from pydantic import BaseModel, ConfigDict, field_validator, model_validator

from warped_segre.exceptions import AntipodalError, BaseMismatchError, DimensionMismatchError

UNIT_TOL = 1e-12
ANTIPODAL_TOL = 1e-9
SMALL_ANGLE = 1e-8


def _as_vector(value: Any) -> np.ndarray:
    array = np.array(value, dtype=float)
    if array.ndim != 1 or array.size == 0:
        raise ValueError(f"expected a non-empty 1-D vector, got shape {array.shape}")
    if not np.all(np.isfinite(array)):
        raise ValueError("vector has non-finite entries")
    array.setflags(write=False)
    return array


class UnitVector(BaseModel):
    """A point on the unit sphere of R^n."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    coords: np.ndarray

    @field_validator("coords", mode="before")
    @classmethod
    def _check_coords(cls, value: Any) -> np.ndarray:
        coords = _as_vector(value)
        norm = float(np.linalg.norm(coords))
        if abs(norm - 1.0) > UNIT_TOL:
            raise ValueError(f"expected a unit vector, norm is {norm!r}")
        return coords

    @classmethod
    def normalized(cls, value: Any) -> "UnitVector":
        """Rescale a nonzero vector onto the sphere."""
        array = np.array(value, dtype=float)
        norm = float(np.linalg.norm(array))
        if norm == 0.0 or not np.isfinite(norm):
            raise ValueError("cannot normalize a zero or non-finite vector")
        return cls(coords=array / norm)

    @property
    def dim(self) -> int:
        return int(self.coords.shape[0])

    def __neg__(self) -> "UnitVector":
        return UnitVector(coords=-self.coords)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, UnitVector):
            return NotImplemented
        return self is other or bool(np.array_equal(self.coords, other.coords))

    __hash__ = None  # type: ignore[assignment]


class SphereTangent(BaseModel):
    """A tangent vector to the sphere at ``base``."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    base: UnitVector
    vec: np.ndarray

    @field_validator("vec", mode="before")
    @classmethod
    def _check_vec(cls, value: Any) -> np.ndarray:
        return _as_vector(value)

    @model_validator(mode="after")
    def _check_tangency(self) -> "SphereTangent":
        if self.vec.shape != self.base.coords.shape:
            raise ValueError(
                f"tangent has length {self.vec.shape[0]}, base has length {self.base.dim}"
            )
        inner = float(self.vec @ self.base.coords)
        if abs(inner) > UNIT_TOL * max(1.0, float(np.linalg.norm(self.vec))):
            raise ValueError(f"vector is not tangent to the sphere: <vec, base> = {inner!r}")
        return self

    @classmethod
    def project(cls, base: UnitVector, value: Any) -> "SphereTangent":
        """Orthogonal projection of an ambient vector onto the tangent space at ``base``."""
        array = np.array(value, dtype=float)
        u = base.coords
        array = array - (array @ u) * u
        array = array - (array @ u) * u
        return cls(base=base, vec=array)

    @classmethod
    def zero(cls, base: UnitVector) -> "SphereTangent":
        return cls(base=base, vec=np.zeros(base.dim))

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.vec))

    def scaled(self, factor: float) -> "SphereTangent":
        return SphereTangent(base=self.base, vec=self.vec * factor)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SphereTangent):
            return NotImplemented
        return self.base == other.base and bool(np.array_equal(self.vec, other.vec))

    __hash__ = None  # type: ignore[assignment]


def _require_same_dim(u: UnitVector, v: UnitVector) -> None:
    if u.dim != v.dim:
        raise DimensionMismatchError(f"dimension mismatch: {u.dim} vs {v.dim}")


def angle(u: UnitVector, v: UnitVector) -> float:
    """
    Arclength of a shortest great circle between two unit vectors.

    Evaluated as ``2 atan2(|u - v|, |u + v|)``, which equals ``arccos(<u, v>)`` clamped to
    ``[-1, 1]`` but keeps full precision near 0 and pi.

    Returns:
        Angle in [0, pi]
    """
    _require_same_dim(u, v)
    return float(angles(u.coords, v.coords))


def sphere_exp(u: UnitVector, w: SphereTangent) -> UnitVector:
    """
    Follow the great circle through ``u`` with initial velocity ``w`` for unit time.

    Example:
        >>> u = UnitVector(coords=[1.0, 0.0])
        >>> np.round(sphere_exp(u, SphereTangent(base=u, vec=[0.0, np.pi / 2])).coords, 12)
        array([0., 1.])
    """
    if w.base is not u and w.base != u:
        raise BaseMismatchError("tangent vector is not attached to the given point")
    length = w.norm
    if length == 0.0:
        return u
    moved = u.coords * np.cos(length) + w.vec * (np.sin(length) / length)
    return UnitVector(coords=moved / np.linalg.norm(moved))


def sphere_log(u: UnitVector, v: UnitVector) -> SphereTangent:
    """
    Initial velocity of the shortest great circle from ``u`` to ``v``.

    Raises:
        DimensionMismatchError: If the vectors live in different dimensions
        AntipodalError: If the angle between the vectors is within 1e-9 of pi
    """
    _require_same_dim(u, v)
    theta = float(angles(u.coords, v.coords))
    if theta >= np.pi - ANTIPODAL_TOL:
        raise AntipodalError(
            f"logarithm undefined for (nearly) antipodal vectors: angle = {theta!r}"
        )
    return SphereTangent(base=u, vec=logs(u.coords, v.coords))


# ========== Batched kernels ==========


def angles(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Angles between corresponding unit vectors stored along the last axis."""
    diff = np.linalg.norm(u - v, axis=-1)
    total = np.linalg.norm(u + v, axis=-1)
    return 2.0 * np.arctan2(diff, total)


def logs(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """
    Spherical logarithms ``log_u(v)`` for unit vectors stored along the last axis.

    No antipodal check is made; callers validate angles first.
    """
    inner = np.sum(u * v, axis=-1, keepdims=True)
    w = v - inner * u
    w = w - np.sum(w * u, axis=-1, keepdims=True) * u
    theta = angles(u, v)[..., np.newaxis]
    length = np.linalg.norm(w, axis=-1, keepdims=True)
    small = theta < SMALL_ANGLE
    ratio = np.divide(theta, length, out=np.ones_like(theta), where=~small & (length > 0))
    return w * ratio
