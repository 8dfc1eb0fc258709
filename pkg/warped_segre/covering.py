"""
The normal Riemannian covering ``(lam, u_1, ..., u_d) -> lam u_1^{k_1} (x) ... (x) u_d^{k_d}``.

Dense embedding, its differential, deck transforms and the matchmaking of fiber
representatives.
"""

import itertools
import math
from typing import Any, List, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, field_validator

from warped_segre.exceptions import (
    InfeasibleSignPatternError,
    ShapeMismatchError,
    SizeCapExceeded,
    ValidationError,
)
from warped_segre.models import ManifoldShape
from warped_segre.presegre import PreSegrePoint, PreSegreTangent, factor_angles
from warped_segre.sphere import UnitVector, angles

DEFAULT_ENTRY_CAP = 10_000_000
BRUTE_FORCE_MAX_ORDER = 20


class SignPattern(BaseModel):
    """Factor-wise signs ``sigma``; a deck transform when ``prod sigma_i^{k_i} = 1``."""

    model_config = ConfigDict(frozen=True)

    signs: Tuple[int, ...]

    @field_validator("signs")
    @classmethod
    def _check_signs(cls, signs: Tuple[int, ...]) -> Tuple[int, ...]:
        if any(s not in (-1, 1) for s in signs):
            raise ValueError(f"signs must be +1 or -1, got {signs}")
        return signs

    @classmethod
    def identity(cls, order: int) -> "SignPattern":
        return cls(signs=(1,) * order)

    def is_feasible(self, mults: Sequence[int]) -> bool:
        """Whether the pattern leaves every tensor of multiplicities ``mults`` unchanged."""
        if len(self.signs) != len(mults):
            return False
        return math.prod(s for s, k in zip(self.signs, mults) if k % 2 == 1) == 1


class DenseTensor(BaseModel):
    """A dense row-major array of tensor entries."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    data: np.ndarray

    @property
    def shape(self) -> Tuple[int, ...]:
        return tuple(self.data.shape)

    @property
    def frobenius(self) -> float:
        return float(np.linalg.norm(self.data.ravel()))

    def allclose(self, other: "DenseTensor", atol: float = 1e-10) -> bool:
        return self.shape == other.shape and bool(
            np.allclose(self.data, other.data, rtol=0.0, atol=atol)
        )

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, DenseTensor):
            return NotImplemented
        return bool(np.array_equal(self.data, other.data))

    __hash__ = None  # type: ignore[assignment]


class DeltaProfile(BaseModel):
    """Cost change ``Delta_i = k_i (pi^2 - 2 pi angle_i)`` of keeping factor i unflipped."""

    deltas: Tuple[float, ...]

    def unconstrained_pattern(self) -> SignPattern:
        return SignPattern(signs=tuple(1 if delta >= 0 else -1 for delta in self.deltas))


def delta_profile(p_star: PreSegrePoint, q_ref: PreSegrePoint) -> DeltaProfile:
    """Matchmaking costs of the factors of ``q_ref`` relative to ``p_star``."""
    thetas = factor_angles(p_star, q_ref)
    mults = np.asarray(p_star.shape.mults, dtype=float)
    deltas = mults * (math.pi**2 - 2.0 * math.pi * thetas)
    return DeltaProfile(deltas=tuple(float(d) for d in deltas))


# ========== Dense embedding ==========


def _check_cap(shape: ManifoldShape, max_entries: int) -> None:
    entries = shape.entry_count
    if entries > max_entries:
        raise SizeCapExceeded(
            f"dense tensor of extents {shape.extents} has {entries} entries, cap is {max_entries}",
            entries=entries,
            cap=max_entries,
        )


def _outer_all(blocks: Sequence[np.ndarray]) -> np.ndarray:
    result = np.asarray(1.0)
    for block in blocks:
        result = np.multiply.outer(result, block)
    return result


def _power(u: np.ndarray, k: int) -> np.ndarray:
    return _outer_all([u] * k)


def tensor_embed(p: PreSegrePoint, max_entries: int = DEFAULT_ENTRY_CAP) -> DenseTensor:
    """
    Materialize ``lam u_1^{(x)k_1} (x) ... (x) u_d^{(x)k_d}``.

    Raises:
        SizeCapExceeded: If the tensor has more than ``max_entries`` entries
    """
    _check_cap(p.shape, max_entries)
    blocks = [u.coords for u, k in zip(p.factors, p.shape.mults) for _ in range(k)]
    return DenseTensor(data=p.lam * _outer_all(blocks))


def veronese_pushforward(u: UnitVector, u_dot: Any, k: int) -> np.ndarray:
    """
    Differential of ``u -> u^{(x)k}`` applied to ``u_dot``.

    The k-term sum ``u_dot (x) u^{(x)(k-1)} + u (x) u_dot (x) u^{(x)(k-2)} + ...``.
    """
    direction = np.asarray(u_dot, dtype=float)
    total = np.zeros((u.dim,) * k)
    for position in range(k):
        blocks = [direction if j == position else u.coords for j in range(k)]
        total = total + _outer_all(blocks)
    return total


def pushforward(v: PreSegreTangent, max_entries: int = DEFAULT_ENTRY_CAP) -> DenseTensor:
    """
    Push a pre-Segre tangent forward to a dense tangent of the Segre manifold.

    Returns ``lam_dot U + lam sum_i (u_1^{k_1} (x) ... nu_{k_i}(u_dot_i) ... (x) u_d^{k_d})``
    where ``U`` is the unit tensor of the base point.
    """
    p = v.base
    _check_cap(p.shape, max_entries)
    powers = [_power(u.coords, k) for u, k in zip(p.factors, p.shape.mults)]
    result = v.lam_dot * _outer_all(powers)
    for i, (u, k, dot) in enumerate(zip(p.factors, p.shape.mults, v.factor_dots)):
        if dot.norm == 0.0:
            continue
        blocks = list(powers)
        blocks[i] = veronese_pushforward(u, dot.vec, k)
        result = result + p.lam * _outer_all(blocks)
    return DenseTensor(data=result)


def ambient_inner(
    at: Union[DenseTensor, np.ndarray],
    x: Union[DenseTensor, np.ndarray],
    y: Union[DenseTensor, np.ndarray],
    alpha: float,
) -> float:
    """
    Alpha-warped inner product of two dense tangents at the nonzero tensor ``at``.

    The components along ``at`` multiply as in the Euclidean metric; the orthogonal
    (spherical) components are weighted by ``alpha^2``.
    """
    base, first, second = (
        (t.data if isinstance(t, DenseTensor) else np.asarray(t, dtype=float)).ravel()
        for t in (at, x, y)
    )
    unit = base / np.linalg.norm(base)
    x_radial = float(first @ unit)
    y_radial = float(second @ unit)
    x_sphere = first - x_radial * unit
    y_sphere = second - y_radial * unit
    return x_radial * y_radial + alpha**2 * float(x_sphere @ y_sphere)


# ========== Deck transforms ==========


def _feasible_sign_rows(mults: Sequence[int]) -> np.ndarray:
    rows = np.array(list(itertools.product((1, -1), repeat=len(mults))), dtype=np.int8)
    odd = np.array([k % 2 == 1 for k in mults])
    negatives = np.sum(rows[:, odd] == -1, axis=1)
    return rows[negatives % 2 == 0]


def deck_transforms(shape: ManifoldShape) -> List[SignPattern]:
    """
    All feasible sign patterns of ``shape``, starting with the identity.

    Patterns are listed in lexicographic order with +1 before -1.
    """
    return [
        SignPattern(signs=tuple(int(s) for s in row)) for row in _feasible_sign_rows(shape.mults)
    ]


def apply_deck(p: PreSegrePoint, s: SignPattern) -> PreSegrePoint:
    """
    Negate the factors of ``p`` selected by ``s``.

    Raises:
        InfeasibleSignPatternError: If ``s`` does not preserve the dense embedding
    """
    if not s.is_feasible(p.shape.mults):
        raise InfeasibleSignPatternError(
            f"sign pattern {s.signs} is not a deck transform for multiplicities {p.shape.mults}"
        )
    factors = tuple(u if sign == 1 else -u for u, sign in zip(p.factors, s.signs))
    return PreSegrePoint(shape=p.shape, lam=p.lam, factors=factors)


def fiber(p: PreSegrePoint) -> List[PreSegrePoint]:
    """Every representative of the tensor ``p`` represents."""
    return [apply_deck(p, s) for s in deck_transforms(p.shape)]


# ========== Matchmaking ==========


def _require_same_shape(p: PreSegrePoint, q: PreSegrePoint) -> None:
    if p.shape != q.shape:
        raise ShapeMismatchError(f"shape mismatch: {p.shape!r} vs {q.shape!r}")


def matching_pattern(p_star: PreSegrePoint, q_ref: PreSegrePoint) -> SignPattern:
    """
    The deck transform that brings ``q_ref`` closest to ``p_star`` in the sphere part.

    Each factor keeps its sign iff ``Delta_i >= 0``. If that violates the feasibility
    constraint, the odd-multiplicity factor with the smallest ``|Delta_i|`` (lowest index
    on ties) is flipped back.
    """
    _require_same_shape(p_star, q_ref)
    profile = delta_profile(p_star, q_ref)
    pattern = profile.unconstrained_pattern()
    if pattern.is_feasible(p_star.shape.mults):
        return pattern

    odd = list(p_star.shape.odd_indices)
    costs = np.abs(np.asarray(profile.deltas)[odd])
    flip = odd[int(np.argmin(costs))]
    signs = list(pattern.signs)
    signs[flip] = -signs[flip]
    return SignPattern(signs=tuple(signs))


def match_representatives(p_star: PreSegrePoint, q_ref: PreSegrePoint) -> PreSegrePoint:
    """Representative of ``q_ref``'s tensor minimizing the spherical distance to ``p_star``."""
    return apply_deck(q_ref, matching_pattern(p_star, q_ref))


def brute_force_match(p_star: PreSegrePoint, q_ref: PreSegrePoint) -> PreSegrePoint:
    """
    Exhaustive matchmaking over every deck transform.

    Ties resolve to the lexicographically largest pattern.

    Raises:
        ValidationError: If there are more than 20 factors
    """
    _require_same_shape(p_star, q_ref)
    order = p_star.shape.order
    if order > BRUTE_FORCE_MAX_ORDER:
        raise ValidationError(
            f"brute-force matching supports at most {BRUTE_FORCE_MAX_ORDER} factors, got {order}"
        )
    same = np.array(
        [float(angles(u.coords, v.coords)) for u, v in zip(p_star.factors, q_ref.factors)]
    )
    flipped = np.array(
        [float(angles(u.coords, -v.coords)) for u, v in zip(p_star.factors, q_ref.factors)]
    )
    rows = _feasible_sign_rows(p_star.shape.mults)
    mults = np.asarray(p_star.shape.mults, dtype=float)
    costs = np.where(rows == 1, same**2, flipped**2) @ mults
    best = rows[int(np.argmin(costs))]
    return apply_deck(q_ref, SignPattern(signs=tuple(int(s) for s in best)))
