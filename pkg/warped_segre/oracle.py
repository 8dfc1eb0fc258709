"""
Numerical oracles for the closed-form geometry.

Path lengths by quadrature of finite-difference speeds, a variational shortest-path
solver and the explicit bypass path between incompatible points.
"""

import logging
import math
from enum import Enum
from typing import Callable, List, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, model_validator
from scipy import integrate, optimize

from warped_segre.exceptions import (
    AntipodalFactorError,
    IncompatibleError,
    MaxItersExceeded,
    ValidationError,
)
from warped_segre.models import ManifoldShape
from warped_segre.presegre import (
    PreSegrePoint,
    PreSegreTangent,
    geodesic,
    geodesic_coordinates,
    pre_log,
    spherical_distance,
)
from warped_segre.sphere import ANTIPODAL_TOL, UnitVector, angles, logs

logger = logging.getLogger(__name__)

DEFAULT_PANELS = 1000
FD_STEP = 1e-5
MIN_NODES = 8
MIN_LAMBDA = 1e-9

Coordinates = Tuple[np.ndarray, List[np.ndarray]]
CoordinateFunction = Callable[[np.ndarray], Coordinates]


class JoinKind(str, Enum):
    """How two consecutive nodes of a path are joined."""

    GEODESIC = "geodesic"
    ARC = "arc"


class PolyPath(BaseModel):
    """A piecewise path through ``nodes``; segment j joins nodes j and j+1 by ``joins[j]``."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    nodes: Tuple[PreSegrePoint, ...]
    joins: Tuple[JoinKind, ...]

    @model_validator(mode="after")
    def _check_structure(self) -> "PolyPath":
        if len(self.nodes) < 2:
            raise ValueError("a path needs at least two nodes")
        if len(self.joins) != len(self.nodes) - 1:
            raise ValueError(f"expected {len(self.nodes) - 1} joins, got {len(self.joins)}")
        shape = self.nodes[0].shape
        if any(node.shape != shape for node in self.nodes):
            raise ValueError("all nodes must share one shape")
        return self

    @classmethod
    def from_geodesics(cls, nodes: Sequence[PreSegrePoint]) -> "PolyPath":
        return cls(nodes=tuple(nodes), joins=(JoinKind.GEODESIC,) * (len(nodes) - 1))

    @classmethod
    def from_arcs(cls, nodes: Sequence[PreSegrePoint]) -> "PolyPath":
        return cls(nodes=tuple(nodes), joins=(JoinKind.ARC,) * (len(nodes) - 1))

    @property
    def shape(self) -> ManifoldShape:
        return self.nodes[0].shape


# ========== Segment parameterizations ==========


def _geodesic_segment(a: PreSegrePoint, b: PreSegrePoint) -> CoordinateFunction:
    v = pre_log(a, b)
    return lambda ts: geodesic_coordinates(v, ts)


def _arc_segment(a: PreSegrePoint, b: PreSegrePoint) -> CoordinateFunction:
    directions = []
    for i, (u, w) in enumerate(zip(a.factors, b.factors)):
        theta = float(angles(u.coords, w.coords))
        if theta >= math.pi - ANTIPODAL_TOL:
            raise AntipodalFactorError(
                f"factor {i} is antipodal (angle {theta!r}); the great-circle arc is not unique",
                index=i,
            )
        directions.append((u.coords, logs(u.coords, w.coords), theta))

    def coordinates(ts: np.ndarray) -> Coordinates:
        radii = (1.0 - ts) * a.lam + ts * b.lam
        factors = []
        for u, log, theta in directions:
            if theta == 0.0:
                factors.append(np.tile(u, (ts.size, 1)))
                continue
            factors.append(
                np.outer(np.cos(ts * theta), u) + np.outer(np.sin(ts * theta), log / theta)
            )
        return radii, factors

    return coordinates


def _segment(a: PreSegrePoint, b: PreSegrePoint, kind: JoinKind) -> CoordinateFunction:
    if kind is JoinKind.GEODESIC:
        return _geodesic_segment(a, b)
    return _arc_segment(a, b)


# ========== Speeds and lengths ==========


def _stencils(ts: np.ndarray, h: float) -> Tuple[np.ndarray, np.ndarray]:
    """Second-order difference offsets and weights; one-sided where ``t -+ h`` leaves [0, 1]."""
    central = (np.array([-h, 0.0, h]), np.array([-0.5, 0.0, 0.5]) / h)
    forward = (np.array([0.0, h, 2 * h]), np.array([-1.5, 2.0, -0.5]) / h)
    backward = (np.array([-2 * h, -h, 0.0]), np.array([0.5, -2.0, 1.5]) / h)
    low = (ts - h < 0.0)[:, np.newaxis]
    high = (ts + h > 1.0)[:, np.newaxis]
    offsets = np.where(low, forward[0], np.where(high, backward[0], central[0]))
    weights = np.where(low, forward[1], np.where(high, backward[1], central[1]))
    return offsets, weights


def coordinate_speeds(
    shape: ManifoldShape, coordinates: CoordinateFunction, ts: np.ndarray, h: float = FD_STEP
) -> np.ndarray:
    """Warped-metric speeds of a curve given by its coordinate function, at parameters ``ts``."""
    ts = np.asarray(ts, dtype=float)
    offsets, weights = _stencils(ts, h)
    radii, factors = coordinates((ts[:, np.newaxis] + offsets).ravel())
    radii = radii.reshape(ts.size, 3)
    lam_rate = np.sum(weights * radii, axis=1)
    here, _ = coordinates(ts)

    spherical = np.zeros(ts.size)
    for k, f in zip(shape.mults, factors):
        f = f.reshape(ts.size, 3, -1)
        rate = np.einsum("ts,tsn->tn", weights, f)
        spherical += k * np.sum(rate**2, axis=1)
    return np.sqrt(lam_rate**2 + (shape.alpha * here) ** 2 * spherical)


def finite_difference_speed(
    p: PreSegrePoint, v: PreSegreTangent, t: float, h: float = FD_STEP
) -> float:
    """Speed of ``s -> exp_p(s v)`` at ``s = t``, by second-order finite differences."""
    speeds = coordinate_speeds(p.shape, lambda ts: geodesic_coordinates(v, ts), np.array([t]), h)
    return float(speeds[0])


def path_length(path: PolyPath, panels: int = DEFAULT_PANELS) -> float:
    """
    Length of a piecewise path by trapezoid quadrature of its speed.

    Args:
        path: The path
        panels: Trapezoid panels per segment (at least 1000)

    Raises:
        IncompatibleError: If two nodes joined by a geodesic are incompatible
        AntipodalFactorError: If a segment's end factors are antipodal
    """
    if panels < DEFAULT_PANELS:
        raise ValidationError(f"at least {DEFAULT_PANELS} panels per segment are required")
    ts = np.linspace(0.0, 1.0, panels + 1)
    total = 0.0
    for a, b, kind in zip(path.nodes[:-1], path.nodes[1:], path.joins):
        speeds = coordinate_speeds(path.shape, _segment(a, b, kind), ts)
        total += float(integrate.trapezoid(speeds, ts))
    return total


def sample_geodesic_path(p: PreSegrePoint, v: PreSegreTangent, count: int) -> PolyPath:
    """Geodesic-joined path through ``count`` equispaced points of ``t -> exp_p(t v)``."""
    return PolyPath.from_geodesics(geodesic(p, v, np.linspace(0.0, 1.0, count)))


def bypass_path(p: PreSegrePoint, q: PreSegrePoint, eps: float) -> PolyPath:
    """
    Three-segment path from ``p`` to ``q`` around the puncture.

    Radially down to radius ``eps``, along great circles at that radius, and radially
    up again. Its length is ``lam + mu + (alpha M - 2) eps``.

    Raises:
        ValidationError: If ``eps`` is not in ``(0, min(lam, mu))``
    """
    if not 0.0 < eps < min(p.lam, q.lam):
        raise ValidationError(f"eps must lie in (0, {min(p.lam, q.lam)!r}), got {eps!r}")
    low_p = PreSegrePoint(shape=p.shape, lam=eps, factors=p.factors)
    low_q = PreSegrePoint(shape=q.shape, lam=eps, factors=q.factors)
    return PolyPath(
        nodes=(p, low_p, low_q, q),
        joins=(JoinKind.GEODESIC, JoinKind.ARC, JoinKind.GEODESIC),
    )


# ========== Variational shortest path ==========


class _PathEnergy:
    """Discrete energy of an arc polygon with fixed ends, over flattened interior nodes."""

    def __init__(self, p: PreSegrePoint, q: PreSegrePoint, interior: int):
        self.p = p
        self.q = q
        self.interior = interior
        self.dims = p.shape.dims
        self.mults = np.asarray(p.shape.mults, dtype=float)
        self.alpha = p.alpha

    def unpack(self, x: np.ndarray) -> Tuple[np.ndarray, List[np.ndarray], List[np.ndarray]]:
        m = self.interior
        lam = np.concatenate([[self.p.lam], x[:m], [self.q.lam]])
        raw, units = [], []
        offset = m
        for i, n in enumerate(self.dims):
            block = x[offset : offset + m * n].reshape(m, n)
            offset += m * n
            raw.append(block)
            inner = block / np.linalg.norm(block, axis=1, keepdims=True)
            units.append(np.vstack([self.p.factors[i].coords, inner, self.q.factors[i].coords]))
        return lam, raw, units

    def __call__(self, x: np.ndarray) -> Tuple[float, np.ndarray]:
        lam, raw, units = self.unpack(x)
        step = lam[1:] - lam[:-1]
        mid = 0.5 * (lam[1:] + lam[:-1])
        thetas = [angles(u[:-1], u[1:]) for u in units]
        spread = sum(k * theta**2 for k, theta in zip(self.mults, thetas))
        weight = self.alpha**2 * mid**2
        energy = float(np.sum(step**2 + weight * spread))

        grad_lam = np.zeros_like(lam)
        grad_lam[:-1] += -2.0 * step + self.alpha**2 * mid * spread
        grad_lam[1:] += 2.0 * step + self.alpha**2 * mid * spread
        parts = [grad_lam[1:-1]]
        for k, u, block in zip(self.mults, units, raw):
            grad_u = np.zeros_like(u)
            grad_u[:-1] += -2.0 * k * weight[:, np.newaxis] * logs(u[:-1], u[1:])
            grad_u[1:] += -2.0 * k * weight[:, np.newaxis] * logs(u[1:], u[:-1])
            inner = u[1:-1]
            tangent = grad_u[1:-1] - np.sum(grad_u[1:-1] * inner, axis=1, keepdims=True) * inner
            parts.append((tangent / np.linalg.norm(block, axis=1, keepdims=True)).ravel())
        return energy, np.concatenate(parts)


def _initial_guess(p: PreSegrePoint, q: PreSegrePoint, interior: int) -> np.ndarray:
    ts = np.linspace(0.0, 1.0, interior + 2)[1:-1]
    radii, factors = _arc_segment(p, q)(ts)
    return np.concatenate([radii] + [f.ravel() for f in factors])


def minimize_path(
    p: PreSegrePoint, q: PreSegrePoint, nodes: int = 64, max_iters: int = 2000
) -> Tuple[float, PolyPath]:
    """
    Shortest arc polygon from ``p`` to ``q`` by L-BFGS-B relaxation of its interior nodes.

    The discrete energy ``sum_j (dlam_j^2 + alpha^2 lam_mid^2 sum_i k_i theta_ij^2)`` is
    minimized; the reported length is the quadrature length of the relaxed polygon.

    Returns:
        Tuple of (length, path)

    Raises:
        IncompatibleError: If ``p`` and ``q`` are not compatible
        ValidationError: If fewer than 8 nodes are requested
        MaxItersExceeded: If the optimizer stops at its iteration cap
    """
    if nodes < MIN_NODES:
        raise ValidationError(f"at least {MIN_NODES} nodes are required, got {nodes}")
    alpha_m = p.alpha * spherical_distance(p, q)
    if alpha_m >= math.pi:
        raise IncompatibleError(
            f"points are not alpha-compatible: alpha*M = {alpha_m!r} >= pi = {math.pi!r}",
            alpha_m=alpha_m,
        )

    interior = nodes - 2
    energy = _PathEnergy(p, q, interior)
    x0 = _initial_guess(p, q, interior)
    bounds = [(MIN_LAMBDA, None)] * interior + [(None, None)] * (x0.size - interior)
    result = optimize.minimize(
        energy,
        x0,
        jac=True,
        method="L-BFGS-B",
        bounds=bounds,
        options={"maxiter": max_iters, "ftol": 1e-15, "gtol": 1e-12},
    )
    logger.debug(
        "minimize_path: %d iterations, energy %.6e, status %s",
        result.nit,
        result.fun,
        result.message,
    )
    _, _, units = energy.unpack(result.x)
    lam = np.concatenate([[p.lam], result.x[:interior], [q.lam]])
    if result.nit >= max_iters:
        raise MaxItersExceeded(
            f"path relaxation did not converge in {max_iters} iterations",
            last_iterate=result.x,
            iterations=int(result.nit),
        )
    if not result.success:
        logger.warning("minimize_path stopped early: %s", result.message)

    points = [p]
    for j in range(1, nodes - 1):
        factors = tuple(UnitVector(coords=u[j]) for u in units)
        points.append(PreSegrePoint(shape=p.shape, lam=float(lam[j]), factors=factors))
    points.append(q)
    path = PolyPath.from_arcs(points)
    return path_length(path), path
