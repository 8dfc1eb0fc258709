"""Data models for warped-segre: manifold shapes, solver settings and file schemas."""

import math
from typing import List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

SCHEMA_VERSION = 1


class ManifoldShape(BaseModel):
    """
    Shape of an alpha-warped (pre-)Segre-Veronese manifold.

    The manifold consists of the tensors ``lam * u_1^{(x)k_1} (x) ... (x) u_d^{(x)k_d}``
    with ``u_i`` on the unit sphere of R^{n_i}.

    Example:
        >>> shape = ManifoldShape(dims=(3, 4), mults=(1, 2), alpha=0.5)
        >>> shape.extents
        (3, 4, 4)
    """

    model_config = ConfigDict(frozen=True)

    dims: Tuple[int, ...]
    mults: Tuple[int, ...]
    alpha: float = 1.0

    @field_validator("dims")
    @classmethod
    def _check_dims(cls, dims: Tuple[int, ...]) -> Tuple[int, ...]:
        if len(dims) < 1:
            raise ValueError("at least one factor is required")
        if any(n < 2 for n in dims):
            raise ValueError(f"every factor dimension must be >= 2, got {dims}")
        return dims

    @field_validator("mults")
    @classmethod
    def _check_mults(cls, mults: Tuple[int, ...]) -> Tuple[int, ...]:
        if any(k < 1 for k in mults):
            raise ValueError(f"every multiplicity must be >= 1, got {mults}")
        return mults

    @field_validator("alpha")
    @classmethod
    def _check_alpha(cls, alpha: float) -> float:
        if not math.isfinite(alpha) or alpha <= 0:
            raise ValueError(f"alpha must be a positive real, got {alpha}")
        return alpha

    @model_validator(mode="after")
    def _check_lengths(self) -> "ManifoldShape":
        if len(self.dims) != len(self.mults):
            raise ValueError(
                f"dims and mults must have equal length, got {len(self.dims)} and {len(self.mults)}"
            )
        return self

    @property
    def order(self) -> int:
        """Number of distinct factors d."""
        return len(self.dims)

    @property
    def total_mult(self) -> int:
        """Sum of the multiplicities k_1 + ... + k_d."""
        return sum(self.mults)

    @property
    def extents(self) -> Tuple[int, ...]:
        """Extents of the dense tensor: n_i repeated k_i times."""
        return tuple(n for n, k in zip(self.dims, self.mults) for _ in range(k))

    @property
    def entry_count(self) -> int:
        """Number of entries of the dense tensor."""
        return math.prod(self.extents)

    @property
    def odd_indices(self) -> Tuple[int, ...]:
        """Indices of the factors with odd multiplicity."""
        return tuple(i for i, k in enumerate(self.mults) if k % 2 == 1)

    def with_alpha(self, alpha: float) -> "ManifoldShape":
        """Return the same shape with another warping factor."""
        return ManifoldShape(dims=self.dims, mults=self.mults, alpha=alpha)


class MeanConfig(BaseModel):
    """Settings of the Frechet mean estimator."""

    max_iters: int = 200
    grad_tol: float = 1e-9
    step: float = 1.0
    shuffle_seed: Optional[int] = None

    @field_validator("max_iters")
    @classmethod
    def _check_max_iters(cls, value: int) -> int:
        if value < 1:
            raise ValueError("max_iters must be >= 1")
        return value

    @field_validator("grad_tol")
    @classmethod
    def _check_grad_tol(cls, value: float) -> float:
        if not value > 0:
            raise ValueError("grad_tol must be positive")
        return value

    @field_validator("step")
    @classmethod
    def _check_step(cls, value: float) -> float:
        if not 0 < value <= 1:
            raise ValueError("step must lie in (0, 1]")
        return value


# ========== File schemas ==========


class ShapeSpec(BaseModel):
    """Shape block of a JSON document; alpha may be left to the command line."""

    dims: List[int]
    mults: List[int]
    alpha: Optional[float] = None

    def to_shape(self, alpha: Optional[float] = None) -> ManifoldShape:
        """Build a ManifoldShape, preferring an explicit alpha over the stored one."""
        chosen = alpha if alpha is not None else self.alpha
        if chosen is None:
            raise ValueError("no alpha given in the file or on the command line")
        return ManifoldShape(dims=tuple(self.dims), mults=tuple(self.mults), alpha=chosen)

    @classmethod
    def from_shape(cls, shape: ManifoldShape) -> "ShapeSpec":
        return cls(dims=list(shape.dims), mults=list(shape.mults), alpha=shape.alpha)


class TermSpec(BaseModel):
    """A rank-1 term as stored on disk: a scale and one vector per factor."""

    model_config = ConfigDict(populate_by_name=True)

    lam: float = Field(1.0, alias="lambda")
    factors: List[List[float]]


class TangentSpec(BaseModel):
    """A tangent vector in factored coordinates."""

    lambda_dot: float
    factor_dots: List[List[float]]


class Document(BaseModel):
    """Common header of every JSON document."""

    model_config = ConfigDict(populate_by_name=True)

    schema_version: int = Field(SCHEMA_VERSION, alias="schema")
    shape: ShapeSpec

    @field_validator("schema_version")
    @classmethod
    def _check_schema(cls, value: int) -> int:
        if value != SCHEMA_VERSION:
            raise ValueError(f"unsupported schema version {value}, expected {SCHEMA_VERSION}")
        return value

    def _check_term(self, term: TermSpec, where: str) -> None:
        if len(term.factors) != len(self.shape.dims):
            raise ValueError(
                f"{where}: expected {len(self.shape.dims)} factors, got {len(term.factors)}"
            )
        for i, (vector, n) in enumerate(zip(term.factors, self.shape.dims)):
            if len(vector) != n:
                raise ValueError(f"{where}: factor {i} has length {len(vector)}, expected {n}")


class PointsDocument(Document):
    """One or more points sharing a shape (input of dist, log and mean)."""

    points: List[TermSpec]

    @model_validator(mode="after")
    def _check_points(self) -> "PointsDocument":
        for index, term in enumerate(self.points):
            self._check_term(term, f"point {index}")
        return self


class TangentDocument(Document):
    """A base point together with a tangent vector (input of exp, output of log)."""

    point: TermSpec
    tangent: TangentSpec

    @model_validator(mode="after")
    def _check_tangent(self) -> "TangentDocument":
        self._check_term(self.point, "point")
        if len(self.tangent.factor_dots) != len(self.shape.dims):
            raise ValueError("tangent: wrong number of factor directions")
        return self


class DecompositionFile(Document):
    """M approximate rank-r decompositions of the same tensor."""

    decompositions: List[List[TermSpec]]

    @model_validator(mode="after")
    def _check_decompositions(self) -> "DecompositionFile":
        if not self.decompositions:
            raise ValueError("at least one decomposition is required")
        rank = len(self.decompositions[0])
        for m, terms in enumerate(self.decompositions):
            if len(terms) != rank:
                raise ValueError(
                    f"decomposition {m} has {len(terms)} terms, expected {rank}"
                )
            for i, term in enumerate(terms):
                self._check_term(term, f"decomposition {m}, term {i}")
        return self


class TruthReport(BaseModel):
    """Errors of the aggregated decomposition against a known ground truth."""

    relative_error: float
    median_consensus_error: float
    median_single_error: float
    single_relative_errors: List[float] = Field(default_factory=list)
    term_distances: List[float] = Field(default_factory=list)
    median_single_term_distances: List[float] = Field(default_factory=list)


class AggregationReport(Document):
    """Output of the consensus aggregation."""

    terms: List[TermSpec]
    term_distances: List[List[float]]
    permutations: List[List[int]] = Field(default_factory=list)
    truth: Optional[TruthReport] = None
