"""JSON documents and CSV traces on disk or standard streams."""

import json
import logging
import sys
from pathlib import Path
from typing import List, Optional, TextIO, Tuple, Type, TypeVar, Union

import numpy as np
import pydantic
from pydantic import BaseModel

from warped_segre.aggregate import Decomposition
from warped_segre.exceptions import ValidationError
from warped_segre.models import (
    DecompositionFile,
    ManifoldShape,
    ShapeSpec,
    TangentSpec,
    TermSpec,
)
from warped_segre.presegre import PreSegrePoint, PreSegreTangent
from warped_segre.segre import SegrePoint

logger = logging.getLogger(__name__)

DocumentT = TypeVar("DocumentT", bound=BaseModel)
PathLike = Union[str, Path]

STDIO = "-"


class DocumentStorage:
    """Handles reading and writing of documents and traces."""

    def __init__(
        self,
        output_dir: Optional[Path] = None,
        stdin: Optional[TextIO] = None,
        stdout: Optional[TextIO] = None,
    ):
        """
        Initialize document storage.

        Args:
            output_dir: Directory that relative output paths resolve against
            stdin: Stream read when no input file is given
            stdout: Stream written when no output file is given
        """
        self.output_dir = Path(output_dir) if output_dir is not None else Path.cwd()
        self.stdin = stdin
        self.stdout = stdout

    def _resolve(self, target: PathLike) -> Path:
        path = Path(target)
        return path if path.is_absolute() else self.output_dir / path

    def load(self, source: Optional[PathLike], model: Type[DocumentT]) -> DocumentT:
        """
        Load and validate a JSON document.

        Args:
            source: File path, or None / "-" for standard input
            model: Document model to validate against

        Returns:
            The validated document

        Raises:
            ValidationError: If the file is missing, not JSON or fails the schema
        """
        label = "<stdin>" if source in (None, STDIO) else str(source)
        try:
            if source in (None, STDIO):
                text = (self.stdin or sys.stdin).read()
            else:
                text = Path(source).read_text(encoding="utf-8")  # type: ignore[arg-type]
        except OSError as e:
            raise ValidationError(f"{label}: cannot read input: {e}") from e

        try:
            data = json.loads(text)
        except json.JSONDecodeError as e:
            raise ValidationError(f"{label}: invalid JSON: {e}") from e

        try:
            return model.model_validate(data)
        except pydantic.ValidationError as e:
            raise ValidationError(f"{label}: {e}") from e

    def save(self, document: BaseModel, target: Optional[PathLike] = None) -> Optional[Path]:
        """
        Write a document as UTF-8 JSON.

        Floats are written in their shortest round-trip form, so reading the file back
        reproduces every value exactly.

        Returns:
            The written path, or None when writing to standard output
        """
        text = json.dumps(document.model_dump(by_alias=True, exclude_none=True), indent=2) + "\n"
        if target in (None, STDIO):
            (self.stdout or sys.stdout).write(text)
            return None
        path = self._resolve(target)  # type: ignore[arg-type]
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            f.write(text)
        logger.info("Wrote %s", path)
        return path

    def write_trace(self, target: PathLike, ts: np.ndarray, rows: np.ndarray) -> Path:
        """
        Write a sampled curve as CSV with header ``t,x0,x1,...``.

        Args:
            target: Output file
            ts: Parameters, shape (T,)
            rows: Coordinates, shape (T, D)
        """
        data = np.column_stack([np.asarray(ts, dtype=float), np.asarray(rows, dtype=float)])
        header = ",".join(["t"] + [f"x{i}" for i in range(data.shape[1] - 1)])
        path = self._resolve(target)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            np.savetxt(f, data, fmt="%.17g", delimiter=",", header=header, comments="")
        logger.info("Wrote %s (%d rows)", path, data.shape[0])
        return path

    def read_trace(self, source: PathLike) -> Tuple[List[str], np.ndarray]:
        """Read a CSV trace back as (header, rows)."""
        path = self._resolve(source)
        with open(path, "r", encoding="utf-8") as f:
            header = f.readline().strip().split(",")
            data = np.loadtxt(f, delimiter=",", ndmin=2)
        return header, data


# ========== Conversions between documents and geometry ==========


def point_from_term(term: TermSpec, shape: ManifoldShape) -> PreSegrePoint:
    """Build a point from stored vectors; vector norms fold into the scale."""
    return PreSegrePoint.from_vectors(shape, term.factors, lam=term.lam)


def segre_from_term(term: TermSpec, shape: ManifoldShape) -> SegrePoint:
    return SegrePoint(rep=point_from_term(term, shape))


def term_from_point(p: Union[PreSegrePoint, SegrePoint]) -> TermSpec:
    rep = p.rep if isinstance(p, SegrePoint) else p
    return TermSpec(lam=rep.lam, factors=[u.coords.tolist() for u in rep.factors])


def tangent_from_spec(base: PreSegrePoint, spec: TangentSpec) -> PreSegreTangent:
    return PreSegreTangent.from_arrays(base, spec.lambda_dot, spec.factor_dots)


def spec_from_tangent(v: PreSegreTangent) -> TangentSpec:
    return TangentSpec(
        lambda_dot=v.lam_dot, factor_dots=[dot.vec.tolist() for dot in v.factor_dots]
    )


def decompositions_from_file(document: DecompositionFile, alpha: float) -> List[Decomposition]:
    shape = document.shape.to_shape(alpha)
    return [
        Decomposition(terms=tuple(segre_from_term(term, shape) for term in terms))
        for terms in document.decompositions
    ]


def file_from_decompositions(decompositions: List[Decomposition]) -> DecompositionFile:
    return DecompositionFile(
        shape=ShapeSpec.from_shape(decompositions[0].shape),
        decompositions=[[term_from_point(t) for t in d.terms] for d in decompositions],
    )
