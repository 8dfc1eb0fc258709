"""warped-segre - geometry of alpha-warped Segre-Veronese manifolds of rank-1 tensors."""

from warped_segre.exceptions import (
    ConvergenceError,
    GeometryError,
    IncompatibleError,
    NotConnectedError,
    ValidationError,
    WarpedSegreException,
)
from warped_segre.models import ManifoldShape, MeanConfig
from warped_segre.presegre import PreSegrePoint, PreSegreTangent, pre_distance, pre_exp, pre_log
from warped_segre.segre import SegrePoint, SegreTangent, segre_distance, segre_exp, segre_log
from warped_segre.frechet import frechet_mean

__version__ = "0.1.0"
__all__ = [
    "ConvergenceError",
    "GeometryError",
    "IncompatibleError",
    "ManifoldShape",
    "MeanConfig",
    "NotConnectedError",
    "PreSegrePoint",
    "PreSegreTangent",
    "SegrePoint",
    "SegreTangent",
    "ValidationError",
    "WarpedSegreException",
    "frechet_mean",
    "pre_distance",
    "pre_exp",
    "pre_log",
    "segre_distance",
    "segre_exp",
    "segre_log",
]
