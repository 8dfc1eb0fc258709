"""Command-line interface: ``warped-segre <command> [options]``."""

import argparse
import logging
import sys
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from warped_segre import __version__
from warped_segre.aggregate import (
    AUTO,
    Decomposition,
    aggregate_decompositions,
    compare_to_truth,
    synthetic_decompositions,
)
from warped_segre.config import Settings, load_settings
from warped_segre.covering import match_representatives, tensor_embed
from warped_segre.curvature import axis_plane, estimate_curvature_bdp, sectional_curvature
from warped_segre.exceptions import ValidationError, WarpedSegreException
from warped_segre.frechet import frechet_mean
from warped_segre.models import (
    AggregationReport,
    DecompositionFile,
    ManifoldShape,
    PointsDocument,
    ShapeSpec,
    TangentDocument,
)
from warped_segre.oracle import minimize_path
from warped_segre.presegre import PreSegrePoint, geodesic_coordinates, pre_log
from warped_segre.segre import (
    SegrePoint,
    SegreTangent,
    auto_alpha,
    segre_distance,
    segre_exp,
    segre_log,
)
from warped_segre.storage import (
    DocumentStorage,
    decompositions_from_file,
    file_from_decompositions,
    segre_from_term,
    spec_from_tangent,
    tangent_from_spec,
    term_from_point,
)

logger = logging.getLogger(__name__)

CHECK_TOL = 1e-9
DEMO_ALPHAS = (0.01, 0.5, 1.0, 1.5, 1.99)
DEMO_SAMPLES = 101

Handler = Callable[[argparse.Namespace, Settings, DocumentStorage], int]


# ========== Argument helpers ==========


def _int_list(text: str) -> Tuple[int, ...]:
    try:
        return tuple(int(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _float_list(text: str) -> Tuple[float, ...]:
    try:
        return tuple(float(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _alpha_value(text: str) -> str:
    if text != AUTO:
        try:
            float(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"alpha must be 'auto' or a number, got {text!r}")
    return text


def _shape_for(spec: ShapeSpec, alpha: Optional[str]) -> ManifoldShape:
    """Shape of a document, with ``--alpha`` taking precedence over the stored alpha."""
    if alpha == AUTO:
        provisional = ManifoldShape(dims=tuple(spec.dims), mults=tuple(spec.mults))
        return provisional.with_alpha(auto_alpha(provisional))
    return spec.to_shape(None if alpha is None else float(alpha))


def _load_points(
    storage: DocumentStorage, args: argparse.Namespace, count: Optional[int] = None
) -> List[SegrePoint]:
    document = storage.load(args.input, PointsDocument)
    if count is not None and len(document.points) != count:
        raise ValidationError(f"expected {count} points, got {len(document.points)}")
    if not document.points:
        raise ValidationError("expected at least one point")
    shape = _shape_for(document.shape, args.alpha)
    return [segre_from_term(term, shape) for term in document.points]


def _points_document(points: Sequence[SegrePoint]) -> PointsDocument:
    return PointsDocument(
        shape=ShapeSpec.from_shape(points[0].shape),
        points=[term_from_point(p) for p in points],
    )


def _roundtrip_error(P: SegrePoint, Q: SegrePoint, max_entries: int) -> float:
    """Largest entry deviation of ``exp_P(log_P(Q))`` from ``Q``."""
    back = segre_exp(P, segre_log(P, Q))
    deviation = tensor_embed(back.rep, max_entries).data - tensor_embed(Q.rep, max_entries).data
    return float(np.max(np.abs(deviation)))


def _report_check(P: SegrePoint, Q: SegrePoint, settings: Settings) -> int:
    error = _roundtrip_error(P, Q, settings.entry_cap)
    if error > CHECK_TOL:
        print(f"check failed: exp(log) round trip deviates by {error:.3e}", file=sys.stderr)
        return 1
    logger.info("Round trip deviation %.3e", error)
    return 0


# ========== Commands ==========


def cmd_exp(args: argparse.Namespace, settings: Settings, storage: DocumentStorage) -> int:
    document = storage.load(args.input, TangentDocument)
    shape = _shape_for(document.shape, args.alpha)
    P = segre_from_term(document.point, shape)
    V = SegreTangent(at=P, coords=tangent_from_spec(P.rep, document.tangent))
    Q = segre_exp(P, V)
    storage.save(_points_document([Q]), args.out)
    return _report_check(P, Q, settings) if args.check else 0


def cmd_log(args: argparse.Namespace, settings: Settings, storage: DocumentStorage) -> int:
    P, Q = _load_points(storage, args, count=2)
    V = segre_log(P, Q)
    storage.save(
        TangentDocument(
            shape=ShapeSpec.from_shape(P.shape),
            point=term_from_point(P),
            tangent=spec_from_tangent(V.coords),
        ),
        args.out,
    )
    return _report_check(P, Q, settings) if args.check else 0


def cmd_dist(args: argparse.Namespace, settings: Settings, storage: DocumentStorage) -> int:
    P, Q = _load_points(storage, args, count=2)
    distance = segre_distance(P, Q)
    print(f"{distance.value:.16g} {'connected' if distance.connected else 'disconnected'}")
    if args.oracle and distance.connected:
        q_star = match_representatives(P.rep, Q.rep)
        length, _ = minimize_path(P.rep, q_star, max_iters=settings.minimize_max_iters)
        print(f"oracle {length:.16g}")
    return 0


def cmd_mean(args: argparse.Namespace, settings: Settings, storage: DocumentStorage) -> int:
    points = _load_points(storage, args)
    cfg = settings.mean
    if args.seed is not None:
        cfg = cfg.model_copy(update={"shuffle_seed": args.seed})
    mean = frechet_mean(points, cfg)
    storage.save(_points_document([mean]), args.out)
    return 0


def _synthetic(
    args: argparse.Namespace, storage: DocumentStorage
) -> Tuple[List[Decomposition], Decomposition]:
    shape = ManifoldShape(dims=args.dims, mults=args.mults or (1,) * len(args.dims))
    rng = np.random.default_rng(args.seed)
    truth, decompositions = synthetic_decompositions(
        shape, args.rank, args.count, args.noise, rng
    )
    if args.save_input:
        storage.save(file_from_decompositions(decompositions), args.save_input)
    return decompositions, truth


def cmd_aggregate(args: argparse.Namespace, settings: Settings, storage: DocumentStorage) -> int:
    truth: Optional[Decomposition] = None
    if args.synthetic:
        decompositions, truth = _synthetic(args, storage)
        alpha: object = args.alpha or AUTO
    else:
        document = storage.load(args.input, DecompositionFile)
        decompositions = decompositions_from_file(document, document.shape.alpha or 1.0)
        alpha = args.alpha or document.shape.alpha or AUTO
        if args.truth:
            truth_file = storage.load(args.truth, DecompositionFile)
            truth = decompositions_from_file(truth_file, 1.0)[0]

    chosen = alpha if alpha == AUTO else float(alpha)  # type: ignore[arg-type]
    result = aggregate_decompositions(
        decompositions, alpha=chosen, cfg=settings.mean, workers=args.workers or settings.workers
    )
    if truth is not None:
        result.truth = compare_to_truth(result, decompositions, truth, settings.entry_cap)

    report = AggregationReport(
        shape=ShapeSpec.from_shape(result.decomposition.shape),
        terms=[term_from_point(t) for t in result.decomposition.terms],
        term_distances=result.term_distances,
        permutations=result.permutations,
        truth=result.truth,
    )
    storage.save(report, args.out)
    return 0


def cmd_geodesic_demo(
    args: argparse.Namespace, settings: Settings, storage: DocumentStorage
) -> int:
    for alpha in args.alphas:
        if not 0 < alpha < 2:
            raise ValidationError(
                f"alpha = {alpha:g} is not in (0, 2): the endpoints (0,1) and (1,0) are "
                f"alpha-compatible only when alpha*pi/2 < pi"
            )
    if args.samples < 2:
        raise ValidationError("at least two samples are required")

    out_dir = Path(args.out) if args.out else Path.cwd()
    ts = np.linspace(0.0, 1.0, args.samples)
    for alpha in args.alphas:
        shape = ManifoldShape(dims=(2,), mults=(1,), alpha=alpha)
        p = PreSegrePoint.from_arrays(shape, 1.0, [[0.0, 1.0]])
        q = PreSegrePoint.from_arrays(shape, 1.0, [[1.0, 0.0]])
        radii, factors = geodesic_coordinates(pre_log(p, q), ts)
        target = out_dir / f"geodesic_alpha_{alpha:g}.csv"
        storage.write_trace(target, ts, radii[:, None] * factors[0])
    return 0


_PLANES = {
    "same": lambda n: (("sphere", 0, _axis(n[0], 1)), ("sphere", 0, _axis(n[0], 2))),
    "cross": lambda n: (("sphere", 0, _axis(n[0], 1)), ("sphere", 1, _axis(n[1], 1))),
    "radial": lambda n: (("radial",), ("sphere", 0, _axis(n[0], 1))),
}


def _axis(n: int, i: int) -> np.ndarray:
    if i >= n:
        raise ValidationError(f"a factor of dimension {n} has no axis {i}")
    e = np.zeros(n)
    e[i] = 1.0
    return e


def cmd_curvature(args: argparse.Namespace, settings: Settings, storage: DocumentStorage) -> int:
    mults = args.mults or (1,) * len(args.dims)
    shape = ManifoldShape(dims=args.dims, mults=mults)
    alpha = args.alpha or "1"
    shape = shape.with_alpha(auto_alpha(shape) if alpha == AUTO else float(alpha))
    if args.plane == "cross" and shape.order < 2:
        raise ValidationError("a cross-factor plane needs at least two factors")

    at = PreSegrePoint.from_arrays(shape, args.lam, [_axis(n, 0) for n in shape.dims])
    first, second = _PLANES[args.plane](shape.dims)
    plane = axis_plane(at, first, second)
    closed = sectional_curvature(plane)
    estimate = estimate_curvature_bdp(
        plane, r=settings.bdp_radius_factor * args.lam, samples=settings.bdp_samples
    )
    print(f"closed {closed:.16g}")
    print(f"estimate {estimate:.16g}")
    return 0


# ========== Parser ==========


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="YAML settings file")
    common.add_argument(
        "-v", "--verbose", action="count", default=0, help="more logging (-vv for debug)"
    )
    common.add_argument(
        "--alpha", type=_alpha_value, help="warping factor, or 'auto' for 1/sqrt(sum k) - sqrt(eps)"
    )

    parser = argparse.ArgumentParser(
        prog="warped-segre",
        description="Geometry of alpha-warped Segre-Veronese manifolds of rank-1 tensors.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    commands = parser.add_subparsers(dest="command", required=True)

    def add(name: str, handler: Handler, help_text: str) -> argparse.ArgumentParser:
        sub = commands.add_parser(name, parents=[common], help=help_text)
        sub.set_defaults(handler=handler)
        return sub

    for name, handler, help_text in (
        ("exp", cmd_exp, "exponential map of a point and tangent"),
        ("log", cmd_log, "logarithmic map between two points"),
    ):
        sub = add(name, handler, help_text)
        sub.add_argument("input", nargs="?", help="JSON input (default: stdin)")
        sub.add_argument("--out", help="JSON output (default: stdout)")
        sub.add_argument("--check", action="store_true", help="verify the exp/log round trip")

    sub = add("dist", cmd_dist, "geodesic distance between two points")
    sub.add_argument("input", nargs="?", help="JSON input (default: stdin)")
    sub.add_argument("--oracle", action="store_true", help="also print the relaxed path length")

    sub = add("mean", cmd_mean, "Frechet mean of points")
    sub.add_argument("input", nargs="?", help="JSON input (default: stdin)")
    sub.add_argument("--out", help="JSON output (default: stdout)")
    sub.add_argument("--seed", type=int, help="shuffle the interpolation order with this seed")

    sub = add("aggregate", cmd_aggregate, "consensus aggregation of decompositions")
    sub.add_argument("input", nargs="?", help="decomposition JSON (default: stdin)")
    sub.add_argument("--out", help="report JSON (default: stdout)")
    sub.add_argument("--truth", help="ground-truth decomposition JSON")
    sub.add_argument("--workers", type=int, help="threads for the term groups")
    sub.add_argument("--synthetic", action="store_true", help="generate a synthetic benchmark")
    sub.add_argument("--seed", type=int, default=0, help="seed of the synthetic benchmark")
    sub.add_argument("--dims", type=_int_list, default=(8, 8, 8), help="synthetic dims")
    sub.add_argument("--mults", type=_int_list, help="synthetic multiplicities (default all 1)")
    sub.add_argument("--rank", type=int, default=3, help="synthetic rank")
    sub.add_argument("--count", type=int, default=20, help="synthetic decompositions")
    sub.add_argument("--noise", type=float, default=0.05, help="synthetic factor noise")
    sub.add_argument("--save-input", help="write the synthetic decompositions here")

    sub = add("geodesic-demo", cmd_geodesic_demo, "geodesics between (0,1) and (1,0) as CSV")
    sub.add_argument("--alphas", type=_float_list, default=DEMO_ALPHAS, help="warping factors")
    sub.add_argument("--samples", type=int, default=DEMO_SAMPLES, help="samples per geodesic")
    sub.add_argument("--out", help="output directory (default: current directory)")

    sub = add("curvature", cmd_curvature, "closed-form and estimated sectional curvature")
    sub.add_argument("--dims", type=_int_list, required=True, help="factor dimensions")
    sub.add_argument("--mults", type=_int_list, help="multiplicities (default all 1)")
    sub.add_argument("--lam", type=float, default=1.0, help="scale of the base point")
    sub.add_argument("--plane", choices=sorted(_PLANES), default="same", help="plane type")
    return parser


def _configure_logging(verbose: int, settings: Settings) -> None:
    levels: Dict[int, int] = {0: logging.getLevelName(settings.log_level), 1: logging.INFO}
    level = levels.get(verbose, logging.DEBUG)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")


def main(argv: Optional[Sequence[str]] = None) -> int:
    """
    Run the command line.

    Returns:
        Exit code: 0 success, 1 failed check, 2 input error, 3 geometry error,
        4 non-convergence
    """
    args = build_parser().parse_args(argv)
    try:
        settings = load_settings(args.config)
        _configure_logging(args.verbose, settings)
        return int(args.handler(args, settings, DocumentStorage()))
    except WarpedSegreException as e:
        print(f"error: {e}", file=sys.stderr)
        return e.exit_code
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return ValidationError.exit_code


if __name__ == "__main__":
    sys.exit(main())
