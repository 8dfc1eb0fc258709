"""Tests for the warped Segre-Veronese manifold."""

import math
import sys

import numpy as np
import pytest

from warped_segre.covering import apply_deck, deck_transforms, fiber, tensor_embed
from warped_segre.exceptions import BaseMismatchError, NotConnectedError
from warped_segre.models import ManifoldShape
from warped_segre.presegre import (
    PreSegrePoint,
    PreSegreTangent,
    is_compatible,
    pre_distance,
    pre_exp,
)
from warped_segre.random import random_point, random_segre_point, random_tangent
from warped_segre.segre import (
    Connectedness,
    SegrePoint,
    SegreTangent,
    auto_alpha,
    canonical_pattern,
    connectedness_class,
    segre_distance,
    segre_exp,
    segre_log,
)


@pytest.fixture
def rng():
    return np.random.default_rng(4242)


@pytest.fixture
def cube_shape():
    """Third-order tensors with one repeated factor at the automatic alpha."""
    shape = ManifoldShape(dims=(3, 2, 4), mults=(1, 2, 1))
    return shape.with_alpha(auto_alpha(shape))


def _orthogonal_pair(alpha):
    shape = ManifoldShape(dims=(2, 2), mults=(1, 1), alpha=alpha)
    P = SegrePoint.from_factors(shape, 1.0, [[1.0, 0.0], [1.0, 0.0]])
    Q = SegrePoint.from_factors(shape, 2.0, [[0.0, 1.0], [0.0, 1.0]])
    return P, Q


class TestSegrePoint:
    """Test SegrePoint construction and equality."""

    def test_canonical_representative(self):
        """Test that leading coordinates become positive."""
        shape = ManifoldShape(dims=(2, 2), mults=(1, 1), alpha=1.0)
        P = SegrePoint.from_factors(shape, 1.0, [[0.0, -1.0], [-1.0, 0.0]])

        np.testing.assert_array_equal(P.rep.factors[0].coords, [0.0, 1.0])
        np.testing.assert_array_equal(P.rep.factors[1].coords, [1.0, 0.0])

    def test_canonical_keeps_feasibility(self):
        """Test that one odd factor keeps a negative sign when only it is negative."""
        shape = ManifoldShape(dims=(2, 2), mults=(1, 1), alpha=1.0)
        P = SegrePoint.from_factors(shape, 1.0, [[1.0, 0.0], [-1.0, 0.0]])

        assert canonical_pattern(P.rep).signs == (1, 1)
        np.testing.assert_array_equal(P.rep.factors[1].coords, [-1.0, 0.0])

        Q = SegrePoint.from_factors(shape, 1.0, [[-1.0, 0.0], [1.0, 0.0]])
        assert Q.rep.factors == P.rep.factors

    def test_even_factor_always_canonical(self):
        """Test that even-multiplicity factors are always made positive."""
        shape = ManifoldShape(dims=(3,), mults=(2,), alpha=1.0)
        P = SegrePoint.from_factors(shape, 2.0, [[-0.6, 0.8, 0.0]])

        np.testing.assert_allclose(P.rep.factors[0].coords, [0.6, -0.8, 0.0])

    def test_equality_across_fiber(self, rng, cube_shape):
        """Test that all representatives of a tensor give equal points."""
        p = random_point(cube_shape, rng)
        P = SegrePoint(rep=p)

        for q in fiber(p):
            other = SegrePoint(rep=q)
            assert other == P
            assert other.rep.factors == P.rep.factors

    def test_inequality(self, rng, cube_shape):
        """Test that distinct tensors are unequal."""
        assert random_segre_point(cube_shape, rng) != random_segre_point(cube_shape, rng)

    def test_dense(self):
        """Test the dense embedding of a point."""
        shape = ManifoldShape(dims=(2, 2), mults=(1, 1), alpha=1.0)
        P = SegrePoint.from_factors(shape, 3.0, [[1.0, 0.0], [0.0, 2.0]])

        np.testing.assert_array_equal(P.dense().data, [[0.0, 6.0], [0.0, 0.0]])
        assert P.lam == 6.0


class TestSegreTangent:
    """Test SegreTangent."""

    def test_rejects_other_base(self, rng, cube_shape):
        """Test that coordinates must be based at the canonical representative."""
        P = random_segre_point(cube_shape, rng)
        other = random_point(cube_shape, rng)

        with pytest.raises(ValueError, match="canonical"):
            SegreTangent(at=P, coords=PreSegreTangent.zero(other))

    def test_arithmetic_and_norm(self, rng, cube_shape):
        """Test scaling and addition of tangents."""
        P = random_segre_point(cube_shape, rng)
        V = SegreTangent(at=P, coords=random_tangent(P.rep, rng))

        assert (2 * V).norm() == pytest.approx(2 * V.norm())
        assert (V - V).norm() == 0.0
        assert (V + V).norm() == pytest.approx(2 * V.norm())

    def test_different_points(self, rng, cube_shape):
        """Test that tangents at different tensors cannot be added."""
        V = SegreTangent.zero(random_segre_point(cube_shape, rng))
        W = SegreTangent.zero(random_segre_point(cube_shape, rng))

        with pytest.raises(BaseMismatchError):
            V + W


class TestSegreExp:
    """Test segre_exp."""

    def test_zero_tangent(self, rng, cube_shape):
        """Test that the zero tangent does not move."""
        P = random_segre_point(cube_shape, rng)

        assert segre_exp(P, SegreTangent.zero(P)) == P

    def test_radial(self):
        """Test a unit radial tangent at lambda = 1."""
        shape = ManifoldShape(dims=(2, 3), mults=(1, 1), alpha=0.5)
        P = SegrePoint.from_factors(shape, 1.0, [[0.6, 0.8], [0.0, 1.0, 0.0]])
        Q = segre_exp(P, SegreTangent(at=P, coords=PreSegreTangent.zero(P.rep, lam_dot=1.0)))

        assert Q.lam == pytest.approx(2.0)
        assert Q.rep.factors == P.rep.factors

    def test_agrees_with_representative(self, rng, cube_shape):
        """Test that exp on tensors is exp on the representative, embedded."""
        for _ in range(20):
            P = random_segre_point(cube_shape, rng)
            v = random_tangent(P.rep, rng, scale=0.5)
            Q = segre_exp(P, SegreTangent(at=P, coords=v))

            assert Q.dense().allclose(tensor_embed(pre_exp(P.rep, v)), atol=1e-12)

    def test_base_mismatch(self, rng, cube_shape):
        """Test that a tangent at another tensor is rejected."""
        V = SegreTangent.zero(random_segre_point(cube_shape, rng))

        with pytest.raises(BaseMismatchError):
            segre_exp(random_segre_point(cube_shape, rng), V)


class TestSegreLog:
    """Test segre_log."""

    def test_identity(self, rng, cube_shape):
        """Test that log of a tensor at itself is zero."""
        P = random_segre_point(cube_shape, rng)
        V = segre_log(P, P)

        assert V.norm() == pytest.approx(0.0, abs=1e-12)

    def test_not_connected(self):
        """Test right-angled factors beyond the connectedness threshold."""
        P, Q = _orthogonal_pair(alpha=1.5)

        with pytest.raises(NotConnectedError) as exc_info:
            segre_log(P, Q)
        assert "pi" in str(exc_info.value)
        assert exc_info.value.alpha_m == pytest.approx(1.5 * math.pi / math.sqrt(2.0))

    def test_round_trip(self, rng, cube_shape):
        """Test exp(P, log(P, Q)) = Q on random pairs."""
        for _ in range(50):
            P = random_segre_point(cube_shape, rng)
            Q = random_segre_point(cube_shape, rng)
            R = segre_exp(P, segre_log(P, Q))

            assert R.dense().allclose(Q.dense(), atol=1e-9)


class TestSegreDistance:
    """Test segre_distance."""

    def test_identical(self, rng, cube_shape):
        """Test that a tensor has distance 0 to itself."""
        P = random_segre_point(cube_shape, rng)

        assert segre_distance(P, P) == (0.0, True)

    def test_disconnected(self):
        """Test the infimum lambda + mu for a disconnected pair."""
        P, Q = _orthogonal_pair(alpha=1.5)

        assert segre_distance(P, Q) == (3.0, False)

    def test_representative_independence(self, rng, cube_shape):
        """Test that the distance does not depend on the chosen representatives."""
        for _ in range(20):
            P = random_segre_point(cube_shape, rng)
            Q = random_segre_point(cube_shape, rng)
            expected = segre_distance(P, Q).value

            for s in deck_transforms(cube_shape):
                moved = SegrePoint.model_construct(rep=apply_deck(P.rep, s))
                assert segre_distance(moved, Q).value == pytest.approx(expected, abs=1e-12)

    def test_fiber_minimum(self, rng):
        """Test that the distance is the minimum over the fiber."""
        shape = ManifoldShape(dims=(2, 3, 2, 2), mults=(1, 1, 3, 1), alpha=0.9)
        for _ in range(30):
            P = random_segre_point(shape, rng)
            Q = random_segre_point(shape, rng)
            best = min(pre_distance(P.rep, q).value for q in fiber(Q.rep))

            assert segre_distance(P, Q).value == pytest.approx(best, abs=1e-12)


class TestConnectedness:
    """Test connectedness_class and auto_alpha."""

    @pytest.mark.parametrize(
        "alpha,expected",
        [
            (0.5, Connectedness.CONNECTED),
            (1.5, Connectedness.NOT_CONNECTED),
            (1.0, Connectedness.UNKNOWN),
        ],
    )
    def test_matrix_thresholds(self, alpha, expected):
        """Test the thresholds 1/sqrt(2) and 2/sqrt(2) for matrices."""
        shape = ManifoldShape(dims=(2, 2), mults=(1, 1), alpha=alpha)

        assert connectedness_class(shape) is expected

    def test_auto_alpha(self):
        """Test that the automatic alpha is just inside the connected range."""
        shape = ManifoldShape(dims=(4, 4, 4), mults=(1, 2, 1))
        alpha = auto_alpha(shape)

        assert alpha == pytest.approx(0.5 - math.sqrt(sys.float_info.epsilon), abs=1e-16)
        assert connectedness_class(shape.with_alpha(alpha)) is Connectedness.CONNECTED

    @pytest.mark.parametrize(
        "dims,mults",
        [
            ((2,), (1,)),
            ((3,), (2,)),
            ((2, 2), (1, 1)),
            ((3, 4), (2, 1)),
            ((2, 2, 2), (1, 1, 1)),
            ((4, 2, 3), (3, 1, 2)),
            ((2, 3, 2, 5), (1, 1, 1, 1)),
            ((5, 5), (3, 3)),
            ((2, 6, 3, 2), (2, 1, 3, 1)),
            ((6,), (3,)),
        ],
    )
    def test_threshold_grid(self, dims, mults):
        """Test the tri-state below, inside and above the unresolved band."""
        root = math.sqrt(sum(mults))
        cases = [
            (0.5, Connectedness.CONNECTED),
            (1.0 - 1e-9, Connectedness.CONNECTED),
            (1.0, Connectedness.UNKNOWN),
            (1.5, Connectedness.UNKNOWN),
            (2.0, Connectedness.NOT_CONNECTED),
        ]
        for ratio, expected in cases:
            shape = ManifoldShape(dims=dims, mults=mults, alpha=ratio / root)
            assert connectedness_class(shape) is expected

    @pytest.mark.parametrize("mults", [(1,), (1, 1), (2, 1, 3), (1, 1, 1, 1)])
    def test_antipodal_pair_threshold(self, mults):
        """Test that antipodal factors everywhere are compatible exactly below 1/sqrt(sum k)."""
        threshold = 1.0 / math.sqrt(sum(mults))
        for ratio, compatible in ((1.0 - 1e-9, True), (1.0 + 1e-9, False)):
            shape = ManifoldShape(dims=(2,) * len(mults), mults=mults, alpha=threshold * ratio)
            p = PreSegrePoint.from_arrays(shape, 1.0, [[1.0, 0.0]] * len(mults))
            q = PreSegrePoint.from_arrays(shape, 1.0, [[-1.0, 0.0]] * len(mults))

            assert is_compatible(p, q) == compatible

    @pytest.mark.parametrize("mults", [(1,), (1, 1), (2, 1, 3), (1, 1, 1, 1)])
    def test_right_angle_pair_threshold(self, mults):
        """Test that right angles everywhere are disconnected exactly from 2/sqrt(sum k)."""
        threshold = 2.0 / math.sqrt(sum(mults))
        for ratio, connected in ((1.0 - 1e-9, True), (1.0 + 1e-9, False)):
            shape = ManifoldShape(dims=(2,) * len(mults), mults=mults, alpha=threshold * ratio)
            P = SegrePoint.from_factors(shape, 1.0, [[1.0, 0.0]] * len(mults))
            Q = SegrePoint.from_factors(shape, 2.0, [[0.0, 1.0]] * len(mults))

            assert segre_distance(P, Q).connected == connected
