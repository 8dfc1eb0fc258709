"""Tests for the command-line interface."""

import json
import math

import numpy as np
import pytest

from warped_segre.cli import main
from warped_segre.config import CONFIG_ENV


@pytest.fixture(autouse=True)
def no_user_config(tmp_path, monkeypatch):
    monkeypatch.setenv(CONFIG_ENV, str(tmp_path / "no-config.yaml"))


def _write_points(path, points, dims=(2,), mults=(1,), alpha=1.0):
    document = {
        "schema": 1,
        "shape": {"dims": list(dims), "mults": list(mults), "alpha": alpha},
        "points": [{"lambda": lam, "factors": factors} for lam, factors in points],
    }
    path.write_text(json.dumps(document), encoding="utf-8")
    return str(path)


def _read_csv(path):
    with open(path, "r", encoding="utf-8") as f:
        header = f.readline().strip().split(",")
    return header, np.loadtxt(path, delimiter=",", skiprows=1)


class TestDist:
    """Test the dist command."""

    def test_identical_points(self, tmp_path, capsys):
        """Test that identical points are at distance 0."""
        path = _write_points(tmp_path / "p.json", [(1.0, [[1.0, 0.0]])] * 2)

        assert main(["dist", path]) == 0
        assert capsys.readouterr().out == "0 connected\n"

    def test_law_of_cosines(self, tmp_path, capsys):
        """Test lambda = 1, mu = 2 at angle pi/3."""
        angle = math.pi / 3
        path = _write_points(
            tmp_path / "p.json",
            [(1.0, [[1.0, 0.0]]), (2.0, [[math.cos(angle), math.sin(angle)]])],
        )

        assert main(["dist", path]) == 0
        assert capsys.readouterr().out == "1.732050807568877 connected\n"

    def test_incompatible(self, tmp_path, capsys):
        """Test that incompatible points report the infimum lambda + mu."""
        path = _write_points(
            tmp_path / "p.json", [(1.0, [[1.0, 0.0]]), (2.0, [[0.0, 1.0]])], alpha=3.0
        )

        assert main(["dist", path]) == 0
        assert capsys.readouterr().out == "3 disconnected\n"

    def test_alpha_flag_overrides_file(self, tmp_path, capsys):
        """Test that --alpha takes precedence over the stored alpha."""
        path = _write_points(
            tmp_path / "p.json", [(1.0, [[1.0, 0.0]]), (2.0, [[0.0, 1.0]])], alpha=3.0
        )

        assert main(["dist", path, "--alpha", "0.5"]) == 0
        assert capsys.readouterr().out.endswith(" connected\n")

    def test_oracle(self, tmp_path, capsys):
        """Test that the relaxed path length is printed next to the distance."""
        angle = math.pi / 3
        path = _write_points(
            tmp_path / "p.json",
            [(1.0, [[1.0, 0.0]]), (2.0, [[math.cos(angle), math.sin(angle)]])],
        )

        assert main(["dist", path, "--oracle"]) == 0
        lines = capsys.readouterr().out.splitlines()
        assert lines[1].startswith("oracle ")
        assert float(lines[1].split()[1]) == pytest.approx(math.sqrt(3.0), abs=1e-3)

    def test_wrong_point_count(self, tmp_path, capsys):
        """Test that dist needs exactly two points."""
        path = _write_points(tmp_path / "p.json", [(1.0, [[1.0, 0.0]])])

        assert main(["dist", path]) == 2
        assert "expected 2 points" in capsys.readouterr().err

    def test_parse_error(self, tmp_path, capsys):
        """Test that malformed input exits with code 2."""
        path = tmp_path / "bad.json"
        path.write_text("{", encoding="utf-8")

        assert main(["dist", str(path)]) == 2
        assert capsys.readouterr().err.startswith("error: ")


class TestExpLog:
    """Test the exp and log commands."""

    def _pair(self, tmp_path):
        return _write_points(
            tmp_path / "pair.json",
            [
                (1.0, [[1.0, 0.0], [0.0, 1.0, 0.0]]),
                (1.5, [[0.6, 0.8], [0.0, 0.8, 0.6]]),
            ],
            dims=(2, 3),
            mults=(1, 1),
            alpha=0.5,
        )

    def test_round_trip(self, tmp_path):
        """Test that exp of the log output returns the second point."""
        tangent_path = tmp_path / "tangent.json"
        point_path = tmp_path / "point.json"

        assert main(["log", self._pair(tmp_path), "--out", str(tangent_path), "--check"]) == 0
        assert main(["exp", str(tangent_path), "--out", str(point_path), "--check"]) == 0

        result = json.loads(point_path.read_text(encoding="utf-8"))
        point = result["points"][0]
        assert point["lambda"] == pytest.approx(1.5, abs=1e-12)
        np.testing.assert_allclose(point["factors"][0], [0.6, 0.8], atol=1e-12)
        np.testing.assert_allclose(point["factors"][1], [0.0, 0.8, 0.6], atol=1e-12)

    def test_log_to_stdout(self, tmp_path, capsys):
        """Test that the tangent document goes to stdout without --out."""
        assert main(["log", self._pair(tmp_path)]) == 0

        document = json.loads(capsys.readouterr().out)
        assert document["shape"]["alpha"] == 0.5
        assert len(document["tangent"]["factor_dots"]) == 2

    def test_check_failure(self, tmp_path, capsys, monkeypatch):
        """Test exit code 1 when the round trip deviates."""
        monkeypatch.setattr("warped_segre.cli._roundtrip_error", lambda P, Q, cap: 1e-3)
        out = tmp_path / "tangent.json"

        assert main(["log", self._pair(tmp_path), "--out", str(out), "--check"]) == 1
        assert "check failed" in capsys.readouterr().err
        assert out.exists()

    def test_check_honors_entry_cap(self, tmp_path, capsys):
        """Test that the configured entry cap bounds the dense round-trip check."""
        config = tmp_path / "config.yaml"
        config.write_text("entry_cap: 4\n", encoding="utf-8")
        argv = ["log", self._pair(tmp_path), "--out", str(tmp_path / "t.json")]

        assert main(argv + ["--config", str(config)]) == 0
        assert main(argv + ["--config", str(config), "--check"]) == 2
        assert "cap is 4" in capsys.readouterr().err

    def test_not_connected(self, tmp_path, capsys):
        """Test exit code 3 with alpha M and pi in the message."""
        path = _write_points(
            tmp_path / "p.json",
            [(1.0, [[1.0, 0.0], [1.0, 0.0]]), (2.0, [[0.0, 1.0], [0.0, 1.0]])],
            dims=(2, 2),
            mults=(1, 1),
            alpha=1.5,
        )

        assert main(["log", path]) == 3
        err = capsys.readouterr().err
        assert "pi" in err


class TestMean:
    """Test the mean command."""

    def test_midpoint(self, tmp_path):
        """Test that two points on a ray average to the middle scale."""
        path = _write_points(
            tmp_path / "p.json", [(1.0, [[1.0, 0.0]]), (3.0, [[1.0, 0.0]])], alpha=0.5
        )
        out = tmp_path / "mean.json"

        assert main(["mean", path, "--out", str(out), "--seed", "4"]) == 0
        point = json.loads(out.read_text(encoding="utf-8"))["points"][0]
        assert point["lambda"] == pytest.approx(2.0)
        np.testing.assert_allclose(point["factors"][0], [1.0, 0.0], atol=1e-12)


class TestAggregate:
    """Test the aggregate command."""

    def test_synthetic_with_truth(self, tmp_path):
        """Test a small synthetic benchmark report."""
        out = tmp_path / "report.json"
        saved = tmp_path / "input.json"
        argv = [
            "aggregate",
            "--synthetic",
            "--dims",
            "3,3",
            "--rank",
            "2",
            "--count",
            "4",
            "--noise",
            "0.01",
            "--out",
            str(out),
            "--save-input",
            str(saved),
        ]

        assert main(argv) == 0
        report = json.loads(out.read_text(encoding="utf-8"))
        assert len(report["terms"]) == 2
        assert len(report["permutations"]) == 4
        assert report["shape"]["alpha"] == pytest.approx(1 / math.sqrt(2), abs=1e-7)
        assert report["truth"]["relative_error"] < 0.1

        assert main(["aggregate", str(saved), "--out", str(tmp_path / "again.json")]) == 0
        again = json.loads((tmp_path / "again.json").read_text(encoding="utf-8"))
        assert "truth" not in again
        assert len(again["term_distances"]) == 2


class TestGeodesicDemo:
    """Test the geodesic-demo command."""

    def test_traces(self, tmp_path):
        """Test the straight line at alpha = 1 and the near-puncture path at 1.99."""
        argv = ["geodesic-demo", "--alphas", "0.01,1,1.99", "--samples", "201"]

        assert main(argv + ["--out", str(tmp_path)]) == 0
        header, data = _read_csv(tmp_path / "geodesic_alpha_1.csv")
        assert header == ["t", "x0", "x1"]
        assert data.shape == (201, 3)
        np.testing.assert_allclose(data[[0, -1], 1:], [[0.0, 1.0], [1.0, 0.0]], atol=1e-12)
        assert np.max(np.abs(data[:, 1] + data[:, 2] - 1.0)) < 1e-9

        _, slow = _read_csv(tmp_path / "geodesic_alpha_0.01.csv")
        assert np.min(np.hypot(slow[:, 1], slow[:, 2])) >= 0.95

        _, fast = _read_csv(tmp_path / "geodesic_alpha_1.99.csv")
        assert np.min(np.hypot(fast[:, 1], fast[:, 2])) <= 0.1

    def test_incompatible_alpha(self, tmp_path, capsys):
        """Test that alpha >= 2 is refused as an input error."""
        assert main(["geodesic-demo", "--alphas", "2.5", "--out", str(tmp_path)]) == 2
        assert "compatible" in capsys.readouterr().err


class TestCurvature:
    """Test the curvature command."""

    def test_cross_plane(self, capsys):
        """Test the closed form and the estimate on a cross-factor plane."""
        assert main(["curvature", "--dims", "3,3", "--plane", "cross"]) == 0
        lines = capsys.readouterr().out.splitlines()

        assert lines[0] == "closed -1"
        assert float(lines[1].split()[1]) == pytest.approx(-1.0, abs=1e-2)

    def test_missing_axis(self, capsys):
        """Test that a same-sphere plane needs three dimensions."""
        assert main(["curvature", "--dims", "2,2", "--plane", "same"]) == 2


class TestMain:
    """Test argument handling and settings."""

    def test_version(self, capsys):
        """Test the version flag."""
        with pytest.raises(SystemExit) as exc_info:
            main(["--version"])
        assert exc_info.value.code == 0
        assert "warped-segre" in capsys.readouterr().out

    def test_missing_config(self, tmp_path, capsys):
        """Test that a missing --config file is an input error."""
        path = _write_points(tmp_path / "p.json", [(1.0, [[1.0, 0.0]])] * 2)

        assert main(["dist", path, "--config", str(tmp_path / "absent.yaml")]) == 2
        assert "does not exist" in capsys.readouterr().err

    def test_bad_alpha(self):
        """Test that --alpha must be auto or a number."""
        with pytest.raises(SystemExit):
            main(["dist", "--alpha", "big"])
