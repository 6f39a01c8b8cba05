"""
Integration tests for the end-to-end pipeline.

These tests run every stage on the built-in fixtures and check the
artifacts written to disk. They take a few seconds because the amoeba
and a-maximization stages run with real (small) settings.

Run with: pytest tests/integration/test_pipeline.py -v
"""

import csv
import json

import pytest
from src.laurent import LaurentPoly2
from src.pipeline import DEFAULT_STAGES, PipelineEngine
from src.utils import AmoebaConfig, AppConfig, OptimizerConfig
from tilingforge import main


@pytest.fixture(scope="module")
def config():
    """Configuration small enough for the full pipeline to finish quickly."""
    return AppConfig(
        optimizer=OptimizerConfig(starts=6),
        amoeba=AmoebaConfig(range=2.0, grid=12),
    )


@pytest.fixture(scope="module")
def c3_run(config, tmp_path_factory):
    """Full pipeline on the C^3 fixture with artifacts."""
    out_dir = tmp_path_factory.mktemp("c3")
    report = PipelineEngine(config, out_dir=str(out_dir)).run_fixture("c3", DEFAULT_STAGES)
    return report, out_dir


class TestFullPipeline:
    """Every default stage on C^3."""

    def test_all_stages_pass(self, c3_run):
        report, _ = c3_run

        assert report.passed, report.failed_checks
        assert [name for name in report.stages if report.stages[name].status == "ok"] == [
            "validate", "dualize", "kasteleyn", "matchings", "geometry", "dessin", "amoeba",
        ]
        assert report.stages["pleth"].status == "skipped"

    def test_geometry_values(self, c3_run):
        report, _ = c3_run
        geometry = report.stages["geometry"].data

        assert all(abs(v - 2 / 3) < 1e-6 for v in geometry["R"]["R"].values())
        assert geometry["modular"]["J"][0] == pytest.approx(0.0, abs=1e-6)

    def test_artifacts(self, c3_run):
        report, out_dir = c3_run

        for name in ["quiver.json", "map.json", "diagram.txt", "report.json", "amoeba.csv", "coamoeba.csv"]:
            assert (out_dir / name).exists(), name

        data = json.loads((out_dir / "report.json").read_text())
        assert data["source"] == "c3"
        assert data["stages"]["dessin"]["data"]["passport"] == "[3 | 3 | 3]"

        with open(out_dir / "amoeba.csv") as f:
            rows = list(csv.reader(f))
        assert rows[0] == ["rho_z", "rho_w", "phi_z", "phi_w", "residual"]
        assert len(rows) > 1

    def test_written_quiver_reruns(self, c3_run, config):
        """The quiver written by one run is a valid input for the next."""
        _, out_dir = c3_run
        report = PipelineEngine(config).run_files(
            quiver_path=str(out_dir / "quiver.json"),
            stages=["validate", "dualize", "kasteleyn"],
        )

        assert report.passed
        assert len(LaurentPoly2.parse(report.stages["kasteleyn"].data["det"])) == 3


class TestSeibergDualityPipeline:
    """Mutation of F0 phase I with invariance checks."""

    def test_mutate_and_compare(self, config):
        engine = PipelineEngine(config, mutate_node="1", check_invariance=True)
        report = engine.run_fixture("f0-I", ["validate", "dualize", "kasteleyn", "geometry"])

        assert report.passed, report.failed_checks
        assert report.stages["mutate"].checks == {"involution": True, "invariance": True}
        assert report.stages["geometry"].checks["expected_J"]

    def test_dual_phase_geometry(self, config):
        report = PipelineEngine(config).run_fixture("f0-II", ["validate", "dualize", "geometry", "dessin"])

        assert report.passed, report.failed_checks
        assert report.stages["dessin"].checks["expected_passport"]


class TestCommandLine:
    """The pipeline command end to end."""

    def test_det_with_artifacts(self, capsys, tmp_path):
        config_file = tmp_path / "config.yaml"
        config_file.write_text("optimizer:\n  starts: 4\n")
        out_dir = tmp_path / "dp3"

        code = main([
            "--config-file", str(config_file), "--env-file", "/nonexistent/.env",
            "--out-dir", str(out_dir), "pipeline", "--fixture", "dp3", "--det",
        ])
        out = capsys.readouterr().out

        assert code == 0
        assert "PASS expected_det" in out
        assert "PASS expected_diagram" in out
        assert "1 1 6" in (out_dir / "diagram.txt").read_text().splitlines()
