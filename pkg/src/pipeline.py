"""
TilingForge - Pipeline Engine

Runs the quiver -> tiling -> Kasteleyn -> toric diagram -> geometry ->
dessin chain on a fixture or on input files, collecting per-stage checks
and writing JSON/CSV artifacts.
"""

import json
import logging
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional

from .amoeba import GridSpec, sample_curve
from .core import (
    genus, homology_weights, map_to_quiver, maps_isomorphic,
    quiver_to_map, quivers_isomorphic, validate_quiver,
)
from .dessin import passport, permutation_triple, rh_genus
from .fixtures import Fixture, get_fixture
from .geometry import angle_defects, maximize_a, modular_data
from .kasteleyn import (
    canonical_polygon, enumerate_matchings, face_sign_products,
    kasteleyn_matrix, kasteleyn_signs, laurent_det, mirror_equation, toric_diagram,
)
from .laurent import LaurentPoly2
from .models import CombinatorialMap, HomologyWeights, Quiver, TilingForgeError, ToricDiagram
from .mutation import check_duality_invariance, mutate_and_reduce
from .plethystics import plethystic_profile, series_from_rational
from .utils import AppConfig


logger = logging.getLogger(__name__)

STAGES = ["validate", "dualize", "kasteleyn", "matchings", "mutate", "geometry", "dessin", "pleth", "amoeba"]
DEFAULT_STAGES = ["validate", "dualize", "kasteleyn", "matchings", "geometry", "dessin", "pleth", "amoeba"]


@dataclass
class StageResult:
    """Outcome of one pipeline stage."""
    name: str
    status: str = "pending"  # ok, failed, skipped
    checks: Dict[str, bool] = field(default_factory=dict)
    data: Dict[str, Any] = field(default_factory=dict)
    error: Optional[str] = None

    @property
    def passed(self) -> bool:
        return self.status != "failed" and all(self.checks.values())

    def to_dict(self) -> Dict[str, Any]:
        result = {"status": self.status, "checks": dict(self.checks), "data": self.data}
        if self.error:
            result["error"] = self.error
        return result


@dataclass
class PipelineReport:
    """Consolidated report over all requested stages."""
    source: str
    stages: Dict[str, StageResult] = field(default_factory=dict)
    artifacts: List[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(s.passed for s in self.stages.values())

    @property
    def failed_checks(self) -> List[str]:
        return [
            f"{s.name}.{name}" for s in self.stages.values()
            for name, ok in s.checks.items() if not ok
        ]

    def summary(self) -> str:
        counts = {"ok": 0, "failed": 0, "skipped": 0}
        for s in self.stages.values():
            counts[s.status] = counts.get(s.status, 0) + 1
        return (
            f"Stages OK: {counts['ok']}, "
            f"Failed: {counts['failed']}, "
            f"Skipped: {counts['skipped']}, "
            f"Failed checks: {len(self.failed_checks)}"
        )

    def to_dict(self) -> Dict[str, Any]:
        return {
            "source": self.source,
            "passed": self.passed,
            "stages": {name: s.to_dict() for name, s in self.stages.items()},
            "artifacts": list(self.artifacts),
        }


@dataclass
class _Context:
    fixture: Fixture
    quiver: Optional[Quiver] = None
    tiling: Optional[CombinatorialMap] = None
    signs: Optional[Dict[str, int]] = None
    weights: Optional[HomologyWeights] = None
    det: Optional[LaurentPoly2] = None


def _equal_up_to_unit(p: LaurentPoly2, q: LaurentPoly2) -> bool:
    """True when p = +-z^a w^b q."""
    if p.is_zero() or q.is_zero():
        return p.is_zero() and q.is_zero()
    pa, pb = p.min_exponents()
    qa, qb = q.min_exponents()
    p0, q0 = p.shift(-pa, -pb), q.shift(-qa, -qb)
    return p0 == q0 or p0 == -q0


class PipelineEngine:
    """
    Engine for running the tiling pipeline.

    Stages run in a fixed order. A stage whose inputs are missing because
    an earlier stage failed is skipped; independent stages still run.
    """

    def __init__(
        self,
        config: Optional[AppConfig] = None,
        out_dir: Optional[str] = None,
        mutate_node: Optional[str] = None,
        check_invariance: bool = False,
    ):
        self.config = config or AppConfig()
        self.out_dir = Path(out_dir) if out_dir else None
        self.mutate_node = mutate_node
        self.check_invariance = check_invariance
        self.report: Optional[PipelineReport] = None

    # =========================================================================
    # Entry points
    # =========================================================================

    def run_fixture(self, name: str, stages: Optional[List[str]] = None) -> PipelineReport:
        return self.run(get_fixture(name), stages)

    def run_files(
        self,
        quiver_path: Optional[str] = None,
        map_path: Optional[str] = None,
        stages: Optional[List[str]] = None,
    ) -> PipelineReport:
        """Run on a quiver JSON file or a map JSON file."""
        if quiver_path:
            with open(quiver_path, "r") as f:
                fixture = Fixture(name=Path(quiver_path).stem, description=quiver_path,
                                  quiver=Quiver.from_dict(json.load(f)))
        elif map_path:
            with open(map_path, "r") as f:
                fixture = Fixture(name=Path(map_path).stem, description=map_path,
                                  tiling=CombinatorialMap.from_dict(json.load(f)))
        else:
            raise ValueError("Either a quiver file or a map file is required")
        return self.run(fixture, stages)

    def run(self, fixture: Fixture, stages: Optional[List[str]] = None) -> PipelineReport:
        """Run the requested stages in pipeline order."""
        requested = set(stages or DEFAULT_STAGES)
        if self.mutate_node:
            requested.add("mutate")
        unknown = requested - set(STAGES)
        if unknown:
            raise ValueError(f"Unknown stage(s): {', '.join(sorted(unknown))}")

        self.report = PipelineReport(source=fixture.name)
        ctx = _Context(fixture=fixture, quiver=fixture.quiver, tiling=fixture.tiling)
        handlers = {
            "validate": self._stage_validate,
            "dualize": self._stage_dualize,
            "kasteleyn": self._stage_kasteleyn,
            "matchings": self._stage_matchings,
            "mutate": self._stage_mutate,
            "geometry": self._stage_geometry,
            "dessin": self._stage_dessin,
            "pleth": self._stage_pleth,
            "amoeba": self._stage_amoeba,
        }

        logger.info(f"Running pipeline on {fixture.name}: {', '.join(s for s in STAGES if s in requested)}")
        for name in STAGES:
            if name not in requested:
                continue
            result = StageResult(name=name)
            self.report.stages[name] = result
            started = time.perf_counter()
            try:
                handlers[name](ctx, result)
                if result.status == "pending":
                    result.status = "ok"
            except (TilingForgeError, ValueError) as e:
                result.status = "failed"
                result.error = f"{type(e).__name__}: {e}"
                logger.error(f"Stage {name} failed: {result.error}")
            logger.debug(f"Stage {name} finished in {time.perf_counter() - started:.3f}s")

        if self.out_dir:
            self._write_artifacts(ctx)

        logger.info(f"Pipeline complete: {self.report.summary()}")
        return self.report

    # =========================================================================
    # Stages
    # =========================================================================

    def _skip(self, result: StageResult, reason: str) -> None:
        result.status = "skipped"
        result.data["reason"] = reason
        logger.info(f"Stage {result.name} skipped: {reason}")

    def _stage_validate(self, ctx: _Context, result: StageResult) -> None:
        if ctx.quiver is not None:
            report = validate_quiver(ctx.quiver)
            for check in report.checks:
                result.checks[check.name] = check.passed
            result.data["counts"] = dict(report.counts)
        if ctx.tiling is not None:
            result.checks["genus"] = genus(ctx.tiling) == 1

    def _stage_dualize(self, ctx: _Context, result: StageResult) -> None:
        if ctx.quiver is not None and ctx.tiling is None:
            ctx.tiling = quiver_to_map(ctx.quiver)
            result.checks["round_trip"] = quivers_isomorphic(map_to_quiver(ctx.tiling), ctx.quiver)
        elif ctx.tiling is not None and ctx.quiver is None:
            ctx.quiver = map_to_quiver(ctx.tiling)
            result.checks["round_trip"] = maps_isomorphic(quiver_to_map(ctx.quiver), ctx.tiling)

        m = ctx.tiling
        result.checks["genus"] = genus(m) == 1
        n_faces = len(m.faces())
        result.checks["euler"] = (m.n_black + m.n_white) - m.n_edges + n_faces == 0
        result.data.update({
            "black": m.n_black,
            "white": m.n_white,
            "edges": m.n_edges,
            "faces": n_faces,
        })

    def _stage_kasteleyn(self, ctx: _Context, result: StageResult) -> None:
        if ctx.tiling is None:
            return self._skip(result, "no map available")
        m = ctx.tiling
        ctx.signs = ctx.fixture.signs or kasteleyn_signs(m)
        ctx.weights = ctx.fixture.weights or homology_weights(m)

        result.checks["face_signs"] = all(
            product == (1 if length % 4 == 2 else -1)
            for length, product in face_sign_products(m, ctx.signs)
        )
        K = kasteleyn_matrix(m, ctx.signs, ctx.weights)
        ctx.det = laurent_det(K)
        diagram = toric_diagram(ctx.det)
        result.data.update({
            "matrix": K.to_text(),
            "det": str(ctx.det),
            "diagram": diagram.to_dict()["points"],
            "canonical": canonical_polygon(diagram).to_dict()["points"],
            "mirror": mirror_equation(diagram),
        })

        expected = ctx.fixture.expected
        if "det" in expected:
            result.checks["expected_det"] = _equal_up_to_unit(ctx.det, LaurentPoly2.parse(expected["det"]))
        if "diagram" in expected:
            want = canonical_polygon(ToricDiagram(expected["diagram"]))
            result.checks["expected_diagram"] = canonical_polygon(diagram) == want

    def _stage_matchings(self, ctx: _Context, result: StageResult) -> None:
        if ctx.det is None or ctx.weights is None:
            return self._skip(result, "no Kasteleyn determinant")
        matchings = enumerate_matchings(ctx.tiling, ctx.weights)
        result.data["count"] = len(matchings)
        result.checks["oracle"] = matchings.to_diagram() == toric_diagram(ctx.det)

    def _stage_mutate(self, ctx: _Context, result: StageResult) -> None:
        node = self.mutate_node or ctx.fixture.expected.get("dual_node")
        if ctx.quiver is None or node is None:
            return self._skip(result, "no quiver or no node to mutate")
        dual, record = mutate_and_reduce(ctx.quiver, node)
        back, _ = mutate_and_reduce(dual, node)
        result.data["record"] = record.to_dict()
        result.data["dual"] = dual.to_dict()
        result.checks["involution"] = quivers_isomorphic(back, ctx.quiver)

        if self.check_invariance:
            invariance = check_duality_invariance(ctx.quiver, dual)
            result.data["invariance"] = invariance.to_dict()
            result.checks["invariance"] = invariance.equal

    def _stage_geometry(self, ctx: _Context, result: StageResult) -> None:
        if ctx.tiling is None:
            return self._skip(result, "no map available")
        m = ctx.tiling
        weights = ctx.weights or homology_weights(m)
        R = maximize_a(m, self.config.optimizer)
        result.data["R"] = R.to_dict()
        result.checks["unique"] = R.unique

        defects = angle_defects(m, R)
        result.data["angle_defects"] = defects
        result.checks["angle_sums"] = max(defects.values()) < self.config.tolerance

        expected = ctx.fixture.expected
        if "R" in expected:
            result.checks["expected_R"] = all(
                abs(R[e] - float(v)) < self.config.tolerance for e, v in expected["R"].items()
            )

        modular = modular_data(m, R, weights, self.config.q_terms)
        result.data["modular"] = modular.to_dict()
        if "J" in expected:
            result.checks["expected_J"] = abs(modular.J - expected["J"]) < self.config.tolerance

    def _stage_dessin(self, ctx: _Context, result: StageResult) -> None:
        if ctx.tiling is None:
            return self._skip(result, "no map available")
        m = ctx.tiling
        triple = permutation_triple(m)
        p = passport(triple)
        g = rh_genus(triple)
        result.data.update({"triple": triple.to_dict(), "passport": str(p), "degree": triple.degree, "genus": g})

        result.checks["identity_product"] = triple.is_identity_product()
        result.checks["transitive"] = triple.is_transitive()
        result.checks["genus"] = g == genus(m)
        result.checks["balanced"] = p.is_balanced
        result.checks["face_lengths"] = list(p.infinity) == sorted(n // 2 for n in m.face_lengths())
        if "passport" in ctx.fixture.expected:
            result.checks["expected_passport"] = p.rows() == tuple(ctx.fixture.expected["passport"])

    def _stage_pleth(self, ctx: _Context, result: StageResult) -> None:
        hilbert = ctx.fixture.expected.get("hilbert")
        if hilbert is None:
            return self._skip(result, "no Hilbert series for this input")
        numer, denom = hilbert
        profile = plethystic_profile(series_from_rational(numer, denom, self.config.series_order))
        result.data["profile"] = profile.to_dict()
        if "pl" in ctx.fixture.expected:
            want = ctx.fixture.expected["pl"]
            result.checks["expected_pl"] = all(
                profile.series[n] == want.get(n, 0) for n in range(profile.series.order + 1)
            )

    def _stage_amoeba(self, ctx: _Context, result: StageResult) -> None:
        if ctx.det is None:
            return self._skip(result, "no Newton polynomial")
        cfg = self.config.amoeba
        samples = sample_curve(ctx.det, GridSpec(cfg.range, cfg.grid, cfg.grid),
                               residual_tolerance=cfg.residual_tolerance)
        result.data.update(samples.to_dict())
        result.checks["residual"] = samples.max_residual < cfg.residual_tolerance
        if self.out_dir:
            self.report.artifacts.append(str(samples.write_csv(str(self.out_dir / "amoeba.csv"))))
            self.report.artifacts.append(str(samples.write_coamoeba_csv(str(self.out_dir / "coamoeba.csv"))))

    # =========================================================================
    # Artifacts
    # =========================================================================

    def _write_json(self, name: str, data: Dict[str, Any]) -> None:
        path = self.out_dir / name
        with open(path, "w") as f:
            json.dump(data, f, indent=2)
        self.report.artifacts.append(str(path))

    def _write_artifacts(self, ctx: _Context) -> None:
        self.out_dir.mkdir(parents=True, exist_ok=True)
        if ctx.quiver is not None:
            self._write_json("quiver.json", ctx.quiver.to_dict())
        if ctx.tiling is not None:
            self._write_json("map.json", ctx.tiling.to_dict())
        if ctx.det is not None:
            path = self.out_dir / "diagram.txt"
            path.write_text(toric_diagram(ctx.det).to_text())
            self.report.artifacts.append(str(path))
        report_path = self.out_dir / "report.json"
        self.report.artifacts.append(str(report_path))
        with open(report_path, "w") as f:
            json.dump(self.report.to_dict(), f, indent=2)
        logger.info(f"Wrote {len(self.report.artifacts)} artifacts to {self.out_dir}")
