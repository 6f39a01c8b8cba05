#!/usr/bin/env python3
"""
TilingForge

Quivers, brane tilings and toric Calabi-Yau threefolds from the command line.

Usage:
    # Check a quiver with superpotential
    python tilingforge.py validate quiver.json

    # Convert between quiver and tiling
    python tilingforge.py dualize quiver.json --out map.json

    # Kasteleyn determinant and toric diagram of a built-in fixture
    python tilingforge.py kasteleyn dp3

    # Full pipeline
    python tilingforge.py pipeline --fixture c3 --all
"""

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Any, Dict, Optional, Tuple

from src.amoeba import GridSpec, parse_overrides, sample_curve, unit_overrides
from src.core import (
    genus, homology_weights, map_to_quiver, quiver_to_map, validate_quiver,
)
from src.dessin import passport, permutation_triple, rh_genus
from src.fixtures import FIXTURES, Fixture, get_fixture
from src.geometry import maximize_a, modular_data
from src.kasteleyn import (
    canonical_polygon, enumerate_matchings, kasteleyn_matrix, kasteleyn_signs,
    laurent_det, mirror_equation, toric_diagram,
)
from src.laurent import LaurentPoly2
from src.models import CombinatorialMap, Quiver, TilingForgeError
from src.mutation import check_duality_invariance, mutate_and_reduce, seiberg_mutate
from src.pipeline import DEFAULT_STAGES, STAGES, PipelineEngine
from src.plethystics import (
    parse_coefficients, pe, pe_product, pl, plethystic_profile, series_from_rational,
)
from src.utils import (
    load_app_config,
    setup_logging,
    validate_config,
    AppConfig,
)


logger = logging.getLogger(__name__)


def load_input(source: str) -> Fixture:
    """
    Load a quiver or map JSON file, or a built-in fixture by name.

    Map files are recognised by their sigma_black field.
    """
    path = Path(source)
    if not path.exists() and source in FIXTURES:
        return get_fixture(source)

    with open(path, "r") as f:
        data = json.load(f)
    if "sigma_black" in data:
        return Fixture(name=path.stem, description=source, tiling=CombinatorialMap.from_dict(data))
    return Fixture(name=path.stem, description=source, quiver=Quiver.from_dict(data))


def resolve_map(fixture: Fixture) -> Tuple[CombinatorialMap, Optional[Quiver]]:
    if fixture.tiling is not None:
        return fixture.tiling, fixture.quiver
    return quiver_to_map(fixture.quiver), fixture.quiver


KASTELEYN_SECTIONS = ("matrix", "det", "diagram", "mirror")
GEOMETRY_SECTIONS = ("rcharges", "tau", "j")


def selected(args: argparse.Namespace, sections: Tuple[str, ...]) -> Tuple[str, ...]:
    """Sections whose flags are set, or all of them when none is."""
    chosen = tuple(s for s in sections if getattr(args, s, False))
    return chosen or sections


def emit_json(data: Dict[str, Any], out: Optional[str] = None) -> None:
    text = json.dumps(data, indent=2)
    if out:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        Path(out).write_text(text + "\n")
        print(f"Wrote {out}")
    else:
        print(text)


def cmd_validate(args: argparse.Namespace, config: AppConfig) -> int:
    """Validate a quiver (toric, Euler and closure conditions)."""
    try:
        fixture = load_input(args.input)
        if fixture.quiver is None:
            m = fixture.tiling
            g = genus(m)
            if args.json:
                emit_json({"genus": g, "passed": g == 1})
            else:
                print(f"Map: {m.n_black} black, {m.n_white} white, {m.n_edges} edges, genus {g}")
            return 0 if g == 1 else 1

        report = validate_quiver(fixture.quiver)
        if args.json:
            emit_json(report.to_dict())
        else:
            print(f"Validating {fixture.name}")
            for check in report.checks:
                mark = "✓" if check.passed else "✗"
                print(f"  {mark} {check.name}: {check.message}")
            print(f"  N0={report.counts['N0']}  N1={report.counts['N1']}  N2={report.counts['N2']}")
        return 0 if report.passed else 1
    except (TilingForgeError, OSError, json.JSONDecodeError) as e:
        print(f"Error: {e}")
        return 1


def cmd_dualize(args: argparse.Namespace, config: AppConfig) -> int:
    """Convert a quiver to its tiling or a tiling to its quiver."""
    try:
        fixture = load_input(args.input)
        if fixture.quiver is not None and fixture.tiling is None:
            emit_json(quiver_to_map(fixture.quiver).to_dict(), args.out)
        else:
            emit_json(map_to_quiver(fixture.tiling).to_dict(), args.out)
        return 0
    except (TilingForgeError, OSError, json.JSONDecodeError) as e:
        print(f"Error: {e}")
        return 1


def cmd_kasteleyn(args: argparse.Namespace, config: AppConfig) -> int:
    """Kasteleyn matrix, determinant and toric diagram."""
    try:
        fixture = load_input(args.input)
        m, _ = resolve_map(fixture)
        signs = fixture.signs or kasteleyn_signs(m)
        weights = fixture.weights or homology_weights(m)
        K = kasteleyn_matrix(m, signs, weights)
        det = laurent_det(K)
        diagram = toric_diagram(det)
        show = selected(args, KASTELEYN_SECTIONS)

        if args.json:
            data: Dict[str, Any] = {}
            if "matrix" in show:
                data.update(signs=signs, weights=weights.to_dict(), matrix=K.to_text())
            if "det" in show:
                data["det"] = str(det)
            if "diagram" in show:
                data["diagram"] = diagram.to_dict()["points"]
                data["canonical"] = canonical_polygon(diagram).to_dict()["points"]
            if "mirror" in show:
                data["mirror"] = mirror_equation(diagram)
            emit_json(data)
            return 0

        print("=" * 60)
        print(f"KASTELEYN: {fixture.name}")
        print("=" * 60)
        if "matrix" in show:
            print("Matrix (rows white, columns black):")
            for row in K.to_text():
                print("  [" + ", ".join(row) + "]")
        if "det" in show:
            print(f"det K = {det}")
        if "diagram" in show:
            print("Toric diagram (a b multiplicity):")
            for line in diagram.to_text().splitlines():
                print(f"  {line}")
        if "mirror" in show:
            print(f"Mirror: {mirror_equation(diagram)}")
        return 0
    except (TilingForgeError, OSError, json.JSONDecodeError) as e:
        print(f"Error: {e}")
        return 1


def cmd_matchings(args: argparse.Namespace, config: AppConfig) -> int:
    """Enumerate perfect matchings and compare with the determinant."""
    try:
        fixture = load_input(args.input)
        m, _ = resolve_map(fixture)
        weights = fixture.weights or homology_weights(m)
        matchings = enumerate_matchings(m, weights)
        signs = fixture.signs or kasteleyn_signs(m)
        det_diagram = toric_diagram(laurent_det(kasteleyn_matrix(m, signs, weights)))
        agree = matchings.to_diagram() == det_diagram

        if args.json:
            emit_json({
                "count": len(matchings),
                "matchings": [{"edges": list(mt.edges), "point": list(mt.point)} for mt in matchings.matchings],
                "diagram": matchings.to_diagram().to_dict()["points"],
                "agrees_with_det": agree,
            })
        else:
            print(f"Perfect matchings: {len(matchings)}")
            for (a, b), k in sorted(matchings.multiplicities().items()):
                print(f"  ({a}, {b}): {k}")
            print(f"Determinant agreement: {'PASS' if agree else 'FAIL'}")
        return 0 if agree else 1
    except (TilingForgeError, OSError, json.JSONDecodeError) as e:
        print(f"Error: {e}")
        return 1


def cmd_mutate(args: argparse.Namespace, config: AppConfig) -> int:
    """Seiberg-dualize a quiver node and integrate out massive fields."""
    try:
        fixture = load_input(args.input)
        q = fixture.quiver if fixture.quiver is not None else map_to_quiver(fixture.tiling)
        if args.reduce:
            dual, record = mutate_and_reduce(q, args.node)
        else:
            dual, record = seiberg_mutate(q, args.node)

        invariance = check_duality_invariance(q, dual) if args.check_invariance else None
        if args.json or args.out:
            data = {"quiver": dual.to_dict(), "record": record.to_dict()}
            if invariance is not None:
                data["invariance"] = invariance.to_dict()
            emit_json(data, args.out)
        if not args.json:
            print(f"Mutated node {record.node}: {record.terms_before} -> {record.terms_after} terms")
            for meson, a, b in record.mesons:
                print(f"  meson {meson} = {a} . {b}")
            for x, y in record.removed_pairs:
                print(f"  integrated out {x}, {y}")
            if not args.out:
                for term in dual.superpotential:
                    print(f"  {term}")
            if invariance is not None:
                print(f"Invariance: {'PASS' if invariance.equal else 'FAIL'}")
        return 0 if invariance is None or invariance.equal else 1
    except (TilingForgeError, OSError, json.JSONDecodeError) as e:
        print(f"Error: {e}")
        return 1


def cmd_geometry(args: argparse.Namespace, config: AppConfig) -> int:
    """a-maximization, torus periods and the j-invariant."""
    try:
        fixture = load_input(args.input)
        m, _ = resolve_map(fixture)
        weights = fixture.weights or homology_weights(m)
        R = maximize_a(m, config.optimizer)
        modular = modular_data(m, R, weights, config.q_terms)
        show = selected(args, GEOMETRY_SECTIONS)

        if args.json:
            data: Dict[str, Any] = {}
            if "rcharges" in show:
                data["R"] = R.to_dict()
            if "tau" in show or "j" in show:
                data["modular"] = modular.to_dict()
            emit_json(data)
            return 0

        print("=" * 60)
        print(f"GEOMETRY: {fixture.name}")
        print("=" * 60)
        if "rcharges" in show:
            for e, r in R.as_dict().items():
                print(f"  R[{e}] = {r:.10f}")
            print(f"a = sum (R-1)^3 = {R.objective:.10f}  ({R.converged_runs}/{R.total_runs} runs converged)")
            if not R.unique:
                print(f"  warning: runs disagree by {R.spread:.3e}")
        if "tau" in show:
            tau = modular.tau_reduced
            print(f"tau = {tau.real:.10g} + {tau.imag:.10g}i")
        if "j" in show:
            print(f"J   = {modular.J.real:.10g}  (j = {modular.j.real:.10g})")
        return 0
    except (TilingForgeError, OSError, json.JSONDecodeError) as e:
        print(f"Error: {e}")
        return 1


def cmd_dessin(args: argparse.Namespace, config: AppConfig) -> int:
    """Permutation triple, passport and genus of a tiling."""
    try:
        fixture = load_input(args.input)
        m, _ = resolve_map(fixture)
        triple = permutation_triple(m)
        p = passport(triple)
        g = rh_genus(triple)

        if args.json:
            emit_json({**triple.to_dict(), "passport": p.to_dict(), "genus": g})
            return 0

        print(f"sigma_B   = {triple.cycle_notation('b')}")
        print(f"sigma_W   = {triple.cycle_notation('w')}")
        print(f"sigma_inf = {triple.cycle_notation('inf')}")
        print(f"passport  = {p}")
        print(f"degree    = {triple.degree}")
        print(f"genus     = {g}")
        return 0
    except (TilingForgeError, OSError, json.JSONDecodeError) as e:
        print(f"Error: {e}")
        return 1


def cmd_pleth(args: argparse.Namespace, config: AppConfig) -> int:
    """Plethystic operations on a rational series."""
    try:
        order = args.order if args.order is not None else config.series_order
        series = series_from_rational(parse_coefficients(args.numer), parse_coefficients(args.denom), order)
        if args.op == "pe":
            result = pe(series)
        elif args.op == "pe-product":
            result = pe_product(series)
        elif args.op == "pl":
            result = pl(series)
        else:
            result = series

        if args.json:
            data = {"op": args.op, "order": order, "coefficients": result.to_list()}
            if args.op == "pl":
                data["profile"] = plethystic_profile(series).to_dict()
            emit_json(data)
            return 0

        print(result)
        if args.op == "pl":
            profile = plethystic_profile(series)
            if profile.terminates:
                print(f"Terminates at degree {profile.degree}")
            else:
                print(f"No termination below order {order}")
        return 0
    except (TilingForgeError, ValueError) as e:
        print(f"Error: {e}")
        return 1


def cmd_amoeba(args: argparse.Namespace, config: AppConfig) -> int:
    """Sample the amoeba and coamoeba of P(z, w) = 0."""
    try:
        if Path(args.poly).exists() or args.poly in FIXTURES:
            fixture = load_input(args.poly)
            m, _ = resolve_map(fixture)
            signs = fixture.signs or kasteleyn_signs(m)
            weights = fixture.weights or homology_weights(m)
            P = laurent_det(kasteleyn_matrix(m, signs, weights))
        else:
            P = LaurentPoly2.parse(args.poly)

        overrides = unit_overrides(P) if args.unit_coefficients else {}
        overrides.update(parse_overrides(args.coeff or []))
        grid_size = args.grid if args.grid is not None else config.amoeba.grid
        sample_range = args.range if args.range is not None else config.amoeba.range
        grid = GridSpec(sample_range, grid_size, grid_size)
        samples = sample_curve(P, grid, overrides, config.amoeba.residual_tolerance)

        out = args.out or str(Path(config.output_dir) / "amoeba.csv")
        samples.write_csv(out)
        if args.coamoeba_out:
            samples.write_coamoeba_csv(args.coamoeba_out)

        if args.json:
            emit_json({"polynomial": str(P), **samples.to_dict(), "out": out})
        else:
            print(f"P = {P}")
            print(f"Points: {len(samples)} from {samples.fibers} fibers ({samples.skipped_fibers} skipped)")
            print(f"Max residual: {samples.max_residual:.3e}")
            print(f"Wrote {out}")
        return 0
    except (TilingForgeError, OSError, ValueError, json.JSONDecodeError) as e:
        print(f"Error: {e}")
        return 1


def cmd_pipeline(args: argparse.Namespace, config: AppConfig) -> int:
    """Run the end-to-end pipeline on a fixture or input file."""
    if args.all:
        stages = list(DEFAULT_STAGES)
    elif args.stages:
        stages = [s.strip() for s in args.stages.split(",") if s.strip()]
    elif args.det:
        stages = ["validate", "dualize", "kasteleyn"]
    else:
        stages = [s for s in DEFAULT_STAGES if s != "amoeba"]
    if args.check_invariance and not args.mutate:
        stages.append("mutate")

    engine = PipelineEngine(
        config=config,
        out_dir=args.out_dir,
        mutate_node=args.mutate,
        check_invariance=args.check_invariance,
    )
    try:
        if args.fixture:
            report = engine.run_fixture(args.fixture, stages)
        else:
            report = engine.run_files(quiver_path=args.quiver, map_path=args.map, stages=stages)
    except (TilingForgeError, OSError, ValueError, json.JSONDecodeError) as e:
        print(f"Error: {e}")
        return 1

    if args.json:
        emit_json(report.to_dict())
        return 0 if report.passed else 1

    print()
    print("=" * 60)
    print(f"PIPELINE: {report.source}")
    print("=" * 60)
    for name, stage in report.stages.items():
        print(f"[{stage.status.upper():7}] {name}")
        if stage.error:
            print(f"          {stage.error}")
        for check, ok in stage.checks.items():
            print(f"          {'PASS' if ok else 'FAIL'} {check}")

    kasteleyn = report.stages.get("kasteleyn")
    if kasteleyn and kasteleyn.status == "ok":
        print(f"det K = {kasteleyn.data['det']}")
    geometry = report.stages.get("geometry")
    if geometry and geometry.status == "ok":
        J = geometry.data["modular"]["J"]
        print(f"J = {J[0]:.10g}")
    dessin = report.stages.get("dessin")
    if dessin and dessin.status == "ok":
        print(f"passport = {dessin.data['passport']}")
    mutate = report.stages.get("mutate")
    if mutate and "invariance" in mutate.checks:
        print(f"Invariance: {'PASS' if mutate.checks['invariance'] else 'FAIL'}")

    print("=" * 60)
    print(report.summary())
    print("=" * 60)
    return 0 if report.passed else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tilingforge",
        description="TilingForge - quivers, brane tilings and toric Calabi-Yau threefolds",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  # Validate a quiver
  python tilingforge.py validate quiver.json

  # Determinant of the dP3 tiling
  python tilingforge.py kasteleyn dp3

  # Plethystic logarithm of the conifold Hilbert series
  python tilingforge.py pleth --numer "1,0,-1" --denom "1,-4,6,-4,1" --op pl -N 30

  # Mutate F0 phase I at node 1 and compare toric diagrams
  python tilingforge.py pipeline --fixture f0-I --mutate 1 --check-invariance

Built-in fixtures: """ + ", ".join(FIXTURES),
    )

    parser.add_argument(
        "-v", "--verbose",
        action="store_true",
        help="Enable verbose logging"
    )
    parser.add_argument(
        "--env-file",
        default=".env",
        help="Path to .env file (default: .env)"
    )
    parser.add_argument(
        "--config-file",
        default="config.yaml",
        help="Path to config.yaml file (default: config.yaml)"
    )
    parser.add_argument(
        "--json",
        action="store_true",
        help="Print machine-readable JSON"
    )
    parser.add_argument(
        "--out-dir",
        help="Directory for artifacts (overrides output_dir)"
    )
    parser.add_argument(
        "--tolerance",
        type=float,
        help="Numerical tolerance for checks (overrides tolerance)"
    )

    subparsers = parser.add_subparsers(dest="command", help="Command to run")

    validate_parser = subparsers.add_parser("validate", help="Check toric, Euler and closure conditions")
    validate_parser.add_argument("input", help="Quiver or map JSON file, or fixture name")

    dualize_parser = subparsers.add_parser("dualize", help="Convert quiver <-> tiling")
    dualize_parser.add_argument("input", help="Quiver or map JSON file, or fixture name")
    dualize_parser.add_argument("--out", help="Write the result to this file")

    kasteleyn_parser = subparsers.add_parser("kasteleyn", help="Kasteleyn determinant and toric diagram")
    kasteleyn_parser.add_argument("input", help="Quiver or map JSON file, or fixture name")
    kasteleyn_parser.add_argument("--matrix", action="store_true", help="Show the Kasteleyn matrix")
    kasteleyn_parser.add_argument("--det", action="store_true", help="Show the determinant")
    kasteleyn_parser.add_argument("--diagram", action="store_true", help="Show the toric diagram")
    kasteleyn_parser.add_argument("--mirror", action="store_true", help="Show the mirror curve")

    matchings_parser = subparsers.add_parser("matchings", help="Enumerate perfect matchings")
    matchings_parser.add_argument("input", help="Quiver or map JSON file, or fixture name")

    mutate_parser = subparsers.add_parser("mutate", help="Seiberg duality at a quiver node")
    mutate_parser.add_argument("input", help="Quiver or map JSON file, or fixture name")
    mutate_parser.add_argument("--node", required=True, help="Node to dualize")
    mutate_parser.add_argument("--out", help="Write the dual quiver JSON to this file")
    mutate_parser.add_argument(
        "--reduce",
        action=argparse.BooleanOptionalAction,
        default=True,
        help="Integrate out massive fields after mutating"
    )
    mutate_parser.add_argument(
        "--check-invariance",
        action="store_true",
        help="Compare toric diagrams before and after"
    )

    geometry_parser = subparsers.add_parser("geometry", help="a-maximization, tau and J")
    geometry_parser.add_argument("input", help="Quiver or map JSON file, or fixture name")
    geometry_parser.add_argument("--rcharges", action="store_true", help="Show R-charges and a")
    geometry_parser.add_argument("--tau", action="store_true", help="Show the reduced modulus tau")
    geometry_parser.add_argument("--j", action="store_true", help="Show J and j")

    dessin_parser = subparsers.add_parser("dessin", help="Permutation triple and passport")
    dessin_parser.add_argument("input", help="Quiver or map JSON file, or fixture name")

    pleth_parser = subparsers.add_parser("pleth", help="Plethystic exponential and logarithm")
    pleth_parser.add_argument("--numer", required=True, help="Numerator coefficients, ascending")
    pleth_parser.add_argument("--denom", default="1", help="Denominator coefficients, ascending")
    pleth_parser.add_argument(
        "--op",
        choices=["series", "pe", "pe-product", "pl"],
        default="pl",
        help="Operation to apply"
    )
    pleth_parser.add_argument("-N", "--order", type=int, help="Truncation order (default: series_order)")

    amoeba_parser = subparsers.add_parser("amoeba", help="Sample amoeba and coamoeba")
    amoeba_parser.add_argument("poly", help="Polynomial in z, w (e.g. '1 + z + w'), or fixture/map file")
    amoeba_parser.add_argument("--range", type=float, help="Sample log|z| in [-range, range]")
    amoeba_parser.add_argument("--grid", type=int, help="Grid resolution per axis")
    amoeba_parser.add_argument("--out", help="Amoeba CSV path")
    amoeba_parser.add_argument("--coamoeba-out", help="Coamoeba CSV path")
    amoeba_parser.add_argument(
        "--coeff",
        action="append",
        help="Coefficient override a,b=value (repeatable)"
    )
    amoeba_parser.add_argument(
        "--unit-coefficients",
        action="store_true",
        help="Put every coefficient on the unit circle with seeded phases"
    )

    pipeline_parser = subparsers.add_parser("pipeline", help="Run the end-to-end pipeline")
    source = pipeline_parser.add_mutually_exclusive_group(required=True)
    source.add_argument("--fixture", choices=list(FIXTURES), help="Built-in fixture")
    source.add_argument("--quiver", help="Quiver JSON file")
    source.add_argument("--map", help="Map JSON file")
    pipeline_parser.add_argument("--all", action="store_true", help="Run every stage including amoeba")
    pipeline_parser.add_argument("--stages", help=f"Comma-separated subset of: {', '.join(STAGES)}")
    pipeline_parser.add_argument("--det", action="store_true", help="Stop after the Kasteleyn determinant")
    pipeline_parser.add_argument("--mutate", help="Mutate at this node")
    pipeline_parser.add_argument(
        "--check-invariance",
        action="store_true",
        help="Compare toric diagrams across the mutation"
    )

    return parser


def main(argv: Optional[list] = None) -> int:
    """Main entry point."""
    parser = build_parser()
    args = parser.parse_args(argv)

    # Load configuration
    config = load_app_config(args.env_file, args.config_file)
    if args.tolerance is not None:
        config.tolerance = args.tolerance
    if args.out_dir:
        config.output_dir = args.out_dir

    # Setup logging
    setup_logging(verbose=args.verbose or config.verbose_logging)

    errors = validate_config(config)
    if errors:
        print("Configuration errors:")
        for error in errors:
            print(f"  - {error}")
        return 1

    # Route to command
    if args.command == "validate":
        return cmd_validate(args, config)
    elif args.command == "dualize":
        return cmd_dualize(args, config)
    elif args.command == "kasteleyn":
        return cmd_kasteleyn(args, config)
    elif args.command == "matchings":
        return cmd_matchings(args, config)
    elif args.command == "mutate":
        return cmd_mutate(args, config)
    elif args.command == "geometry":
        return cmd_geometry(args, config)
    elif args.command == "dessin":
        return cmd_dessin(args, config)
    elif args.command == "pleth":
        return cmd_pleth(args, config)
    elif args.command == "amoeba":
        return cmd_amoeba(args, config)
    elif args.command == "pipeline":
        return cmd_pipeline(args, config)
    else:
        parser.print_help()
        return 0


if __name__ == "__main__":
    sys.exit(main())
