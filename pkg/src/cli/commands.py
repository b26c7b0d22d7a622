"""Command handlers for the anelkin CLI."""

import argparse
import logging
from pathlib import Path
from typing import Optional

import numpy as np
from pydantic import BaseModel

from src import __version__
from src.errors import DocumentError, UsageError
from src.models.diffeo import SpaceDiffeo
from src.models.lattice import CutProjectSpec, DislocationSpec
from src.models.point_configuration import AFFINE_GROUP, PointConfigurationSet
from src.models.report import (
    BurgersReport,
    CheckReport,
    DecomposeReport,
    EquivReport,
    GroupoidReport,
    OrbitEntry,
    ReportHeader,
    SvgReport,
    SynthReport,
)
from src.services import (
    CompatibilityService,
    DecompositionService,
    DocumentService,
    EquivalenceService,
    GroupoidService,
    LatticeService,
    ReportService,
)
from src.services.geometry import structured_grid
from src.services.lattice_service import BURGERS_CONVENTION, loop_vertices
from .dependencies import get_config, get_store
from .router import CommandRouter, arg

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_INCOMPATIBLE = 2

router = CommandRouter()
router.common = [
    arg("--config", default=None, help="JSON RunConfig file (overrides ANELKIN_CONFIG)"),
    arg("--tol", type=float, default=None, help="Relative tolerance override"),
    arg("--seed", type=int, default=None, help="Generator seed override"),
    arg("--log-level", default=None, help="Logging level (DEBUG, INFO, WARNING)"),
]


def parse_floats(text: str, what: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError as e:
        raise UsageError(f"{what}: expected comma-separated numbers, got {text!r}") from e


def parse_ints(text: str, what: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError as e:
        raise UsageError(f"{what}: expected comma-separated integers, got {text!r}") from e


def parse_affine(text: str, dim: int) -> SpaceDiffeo:
    """'a11,a12,...;c1,...' with the matrix in row-major order."""
    matrix_text, _, translation_text = text.partition(";")
    entries = parse_floats(matrix_text, "--affine matrix")
    translation = parse_floats(translation_text, "--affine translation") if translation_text else [0.0] * dim
    if len(entries) != dim * dim or len(translation) != dim:
        raise UsageError(f"--affine needs {dim * dim} matrix entries and {dim} translation entries")
    return SpaceDiffeo.affine(np.reshape(entries, (dim, dim)), translation)


def header(command: str) -> ReportHeader:
    config = get_config()
    return ReportHeader(version=__version__, command=command, config=config.as_dict(), seed=config.rng_seed)


def emit(report: BaseModel) -> None:
    print(report.model_dump_json(indent=2))


@router.command(
    "check",
    "Holonomicity and gradient test of a configuration",
    arg("input", help="MeshFieldDocument"),
)
def check(args: argparse.Namespace) -> int:
    """
    Test a document's field for compatibility.

    With a base map the verdict is holonomicity (field equals the tangent
    map of the base); without one it is integrability of the field.
    """
    config = get_config()
    documents = DocumentService(config)
    compatibility = CompatibilityService(config)

    document = get_store().read_mesh(args.input)
    configuration = documents.configuration(document)
    field = configuration.as_field()

    holonomic = None
    max_residual = None
    if document.base is not None:
        report = compatibility.is_holonomic(configuration)
        holonomic, max_residual = report.holonomic, report.max_residual
    verdict = compatibility.field_is_gradient(field)
    compatible = holonomic if holonomic is not None else verdict.is_gradient

    emit(
        CheckReport(
            header=header("check"),
            holonomic=holonomic,
            max_holonomy_residual=max_residual,
            gradient=verdict.is_gradient,
            incompatibility_norm=compatibility.incompatibility_norm(field),
            violating_facets=verdict.violating_facets,
            inconsistent_vertices=verdict.inconsistent_vertices,
            compatible=compatible,
        )
    )
    return EXIT_OK if compatible else EXIT_INCOMPATIBLE


@router.command(
    "decompose",
    "Split a configuration into compatible factor and embodiment",
    arg("input", help="MeshFieldDocument"),
    arg("--out", default=None, help="Output stem; writes STEM_compatible.json and STEM_embodiment.json"),
)
def decompose(args: argparse.Namespace) -> int:
    config = get_config()
    store = get_store()
    documents = DocumentService(config)

    configuration = documents.configuration(store.read_mesh(args.input))
    result = DecompositionService(config).decompose(configuration)

    stem = args.out or str(Path(args.input).with_suffix(""))
    outputs = [
        store.write_mesh(f"{stem}_compatible.json", documents.from_configuration(result.compatible, {"role": "compatible"})),
        store.write_mesh(f"{stem}_embodiment.json", documents.from_embodiment(result.anelastic)),
    ]
    emit(
        DecomposeReport(
            header=header("decompose"),
            residual=result.residual,
            tol_decomp=config.tol_decomp,
            identity_embodiment=result.anelastic.is_identity(config.tol_rel),
            outputs=outputs,
        )
    )
    if result.residual > config.tol_decomp:
        logger.error(f"Reconstruction residual {result.residual:.3e} exceeds tol_decomp {config.tol_decomp:.1e}")
        return EXIT_ERROR
    return EXIT_OK


@router.command(
    "equiv",
    "Compare the embodiments of two configurations",
    arg("input_a", help="MeshFieldDocument"),
    arg("input_b", nargs="?", default=None, help="MeshFieldDocument (defaults to input_a)"),
    arg("--affine", default=None, help="Push input_b forward by 'a11,a12,...;c1,...' first"),
)
def equiv(args: argparse.Namespace) -> int:
    config = get_config()
    store = get_store()
    documents = DocumentService(config)
    equivalence = EquivalenceService(config)

    first = documents.configuration(store.read_mesh(args.input_a))
    second = documents.configuration(store.read_mesh(args.input_b or args.input_a))
    affine = None
    if args.affine:
        g = parse_affine(args.affine, second.body.dim)
        second = equivalence.decomposition.push_forward(second, g)
        affine = g.describe()

    deviation = equivalence.deviation(first, second)
    equivalent = deviation <= config.tol_rel
    logger.info(f"Embodiment deviation {deviation:.3e}: {'equivalent' if equivalent else 'not equivalent'}")
    emit(
        EquivReport(
            header=header("equiv"),
            equivalent=equivalent,
            max_deviation=deviation,
            tol=config.tol_rel,
            affine=affine,
        )
    )
    return EXIT_OK if equivalent else EXIT_INCOMPATIBLE


@router.command(
    "groupoid",
    "Axiom report and orbits of a configuration family",
    arg("manifest", help="FamilyManifest"),
)
def groupoid(args: argparse.Namespace) -> int:
    config = get_config()
    store = get_store()
    service = GroupoidService(config)
    manifest = store.read_manifest(args.manifest)

    partition_agrees = None
    if manifest.configs:
        group = AFFINE_GROUP
        if manifest.group != AFFINE_GROUP:
            group = [SpaceDiffeo.affine(e.matrix, e.translation) for e in manifest.group]
        pcs = PointConfigurationSet(manifest.points, manifest.configs, group)
        table = service.configuration_groupoid(pcs)
        family = "points"
    else:
        documents = DocumentService(config)
        configs = [
            documents.configuration(store.read_mesh(store.resolve(args.manifest, path)))
            for path in manifest.documents
        ]
        table = service.bundle_groupoid(configs)
        family = "bundles"

    axioms = service.verify_axioms(table)
    entries = []
    if axioms.passed:
        found = service.orbits(table)
        for orbit in found:
            count = None
            if family == "points":
                local = {g: k for k, g in enumerate(orbit)}
                witnesses = {
                    (local[s], local[t]): w
                    for (s, t), w in service.witnesses_for_orbit(table, orbit).items()
                }
                count = service.body_points([pcs.configs[i] for i in orbit], witnesses).count
            entries.append(OrbitEntry(members=orbit, body_points=count))
        if family == "bundles":
            classes = EquivalenceService(config).partition_into_embodiments(configs)
            partition_agrees = [cls.members for cls in classes] == found

    emit(
        GroupoidReport(
            header=header("groupoid"),
            family=family,
            n_objects=table.n_objects,
            n_morphisms=table.n_morphisms,
            axioms=axioms,
            orbits=entries,
            partition_agrees=partition_agrees,
        )
    )
    return EXIT_OK if axioms.passed and partition_agrees is not False else EXIT_INCOMPATIBLE


@router.command(
    "synth",
    "Generate dislocated, quasicrystal or random test data",
    arg("kind", choices=["dislocation", "quasicrystal", "random"]),
    arg("--out", required=True, help="Output document (.json) or point set (.csv)"),
    arg("--b", default="1,0", help="Burgers vector"),
    arg("--grid", default="32", help="Squares per side, 'N' or 'NX,NY[,NZ]'"),
    arg("--dislocation", default="edge", choices=["edge", "screw"]),
    arg("--sampling", default="volterra", choices=["volterra", "barycenter"]),
    arg("--core", default=None, help="Core point 'x,y'"),
    arg("--nu", type=float, default=0.3, help="Poisson ratio"),
    arg("--core-radius", type=float, default=0.0),
    arg("--ring-radius", type=float, default=10.0, help="Radius of the ring loop stored in metadata"),
    arg("--slope", type=float, default=None, help="Line slope for a 1D cut (default 1/phi)"),
    arg("--frame", default=None, help="Frame rows 'r1;r2;...' in R^(2n)"),
    arg("--extent", type=float, default=50.0),
    arg("--window", default="canonical", choices=["canonical", "box"]),
    arg("--window-scale", type=float, default=1.0),
    arg("--half-widths", default=None),
    arg("--max-points", type=int, default=1_000_000),
)
def synth(args: argparse.Namespace) -> int:
    config = get_config()
    store = get_store()
    lattice = LatticeService(config)
    documents = DocumentService(config)

    if args.kind == "dislocation":
        grid = parse_ints(args.grid, "--grid")
        shape = (grid[0], grid[0]) if len(grid) == 1 else tuple(grid)
        spec = DislocationSpec(
            shape=shape,
            burgers=tuple(parse_floats(args.b, "--b")),
            core=tuple(parse_floats(args.core, "--core")) if args.core else None,
            kind=args.dislocation,
            sampling=args.sampling,
            nu=args.nu,
            core_radius=args.core_radius,
        )
        crystal = lattice.make_dislocated(spec)
        body = crystal.configuration.body
        radius = lattice.fitting_ring_radius(body, crystal.core, args.ring_radius)
        if radius < args.ring_radius:
            logger.info(f"Ring radius {args.ring_radius} does not fit the grid, using {radius}")
        ring = lattice.ring_loop(body, crystal.core, radius) if radius >= body.min_edge_length() else []
        metadata = {
            "generator": "dislocation",
            "kind": spec.kind,
            "sampling": spec.sampling,
            "burgers": ",".join(repr(float(x)) for x in spec.burgers),
            "core": ",".join(repr(float(x)) for x in crystal.core),
            "core_cell": str(crystal.core_cell),
            "removed_cells": ",".join(str(c) for c in crystal.removed_cells),
            "convention": BURGERS_CONVENTION,
        }
        if ring:
            metadata["ring_loop"] = ",".join(str(v) for v in ring)
        output = store.write_mesh(args.out, documents.from_configuration(crystal.configuration, metadata))
        emit(SynthReport(header=header("synth"), kind="dislocation", outputs=[output], n_cells=body.n_cells, metadata=metadata))
        return EXIT_OK

    if args.kind == "random":
        grid = parse_ints(args.grid, "--grid")
        shape = (grid[0], grid[0]) if len(grid) == 1 else tuple(grid)
        body = structured_grid(shape)
        configuration = lattice.random_configuration(body, np.random.default_rng(config.rng_seed))
        metadata = {"generator": "random", "seed": str(config.rng_seed)}
        output = store.write_mesh(args.out, documents.from_configuration(configuration, metadata))
        emit(SynthReport(header=header("synth"), kind="random", outputs=[output], n_cells=body.n_cells, metadata=metadata))
        return EXIT_OK

    if args.frame:
        frame = tuple(tuple(parse_floats(row, "--frame")) for row in args.frame.split(";"))
    elif args.slope is not None:
        frame = ((1.0, args.slope),)
    else:
        frame = CutProjectSpec.fibonacci().frame
    spec = CutProjectSpec(
        frame=frame,
        extent=args.extent,
        window=args.window,
        window_scale=args.window_scale,
        half_widths=tuple(parse_floats(args.half_widths, "--half-widths")) if args.half_widths else None,
        max_points=args.max_points,
    )
    result = lattice.cut_and_project(spec)
    output = store.write_points(args.out, result.points)
    emit(SynthReport(header=header("synth"), kind="quasicrystal", outputs=[output], n_points=len(result.points)))
    return EXIT_OK


def _loop_arguments(args: argparse.Namespace, document, body) -> tuple[Optional[list[int]], Optional[np.ndarray]]:
    loop_text = args.loop or document.metadata.get("ring_loop")
    if not loop_text:
        return None, None
    loop = loop_vertices(body, parse_ints(loop_text, "--loop")).tolist()
    if args.shift is not None:
        shift = np.asarray(parse_floats(args.shift, "--shift"), dtype=float)
    else:
        shift = LatticeService.default_loop_shift(body)
    if shift.shape != (body.dim,):
        raise UsageError(f"--shift needs {body.dim} components")
    return loop, shift


@router.command(
    "burgers",
    "Circulation of (F - I) around a closed vertex loop",
    arg("input", help="MeshFieldDocument"),
    arg("--loop", default=None, help="Vertex loop 'i0,i1,...,i0' (default: metadata ring_loop)"),
    arg("--shift", default=None, help="Rigid loop offset 'dx,dy' (default: a quarter mesh spacing)"),
)
def burgers(args: argparse.Namespace) -> int:
    config = get_config()
    documents = DocumentService(config)
    document = get_store().read_mesh(args.input)
    field = documents.field(document)
    loop, shift = _loop_arguments(args, document, field.body)
    if loop is None:
        raise UsageError("burgers needs --loop or a document with a ring_loop")

    vector = LatticeService(config).burgers_circuit(field, loop, shift)
    emit(
        BurgersReport(
            header=header("burgers"),
            burgers=vector.tolist(),
            norm=float(np.linalg.norm(vector)),
            loop=loop,
            shift=shift.tolist(),
            convention=BURGERS_CONVENTION,
        )
    )
    return EXIT_OK


@router.command(
    "report",
    "SVG of per-cell incompatibility with an optional loop overlay",
    arg("input", help="MeshFieldDocument"),
    arg("--out", default=None, help="SVG path (default: input with .svg)"),
    arg("--loop", default=None, help="Vertex loop to overlay"),
    arg("--shift", default=None, help="Rigid loop offset"),
)
def report(args: argparse.Namespace) -> int:
    config = get_config()
    store = get_store()
    documents = DocumentService(config)
    compatibility = CompatibilityService(config)

    document = store.read_mesh(args.input)
    configuration = documents.configuration(document)
    field = configuration.as_field()
    residuals = compatibility.cell_residuals(field)

    loop_points = None
    if args.loop:
        loop, shift = _loop_arguments(args, document, field.body)
        loop_points = configuration.base[loop] + shift

    svg = ReportService().render_svg(
        field.body, configuration.base, residuals, loop_points, title=Path(args.input).name
    )
    output = store.write_text(args.out or str(Path(args.input).with_suffix(".svg")), svg)
    emit(
        SvgReport(
            header=header("report"),
            output=output,
            max_cell_residual=float(residuals.max()),
            incompatibility_norm=float(residuals.sum()),
        )
    )
    return EXIT_OK
