"""End-to-end command runs through the app, in process."""

import json
from pathlib import Path

import numpy as np
import pytest

from src.app import create_app
from src.config import RunConfig


@pytest.fixture
def run(config, capsys):
    def invoke(*argv: str) -> tuple[int, dict | None, str]:
        code = create_app(config).run([str(a) for a in argv])
        captured = capsys.readouterr()
        report = json.loads(captured.out) if captured.out.strip().startswith("{") else None
        return code, report, captured.err

    return invoke


@pytest.fixture
def dislocation(run, tmp_path: Path) -> Path:
    path = tmp_path / "disl.json"
    code, report, _ = run("synth", "dislocation", "--out", path)
    assert code == 0
    return path


@pytest.fixture
def plastic(run, tmp_path: Path) -> Path:
    path = tmp_path / "random.json"
    code, _, _ = run("synth", "random", "--grid", "6", "--out", path)
    assert code == 0
    return path


def test_synth_dislocation_then_burgers(run, dislocation):
    code, report, _ = run("burgers", dislocation)
    assert code == 0
    assert report["header"]["command"] == "burgers"
    assert report["header"]["tool"] == "anelkin"
    np.testing.assert_allclose(report["burgers"], [1.0, 0.0], atol=1e-9)
    assert report["loop"][0] == report["loop"][-1]
    assert report["shift"] == [0.25, 0.125]


def test_synth_is_deterministic(run, tmp_path):
    for name in ("a.json", "b.json"):
        assert run("synth", "random", "--grid", "5", "--seed", "9", "--out", tmp_path / name)[0] == 0
    assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()


def test_check_reports_incompatibility(run, dislocation, plastic):
    code, report, _ = run("check", dislocation)
    assert code == 2
    assert report["holonomic"] is False
    assert report["gradient"] is False

    code, report, _ = run("check", plastic)
    assert code == 2
    assert report["incompatibility_norm"] > 0.0
    assert report["violating_facets"]


def test_decompose_writes_both_factors(run, plastic, tmp_path):
    stem = tmp_path / "out" / "split"
    code, report, _ = run("decompose", plastic, "--out", stem)
    assert code == 0
    assert report["residual"] <= report["tol_decomp"]
    assert report["identity_embodiment"] is False
    compatible = tmp_path / "out" / "split_compatible.json"
    embodiment = tmp_path / "out" / "split_embodiment.json"
    assert report["outputs"] == [str(compatible), str(embodiment)]
    assert json.loads(embodiment.read_text())["metadata"]["role"] == "embodiment"

    code, report, _ = run("check", compatible)
    assert code == 0
    assert report["holonomic"] is True


def test_decompose_default_stem(run, plastic):
    code, report, _ = run("decompose", plastic)
    assert code == 0
    assert report["outputs"][0] == str(plastic.with_suffix("")) + "_compatible.json"


def test_equiv_with_and_without_displacement(run, plastic, tmp_path):
    code, report, _ = run("equiv", plastic)
    assert code == 0
    assert report["equivalent"] is True

    code, report, _ = run("equiv", plastic, plastic, "--affine", "1.5,0.2,0,0.8;3,-1")
    assert code == 0
    assert report["affine"]["translation"] == [3.0, -1.0]

    run("decompose", plastic, "--out", tmp_path / "d")
    code, report, _ = run("equiv", plastic, tmp_path / "d_compatible.json")
    assert code == 2
    assert report["equivalent"] is False


def test_groupoid_point_family(run, tmp_path):
    square = [[0, 0], [1, 0], [1, 1], [0, 1]]
    shifted = [[x + 2, y] for x, y in square]
    mirrored = [[x, -y] for x, y in square]
    manifest = tmp_path / "family.json"
    manifest.write_text(
        json.dumps(
            {
                "format_version": "anelkin-family/1",
                "points": ["a", "b", "c", "d"],
                "configs": [square, shifted, mirrored],
            }
        )
    )
    code, report, _ = run("groupoid", manifest)
    assert code == 0
    assert report["family"] == "points"
    assert report["n_morphisms"] == 5
    assert [o["members"] for o in report["orbits"]] == [[0, 1], [2]]
    assert [o["body_points"] for o in report["orbits"]] == [4, 4]
    assert all(check["passed"] for check in report["axioms"]["checks"])


def test_groupoid_document_family(run, plastic, tmp_path):
    other = tmp_path / "other.json"
    run("synth", "random", "--grid", "6", "--seed", "1", "--out", other)
    manifest = tmp_path / "docs.json"
    manifest.write_text(
        json.dumps({"format_version": "anelkin-family/1", "documents": [plastic.name, other.name, plastic.name]})
    )
    code, report, _ = run("groupoid", manifest)
    assert code == 0
    assert report["family"] == "bundles"
    assert [o["members"] for o in report["orbits"]] == [[0, 2], [1]]
    assert report["partition_agrees"] is True


def test_synth_quasicrystal_writes_csv(run, tmp_path):
    out = tmp_path / "fib.csv"
    code, report, _ = run("synth", "quasicrystal", "--extent", "10", "--out", out)
    assert code == 0
    rows = out.read_text().strip().splitlines()
    assert len(rows) == report["n_points"] > 0


def test_report_writes_svg(run, dislocation, tmp_path):
    out = tmp_path / "disl.svg"
    code, report, _ = run("report", dislocation, "--out", out, "--loop", "0,1,34,0", "--shift", "0.25,0.125")
    assert code == 0
    assert report["output"] == str(out)
    text = out.read_text()
    assert "<svg" in text
    assert report["max_cell_residual"] >= 0.0


def test_errors_exit_1_with_a_message(run, tmp_path):
    code, report, err = run("check", tmp_path / "missing.json")
    assert code == 1
    assert report is None
    assert "error: DocumentError" in err

    code, _, err = run("frobnicate")
    assert code == 1
    assert "error: UsageError" in err

    code, _, err = run("burgers", tmp_path / "missing.json", "--loop", "0,1,0", "--shift", "1")
    assert code == 1


def test_help_and_version_exit_0(run, capsys):
    code, _, _ = run("--version")
    assert code == 0
    code, _, _ = run("check", "--help")
    assert code == 0


def test_tolerance_override_reaches_the_header(run, plastic):
    code, report, _ = run("equiv", plastic, "--tol", "1e-6")
    assert code == 0
    assert report["header"]["config"]["tol_rel"] == 1e-6
    assert report["tol"] == 1e-6


def test_config_file_flag(plastic, tmp_path, capsys):
    path = tmp_path / "run.json"
    path.write_text(json.dumps({"tol_rel": 1e-7}))
    code = create_app().run(["equiv", str(plastic), "--config", str(path)])
    report = json.loads(capsys.readouterr().out)
    assert code == 0
    assert report["header"]["config"]["tol_rel"] == 1e-7
    assert RunConfig().tol_rel == 1e-9


@pytest.mark.parametrize("grid", ["8", "12", "16"])
def test_small_dislocation_grids_get_a_fitting_ring(run, tmp_path, grid):
    path = tmp_path / f"small{grid}.json"
    code, report, _ = run("synth", "dislocation", "--grid", grid, "--out", path)
    assert code == 0
    assert report["metadata"]["ring_loop"]
    code, report, _ = run("burgers", path)
    assert code == 0
    np.testing.assert_allclose(report["burgers"], [1.0, 0.0], atol=1e-9)


@pytest.mark.parametrize("verb", ["burgers", "report"])
def test_out_of_range_loop_vertex_exits_1(run, dislocation, verb):
    code, report, err = run(verb, dislocation, "--loop", "0,1,99999,0")
    assert code == 1
    assert report is None
    assert "error: InvalidSpec" in err
    assert "99999" in err
