import json
from pathlib import Path

import numpy as np
import pytest

from polekit.cli import main, run
from polekit.errors import SceneError
from polekit.scene import parse_scene

SCENES = Path(__file__).parent.parent / "scenes"

MINIMAL = """
{
  "charts": {"id": {"registry": "identity"}},
  "worldlines": {"rest": {"components": ["tau", "0", "0", "0"],
                           "interval": [0.0, 2.0]}},
  "multipoles": {"charge": {"charge": 1.0}},
  "jobs": [
    {"command": "charge", "multipole": "charge", "worldline": "rest",
     "choices": 2, "seed": 1}
  ]
}
"""


def test_minimal_scene_parses_and_runs(tmp_path):
    scene = parse_scene(MINIMAL)
    results, code = run(scene, out_dir=tmp_path)
    assert code == 0
    assert (tmp_path / "report.txt").exists()
    assert (tmp_path / "report.json").exists()
    payload = json.loads((tmp_path / "report.json").read_text())
    assert payload["jobs"][0]["passed"]


def test_json_error_carries_position():
    with pytest.raises(SceneError) as err:
        parse_scene("{ not json }")
    assert "line" in err.value.problems[0]


def test_unknown_chart_reported():
    bad = json.loads(MINIMAL)
    bad["charts"]["oops"] = {"registry": "wormhole"}
    with pytest.raises(SceneError) as err:
        parse_scene(json.dumps(bad))
    assert any("wormhole" in p for p in err.value.problems)


def test_malformed_expression_reported():
    bad = json.loads(MINIMAL)
    bad["worldlines"]["rest"]["components"][1] = "tau +"
    with pytest.raises(SceneError) as err:
        parse_scene(json.dumps(bad))
    assert any("column" in p for p in err.value.problems)


def test_symmetry_violation_reported_with_index():
    bad = json.loads(MINIMAL)
    bad["multipoles"]["lop"] = {
        "quadrupole": {"121": "1", "112": "0.5", "211": "-2"}
    }
    bad["jobs"].append({
        "command": "classify", "multipole": "lop", "worldline": "rest",
    })
    with pytest.raises(SceneError) as err:
        parse_scene(json.dumps(bad))
    joined = " ".join(err.value.problems)
    assert "gamma" in joined and "tau" in joined


def test_unresolved_job_reference():
    bad = json.loads(MINIMAL)
    bad["jobs"][0]["multipole"] = "ghost"
    with pytest.raises(SceneError) as err:
        parse_scene(json.dumps(bad))
    assert any("ghost" in p for p in err.value.problems)


def test_scene_round_trip_structural():
    text = (SCENES / "worked_example.scene").read_text()
    scene = parse_scene(text)
    again = parse_scene(scene.to_text())
    assert scene.raw == again.raw
    # expression trees compare structurally
    for name in scene.worldlines:
        assert scene.worldlines[name].components == \
            again.worldlines[name].components
    for name in scene.multipoles:
        a = scene.multipoles[name]
        b = again.multipoles[name]
        assert a.keys() == b.keys()


def test_worked_example_scene_values(tmp_path):
    text = (SCENES / "worked_example.scene").read_text()
    scene = parse_scene(text)
    results, code = run(scene, command="transform", out_dir=tmp_path)
    assert code == 0
    payload = json.loads((tmp_path / "report.json").read_text())
    data = payload["jobs"][0]["data"]
    fit = data["P_fits"]["12"]
    assert fit["slope"] == pytest.approx(1.0, abs=1e-9)
    assert fit["intercept"] == pytest.approx(0.0, abs=1e-9)
    assert data["dipole_part_mid"]["12"] == pytest.approx(1.0, abs=1e-9)
    # the growing component samples follow kappa * tau + kappa0
    taus = data["sample_taus"]
    comp = data["component_samples"]["120"]
    assert np.allclose(comp, taus, atol=1e-9)
    assert np.allclose(data["component_samples"]["012"], 0.0, atol=1e-12)


def test_kappa0_flag_offsets_intercept(tmp_path):
    scene_path = SCENES / "worked_example.scene"
    code = main([
        "run", str(scene_path), "--command", "transform",
        "--out-dir", str(tmp_path), "--kappa0", "12=0.5",
    ])
    assert code == 0
    payload = json.loads((tmp_path / "report.json").read_text())
    fit = payload["jobs"][0]["data"]["P_fits"]["12"]
    assert fit["intercept"] == pytest.approx(0.5, abs=1e-9)
    assert fit["slope"] == pytest.approx(1.0, abs=1e-9)


def test_reports_byte_identical(tmp_path):
    text = (SCENES / "worked_example.scene").read_text()
    scene1 = parse_scene(text)
    scene2 = parse_scene(text)
    run(scene1, command="transform", out_dir=tmp_path / "a")
    run(scene2, command="transform", out_dir=tmp_path / "b")
    for name in ("report.txt", "report.json"):
        assert (tmp_path / "a" / name).read_bytes() == \
            (tmp_path / "b" / name).read_bytes()


def test_exit_codes(tmp_path):
    # parse error -> 2
    bad = tmp_path / "bad.scene"
    bad.write_text("{ nope }")
    assert main(["run", str(bad), "--out-dir", str(tmp_path / "o")]) == 2
    assert main(["validate", str(bad)]) == 2
    # missing file -> 2
    assert main(["run", str(tmp_path / "missing.scene")]) == 2
    # failing check -> 1: declared charge disagrees with extraction
    failing = json.loads(MINIMAL)
    failing["jobs"][0]["expect"] = 99.0
    f = tmp_path / "fail.scene"
    f.write_text(json.dumps(failing))
    assert main(["run", str(f), "--out-dir", str(tmp_path / "o2")]) == 1
    # all-pass -> 0
    g = tmp_path / "ok.scene"
    g.write_text(MINIMAL)
    assert main(["run", str(g), "--out-dir", str(tmp_path / "o3")]) == 0


def test_validate_verb_ok():
    assert main(["validate", str(SCENES / "worked_example.scene")]) == 0


def test_potentials_job_writes_csv(tmp_path):
    doc = json.loads(MINIMAL)
    doc["jobs"] = [{
        "command": "potentials", "name": "mono",
        "source": {"kind": "monopole", "moments": 2.0},
        "directions": [[0.0, 0.0, 1.0], [1.0, 1.0, 1.0]],
        "samples": 20,
    }]
    scene = parse_scene(json.dumps(doc))
    results, code = run(scene, out_dir=tmp_path)
    assert code == 0
    csv = (tmp_path / "mono_ray0.csv").read_text().splitlines()
    assert csv[0] == "r,value"
    assert len(csv) == 21
    r0, v0 = map(float, csv[1].split(","))
    assert v0 == pytest.approx(2.0 / (4 * np.pi * r0), rel=1e-12)
    exps = json.loads((tmp_path / "report.json").read_text())[
        "jobs"][0]["data"]["exponents"]
    assert all(abs(e + 1.0) < 0.01 for e in exps)


def test_parallel_jobs_match_serial(tmp_path):
    doc = json.loads(MINIMAL)
    doc["jobs"] = [
        {"command": "charge", "multipole": "charge", "worldline": "rest",
         "choices": 2, "seed": 1, "name": "a"},
        {"command": "classify", "multipole": "charge", "worldline": "rest",
         "seed": 2, "name": "b", "orders": [0]},
    ]
    s1 = parse_scene(json.dumps(doc))
    s2 = parse_scene(json.dumps(doc))
    run(s1, out_dir=tmp_path / "serial")
    run(s2, out_dir=tmp_path / "parallel", parallel=True)
    assert (tmp_path / "serial" / "report.json").read_bytes() == \
        (tmp_path / "parallel" / "report.json").read_bytes()
