import json
import os
import shutil
import subprocess
import sys

import pytest

from sokolskii import reference as ref
from sokolskii.cli import (
    EXIT_IO,
    EXIT_MISMATCH,
    EXIT_OK,
    GOLDEN_ENV,
    GOLDEN_FILES,
    PipelineConfig,
    build_report,
    golden_dir,
    main,
    render_reference_artifacts,
    run_pipeline,
)
from sokolskii.exactalg import Jet, Z_VARS
from sokolskii.poisson import PoissonSeries
from sokolskii.scaling import GradedSeries

TEXT_ARTIFACTS = GOLDEN_FILES + ("chetayev.json", "spectrum.json")


@pytest.fixture(scope="module")
def full_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("run")
    return out, run_pipeline(PipelineConfig(output_dir=out))


def test_golden_files_are_reference_values():
    rendered = render_reference_artifacts()
    assert set(rendered) == set(GOLDEN_FILES)
    for name, text in rendered.items():
        assert (golden_dir() / name).read_text() == text, name


def test_default_pipeline_passes(full_run):
    out, res = full_run
    assert res.exit_code == EXIT_OK, res.messages
    for name in TEXT_ARTIFACTS:
        assert (out / name).exists()
    assert json.loads((out / "chetayev.json").read_text())["passed"] is True


def test_pipeline_idempotent(full_run, tmp_path):
    out, _ = full_run
    res = run_pipeline(PipelineConfig(output_dir=tmp_path))
    assert res.exit_code == EXIT_OK
    for name in TEXT_ARTIFACTS:
        assert (tmp_path / name).read_bytes() == (out / name).read_bytes(), name


def test_normal_form_artifact(full_run):
    out, _ = full_run
    nf = GradedSeries.from_text((out / "normalform.txt").read_text(), PoissonSeries.from_text)
    assert str(nf.parts[2].coeff(0, 1, 2, 0)) == "-13/32"


def test_max_degree_two(tmp_path):
    res = run_pipeline(PipelineConfig(max_degree=2, output_dir=tmp_path))
    nf = GradedSeries.from_text((tmp_path / "normalform.txt").read_text(), PoissonSeries.from_text)
    assert sorted(nf.parts) == [0, 1]
    assert any("golden comparison skipped" in m for m in res.messages)
    assert any("stops at eps^1" in m for m in res.messages)
    cert = json.loads((tmp_path / "chetayev.json").read_text())["conditions"][3]["certificate"]
    assert [t["eps_power"] for t in cert["terms"]] == [1]


def test_beyond_reference_order_flagged(tmp_path):
    res = run_pipeline(PipelineConfig(eps_order=3, output_dir=tmp_path))
    assert any("beyond reference order" in m for m in res.messages)


@pytest.mark.skipif(hasattr(os, "geteuid") and os.geteuid() == 0, reason="root ignores permissions")
def test_unwritable_dir_permissions(tmp_path):
    ro = tmp_path / "ro"
    ro.mkdir()
    ro.chmod(0o500)
    try:
        assert run_pipeline(PipelineConfig(output_dir=ro / "x")).exit_code == EXIT_IO
    finally:
        ro.chmod(0o700)


def test_unwritable_dir(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("")
    res = run_pipeline(PipelineConfig(output_dir=blocker / "sub"))
    assert res.exit_code == EXIT_IO
    assert res.messages[0].startswith("[io]")


def test_golden_mismatch_is_stage_tagged(tmp_path, monkeypatch):
    gdir = tmp_path / "golden"
    shutil.copytree(golden_dir(), gdir)
    text = (gdir / "normalform.txt").read_text().replace("-13/32", "-3/8")
    (gdir / "normalform.txt").write_text(text)
    monkeypatch.setenv(GOLDEN_ENV, str(gdir))
    res = run_pipeline(PipelineConfig(output_dir=tmp_path / "out"))
    assert res.exit_code == EXIT_MISMATCH
    assert any(m.startswith("[normalform] normalform.txt differs") and "-13/32" in m for m in res.messages)
    assert main(["--output-dir", str(tmp_path / "out2"), "pipeline"]) == EXIT_MISMATCH


def test_missing_golden_file(tmp_path, monkeypatch):
    gdir = tmp_path / "golden"
    shutil.copytree(golden_dir(), gdir)
    (gdir / "eom_z.txt").unlink()
    monkeypatch.setenv(GOLDEN_ENV, str(gdir))
    res = run_pipeline(PipelineConfig(output_dir=tmp_path / "out"))
    assert res.exit_code == EXIT_MISMATCH and any(m.startswith("[certify]") for m in res.messages)


def test_update_golden(tmp_path, monkeypatch):
    gdir = tmp_path / "golden"
    monkeypatch.setenv(GOLDEN_ENV, str(gdir))
    res = run_pipeline(PipelineConfig(output_dir=tmp_path / "out"), update_golden=True)
    assert res.exit_code == EXIT_OK
    assert sorted(p.name for p in gdir.iterdir()) == sorted(GOLDEN_FILES)
    assert run_pipeline(PipelineConfig(output_dir=tmp_path / "again")).exit_code == EXIT_OK


# -- report ----------------------------------------------------------------------

def test_report_without_simulation(full_run, capsys):
    out, _ = full_run
    rep = build_report(out)
    assert rep["simulation"] == "not run" and rep["missing"] == []
    assert rep["chetayev"] == "PASS"
    assert main(["--output-dir", str(out), "report"]) == 0
    text = capsys.readouterr().out
    assert "-13/32" in text and "not run" in text


def test_report_json_schema(full_run, capsys):
    out, _ = full_run
    assert main(["report", "--output-dir", str(out), "--format", "json"]) == 0
    data = json.loads(capsys.readouterr().out)
    assert data["schema_version"] == 1
    assert data["theta_r2_coefficient"] == "-13/32"
    assert len(data["eigenvalues"]) == 3


def test_report_missing_artifacts(tmp_path):
    rep = build_report(tmp_path)
    assert set(rep["missing"]) == {"spectrum.json", "normalform.txt", "chetayev.json"}
    assert rep["eigenvalues"] is None and rep["simulation"] == "not run"


def test_pipeline_with_simulation(tmp_path):
    cfg = PipelineConfig(
        output_dir=tmp_path,
        simulate={"eps": 0.1, "initial_state": [0, 1e-6, 1e-6, 0], "t_end": 5.0, "record_every": 100},
    )
    assert run_pipeline(cfg).exit_code == EXIT_OK
    lines = (tmp_path / "trajectory.csv").read_text().splitlines()
    assert lines[0] == "t,z1,z2,z3,z4,H,V,Theta,in_omega" and len(lines) == 52
    assert (tmp_path / "trajectory.gp").exists()
    rep = build_report(tmp_path)
    assert rep["simulation"]["growth_z34"] > 1


# -- subcommands -------------------------------------------------------------------

def test_derive(capsys):
    assert main(["derive"]) == 0
    h = Jet.from_text(capsys.readouterr().out)
    assert h.max_degree == 4 and h.homogeneous_part(1).is_zero()


def test_derive_physical_json(capsys):
    assert main(["--format", "json", "derive", "--physical", "2", "1/2", "981/100", "--equilibrium", "upright"]) == 0
    assert json.loads(capsys.readouterr().out)["hamiltonian"][0].startswith("# ")


def test_transform(capsys):
    assert main(["transform"]) == 0
    hz = Jet.from_text(capsys.readouterr().out)
    assert hz == ref.quadratic_z() + ref.quartic_z()


def test_transform_rejects_non_symplectic(tmp_path, capsys):
    m = tmp_path / "m.json"
    m.write_text(json.dumps([["2" if i == j else "0" for j in range(4)] for i in range(4)]))
    assert main(["transform", "--matrix", str(m)]) == 2


def test_scale(capsys):
    assert main(["scale"]) == 0
    g = GradedSeries.from_text(capsys.readouterr().out, lambda t: Jet.from_text(t, variables=Z_VARS))
    assert g == ref.scaled_z()


def test_normalform_conventions(tmp_path, capsys):
    assert main(["normalform", "--triangle-report", str(tmp_path / "tri.json")]) == 0
    out = capsys.readouterr().out
    assert "-13/32" in out
    tri = json.loads((tmp_path / "tri.json").read_text())
    assert "H_0^2" in tri["cells"] and len(tri["generators"]) == 2
    assert main(["normalform", "--convention", "derived", "--format", "json"]) == 0
    data = json.loads(capsys.readouterr().out)
    assert data["normal_form"]["eps^1"] == (ref.normal_form_hamiltonian().parts[1] / 2).to_text().splitlines()


def test_normalform_from_input(tmp_path, capsys):
    p = tmp_path / "h.txt"
    p.write_text(ref.sokolskii_hamiltonian().to_text())
    assert main(["normalform", "--input", str(p)]) == 0
    assert "-13/32" in capsys.readouterr().out


def test_certify(capsys):
    assert main(["certify"]) == 0
    data = json.loads(capsys.readouterr().out)
    assert data["passed"] and data["alpha"] == "13/32"


def test_simulate(tmp_path, capsys):
    cfg = tmp_path / "sim.json"
    cfg.write_text(json.dumps({"eps": 0.1, "initial_state": [0, 1e-6, 1e-6, 0], "t_end": 2.0}))
    args = ["--format", "json", "simulate", "--sim-config", str(cfg)]
    assert main(args + ["--csv", str(tmp_path / "t.csv"), "--gnuplot", str(tmp_path / "t.gp")]) == 0
    data = json.loads(capsys.readouterr().out)
    assert data["samples"] == 2001 and data["h_drift"] < 1e-12
    assert (tmp_path / "t.gp").exists()


def test_bad_config(tmp_path):
    p = tmp_path / "c.json"
    p.write_text(json.dumps({"format": "xml"}))
    assert main(["--config", str(p), "derive"]) == 2


def test_console_entry_point(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "sokolskii", "--format", "json", "pipeline", "--output-dir", str(tmp_path)],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0, proc.stderr
    assert json.loads(proc.stdout)["chetayev"] == "PASS"


def test_missing_input_is_io_error(tmp_path, capsys):
    assert main(["transform", "--input", str(tmp_path / "none.txt")]) == EXIT_IO
    assert main(["simulate", "--sim-config", str(tmp_path / "none.json")]) == EXIT_IO
    assert "error:" in capsys.readouterr().err


def test_garbled_input_is_rejected(tmp_path):
    p = tmp_path / "h.txt"
    p.write_text("not a polynomial\n")
    assert main(["transform", "--input", str(p)]) == 2
