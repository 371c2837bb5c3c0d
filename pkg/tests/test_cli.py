import csv
import io
import json

import pytest

from h6magic.cli import main


def _run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_codes_verify_passes(capsys):
    code, out, _ = _run(capsys, "codes-verify")
    assert code == 0
    assert json.loads(out)["passed"] is True


def test_codes_verify_mutated_file_fails(tmp_path, capsys):
    bad = [{
        "name": "h6-mutated", "d": 2,
        "stabilizers": ["XXXXII", "IIXXXX", "ZZZZII", "IIZZZY"],
        "logical_x": ["XIXIXI", "IXIXIX"], "logical_z": ["ZIZIZI", "IZIZIZ"],
    }]  # fmt: skip
    path = tmp_path / "codes.json"
    path.write_text(json.dumps(bad))
    code, out, err = _run(capsys, "codes-verify", "--codes", str(path))
    assert code == 1
    assert "FAIL" in err
    assert json.loads(out)["passed"] is False


def test_usage_errors(capsys, tmp_path):
    assert _run(capsys, "run", "level7")[0] == 2
    assert _run(capsys, "run", "level1", "--p", "2")[0] == 2
    assert _run(capsys, "fit", str(tmp_path / "missing.csv"))[0] == 2
    assert _run(capsys, "run", "ramsey", "--L", "1,2", "--shots", "10")[0] == 2


def test_run_is_byte_identical(tmp_path, capsys):
    outs = []
    for k in range(2):
        path = tmp_path / f"r{k}.json"
        code, stdout, _ = _run(capsys, "run", "level1", "--p", "1e-2", "--shots", "3000", "--seed", "4", "--out", str(path))
        assert code == 0 and "accept" in stdout
        outs.append(path.read_bytes())
        manifest = json.loads((tmp_path / f"r{k}.json.manifest.json").read_text())
        assert manifest["seed"] == 4 and manifest["command"] == "run"
    assert outs[0] == outs[1]


def test_seed_from_environment(monkeypatch, capsys):
    monkeypatch.setenv("H6MAGIC_SEED", "11")
    _, a, _ = _run(capsys, "run", "level1", "--p", "1e-2", "--shots", "2000")
    _, b, _ = _run(capsys, "run", "level1", "--p", "1e-2", "--shots", "2000", "--seed", "11")
    assert json.loads(a) == json.loads(b)


def test_config_file_and_override(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("p = 0.01\nshots = 1500\nseed = 2\n")
    _, a, _ = _run(capsys, "run", "level1", "--config", str(cfg))
    _, b, _ = _run(capsys, "run", "level1", "--config", str(cfg), "--shots", "1000")
    assert json.loads(a)["shots"] == 1500
    assert json.loads(b)["shots"] == 1000


def test_ramsey_csv_feeds_fit(tmp_path, capsys):
    table = tmp_path / "ramsey.csv"
    code, _, _ = _run(capsys, "run", "ramsey", "--p", "5e-3", "--L", "0,4,8", "--shots", "20000", "--format", "csv", "--out", str(table))
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(table.read_text())))
    assert [r["L"] for r in rows] == ["0", "4", "8"]
    code, out, _ = _run(capsys, "fit", str(table), "--no-mcmc")
    assert code == 0
    assert json.loads(out)["eps"] > 0


def test_sweep_then_fit(tmp_path, capsys):
    path = tmp_path / "sweep.csv"
    code, _, _ = _run(capsys, "sweep", "level1", "--p-grid", "2e-2,1e-2", "--shots-per-point", "20000", "--out", str(path))
    assert code == 0
    code, out, _ = _run(capsys, "fit", str(path))
    assert code == 0
    assert "b" in json.loads(out)


def test_check_ft_reports_no_logical(capsys):
    code, out, _ = _run(capsys, "check-ft", "ft-prep-00")
    assert code == 0
    assert json.loads(out)["summary"]["LOGICAL"] == 0


def test_check_ft_nonft_switch_fails(capsys):
    code, out, _ = _run(capsys, "check-ft", "code-switch-nonft")
    assert code == 1
    assert json.loads(out)["summary"]["LOGICAL"] > 0


def test_dense_verify_and_build(capsys):
    code, out, _ = _run(capsys, "dense-verify")
    assert code == 0 and all(c["passed"] for c in json.loads(out))
    code, out, _ = _run(capsys, "build", "encoder", "--option", "readout_basis=Z")
    assert code == 0 and "CX 0 4" in out


@pytest.mark.parametrize("cmd", [["codes-verify"], ["dense-verify"]])
def test_csv_format(capsys, cmd):
    code, out, _ = _run(capsys, *cmd, "--format", "csv")
    assert code == 0
    assert out.splitlines()[0].count(",") >= 2
