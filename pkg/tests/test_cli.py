import csv
import io
import json
import subprocess
import sys

import pytest

from galspin.cli import PHASE_COLUMNS, run


def _run(argv, capsys):
    code = run(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_bound_example(capsys):
    code, out, _ = _run(["bound", "--m", "1", "--lambda", "133.5373", "--two-s", "1", "--ff", "sharp", "--cutoff", "1"], capsys)
    assert code == 0
    data = json.loads(out)
    assert set(data) == {"omega", "kappa", "residual"}
    assert data["omega"] == pytest.approx(-0.25, abs=1e-5)
    assert data["residual"] <= 1e-12


def test_phase_csv_free_case(capsys):
    code, out, _ = _run(["phase", "--lambda", "0", "--kmin", "0.1", "--kmax", "0.9", "--nk", "5"], capsys)
    assert code == 0
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == PHASE_COLUMNS == ["k", "delta1_rad", "sin2_delta1", "k3_cot_delta1", "unitarity_residual"]
    assert len(rows) == 6
    assert all(float(r[1]) == 0.0 for r in rows[1:])


def test_phase_csv_full_precision(capsys):
    _, out, _ = _run(["phase", "--lambda", "140", "--kmin", "0.1", "--kmax", "0.9", "--nk", "3", "--ff", "gauss"], capsys)
    row = list(csv.reader(io.StringIO(out)))[2]
    assert float(row[0]) == 0.5
    # 17 significant digits round-trip the double exactly
    assert float(f"{float(row[1]):.17g}") == float(row[1])
    assert len(row[1].lstrip("-").replace(".", "").lstrip("0").split("e")[0]) >= 15


def test_erfit_keys(capsys):
    code, out, _ = _run(["erfit", "--lambda", "133.5373"], capsys)
    data = json.loads(out)
    assert code == 0
    assert set(data) == {"inv_a_fit", "r0_fit", "inv_a_closed", "r0_closed", "fit_residual"}


def test_oracle_all_default_config(capsys):
    code, out, _ = _run(["oracle", "all"], capsys)
    reports = json.loads(out)
    assert code == 0
    assert all(r["abs_diff"] <= r["tolerance"] for r in reports)


def test_oracle_single_targets(capsys):
    for target in ("ls", "grid", "exchange"):
        code, out, _ = _run(["oracle", target, "--ff", "rational", "--grid-n", "300"], capsys)
        assert code == 0
        assert json.loads(out)["passed"]


def test_spinor_check_to_file(tmp_path, capsys):
    path = tmp_path / "spin.json"
    assert run(["spinor-check", "--max-two-s", "3", "--seed", "4", "--out", str(path)]) == 0
    data = json.loads(path.read_text())
    assert [s["two_s"] for s in data["spins"]] == [1, 2, 3]


def test_determinism(tmp_path):
    paths = [tmp_path / f"o{i}.csv" for i in range(2)]
    for p in paths:
        assert run(["phase", "--lambda", "150", "--ff", "rational", "--kmin", "0.05", "--kmax", "2", "--nk", "20", "--out", str(p)]) == 0
    assert paths[0].read_bytes() == paths[1].read_bytes()


def test_dump_config_round_trip(tmp_path):
    cfg, a, b = tmp_path / "c.json", tmp_path / "a.json", tmp_path / "b.json"
    assert run(["erfit", "--lambda", "300", "--ff", "gauss", "--kmin", "0.02", "--kmax", "0.2", "--nk", "9",
                "--dump-config", str(cfg), "--out", str(a)]) == 0
    assert run(["erfit", "--config", str(cfg), "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    assert "out" not in json.loads(cfg.read_text())


def test_flags_override_config(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"lambda": 1.0, "ff": "sharp"}))
    code, out, _ = _run(["bound", "--config", str(cfg), "--lambda", "133.5373"], capsys)
    assert code == 0 and json.loads(out)["kappa"] == pytest.approx(0.5, abs=1e-5)


@pytest.mark.parametrize(
    "argv, needle",
    [
        (["bound", "--lambda", "200", "--bogus", "1"], "--bogus"),
        (["bound"], "lambda"),
        (["bound", "--lambda", "200", "--m", "-1"], "'m'"),
        (["bound", "--lambda", "200", "--cutoff", "0"], "'cutoff'"),
        (["phase", "--lambda", "200", "--kmin", "0.5", "--kmax", "0.1"], "'kmax'"),
        (["phase", "--lambda", "200", "--kmin", "0.1", "--kmax", "1.5"], "'kmax'"),
        (["bound", "--lambda", "200", "--two-s", "0"], "'two_s'"),
        (["erfit", "--lambda", "200", "--kmin", "0.01", "--kmax", "0.015"], "factor 2"),
        (["nosuch"], "invalid choice"),
    ],
)
def test_validation_errors_exit_1(argv, needle, capsys):
    code, _, err = _run(argv, capsys)
    assert code == 1
    assert needle in err


def test_unknown_config_key_is_named(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"lamda": 3}))
    code, _, err = _run(["bound", "--config", str(cfg)], capsys)
    assert code == 1 and "'lamda'" in err


def test_no_bound_state_exit_2(capsys):
    code, _, err = _run(["bound", "--lambda", "10"], capsys)
    assert code == 2 and "no bound state" in err


def test_dump_integrals(capsys):
    code, out, _ = _run(["bound", "--lambda", "133.5373", "--dump-integrals"], capsys)
    data = json.loads(out)
    assert code == 0 and data["integrals"]["kernel"]["converged"]


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "galspin", "bound", "--lambda", "133.5373"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["omega"] == pytest.approx(-0.25, abs=1e-5)


def test_all_report(capsys):
    code, out, _ = _run(["all", "--lambda", "133.5373"], capsys)
    data = json.loads(out)
    assert code == 0
    assert set(data) == {"spinor_check", "bound", "phase", "erfit", "oracle"}
    assert len(data["phase"]) == 50
