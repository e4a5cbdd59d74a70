import csv
import json

import pytest

from mac_sim import cli
from mac_sim.errors import NonConvergence
from mac_sim.oracle import check

ENSEMBLE = """
kind = ensemble
seed = 5
[model]
L = 24
h = 1.5
[ensemble]
protocol = born
p = 0, 0.3, 0.6
samples = 8
[witness]
ee = 4, 8
negativity = 1:6
qfi = true
[fit]
decay_length = true
d_min = 1
"""


def _write(tmp_path, text, name="run.cfg"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def _rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_ensemble_outputs(tmp_path):
    cfg = _write(tmp_path, ENSEMBLE)
    prefix = tmp_path / "out" / "ens"
    assert cli.main(["ensemble", "--config", cfg, "--set", f"output={prefix}"]) == 0
    rows = _rows(f"{prefix}.csv")
    assert list(rows[0]) == cli.RESULT_HEADER
    assert len(rows) == 3 * (2 + 6 + 1)
    assert {r["witness"] for r in rows} == {"ee", "negativity", "qfi"}
    assert rows[0]["gamma"] == ""
    meta = json.loads(open(f"{prefix}.json").read())
    assert meta["seed"] == 5 and meta["config"]["L"] == 24
    assert meta["kernel_backend"] in ("cython", "python")
    fits = _rows(f"{prefix}_fits.csv")
    assert fits and fits[0]["quantity"] == "xi_negativity"


def test_zero_density_rows_equal_direct_values(tmp_path):
    cfg = _write(tmp_path, ENSEMBLE)
    prefix = tmp_path / "ens"
    cli.main(["ensemble", "--config", cfg, "--set", f"output={prefix}", "--set", "p=0"])
    gs = _write(tmp_path, "seed = 5\nL = 24\nh = 1.5\nwitness.ee = 4, 8\n", "gs.cfg")
    cli.main(["ground-state", "--config", gs, "--set", f"output={tmp_path / 'gs'}"])
    ens = {(r["witness"], r["param"]): r for r in _rows(f"{prefix}.csv")}
    for r in _rows(f"{tmp_path / 'gs'}.csv"):
        if r["witness"] == "ee" and r["param"] in ("4", "8"):
            # the ensemble averages over 8 interval positions of a translation-invariant state
            assert float(ens[("ee", r["param"])]["mean"]) == pytest.approx(float(r["mean"]), abs=1e-12)
            assert float(ens[("ee", r["param"])]["stderr"]) == 0.0


def test_results_byte_identical_across_workers(tmp_path):
    cfg = _write(tmp_path, ENSEMBLE)
    outs = []
    for w in (1, 2, 3):
        prefix = tmp_path / f"w{w}"
        assert cli.main(["ensemble", "--config", cfg, "--workers", str(w), "--set", f"output={prefix}"]) == 0
        outs.append(open(f"{prefix}.csv", "rb").read())
    assert outs[0] == outs[1] == outs[2]


def test_toy_model_outputs(tmp_path):
    cfg = _write(tmp_path, "seed = 2\nL = 256\ntoy.xi0 = 2\np = 0.1, 0.3, 0.5\nsamples = 100\n")
    prefix = tmp_path / "toy"
    assert cli.main(["toy-model", "--config", cfg, "--set", f"output={prefix}"]) == 0
    rows = _rows(f"{prefix}.csv")
    assert len(rows) == 3 * 128
    fits = _rows(f"{prefix}_fits.csv")
    xi = [float(f["estimate"]) for f in fits]
    assert [f["quantity"] for f in fits] == ["xi_toy"] * 3
    assert xi[0] < xi[1] < xi[2]


def test_ground_state_outputs(tmp_path):
    cfg = _write(tmp_path, "seed = 1\nL = 128\nh = 1.0\nwitness.negativity = 1\nfit.central_charge = true\n")
    prefix = tmp_path / "gs"
    assert cli.main(["ground-state", "--config", cfg, "--set", f"output={prefix}"]) == 0
    rows = _rows(f"{prefix}.csv")
    assert {r["witness"] for r in rows} == {"energy", "sz", "ee", "negativity"}
    assert all(r["protocol"] == "none" for r in rows)
    fits = _rows(f"{prefix}_fits.csv")
    assert float(fits[0]["estimate"]) == pytest.approx(0.5, abs=0.03)


def test_oracle_check_full_suite(tmp_path, capsys):
    cfg = _write(tmp_path, "seed = 0\noracle.L = 8\n")
    prefix = tmp_path / "orc"
    assert cli.main(["oracle-check", "--config", cfg, "--set", f"output={prefix}"]) == 0
    out = capsys.readouterr().out
    assert "oracle checks passed" in out
    rows = _rows(f"{prefix}_oracle.csv")
    assert rows and all(r["status"] == "pass" for r in rows)


def test_oracle_failure_exit_code(tmp_path, monkeypatch):
    monkeypatch.setattr(check, "run_oracle_checks",
                        lambda L, seed: [check.CheckResult("forced", 1.0, 1e-8)])
    cfg = _write(tmp_path, f"seed = 0\noracle.L = 4\noutput = {tmp_path / 'o'}\n")
    assert cli.main(["oracle-check", "--config", cfg]) == cli.EXIT_ORACLE


def test_config_errors_exit_1(tmp_path, capsys):
    cfg = _write(tmp_path, ENSEMBLE)
    assert cli.main(["ensemble", "--config", str(tmp_path / "missing.cfg")]) == 1
    assert cli.main(["ensemble", "--config", cfg, "--set", "p=1.2"]) == 1
    assert cli.main(["ensemble", "--config", cfg, "--set", "protcol=up"]) == 1
    assert cli.main(["ensemble", "--config", cfg, "--workers", "0"]) == 1
    assert "protcol" in capsys.readouterr().err


def test_runtime_error_exit_2_leaves_no_files(tmp_path, monkeypatch):
    def boom(cfg, workers):
        raise NonConvergence("synthetic failure")

    monkeypatch.setitem(cli.EXECUTORS, "ensemble", boom)
    prefix = tmp_path / "bad"
    cfg = _write(tmp_path, ENSEMBLE)
    assert cli.main(["ensemble", "--config", cfg, "--set", f"output={prefix}"]) == 2
    assert not list(tmp_path.glob("bad*"))


def test_partial_outputs_removed_on_write_failure(tmp_path):
    good = str(tmp_path / "a.csv")
    blocked = tmp_path / "blocker"
    blocked.write_text("")
    with pytest.raises(OSError):
        cli._write_outputs({good: "x\n", str(blocked / "b.csv"): "y\n"})
    assert not (tmp_path / "a.csv").exists()
