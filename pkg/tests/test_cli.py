import csv
import json

import numpy as np
import pytest

from syksd.cli import EXIT_CONFIG, EXIT_NO_SOLUTION, EXIT_OK, load_config, load_solution, main, resolve_workers, ConfigError

FAST = ["--v=-4", "--gamma", "4", "--seeds-per-point", "2", "--continuation", "NONE"]


def run(tmp_path, *args, name="out"):
    out = tmp_path / name
    return main([*args, "--output-dir", str(out)]), out


def read_csv(path):
    with open(path) as fh:
        return list(csv.DictReader(fh))


def test_malformed_json(tmp_path, capsys):
    cfg = tmp_path / "bad.json"
    cfg.write_text('{"v": 1.0,\n "gamma": }')
    code, out = run(tmp_path, "solve", "--config", str(cfg))
    assert code == EXIT_CONFIG and not out.exists()
    assert "line 2" in capsys.readouterr().err


@pytest.mark.parametrize(
    "config,message",
    [
        ({"q": 3}, "even"),
        ({"v_values": []}, "v_values"),
        ({"gamma": "big"}, "gamma"),
        ({"colour": 1}, "colour"),
        ({"enforcement_set": [["SPIN"]]}, "SPIN"),
    ],
)
def test_config_errors(tmp_path, capsys, config, message):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps(config))
    code, out = run(tmp_path, "solve", "--config", str(cfg))
    assert code == EXIT_CONFIG and not out.exists()
    assert message in capsys.readouterr().err


def test_flags_override_config(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"v": 2.0, "J": 3.0}))
    c = load_config(str(cfg), {"v": -1.0, "J": None})
    assert c.v == -1.0 and c.J == 3.0


def test_workers_resolution(monkeypatch):
    monkeypatch.setenv("SYK_SD_WORKERS", "3")
    assert resolve_workers(None) == 3
    assert resolve_workers(2) == 2
    monkeypatch.setenv("SYK_SD_WORKERS", "many")
    with pytest.raises(ConfigError):
        resolve_workers(None)
    monkeypatch.delenv("SYK_SD_WORKERS")
    assert resolve_workers(None) >= 1


def test_free_rejects_nonpositive_v(tmp_path):
    code, out = run(tmp_path, "free", "--v", "-1")
    assert code == EXIT_CONFIG and not out.exists()


def test_free_outputs(tmp_path):
    code, out = run(tmp_path, "free", "--v", "1", "--gamma", "0", "--n-points", "256")
    assert code == EXIT_OK
    rows = read_csv(out / "free_green.csv")
    assert len(rows) == 256
    assert list(rows[0]) == ["t", "re_pp", "im_pp", "re_pm", "im_pm", "re_mp", "im_mp", "re_mm", "im_mm"]
    for r in rows:
        assert float(r["re_pp"]) == 0 and float(r["re_mm"]) == 0
        assert float(r["re_pm"]) == 0 and float(r["im_pm"]) == 0
    assert any(float(r["im_pp"]) != 0 for r in rows)
    cfg = json.loads((out / "config.json").read_text())
    assert cfg["n_points"] == 256 and cfg["seeds_per_point"] == 8


def test_free_minus_trajectory_ignores_gamma(tmp_path):
    tables = []
    for g in (0, 2, 5):
        code, out = run(tmp_path, "free", "--v", "1", "--gamma", str(g), "--n-points", "256", name=f"g{g}")
        assert code == EXIT_OK
        rows = read_csv(out / "heisenberg.csv")
        tables.append([(r["re_Xm"], r["im_Xm"]) for r in rows])
    assert tables[0] == tables[1] == tables[2]


@pytest.fixture(scope="module")
def solved(tmp_path_factory):
    out = tmp_path_factory.mktemp("solve") / "run"
    code = main(["solve", *FAST, "--output-dir", str(out)])
    return code, out


def test_solve_writes_records(solved):
    code, out = solved
    assert code == EXIT_OK
    metas = sorted(out.glob("solution-*.json"))
    assert metas and len(metas) == len(list(out.glob("solution-*.csv")))
    meta = json.loads(metas[0].read_text())
    for key in ("params", "label", "nu_kms", "nu_conj", "action", "stationarity", "fits"):
        assert key in meta
    assert meta["label"] == "KC"
    assert (out / "config.json").exists()


def test_round_trip(solved):
    _, out = solved
    for path in sorted(out.glob("solution-*.json")):
        rec, meta = load_solution(path)
        assert rec.label.label.value == meta["label"]
        assert abs(rec.label.nu_kms - meta["nu_kms"]) <= 1e-9
        a = meta["action"]["density"]
        assert abs(rec.action.density - complex(*a)) <= 1e-9
        assert abs(rec.stationarity - meta["stationarity"]) <= 1e-9
        for fit, stored in zip(rec.fits, meta["fits"]):
            assert (fit is None) == (stored is None)
            if fit is not None:
                assert abs(fit.decay_rate - stored["decay_rate"]) <= 1e-9


def test_reproducible_bytes(solved, tmp_path):
    _, first = solved
    code, second = run(tmp_path, "solve", *FAST)
    assert code == EXIT_OK
    for path in sorted(first.glob("solution-*.csv")):
        assert path.read_bytes() == (second / path.name).read_bytes()


def test_fit_verb(solved, tmp_path):
    _, out = solved
    code, fit_out = run(tmp_path, "fit", str(out))
    assert code == EXIT_OK
    rows = read_csv(fit_out / "fits.csv")
    assert len(rows) == 4 * len(list(out.glob("solution-*.json")))
    code, _ = run(tmp_path, "fit", str(tmp_path / "empty"), name="x")
    assert code == EXIT_NO_SOLUTION


def test_no_solution_exit(tmp_path):
    code, out = run(tmp_path, "solve", *FAST, "--max-iterations", "2")
    assert code == EXIT_NO_SOLUTION


def test_phase_single_point(tmp_path):
    code, out = run(
        tmp_path, "phase", "--v-values=-4", "--gamma-values", "4",
        "--seeds-per-point", "1", "--enforcement-set", "KMS+CONJ",
    )
    assert code == EXIT_OK
    rows = read_csv(out / "phase.csv")
    assert len(rows) == 1
    assert rows[0]["labels"] == "KC" and rows[0]["dominant"] == "KC"
    assert list(rows[0]) == ["gamma", "v", "solution_count", "labels", "dominant", "dominance_switch"]


def test_scan_columns(tmp_path):
    code, out = run(
        tmp_path, "scan", "--v-values=-5,-4.5", "--gamma", "4",
        "--seeds-per-point", "1", "--enforcement-set", "KMS+CONJ",
    )
    assert code == EXIT_OK
    rows = read_csv(out / "branches.csv")
    assert list(rows[0]) == [
        "branch_id", "label", "v", "Re_action", "Im_action", "Gamma_pp", "Omega_pp",
        "Gamma_pm", "Omega_pm", "stationarity", "converged",
    ]
    assert {float(r["v"]) for r in rows} == {-5.0, -4.5}


def test_scan_empty_v_list(tmp_path):
    code, out = run(tmp_path, "scan", "--v-values", "")
    assert code == EXIT_CONFIG and not out.exists()


@pytest.mark.slow
def test_default_solve_at_three_saddle_point(tmp_path):
    code, out = run(tmp_path, "solve", "--v", "1", "--gamma", "4", "--J", "5")
    assert code == EXIT_OK
    labels = sorted(json.loads(p.read_text())["label"] for p in out.glob("solution-*.json"))
    assert labels == ["C", "K", "KC"]
