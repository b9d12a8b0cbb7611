import json
import xml.etree.ElementTree as ET

import numpy as np
import pytest
import yaml

from falconcb import cli
from falconcb.config import normalize
from falconcb.plot import bound_curve, emit_plot
from falconcb.sim import CSV_HEADER, run
from falconcb.verify import Report

from conftest import small_config


def _write_cfg(tmp_path, cfg, name="cfg.yaml"):
    p = tmp_path / name
    p.write_text(yaml.safe_dump(cfg))
    return str(p)


def test_run_writes_csv_with_exact_header(tmp_path, capsys):
    cfg = _write_cfg(tmp_path, small_config(horizon=200))
    out = tmp_path / "r.csv"
    assert cli.main(["run", "--config", cfg, "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == CSV_HEADER
    assert len(lines) == 201
    assert "final_regret=" in capsys.readouterr().out


def test_config_echo_reproduces_run(tmp_path):
    cfg = _write_cfg(tmp_path, small_config(horizon=300, seed=9))
    first = tmp_path / "a.csv"
    assert cli.main(["run", "--config", cfg, "--out", str(first)]) == 0
    echo = str(first) + ".config.yaml"
    second = tmp_path / "b.csv"
    assert cli.main(["run", "--config", echo, "--out", str(second)]) == 0
    assert first.read_bytes() == second.read_bytes()
    echoed = yaml.safe_load(open(echo))
    assert normalize(echoed) == echoed


def test_flags_override_config(tmp_path):
    cfg = _write_cfg(tmp_path, small_config(horizon=300))
    out = tmp_path / "r.csv"
    assert cli.main(["run", "--config", cfg, "--horizon", "50", "--seed", "3", "--algo", "uniform", "--out", str(out)]) == 0
    echo = yaml.safe_load(open(str(out) + ".config.yaml"))
    assert echo["horizon"] == 50 and echo["seed"] == 3 and echo["algorithm"]["name"] == "uniform"


def test_missing_horizon_exits_one(tmp_path, capsys):
    cfg = _write_cfg(tmp_path, {"seed": 1})
    assert cli.main(["run", "--config", cfg]) == 1
    assert "horizon" in capsys.readouterr().err


def test_unwritable_output_exits_one(tmp_path, capsys):
    cfg = _write_cfg(tmp_path, small_config(horizon=20))
    assert cli.main(["run", "--config", cfg, "--out", str(tmp_path / "missing" / "r.csv")]) == 1
    assert "output error" in capsys.readouterr().err


def test_verify_exits_zero(tmp_path, capsys):
    cfg = _write_cfg(tmp_path, small_config(horizon=300))
    assert cli.main(["verify", "--config", cfg, "--n-mc", "20000"]) == 0
    assert "checks passed" in capsys.readouterr().out


def test_verify_failure_exits_two(tmp_path, monkeypatch, capsys):
    import falconcb.verify as verify

    def failing(*args, **kwargs):
        rep = Report()
        rep.add("injected", False)
        return rep

    monkeypatch.setattr(verify, "verify_epochs", failing)
    cfg = _write_cfg(tmp_path, small_config(horizon=50))
    assert cli.main(["verify", "--config", cfg]) == 2
    assert "injected" in capsys.readouterr().err


def test_verify_refuses_linear(tmp_path):
    cfg = _write_cfg(tmp_path, {"horizon": 50, "algorithm": {"name": "falcon_plus"}, "environment": {"kind": "linear"}})
    assert cli.main(["verify", "--config", cfg]) == 1


def test_schedule_info(capsys):
    assert cli.main(["schedule-info", "--horizon", "100", "--schedule", "known_horizon"]) == 0
    info = json.loads(capsys.readouterr().out)
    assert info["boundaries"] == [10, 32, 57, 75, 87, 94, 97, 99, 100]
    assert info["oracle_calls"] == 8


def test_replicate_summary_file(tmp_path):
    cfg = _write_cfg(tmp_path, small_config(horizon=200))
    out = tmp_path / "s.json"
    assert cli.main(["replicate", "--config", cfg, "--seeds", "1,2,3", "--out", str(out)]) == 0
    s = json.loads(out.read_text())
    assert {"config", "per_seed", "mean", "p10", "p90", "theoretical_bound"} <= set(s)
    assert [p["seed"] for p in s["per_seed"]] == [1, 2, 3]


def test_plot_of_zero_regret_run(tmp_path):
    from test_sim import _zero_regret_config

    r = run(_zero_regret_config())
    path = tmp_path / "p.svg"
    emit_plot(r, path)
    root = ET.parse(path).getroot()
    assert root.tag.endswith("svg")
    assert np.all(r.cum_regret[r.logged_rows()] == 0.0)
    ref = bound_curve(r.config, np.array([1, r.horizon]))
    assert ref[-1] == r.bound()
    assert emit_plot(r, tmp_path / "q.svg") is None
    assert path.read_bytes() == (tmp_path / "q.svg").read_bytes()


def test_plot_needs_two_rounds(tmp_path):
    r = run(small_config(horizon=1))
    with pytest.raises(ValueError):
        emit_plot(r, tmp_path / "p.svg")


def test_run_with_plot_flag(tmp_path):
    cfg = _write_cfg(tmp_path, small_config(horizon=100))
    svg = tmp_path / "p.svg"
    assert cli.main(["run", "--config", cfg, "--plot", str(svg)]) == 0
    ET.parse(svg)
