"""Configuration parsing, the end-to-end runner, and the CLI contract."""

import json
import logging
from pathlib import Path

import numpy as np
import pytest

from inpd.cli import main as cli_main
from inpd.config import ConfigError, parse_config

from inpd.runner import load_logs, regenerate_reports, run_experiment

REPO = Path(__file__).resolve().parent.parent


def tree_bytes(root: Path) -> dict[str, bytes]:
    return {
        str(p.relative_to(root)): p.read_bytes() for p in sorted(root.rglob("*")) if p.is_file()
    }


def write_config(tmp_path, **overrides):
    cfg = {
        "master_seed": 4242,
        "agents": ["IM50"],
        "networks": ["er(30,60)"],
        "matrices": ["M1"],
        "rounds": 8,
        "sims_per_cell": 3,
        "output_dir": str(tmp_path / "out"),
        "parallelism": 1,
    }
    cfg.update(overrides)
    path = tmp_path / "config.json"
    path.write_text(json.dumps(cfg))
    return path


class TestParseConfig:
    def test_shipped_full_grid(self):
        cfg = parse_config(REPO / "configs" / "full_grid.json")
        assert len(cfg.agents) == 17
        assert len(cfg.networks) == 3
        assert len(cfg.matrices) == 3
        assert cfg.sims_per_cell == 20
        assert cfg.rounds == 60
        assert cfg.run_count == 3060

    def test_strict_matrix_accepted(self, tmp_path):
        path = write_config(tmp_path, matrices=[{"label": "m", "t": 3, "r": 2, "p": 1, "s": 0}])
        cfg = parse_config(path)
        assert cfg.matrices[0].strict

    def test_inverted_matrix_flagged_and_warned(self, tmp_path, caplog):
        path = write_config(tmp_path, matrices=[{"label": "odd", "t": 2, "r": 3, "p": 1, "s": 0}])
        with caplog.at_level(logging.WARNING):
            cfg = parse_config(path)
        assert cfg.matrices[0].non_strict
        assert any("temptation > reward > punishment > sucker" in r.message for r in caplog.records)

    def test_unknown_key_located(self, tmp_path):
        path = write_config(tmp_path)
        raw = json.loads(path.read_text())
        raw["simulations"] = 5
        path.write_text(json.dumps(raw))
        with pytest.raises(ConfigError, match="simulations"):
            parse_config(path)

    def test_bad_shorthand_located(self, tmp_path):
        path = write_config(tmp_path, agents=["IM50", "BACTZ9"])
        with pytest.raises(ConfigError, match=r"agents\[1\]"):
            parse_config(path)

    def test_bad_network_located(self, tmp_path):
        path = write_config(tmp_path, networks=["ring(4)"])
        with pytest.raises(ConfigError, match=r"networks\[0\]"):
            parse_config(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError):
            parse_config(tmp_path / "nope.json")

    def test_agent_object_form(self, tmp_path):
        path = write_config(
            tmp_path,
            agents=[{"family": "BayesActLite", "semantics": "study", "planning_budget": 300}],
        )
        cfg = parse_config(path)
        assert cfg.agents[0].shorthand() == "BACTS1"


class TestRunnerEndToEnd:
    def test_desk_file_counts(self, tmp_path):
        cfg = parse_config(write_config(tmp_path))
        out = run_experiment(cfg)
        logs = sorted((out / "logs").glob("*.csv"))
        assert len(logs) == 3
        report_files = sorted((out / "reports" / "IM50").glob("*.csv"))
        assert len(report_files) == 5
        names = {p.name for p in report_files}
        assert names == {
            "invariance_M1.csv",
            "cooperation.csv",
            "anticorrelation.csv",
            "mcc.csv",
            "stratification.csv",
        }
        assert (out / "summary.csv").exists()

    def test_rerun_is_byte_identical(self, tmp_path):
        cfg = parse_config(write_config(tmp_path))
        out1 = run_experiment(cfg, out_dir=tmp_path / "a", workers=1)
        out2 = run_experiment(cfg, out_dir=tmp_path / "b", workers=2)
        t1, t2 = tree_bytes(out1), tree_bytes(out2)
        assert t1.keys() == t2.keys()
        for key in t1:
            assert t1[key] == t2[key], key

    def test_report_regeneration_matches_run(self, tmp_path):
        cfg = parse_config(write_config(tmp_path))
        out = run_experiment(cfg)
        regen = tmp_path / "regen"
        regenerate_reports(out / "logs", regen)
        orig = tree_bytes(out / "reports")
        redo = tree_bytes(regen / "reports")
        assert orig == redo

    def test_empty_log_dir_rejected(self, tmp_path):
        (tmp_path / "empty").mkdir()
        with pytest.raises(FileNotFoundError):
            regenerate_reports(tmp_path / "empty")

    def test_hand_written_log_reports_match_hand_computation(self, tmp_path):
        # Two agents joined by one edge, two rounds:
        #   round 0: both cooperate -> each earns R = 2
        #   round 1: agent 0 defects -> earns T = 3; agent 1 earns S = 0
        log_dir = tmp_path / "logs"
        log_dir.mkdir()
        csv = log_dir / "hand__netx__M1__sim000.csv"
        csv.write_text(
            "sim_id,round,agent_id,action,payoff,coop_neighbors,degree\n"
            "0,0,0,C,2,1,1\n"
            "0,0,1,C,2,1,1\n"
            "0,1,0,D,3,1,1\n"
            "0,1,1,C,0,0,1\n"
        )
        csv.with_suffix(".json").write_text(
            json.dumps(
                {
                    "setting": "hand", "network": "netx", "matrix": "M1",
                    "matrix_values": {"t": "3", "r": "2", "p": "1", "s": "0"},
                    "payoff_scale": 1, "rounds": 2, "agents": 2, "sim_id": 0,
                    "seed_key": [0], "agent_config": None, "run_id": "hand__netx__M1__sim000",
                }
            )
        )
        out = regenerate_reports(log_dir, tmp_path / "out")
        coop = (out / "reports" / "hand" / "cooperation.csv").read_text().splitlines()
        # rate rows: round 0 -> 1.0, round 1 -> 0.5
        rate_rows = [r for r in coop if ",rate," in r]
        assert rate_rows[0].endswith("1.0")
        assert rate_rows[1].endswith("0.5")
        strat = (out / "reports" / "hand" / "stratification.csv").read_text().splitlines()[1]
        # agent 0: 1 of 2 rounds -> mixed; agent 1: 2 of 2 -> pure C
        cells = strat.split(",")
        cols = (out / "reports" / "hand" / "stratification.csv").read_text().splitlines()[0].split(",")
        row = dict(zip(cols, cells))
        assert row["mixed_pct"] == "50.0"
        assert row["pure_c_pct"] == "50.0"
        assert row["satisfied"] == "false"


class TestCli:
    def test_validate_ok(self, tmp_path, capsys):
        path = write_config(tmp_path)
        assert cli_main(["validate", str(path)]) == 0
        out = capsys.readouterr().out
        assert "3 runs of 8 rounds" in out

    def test_validate_bad_config(self, tmp_path):
        path = write_config(tmp_path, agents=["WAT"])
        assert cli_main(["validate", str(path)]) == 1

    def test_simulate_and_report_roundtrip(self, tmp_path):
        path = write_config(tmp_path)
        out_dir = tmp_path / "cliout"
        assert cli_main(["simulate", str(path), "--out", str(out_dir), "--workers", "1"]) == 0
        assert len(list((out_dir / "logs").glob("*.csv"))) == 3
        assert cli_main(["report", str(out_dir / "logs"), "--out", str(tmp_path / "rep")]) == 0
        assert (tmp_path / "rep" / "reports" / "IM50" / "mcc.csv").exists()

    def test_report_on_empty_dir_is_runtime_failure(self, tmp_path):
        (tmp_path / "none").mkdir()
        assert cli_main(["report", str(tmp_path / "none")]) == 2

    def test_seed_override_changes_output(self, tmp_path):
        path = write_config(tmp_path)
        a = tmp_path / "s1"
        b = tmp_path / "s2"
        assert cli_main(["simulate", str(path), "--out", str(a), "--seed", "1"]) == 0
        assert cli_main(["simulate", str(path), "--out", str(b), "--seed", "2"]) == 0
        la = load_logs(a / "logs")
        lb = load_logs(b / "logs")
        assert not all(np.array_equal(x.actions, y.actions) for x, y in zip(la, lb))
