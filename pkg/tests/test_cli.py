import json
import subprocess
import sys

import numpy as np
import pytest

from consensus_lab.cli import main, parse_tn
from consensus_lab.errors import DomainError
from consensus_lab.io import load_schedule, read_trajectory_csv, write_trajectory_csv
from consensus_lab.dynamics import simulate, simulate_multi_d
from consensus_lab.scenarios import non_consensus_chain, slow_pair


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


class TestScenarioCommand:
    def test_list(self, capsys):
        code, out, _ = run(capsys, "scenario", "list")
        assert code == 0
        for name in ("building_block", "non_consensus_chain", "six_particle_periodic",
                     "sparse_three_agent", "unbounded_three_agent", "cut_balance_counterexample",
                     "slow_pair", "complete_uniform"):
            assert name in out

    def test_dump_slow_pair(self, capsys, tmp_path):
        code, out, _ = run(capsys, "scenario", "dump", "slow_pair", "--out", str(tmp_path))
        doc = json.loads(out)
        kinds = {p["kind"] for e in doc["schedule"]["entries"] for p in e["pieces"]}
        assert code == 0 and "hyperbolic" in kinds
        sched = load_schedule(tmp_path / "slow_pair.schedule.json")
        assert sched.entries == slow_pair().schedule.entries

    def test_dump_unknown(self, capsys):
        code, _, err = run(capsys, "scenario", "dump", "nope")
        assert code == 2 and "nope" in err


class TestSimulateCommand:
    def test_chain(self, capsys, tmp_path):
        code, out, _ = run(capsys, "simulate", "non_consensus_chain", "--blocks", "50",
                           "--out", str(tmp_path), "--no-meta")
        assert code == 0
        diam = np.loadtxt(tmp_path / "diameter.csv", delimiter=",", skiprows=1)
        assert diam[-1, 1] >= 0.38599
        doc = json.loads(out)
        assert doc["diagnostics"]["verdict"] == "not-reached"
        assert all(g["ok"] for g in doc["golden"])

    def test_complete_uniform(self, capsys):
        code, out, _ = run(capsys, "simulate", "complete_uniform", "--n", "4", "--t-end", "10", "--no-meta")
        assert code == 0
        assert json.loads(out)["diagnostics"]["final_diameter"] < 1e-6

    def test_six_particle(self, capsys):
        code, out, _ = run(capsys, "simulate", "six_particle_periodic", "--t-end", "13.86", "--no-meta")
        golden = json.loads(out)["golden"]
        assert code == 0 and len(golden) == 28 and all(g["ok"] for g in golden)

    def test_deterministic(self, capsys, tmp_path):
        outs = []
        for sub in ("a", "b"):
            code, out, _ = run(capsys, "simulate", "slow_pair", "--horizon", "20", "--no-meta",
                               "--out", str(tmp_path / sub))
            outs.append((out, (tmp_path / sub / "trajectory.csv").read_bytes()))
        assert outs[0] == outs[1]

    def test_json_format(self, capsys, tmp_path):
        code, _, _ = run(capsys, "simulate", "building_block", "--format", "json", "--step-log",
                         "--out", str(tmp_path), "--no-meta")
        doc = json.loads((tmp_path / "trajectory.json").read_text())
        assert code == 0 and doc["n_agents"] == 4 and doc["steps"]

    def test_meta_present_by_default(self, capsys):
        _, out, _ = run(capsys, "simulate", "building_block")
        assert "generated_at" in json.loads(out)["meta"]

    def test_schedule_file(self, capsys, tmp_path):
        run(capsys, "scenario", "dump", "slow_pair", "--out", str(tmp_path))
        code, out, _ = run(capsys, "simulate", "--schedule", str(tmp_path / "slow_pair.schedule.json"),
                           "--x0=-1,0,1", "--horizon", "5", "--no-meta")
        assert code == 0 and json.loads(out)["horizon"] == 5.0

    def test_io_error(self, capsys, tmp_path):
        blocker = tmp_path / "file"
        blocker.write_text("x")
        code, _, _ = run(capsys, "simulate", "building_block", "--out", str(blocker / "sub"))
        assert code == 3

    def test_missing_schedule_file(self, capsys, tmp_path):
        code, _, _ = run(capsys, "simulate", "--schedule", str(tmp_path / "none.json"), "--x0", "0,1")
        assert code == 3

    def test_numeric_error(self, capsys, monkeypatch):
        import consensus_lab.cli as cli
        from consensus_lab.errors import NumericError

        def boom(*a, **k):
            raise NumericError("forced")
        monkeypatch.setattr(cli, "simulate", boom)
        code, _, _ = run(capsys, "simulate", "building_block")
        assert code == 4


class TestCheckCommand:
    def test_cut_balance_slow_pair(self, capsys):
        code, out, _ = run(capsys, "check", "slow_pair", "--cut-balance", "--k", "1", "--no-meta")
        assert code == 0
        assert json.loads(out)["reports"][0]["verdict"] == "holds-up-to-horizon"

    def test_moreau_slow_pair(self, capsys):
        code, out, _ = run(capsys, "check", "slow_pair", "--moreau", "--no-meta")
        rep = json.loads(out)["reports"][0]
        assert code == 1 and rep["witnesses"]["pair"] == [2, 3]

    def test_chain_thm3(self, capsys):
        code, out, _ = run(capsys, "check", "non_consensus_chain", "--thm3", "--tn", "block-boundaries", "--no-meta")
        rep = json.loads(out)["reports"][0]
        assert code == 1
        assert rep["graph"]["arrows"] == [[2, 1], [3, 4]]

    def test_inconclusive_exit(self, capsys):
        code, _, _ = run(capsys, "check", "non_consensus_chain", "--moreau", "--tn", "hint",
                         "--t-window", "2", "--no-meta")
        assert code == 5

    def test_fail_beats_inconclusive(self, capsys):
        code, _, _ = run(capsys, "check", "slow_pair", "--thm3", "--moreau", "--no-meta")
        assert code == 1

    def test_all_conditions(self, capsys, tmp_path):
        code, out, _ = run(capsys, "check", "complete_uniform", "--out", str(tmp_path), "--no-meta")
        assert code == 0 and len(json.loads(out)["reports"]) == 6
        assert (tmp_path / "report.json").exists()

    def test_byte_identical_reports(self, capsys):
        _, a, _ = run(capsys, "check", "cut_balance_counterexample", "--no-meta")
        _, b, _ = run(capsys, "check", "cut_balance_counterexample", "--no-meta")
        assert a == b

    def test_bad_threshold(self, capsys):
        code, _, _ = run(capsys, "check", "slow_pair", "--mu", "-1")
        assert code == 2


class TestCertifyCommand:
    def test_slow_pair(self, capsys):
        code, out, _ = run(capsys, "certify", "slow_pair", "--no-meta")
        assert code == 0
        assert json.loads(out)["witnesses"]["certified_by"] == ["cut_balance"]

    def test_nothing_certifies(self, capsys):
        code, out, _ = run(capsys, "certify", "non_consensus_chain", "--blocks", "20", "--no-meta")
        assert code == 5 and json.loads(out)["witnesses"]["certified_by"] == []


class TestParseTn:
    def test_arith(self):
        assert parse_tn("arith:1:0.5:3", slow_pair()) == (1.0, 1.5, 2.0)

    def test_list(self):
        assert parse_tn("0,2,5", slow_pair()) == (0.0, 2.0, 5.0)

    def test_hint(self):
        sc = non_consensus_chain(5)
        assert parse_tn("block-boundaries", sc) == sc.hints["t_seq"]

    @pytest.mark.parametrize("text", ["arith:1:2", "a,b"])
    def test_bad(self, text):
        with pytest.raises(DomainError):
            parse_tn(text, slow_pair())


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "consensus_lab", "scenario", "list"],
                         capture_output=True, text=True)
    assert res.returncode == 0 and "slow_pair" in res.stdout


class TestTrajectoryFiles:
    def test_csv_roundtrip(self, tmp_path):
        sc = slow_pair()
        traj = simulate(sc.schedule, sc.x0, 3.0)
        (path,) = write_trajectory_csv(traj, tmp_path)
        back = read_trajectory_csv(path)
        assert np.array_equal(back.times, traj.times)
        assert np.array_equal(back.positions, traj.positions)

    def test_one_file_per_axis(self, tmp_path):
        sc = slow_pair()
        traj = simulate_multi_d(sc.schedule, np.arange(6.0).reshape(3, 2), 1.0)
        paths = write_trajectory_csv(traj, tmp_path)
        assert [p.name for p in paths] == ["trajectory_axis0.csv", "trajectory_axis1.csv"]
        assert paths[0].read_text().splitlines()[0] == "t,x_1,x_2,x_3"
