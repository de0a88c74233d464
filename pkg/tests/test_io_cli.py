import json
import os
import subprocess
import sys

import pytest

from chaoslab import cli, io
from chaoslab import (basis_element, constant_element, make_kernel,
                      sample)
from chaoslab.experiments import ExperimentReport
from helpers import nonzero_kernel, random_element

H2_DICT = {"dim": 1, "constant": 0.0,
           "kernels": [{"order": 2, "dim": 1, "entries": [{"idx": [1, 1], "coef": 1.0}]}]}


class TestKernelFiles:
    def test_round_trip(self, gen, tmp_path):
        for _ in range(20):
            ker = nonzero_kernel(gen, int(gen.integers(1, 5)), 5)
            path = tmp_path / "k.json"
            io.save_kernel(ker, str(path))
            assert io.load_kernel(str(path)) == ker

    def test_unsorted_idx_rejected_with_location(self, tmp_path):
        obj = {"order": 2, "dim": 3,
               "entries": [{"idx": [1, 2], "coef": 0.5},
                           {"idx": [3, 1], "coef": 1.0}]}
        path = tmp_path / "bad.json"
        path.write_text(json.dumps(obj))
        with pytest.raises(io.SchemaError, match=r"entries/1/idx"):
            io.load_kernel(str(path))

    def test_missing_field_named(self):
        with pytest.raises(io.SchemaError, match="coef"):
            io.kernel_from_dict({"order": 1, "dim": 2, "entries": [{"idx": [1]}]})

    def test_label_out_of_range_wrapped(self):
        with pytest.raises(io.SchemaError, match="label"):
            io.kernel_from_dict({"order": 1, "dim": 2,
                                 "entries": [{"idx": [5], "coef": 1.0}]})

    def test_entries_sorted_on_write(self, tmp_path):
        ker = make_kernel(2, 3, [((2, 3), 1.0), ((1, 1), 2.0)])
        d = io.kernel_to_dict(ker)
        assert d["entries"][0]["idx"] == [1, 1]


class TestChaosFiles:
    def test_round_trip(self, gen, tmp_path):
        for _ in range(20):
            fel = random_element(gen, 4, 3)
            path = tmp_path / "c.json"
            io.save_chaos(fel, str(path))
            assert io.load_chaos(str(path)) == fel

    def test_constant_only(self, tmp_path):
        path = tmp_path / "c.json"
        io.save_chaos(constant_element(2, 3.5), str(path))
        out = io.load_chaos(str(path))
        assert out.constant == 3.5 and out.kernels == {}

    def test_duplicate_order_rejected(self):
        k = {"order": 2, "dim": 1, "entries": [{"idx": [1, 1], "coef": 1.0}]}
        with pytest.raises(io.SchemaError, match="duplicate"):
            io.chaos_from_dict({"dim": 1, "constant": 0.0, "kernels": [k, k]})

    def test_kernel_dim_must_match(self):
        k = {"order": 2, "dim": 2, "entries": [{"idx": [1, 1], "coef": 1.0}]}
        with pytest.raises(io.SchemaError, match="dim"):
            io.chaos_from_dict({"dim": 3, "constant": 0.0, "kernels": [k]})


class TestReportsAndCsv:
    def test_report_round_trip(self, tmp_path):
        rep = ExperimentReport("demo", 7, [{"a": 1.0, "b": [1, 2]}], "pass",
                               notes=["note"], wall_clock=1.23)
        path = tmp_path / "r.json"
        io.save_report(rep, str(path))
        back = io.load_report(str(path))
        assert back.experiment == "demo" and back.seed == 7
        assert back.rows == rep.rows and back.verdict == "pass"
        assert back.wall_clock == 0.0  # volatile field is not serialized

    def test_atomic_write_leaves_no_temp(self, tmp_path):
        path = tmp_path / "r.json"
        io.write_json_atomic({"x": 1}, str(path))
        assert sorted(os.listdir(tmp_path)) == ["r.json"]

    def test_scalar_csv_header(self, tmp_path):
        batch = sample(basis_element(1, 1), 10, seed=3)
        path = tmp_path / "s.csv"
        io.save_samples_csv(batch, str(path))
        lines = path.read_text().splitlines()
        assert lines[0] == "value" and len(lines) == 11

    def test_vector_csv_header(self, tmp_path):
        from chaoslab import ChaosVector
        vec = ChaosVector((basis_element(2, 1), basis_element(2, 2)))
        batch = sample(vec, 5, seed=3)
        path = tmp_path / "s.csv"
        io.save_samples_csv(batch, str(path))
        lines = path.read_text().splitlines()
        assert lines[0] == "x1,x2" and len(lines) == 6


@pytest.fixture
def chaos_file(tmp_path):
    path = tmp_path / "h2.json"
    path.write_text(json.dumps(H2_DICT))
    return str(path)


class TestCli:
    def test_moments_output(self, chaos_file, capsys):
        assert cli.main(["moments", "--chaos", chaos_file, "--max", "4"]) == 0
        out = capsys.readouterr().out.splitlines()
        assert out == ["m1=0", "m2=2", "m3=8", "m4=60"]

    def test_eval(self, chaos_file, capsys):
        assert cli.main(["eval", "--chaos", chaos_file, "--point", "1.5"]) == 0
        assert capsys.readouterr().out.strip() == "1.25"

    def test_eval_wrong_point_length_exits_2(self, chaos_file, capsys):
        code = cli.main(["eval", "--chaos", chaos_file, "--point", "1.5,2.0"])
        assert code == 2
        assert "coordinates" in capsys.readouterr().err

    def test_missing_file_exits_2(self, capsys):
        assert cli.main(["eval", "--chaos", "/nonexistent.json", "--point", "1"]) == 2

    def test_sample_csv(self, chaos_file, tmp_path):
        out = str(tmp_path / "out.csv")
        assert cli.main(["sample", "--chaos", chaos_file, "-n", "50",
                         "--seed", "3", "--out", out]) == 0
        assert open(out).readline().strip() == "value"

    def test_check_identities(self, capsys):
        assert cli.main(["check", "identities", "--trials", "20", "--seed", "1"]) == 0
        assert "verdict pass" in capsys.readouterr().err

    def test_usage_error_exits_2(self, capsys):
        assert cli.main(["verify", "not-an-experiment", "--config", "x"]) == 2

    def test_verify_fourth_moment(self, tmp_path, capsys):
        cfg = {"seed": 4, "n_samples": 5000, "indices": [6, 12],
               "output": str(tmp_path / "rep.json")}
        cfg_path = tmp_path / "cfg.json"
        cfg_path.write_text(json.dumps(cfg))
        assert cli.main(["verify", "fourth-moment", "--config", str(cfg_path)]) == 0
        rep = io.load_report(str(tmp_path / "rep.json"))
        assert rep.experiment == "fourth-moment"
        assert rep.rows[0]["fourth_moment"] == pytest.approx(4.0)  # 3 + 6/6

    def test_verify_reports_are_byte_identical(self, tmp_path):
        cfg = {"seed": 4, "n_samples": 5000, "indices": [6]}
        cfg_path = tmp_path / "cfg.json"
        cfg_path.write_text(json.dumps(cfg))
        out1, out2 = str(tmp_path / "a.json"), str(tmp_path / "b.json")
        assert cli.main(["verify", "fourth-moment", "--config", str(cfg_path),
                         "--out", out1]) == 0
        assert cli.main(["--threads", "4", "verify", "fourth-moment",
                         "--config", str(cfg_path), "--out", out2]) == 0
        assert open(out1, "rb").read() == open(out2, "rb").read()

    def test_verify_missing_seed_exits_2(self, tmp_path, capsys):
        cfg_path = tmp_path / "cfg.json"
        cfg_path.write_text(json.dumps({"n_samples": 5000, "indices": [4]}))
        assert cli.main(["verify", "fourth-moment", "--config", str(cfg_path)]) == 2
        assert "config/seed" in capsys.readouterr().err

    def test_verify_csv_format(self, tmp_path):
        out = str(tmp_path / "rows.csv")
        cfg = {"seed": 4, "n_samples": 5000, "indices": [6], "format": "csv",
               "output": out}
        cfg_path = tmp_path / "cfg.json"
        cfg_path.write_text(json.dumps(cfg))
        assert cli.main(["verify", "fourth-moment", "--config", str(cfg_path)]) == 0
        header = open(out).readline()
        assert "fourth_moment" in header

    def test_verify_dball_with_chaos_file(self, tmp_path, chaos_file):
        cfg = {"seed": 4, "n_samples": 20000, "chaos": chaos_file,
               "lambdas": [1.0, 0.5]}
        cfg_path = tmp_path / "cfg.json"
        cfg_path.write_text(json.dumps(cfg))
        assert cli.main(["verify", "dball", "--config", str(cfg_path)]) == 0

    def test_verify_moo_inline_spec(self, tmp_path):
        cfg = {"seed": 4, "n_samples": 5000,
               "specs": [{"coeffs": [{"subset": [1], "c": 0.7071067811865476},
                                     {"subset": [2], "c": 0.7071067811865476}],
                          "law": "rademacher"}]}
        cfg_path = tmp_path / "cfg.json"
        cfg_path.write_text(json.dumps(cfg))
        # a single spec family cannot fail the monotone check; gate is generous
        assert cli.main(["verify", "moo", "--config", str(cfg_path)]) in (0, 1)

    def test_console_script_smoke(self, chaos_file):
        proc = subprocess.run([sys.executable, "-m", "chaoslab.cli", "moments",
                               "--chaos", chaos_file, "--max", "2"],
                              capture_output=True, text=True)
        assert proc.returncode == 0
        assert proc.stdout.splitlines() == ["m1=0", "m2=2"]
