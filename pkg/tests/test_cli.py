import json

import pytest
from click.testing import CliRunner

from hurwitzcf import cli as climod
from hurwitzcf.cli import cli
from hurwitzcf.config import RunConfig


@pytest.fixture
def runner():
    return CliRunner()


def run_ok(runner, args):
    result = runner.invoke(cli, args)
    assert result.exit_code == 0, result.output + str(result.exception)
    return result


class TestExpand:
    def test_two_fifths(self, runner):
        result = run_ok(runner, ["expand", "2/5+0/1 i"])
        payload = json.loads(result.stdout)
        assert payload["digits"] == [[3, 0], [-2, 0]]
        assert payload["display"] == "3; -2"
        assert payload["terminated"] and payload["roundtrip_ok"]

    def test_zero(self, runner):
        payload = json.loads(run_ok(runner, ["expand", "0/1+0/1 i"]).stdout)
        assert payload["digits"] == [] and payload["terminated"]

    def test_boundary_domain_error(self, runner):
        result = runner.invoke(cli, ["expand", "1/2+0/1 i"])
        assert result.exit_code == 2

    def test_parse_error(self, runner):
        result = runner.invoke(cli, ["expand", "not-a-number"])
        assert result.exit_code == 2

    def test_csv_format(self, runner):
        result = run_ok(runner, ["--format", "csv", "expand", "2/5+0/1 i"])
        lines = result.stdout.strip().splitlines()
        assert lines[0] == "index,re,im"
        assert lines[1] == "1,3,0" and lines[2] == "2,-2,0"


class TestEvalAndClassify:
    def test_eval_roundtrip(self, runner):
        payload = json.loads(run_ok(runner, ["eval", "[[3,0],[-2,0]]"]).stdout)
        assert payload["re"] == "2/5" and payload["im"] == "0"

    def test_eval_pole_exit(self, runner):
        result = runner.invoke(cli, ["eval", "[[1,1],[-1,1],[1,1]]"])
        assert result.exit_code == 2

    def test_classify(self, runner):
        payload = json.loads(run_ok(runner, ["classify", "2", "1"]).stdout)
        assert payload["class"] == "exceptional"
        payload = json.loads(run_ok(runner, ["classify", "1", "0"]).stdout)
        assert payload["class"] == "invalid"


class TestTessellate:
    def test_writes_svg(self, runner, tmp_path):
        out = tmp_path / "t.svg"
        run_ok(runner, ["--out", str(out), "tessellate", "--norm-sq-max", "8"])
        doc = out.read_text()
        assert doc.startswith("<?xml") and doc.count("<path") == 20


class TestTau:
    def test_power_source(self, runner):
        payload = json.loads(
            run_ok(runner, ["tau", "--source", "power:2", "--horizon", "5000"]).stdout
        )
        assert abs(payload["estimate"] - 0.5) < 1e-9

    def test_bad_source(self, runner):
        result = runner.invoke(cli, ["tau", "--source", "fib"])
        assert result.exit_code == 2


class TestPressureAndDim:
    def test_pressure_json(self, runner):
        result = run_ok(
            runner,
            ["pressure", "--alphabet", "[[2,2],[-2,-2]]", "--n", "3", "--s", "1.0"],
        )
        payload = json.loads(result.stdout)
        assert set(payload) == {"s", "n", "logZ_over_n", "lo", "hi"}
        assert payload["lo"] <= payload["logZ_over_n"] <= payload["hi"]

    def test_pressure_budget_exit(self, runner, tmp_path):
        cfg = tmp_path / "c.cfg"
        cfg.write_text("max_words = 10\n")
        result = runner.invoke(
            cli,
            ["--config", str(cfg), "pressure", "--alphabet",
             "[[2,2],[-2,-2],[3,0],[0,3]]", "--n", "6", "--s", "1.0"],
        )
        assert result.exit_code == 3

    def test_dim_json(self, runner):
        result = run_ok(runner, ["dim", "--alphabet", "[[2,2]]", "--n-max", "6"])
        payload = json.loads(result.stdout)
        assert payload["s_low"] <= 0.0 <= payload["s_high"]

    def test_annulus_alphabet(self, runner):
        result = run_ok(
            runner,
            ["pressure", "--alphabet", "annulus:8:9", "--n", "2", "--s", "0.0"],
        )
        payload = json.loads(result.stdout)
        # eight branches of norm_sq 8 and 9: log 8 per step
        assert abs(payload["logZ_over_n"] - 2.0794415416798357) < 1e-12

    def test_alphabet_file_single_branch(self, runner, tmp_path):
        alpha = tmp_path / "alpha.json"
        alpha.write_text("[[2, 2]]")
        result = run_ok(runner, ["dim", "--alphabet", f"@{alpha}", "--n-max", "6"])
        payload = json.loads(result.stdout)
        assert payload["s_low"] <= 0.0 <= payload["s_high"]


class TestSchedule:
    def test_builds_and_validates(self, runner):
        result = run_ok(
            runner,
            ["schedule", "--set", "d2", "--f", "n+3", "--eps", "0.5",
             "--horizon", "2000"],
        )
        payload = json.loads(result.stdout)
        assert payload["horizon"] == 2000
        assert all(c["status"] == "pass" for c in payload["validation"])

    def test_constant_growth_warns_but_truncates(self, runner):
        result = run_ok(
            runner,
            ["schedule", "--set", "d2", "--f", "2", "--horizon", "500",
             "--no-validate"],
        )
        payload = json.loads(result.stdout)
        assert payload["truncated"]


class TestVerify:
    def test_arith_suite_passes(self, runner):
        result = run_ok(runner, ["verify", "arith"])
        payload = json.loads(result.stdout)
        assert payload["passed"]
        assert all(c["status"] == "pass" for c in payload["checks"])

    def test_unknown_suite_usage_error(self, runner):
        result = runner.invoke(cli, ["verify", "bogus"])
        assert result.exit_code == 2

    def test_failing_check_exits_one(self, runner, monkeypatch):
        monkeypatch.setattr(
            climod.verifymod,
            "run_suite",
            lambda name, config: [{"check": "stub", "status": "fail"}],
        )
        result = runner.invoke(cli, ["verify", "arith"])
        assert result.exit_code == 1


class TestConfig:
    def test_file_roundtrip(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("seed = 99\nmax_digits = 64\nbisection_tol = 0.01\n# comment\n")
        config = RunConfig.from_file(cfg)
        assert config.seed == 99
        assert config.max_digits == 64
        assert config.bisection_tol == 0.01

    def test_unknown_key_rejected(self, tmp_path, runner):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text("wibble = 3\n")
        result = runner.invoke(cli, ["--config", str(cfg), "classify", "2", "2"])
        assert result.exit_code == 2

    def test_seed_override(self, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("seed = 5\n")
        assert RunConfig.from_file(cfg).override(seed=17).seed == 17


class TestDeterminism:
    @pytest.mark.parametrize(
        "args",
        [
            ["expand", "--", "-7/16+3/16 i"],
            ["eval", "[[3,1],[-2,2]]"],
            ["classify", "--", "-2", "-1"],
            ["--format", "csv", "tau", "--source", "power:1", "--horizon", "3000"],
            ["pressure", "--alphabet", "[[2,2],[-2,-2]]", "--n", "4", "--s", "0.7"],
            ["dim", "--alphabet", "[[2,2],[-2,-2]]", "--n-max", "8"],
            ["schedule", "--set", "d2", "--f", "n+3", "--horizon", "1500"],
            ["--format", "csv", "verify", "arith"],
        ],
    )
    def test_byte_identical_reruns(self, runner, args):
        first = runner.invoke(cli, args)
        second = runner.invoke(cli, args)
        assert first.exit_code == 0, first.output + str(first.exception)
        assert first.stdout_bytes == second.stdout_bytes

    def test_out_file_identical(self, runner, tmp_path):
        a, b = tmp_path / "a.svg", tmp_path / "b.svg"
        run_ok(runner, ["--out", str(a), "tessellate", "--norm-sq-max", "10"])
        run_ok(runner, ["--out", str(b), "tessellate", "--norm-sq-max", "10"])
        assert a.read_bytes() == b.read_bytes()
