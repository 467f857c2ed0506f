"""Command-line interface: subcommands, config handling, output files."""

import json

import pytest

from svmrates.cli import config_digest, load_config, main
from svmrates.harness import ConfigError

GOOD_CONFIG = """\
seed = 3
loss = "hinge"
regime = "C5"
m_grid = [8, 16, 32, 64]
trials_per_m = 2

[distribution]
family = "margin"
p = 0.8
gap = 0.2

[quadrature]
target = 1e-9
"""


def _write(tmp_path, text, name="config.toml"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


class TestExponentCommand:
    def test_t1(self, capsys):
        assert main(["exponent", "--r", "1", "--d", "1", "--theorem", "T1"]) == 0
        out = capsys.readouterr().out.strip()
        assert abs(float(out) - 1 / 3) < 1e-12

    def test_infinite_r(self, capsys):
        assert main(["exponent", "--r", "inf", "--q", "1", "--theorem", "T2"]) == 0
        assert abs(float(capsys.readouterr().out) - 2 / 3) < 1e-12

    def test_bad_pairing_exits_one(self, capsys):
        code = main(["exponent", "--r", "1", "--q", "1", "--loss", "hinge",
                     "--theorem", "T2"])
        assert code == 1
        assert "error" in capsys.readouterr().err


class TestUsageErrors:
    def test_unknown_subcommand(self, capsys):
        assert main(["frobnicate"]) == 1
        assert "usage" in capsys.readouterr().err.lower()

    def test_unknown_flag(self, capsys):
        assert main(["exponent", "--r", "1", "--theorem", "T1", "--nope"]) == 1

    def test_no_arguments(self):
        assert main([]) == 1


class TestLoadConfig:
    def test_good_config(self, tmp_path):
        config = load_config(_write(tmp_path, GOOD_CONFIG))
        assert config.family == "margin"
        assert config.trials_per_m == 2
        assert config.family_params == {"p": 0.8, "gap": 0.2}
        assert config.quad_target == 1e-9
        # defaults fill the rest
        assert config.solver_tol is None and config.mc_budget == 10**6

    def test_defaults_applied(self, tmp_path):
        text = GOOD_CONFIG.replace("trials_per_m = 2\n", "")
        config = load_config(_write(tmp_path, text))
        assert config.trials_per_m == 20

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError):
            load_config(str(tmp_path / "absent.toml"))

    def test_parse_error(self, tmp_path):
        with pytest.raises(ConfigError):
            load_config(_write(tmp_path, "loss = [unterminated"))

    def test_short_grid_rejected(self, tmp_path):
        text = GOOD_CONFIG.replace("[8, 16, 32, 64]", "[8, 16]")
        with pytest.raises(ConfigError, match="m_grid"):
            load_config(_write(tmp_path, text))

    def test_bad_pairing_rejected(self, tmp_path):
        text = GOOD_CONFIG.replace('regime = "C5"', 'regime = "T2"')
        with pytest.raises(ConfigError, match="T2"):
            load_config(_write(tmp_path, text))

    def test_unknown_keys_reported(self, tmp_path):
        with pytest.raises(ConfigError, match="wibble"):
            load_config(_write(tmp_path, GOOD_CONFIG + "\nwibble = 1\n"))

    def test_all_problems_listed_at_once(self, tmp_path):
        text = GOOD_CONFIG.replace("[8, 16, 32, 64]", "[8, 16]") \
                          .replace('regime = "C5"', 'regime = "T2"')
        with pytest.raises(ConfigError) as err:
            load_config(_write(tmp_path, text))
        assert "m_grid" in str(err.value) and "T2" in str(err.value)


class TestCurveCommand:
    def test_outputs_and_reproducibility(self, tmp_path, capsys):
        config = _write(tmp_path, GOOD_CONFIG)
        out1, out2 = str(tmp_path / "run1"), str(tmp_path / "run2")
        assert main(["curve", "--config", config, "--out", out1]) == 0
        assert main(["curve", "--config", config, "--out", out2]) == 0
        capsys.readouterr()

        trials1 = (tmp_path / "run1" / "trials.csv").read_bytes()
        trials2 = (tmp_path / "run2" / "trials.csv").read_bytes()
        assert trials1 == trials2  # same config + seed => identical bytes

        lines = trials1.decode().splitlines()
        assert lines[0].startswith("# config_digest=")
        assert lines[1] == ("m,trial,excess_misclass,excess_phi,objective,"
                            "norm_sq,solver_iters,failed")
        assert len(lines) == 2 + 4 * 2  # grid levels x trials

        ratefit = json.loads((tmp_path / "run1" / "ratefit.json").read_text())
        assert ratefit["theorem"] == "C5"
        assert ratefit["config_digest"] == lines[0].split("=", 1)[1]
        assert len(ratefit["points"]) <= 4

        manifest = json.loads((tmp_path / "run1" / "manifest.json").read_text())
        assert manifest["config_digest"] == ratefit["config_digest"]
        assert manifest["tool_version"]

    def test_missing_config_exits_one(self, tmp_path, capsys):
        code = main(["curve", "--config", str(tmp_path / "missing.toml"),
                     "--out", str(tmp_path / "out")])
        assert code == 1
        assert "error" in capsys.readouterr().err


class TestTrainCommand:
    def test_json_diagnostics(self, tmp_path, capsys):
        code = main(["train", "--family", "margin", "--p", "0.8", "--gap", "0.2",
                     "--loss", "hinge", "--m", "64", "--seed", "5",
                     "--regime", "C5"])
        assert code == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["converged"] is True
        assert payload["lambda"] == 1.0 / 64
        assert payload["sigma"] == 1.0
        assert payload["lam_norm_sq"] <= 1.0 + 1e-8


class TestTsybakovCommand:
    def test_affine_equality_case(self, capsys):
        code = main(["tsybakov", "--family", "affine", "--q", "1",
                     "--c-hat", "0.5"])
        assert code == 0
        out = capsys.readouterr().out
        assert "PASS" in out
        ratio = float(out.split("max_ratio=")[1].split()[0])
        assert abs(ratio - 1.0) <= 1e-6


class TestCompareCommand:
    def test_report_fields(self, capsys):
        code = main(["compare", "--family", "margin", "--p", "0.8", "--gap", "0.2",
                     "--loss", "hinge", "--m", "64", "--seed", "5",
                     "--regime", "C5"])
        assert code == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["hinge_bound_holds"] is True
        assert payload["loss"] == "hinge"
        assert "power_ratio" in payload


class TestApproxCommand:
    def test_sweep_csv(self, tmp_path, capsys):
        out = str(tmp_path / "sweep")
        code = main(["approx", "--r", "1.0", "--sigmas", "0.4,0.2,0.1",
                     "--grid", "101", "--out", out])
        assert code == 0
        lines = (tmp_path / "sweep" / "approx_sweep.csv").read_text().splitlines()
        assert lines[0].startswith("# config_digest=")
        assert lines[1] == "sigma,sup_error"
        assert len(lines) == 2 + 3
        errs = [float(line.split(",")[1]) for line in lines[2:]]
        assert errs == sorted(errs, reverse=True)  # error shrinks with sigma

    def test_bad_r_exits_one(self, tmp_path):
        assert main(["approx", "--r", "1.5", "--out", str(tmp_path)]) == 1


def test_config_digest_canonical():
    a = config_digest({"b": 1, "a": [1, 2]})
    b = config_digest({"a": [1, 2], "b": 1})
    assert a == b and len(a) == 64
