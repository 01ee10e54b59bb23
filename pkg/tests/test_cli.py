"""Command-line behavior: config validation, determinism, exit codes."""

import json

import pytest

from focklab.cli import build_measure, main, parse_config
from focklab.errors import ConfigError
from focklab.measure import GaussianDensity, PointMasses, RadialDensity


MINIMAL = ('{"alpha": 1, "measure": {"type": "point_masses", '
           '"points": [{"x": 0, "y": 0, "w_re": 1, "w_im": 0}]}}')

GAUSS = '{"alpha": 1.0, "measure": {"type": "gaussian", "beta": 1.0}}'


def write(tmp_path, name, text):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return str(path)


class TestParseConfig:

    def test_minimal_fills_defaults(self):
        config = parse_config(MINIMAL)
        assert config.alpha == 1.0
        assert config.truncation == 64
        assert config.grid is None
        assert config.exponents == (4.0 / 3.0, 4.0)
        assert config.r_values == tuple(2.0 ** -n for n in range(7))
        assert config.output_format == "json"
        assert config.output_path is None

    def test_unknown_top_key_named(self):
        with pytest.raises(ConfigError, match="alpah"):
            parse_config('{"alpah": 1}')

    def test_unknown_nested_key_dotted_path(self):
        with pytest.raises(ConfigError, match=r"grid\.radial"):
            parse_config('{"grid": {"cutoff_radius": 4, "radial": 10, '
                         '"radial_nodes": 32, "angular_nodes": 32}}')

    def test_unknown_point_key(self):
        with pytest.raises(ConfigError, match=r"measure\.points\[0\]\.z"):
            parse_config('{"measure": {"type": "point_masses", '
                         '"points": [{"z": 1}]}}')

    def test_negative_alpha(self):
        with pytest.raises(ConfigError, match="alpha"):
            parse_config('{"alpha": -1}')

    def test_boolean_is_not_a_number(self):
        with pytest.raises(ConfigError, match="alpha"):
            parse_config('{"alpha": true}')

    def test_small_truncation_rejected(self):
        with pytest.raises(ConfigError, match="truncation"):
            parse_config('{"truncation": 4}')

    def test_unknown_tolerance_name(self):
        with pytest.raises(ConfigError, match=r"tolerances\.trce"):
            parse_config('{"tolerances": {"trce": 1e-9}}')

    def test_nonpositive_tolerance(self):
        with pytest.raises(ConfigError, match=r"tolerances\.trace"):
            parse_config('{"tolerances": {"trace": 0}}')

    def test_r_values_must_decrease(self):
        with pytest.raises(ConfigError, match="r_values"):
            parse_config('{"r_values": [0.5, 0.5]}')

    def test_bad_output_format(self):
        with pytest.raises(ConfigError, match=r"output\.format"):
            parse_config('{"output": {"format": "yaml"}}')

    def test_measure_objects(self):
        pm = build_measure(parse_config(MINIMAL).measure)
        assert isinstance(pm, PointMasses)
        disk = build_measure(parse_config(
            '{"measure": {"type": "uniform_disk", "radius": 2}}').measure)
        assert isinstance(disk, RadialDensity)
        assert disk.support_radius == 2.0
        gauss = build_measure(parse_config(GAUSS).measure)
        assert isinstance(gauss, GaussianDensity)

    def test_digest_ignores_key_order(self):
        a = parse_config('{"alpha": 2.0, "truncation": 32, "measure": null}')
        b = parse_config('{"truncation": 32, "measure": null, "alpha": 2.0}')
        assert a.digest() == b.digest()

    def test_digest_sees_value_changes(self):
        a = parse_config('{"alpha": 2.0}')
        b = parse_config('{"alpha": 2.5}')
        assert a.digest() != b.digest()


class TestDeterminism:

    def test_identical_config_identical_bytes(self, tmp_path, capsys):
        config = write(tmp_path, "g.json", GAUSS)
        out_a = str(tmp_path / "a.json")
        out_b = str(tmp_path / "b.json")
        assert main(["trace-check", "--config", config, "--out", out_a]) == 0
        assert main(["trace-check", "--config", config, "--out", out_b]) == 0
        capsys.readouterr()
        bytes_a = (tmp_path / "a.json").read_bytes()
        assert bytes_a == (tmp_path / "b.json").read_bytes()
        report = json.loads(bytes_a)
        assert report["version"]
        assert len(report["config_sha256"]) == 64
        assert "timestamp" not in report

    def test_stdout_matches_file(self, tmp_path, capsys):
        config = write(tmp_path, "g.json", GAUSS)
        out = str(tmp_path / "r.json")
        main(["trace-check", "--config", config, "--out", out])
        captured = capsys.readouterr().out
        assert captured == (tmp_path / "r.json").read_text(encoding="utf-8")


class TestExitCodes:

    def test_pass_is_zero(self, tmp_path, capsys):
        config = write(tmp_path, "g.json", GAUSS)
        assert main(["trace-check", "--config", config]) == 0
        report = json.loads(capsys.readouterr().out)
        assert report["passed"] is True
        assert report["data"]["mass_residual"] < 1e-9

    def test_tolerance_failure_is_one_and_report_written(self, tmp_path,
                                                         capsys):
        strict = json.loads(GAUSS)
        strict["tolerances"] = {"trace": 1e-30}
        config = write(tmp_path, "strict.json", json.dumps(strict))
        out = str(tmp_path / "r.json")
        assert main(["trace-check", "--config", config, "--out", out]) == 1
        capsys.readouterr()
        report = json.loads((tmp_path / "r.json").read_text(encoding="utf-8"))
        assert report["passed"] is False
        flagged = [c for c in report["checks"] if not c["passed"]]
        assert [c["name"] for c in flagged] == ["trace"]
        assert flagged[0]["tolerance"] == 1e-30

    def test_config_error_is_two(self, tmp_path, capsys):
        config = write(tmp_path, "bad.json", '{"alpah": 1}')
        assert main(["trace-check", "--config", config]) == 2
        assert "alpah" in capsys.readouterr().err

    def test_missing_measure_is_two(self, capsys):
        assert main(["berezin"]) == 2
        assert "measure" in capsys.readouterr().err

    def test_point_masses_pairing_is_two(self, tmp_path, capsys):
        config = write(tmp_path, "pm.json", MINIMAL)
        assert main(["trace-pairing", "--config", config]) == 2
        capsys.readouterr()

    def test_bad_counterexample_exponents_is_two(self, tmp_path, capsys):
        config = write(tmp_path, "e.json",
                       '{"exponents": {"p": 4.0, "q": 1.3333333333333333}}')
        assert main(["counterexample", "--config", config]) == 2
        assert "exponents" in capsys.readouterr().err


class TestCsvOutput:

    def test_csv_embeds_version_and_hash(self, tmp_path, capsys):
        config = write(tmp_path, "g.json", GAUSS)
        assert main(["trace-check", "--config", config,
                     "--format", "csv"]) == 0
        lines = capsys.readouterr().out.splitlines()
        assert lines[0].startswith("# focklab ")
        assert "config_sha256=" in lines[0]
        assert lines[1] == "name,value"
        names = [line.split(",")[0] for line in lines[2:]]
        assert "trace_re" in names

    def test_csv_floats_round_trip(self, tmp_path, capsys):
        config = write(tmp_path, "pm.json", MINIMAL)
        assert main(["toeplitz", "--config", config, "--format", "csv",
                     "--truncation", "12"]) == 0
        lines = capsys.readouterr().out.splitlines()
        assert lines[1] == "m,n,re,im"
        m, n, re, im = lines[2].split(",")
        assert (int(m), int(n)) == (0, 0)
        assert float(re) == pytest.approx(1.0 / 3.141592653589793, rel=1e-12)


class TestSubcommands:

    def test_counterexample_defaults(self, capsys):
        assert main(["counterexample"]) == 0
        report = json.loads(capsys.readouterr().out)
        assert report["data"]["indices"] == [16 ** k for k in range(1, 9)]
        assert report["data"]["divergence_ratios"][0] == pytest.approx(
            1.805, abs=1e-12)
        assert report["passed"] is True

    def test_truncation_override(self, tmp_path, capsys):
        config = write(tmp_path, "pm.json", MINIMAL)
        assert main(["toeplitz", "--config", config,
                     "--truncation", "16"]) == 0
        report = json.loads(capsys.readouterr().out)
        assert report["data"]["truncation"] == 16
        assert len(report["data"]["entries"]) == 16

    def test_seed_changes_probe_point(self, capsys):
        assert main(["kernel-continuity"]) == 0
        base = json.loads(capsys.readouterr().out)
        assert main(["kernel-continuity", "--seed", "7"]) == 0
        other = json.loads(capsys.readouterr().out)
        assert base["seed"] is None and other["seed"] == 7
        assert (base["data"]["z0_re"], base["data"]["z0_im"]) != \
            (other["data"]["z0_re"], other["data"]["z0_im"])
        assert base["passed"] and other["passed"]

    def test_rigidity_point_mass_bracket(self, tmp_path, capsys):
        config = write(tmp_path, "pm.json", MINIMAL)
        assert main(["rigidity", "--config", config]) == 0
        report = json.loads(capsys.readouterr().out)
        assert report["data"]["within_slack"] is True
        row = report["data"]["rows"][0]
        assert row["q"] <= row["p"]

    def test_lattice_approx_rows(self, tmp_path, capsys):
        config = write(
            tmp_path, "disk.json",
            '{"measure": {"type": "uniform_disk", "radius": 1.0}, '
            '"r_values": [1.0, 0.5, 0.25]}')
        assert main(["lattice-approx", "--config", config]) == 0
        report = json.loads(capsys.readouterr().out)
        errors = [row["s1_error"] for row in report["data"]["rows"]]
        assert errors == sorted(errors, reverse=True)

    def test_schatten_identity_bounds(self, tmp_path, capsys):
        config = write(tmp_path, "g.json", GAUSS)
        assert main(["schatten", "--config", config]) == 0
        report = json.loads(capsys.readouterr().out)
        data = report["data"]
        assert data["transform_l1"] <= data["schatten_1"] + 1e-8
        assert len(data["singular_values"]) == 64
