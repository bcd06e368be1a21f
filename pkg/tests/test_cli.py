import csv
import io
import json
import math
import subprocess
import sys

import jsonschema
import pytest

from qteleport.cli import CONFIG_SCHEMA, EXIT_CONFIG, EXIT_DOMAIN, ConfigError, ExperimentConfig, main

GENERIC = ["0.8", "0.4", "0.3", str(math.sqrt(0.11))]


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


class TestConfig:
    def test_defaults_round_trip(self):
        cfg = ExperimentConfig.from_dict({})
        doc = cfg.to_dict()
        jsonschema.validate(doc, CONFIG_SCHEMA)
        assert ExperimentConfig.from_dict(doc) == cfg

    def test_explicit_input(self):
        doc = {"channel": [0.5] * 4, "input": [[0.5, 0], [0, 0.5], [-0.5, 0], [0.5, 0]], "x": 1.2, "seed": 3}
        cfg = ExperimentConfig.from_dict(doc)
        assert cfg.input[1] == 0.5j
        jsonschema.validate(cfg.to_dict(), CONFIG_SCHEMA)

    @pytest.mark.parametrize(
        "doc, field",
        [
            ({"channel": [0.5, 0.5, 0.5]}, "channel"),
            ({"channel": [0.5, 0.5, 0.5, 0.6]}, "channel"),
            ({"input": [[1, 0], [1, 0], [0, 0], [0, 0]]}, "input"),
            ({"x": -1}, "x"),
            ({"trials": 0}, "trials"),
            ({"seed": -1}, "seed"),
            ({"format": "xml"}, "format"),
            ({"colour": 1}, "colour"),
        ],
    )
    def test_rejections(self, doc, field):
        with pytest.raises(ConfigError) as info:
            ExperimentConfig.from_dict(doc)
        assert info.value.field == field


class TestTeleport:
    def test_uniform_channel(self, capsys):
        code, out, _ = run(capsys, "teleport", "--channel", "0.5", "0.5", "0.5", "0.5", "--trials", "200")
        assert code == 0
        doc = json.loads(out)
        jsonschema.validate(doc["config"], CONFIG_SCHEMA)
        assert doc["result"]["conclusive_rate"] == 1.0
        assert doc["result"]["x_used"] == 1.0

    def test_deterministic_output(self, capsys, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"channel": [float(v) for v in GENERIC], "input": "random", "x": "auto", "trials": 500, "seed": 11, "format": "json"}))
        outputs = []
        target = tmp_path / "result.json"
        for _ in range(2):
            assert run(capsys, "teleport", "--config", str(cfg), "--out", str(target), "--quiet")[0] == 0
            outputs.append(target.read_bytes())
            target.unlink()
        assert outputs[0] == outputs[1]

    def test_seed_changes_result(self, capsys):
        docs = [json.loads(run(capsys, "teleport", "--channel", *GENERIC, "--seed", s)[1]) for s in ("1", "2")]
        assert docs[0]["input_state"] != docs[1]["input_state"]

    def test_csv(self, capsys):
        code, out, _ = run(capsys, "teleport", "--channel", *GENERIC, "--format", "csv", "--trials", "50")
        assert code == 0 and out.startswith("# schema_version=1\n")
        rows = list(csv.DictReader(io.StringIO(out.split("\n", 1)[1])))
        assert rows[0]["trials"] == "50"

    def test_exit_codes(self, capsys):
        code, _, err = run(capsys, "teleport", "--channel", "0.5", "0.5", "0.5", "0.6")
        assert code == EXIT_CONFIG and "channel" in err
        code, _, err = run(capsys, "teleport", "--channel", *GENERIC, "--x", "0.5")
        assert code == EXIT_DOMAIN and "P5" in err
        code, _, _ = run(capsys, "teleport", "--input", "1,0", "0", "0")
        assert code == EXIT_CONFIG


class TestOtherCommands:
    def test_min_x_text(self, capsys):
        code, out, _ = run(capsys, "min-x", "0.5", "0.5", "0.5", "0.5")
        assert code == 0 and out.splitlines()[0] == "min_x = 1.000000000000"

    def test_min_x_json(self, capsys):
        code, out, _ = run(capsys, "min-x", *GENERIC, "--format", "json")
        doc = json.loads(out)
        assert abs(doc["min_x"] - 1.5864788732394) < 1e-12
        assert len(doc["min_eigenvalues"]) == 5 and min(doc["min_eigenvalues"]) > -1e-10

    def test_scan_x(self, capsys):
        code, out, _ = run(
            capsys, "scan", "--channel", *GENERIC, "--param", "x", "--start", "1.6", "--stop", "3.2", "--steps", "3", "--trials", "100"
        )
        assert code == 0
        rows = list(csv.DictReader(io.StringIO(out.split("\n", 1)[1])))
        assert [float(r["param"]) for r in rows] == [1.6, 2.4, 3.2]
        products = [float(r["param"]) * float(r["exact_success_prob"]) for r in rows]
        assert max(products) - min(products) < 1e-12

    def test_scan_skew_json(self, capsys):
        code, out, _ = run(
            capsys, "scan", "--param", "skew", "--start", "0.3", "--stop", str(math.pi / 4), "--steps", "2", "--trials", "10", "--format", "json"
        )
        rows = json.loads(out)["rows"]
        assert abs(rows[-1]["min_x"] - 1) < 1e-12 and rows[0]["min_x"] > 1

    def test_scan_skew_out_of_range(self, capsys):
        code, _, _ = run(capsys, "scan", "--param", "skew", "--start", "0", "--stop", "1", "--steps", "2")
        assert code == EXIT_CONFIG

    def test_chsh(self, capsys):
        code, out, _ = run(capsys, "chsh", "0", str(math.pi / 2), str(math.pi / 4), str(3 * math.pi / 4), "--format", "json")
        assert abs(json.loads(out)["S"] - 2 * math.sqrt(2)) < 1e-12

    def test_chsh_sampled_text(self, capsys):
        code, out, _ = run(capsys, "chsh", "0", "0", "0", "0", "--trials", "100", "--seed", "5")
        assert code == 0 and "S = 2\n" in out and "sampled" in out


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "qteleport", "min-x", "0.5", "0.5", "0.5", "0.5"], capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout.startswith("min_x = 1.0")


class TestDocumentedExamples:
    def test_uniform_x_scan_follows_inverse_x(self, capsys):
        code, out, _ = run(
            capsys, "scan", "--channel", "0.5", "0.5", "0.5", "0.5", "--param", "x", "--start", "1", "--stop", "4", "--steps", "4", "--trials", "50"
        )
        rows = list(csv.DictReader(io.StringIO(out.split("\n", 1)[1])))
        got = [float(r["exact_success_prob"]) for r in rows]
        assert max(abs(g - w) for g, w in zip(got, [1, 0.5, 1 / 3, 0.25])) < 1e-12

    def test_one_step_scan_matches_teleport(self, capsys):
        common = ["--channel", *GENERIC, "--trials", "300", "--seed", "4"]
        _, out, _ = run(capsys, "scan", *common, "--param", "x", "--start", "2", "--stop", "2", "--steps", "1", "--format", "json")
        row = json.loads(out)["rows"][0]
        _, out, _ = run(capsys, "teleport", *common, "--x", "2")
        res = json.loads(out)["result"]
        assert row["exact_success_prob"] == res["exact_success_probability"]
        assert row["conclusive_rate"] == res["conclusive_rate"]

    def test_uniform_seed_42(self, capsys):
        code, out, _ = run(capsys, "teleport", "--channel", "0.5", "0.5", "0.5", "0.5", "--x", "auto", "--trials", "1000", "--seed", "42")
        assert code == 0 and json.loads(out)["result"]["conclusive_rate"] == 1.0
        code, _, err = run(capsys, "teleport", "--channel", "0.5", "0.5", "0.5", "0.5", "--x", "0.5")
        assert code == EXIT_DOMAIN and "negative eigenvalue" in err

    def test_chsh_rounded_angles(self, capsys):
        _, out, _ = run(capsys, "chsh", "0", "1.5707963", "0.7853981", "2.3561944", "--format", "json")
        assert abs(json.loads(out)["S"] - 2 * math.sqrt(2)) < 1e-6

    def test_chsh_sampled_within_three_sigma(self, capsys):
        _, out, _ = run(
            capsys, "chsh", "0", str(math.pi / 2), str(math.pi / 4), str(3 * math.pi / 4), "--trials", "100000", "--seed", "1", "--format", "json"
        )
        doc = json.loads(out)
        assert abs(doc["sampled"]["S"] - doc["S"]) <= 3 * doc["sampled"]["S_stderr"]

    def test_stdout_is_clean_with_out(self, capsys, tmp_path):
        code, out, err = run(capsys, "min-x", "0.5", "0.5", "0.5", "0.5", "--out", str(tmp_path / "m.txt"))
        assert code == 0 and out == "" and "wrote" in err
