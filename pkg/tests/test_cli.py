"""Command-line surface: exit codes, artifacts, manifests, and precedence."""

import hashlib
import json
import os

import pytest

from wreathlab import cli


def run_cli(capsys, *argv):
    code = cli.run(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def read_json(out: str):
    return json.loads(out)


class TestExitCodes:
    def test_unknown_flag_is_usage_error(self, capsys):
        code, _, err = run_cli(capsys, "metric", "--frobnicate")
        assert code == 1
        assert "error" in err

    def test_missing_subcommand(self, capsys):
        code, _, _ = run_cli(capsys)
        assert code == 1

    def test_bad_element_encoding(self, capsys):
        code, _, err = run_cli(capsys, "metric", "--a", "zzz", "--b", "0;")
        assert code == 1
        assert "offset" in err

    def test_help_exits_zero(self, capsys):
        code, out, _ = run_cli(capsys, "--help")
        assert code == 0
        assert "metric" in out

    def test_missing_config_file(self, capsys):
        code, _, err = run_cli(capsys, "--config", "/nonexistent/cfg", "bound", "--beta", "0.75")
        assert code == 1


class TestMetricCommand:
    def test_witness_json(self, capsys):
        code, out, _ = run_cli(capsys, "metric", "--a", "0; 2:3", "--b", "0;")
        assert code == 0
        payload = read_json(out)
        assert payload["total"] == 7
        assert payload["lampCost"] == 3
        assert payload["travelCost"] == 4

    def test_oracle_cross_check(self, capsys):
        code, out, _ = run_cli(capsys, "metric", "--a", "0;", "--b", "1; 0:1, 1:-2", "--oracle")
        assert code == 0
        payload = read_json(out)
        assert payload["oracle"] == payload["total"]


class TestBoundCommand:
    def test_known_value(self, capsys):
        code, out, _ = run_cli(capsys, "bound", "--beta", "0.75")
        assert code == 0
        assert "0.666666" in out
        assert "2/3" in out

    def test_iterated_table(self, capsys):
        code, out, _ = run_cli(capsys, "bound", "--iterated-k", "3")
        assert code == 0
        assert "4/7" in out

    def test_requires_an_argument(self, capsys):
        code, _, _ = run_cli(capsys, "bound")
        assert code == 1


class TestWalkCommand:
    def test_artifacts_and_manifest(self, capsys, tmp_path):
        out_dir = str(tmp_path / "w")
        code, out, _ = run_cli(
            capsys, "walk", "--group", "z", "--trials", "25", "--tmax", "256",
            "--seed", "5", "--out", out_dir,
        )
        assert code == 0
        names = sorted(os.listdir(out_dir))
        assert names == [
            "run_manifest.json", "walk_samples.csv", "walk_summary.json", "walk_tail.csv",
        ]
        manifest = json.load(open(os.path.join(out_dir, "run_manifest.json")))
        for name, digest in manifest["outputs"].items():
            body = open(os.path.join(out_dir, name), "rb").read()
            assert hashlib.sha256(body).hexdigest() == digest
        header = open(os.path.join(out_dir, "walk_samples.csv")).readline().strip()
        assert header == "group,t,trial,displacement"
        header = open(os.path.join(out_dir, "walk_tail.csv")).readline().strip()
        assert header == "t,c,beta,deltaHat,stderr"

    def test_reruns_are_byte_identical(self, capsys, tmp_path):
        args = ("walk", "--group", "zwrz", "--trials", "10", "--tmax", "128", "--seed", "3")
        dirs = [str(tmp_path / "a"), str(tmp_path / "b")]
        for d in dirs:
            assert cli.run(list(args) + ["--out", d]) == 0
        capsys.readouterr()
        for name in ("walk_samples.csv", "walk_tail.csv", "walk_summary.json"):
            bodies = [open(os.path.join(d, name), "rb").read() for d in dirs]
            assert bodies[0] == bodies[1]

    def test_summary_contents(self, capsys, tmp_path):
        code, out, _ = run_cli(
            capsys, "walk", "--group", "z", "--trials", "30", "--tmax", "512",
            "--seed", "2", "--out", str(tmp_path / "w"),
        )
        payload = read_json(out)
        assert payload["group"] == "z"
        assert payload["trials"] == 30
        assert 0.3 <= payload["betaHat"] <= 0.7
        assert set(payload["deltaHat"]) == {str(t) for t in payload["times"]}


class TestConfigPrecedence:
    def write_config(self, tmp_path, text):
        path = tmp_path / "cfg.txt"
        path.write_text(text)
        return str(path)

    def test_config_file_supplies_values(self, capsys, tmp_path):
        cfg = self.write_config(tmp_path, "trials = 7\nseed = 4\n# comment\n")
        code, out, _ = run_cli(
            capsys, "--config", cfg, "walk", "--group", "z", "--tmax", "256",
            "--out", str(tmp_path / "w"),
        )
        payload = read_json(out)
        assert (payload["seed"], payload["trials"]) == (4, 7)

    def test_flags_beat_config(self, capsys, tmp_path):
        cfg = self.write_config(tmp_path, "trials = 7\nseed = 4\n")
        code, out, _ = run_cli(
            capsys, "--config", cfg, "walk", "--group", "z", "--tmax", "256",
            "--seed", "9", "--trials", "11", "--out", str(tmp_path / "w"),
        )
        payload = read_json(out)
        assert (payload["seed"], payload["trials"]) == (9, 11)

    def test_env_seed_used_when_unset(self, capsys, tmp_path, monkeypatch):
        monkeypatch.setenv("WREATH_SEED", "123")
        code, out, _ = run_cli(
            capsys, "walk", "--group", "z", "--tmax", "256", "--trials", "5",
            "--out", str(tmp_path / "w"),
        )
        assert read_json(out)["seed"] == 123

    def test_config_beats_env_seed(self, capsys, tmp_path, monkeypatch):
        monkeypatch.setenv("WREATH_SEED", "123")
        cfg = self.write_config(tmp_path, "seed = 4\n")
        code, out, _ = run_cli(
            capsys, "--config", cfg, "walk", "--group", "z", "--tmax", "256",
            "--trials", "5", "--out", str(tmp_path / "w"),
        )
        assert read_json(out)["seed"] == 4

    def test_malformed_config(self, capsys, tmp_path):
        cfg = self.write_config(tmp_path, "no equals sign here\n")
        code, _, err = run_cli(capsys, "--config", cfg, "bound", "--beta", "0.75")
        assert code == 1


class TestMarkovCommands:
    def test_verify_small(self, capsys):
        code, out, _ = run_cli(
            capsys, "markov", "verify", "--chains", "15", "--max-states", "6",
            "--tmax", "16", "--seed", "2",
        )
        assert code == 0
        payload = read_json(out)
        assert payload["pass"] is True
        assert payload["maxViolation"] <= payload["tolerance"]

    def test_delayed_interval(self, capsys):
        code, out, _ = run_cli(capsys, "markov", "delayed", "--host", "z", "--subset", "0:2")
        assert code == 0
        payload = read_json(out)
        assert payload["states"] == 3
        assert all(v <= 1e-12 for v in payload["residuals"].values())

    def test_delayed_bad_spec(self, capsys):
        code, _, _ = run_cli(capsys, "markov", "delayed", "--host", "z", "--subset", "0:1:2")
        assert code == 1

    def test_replay_interval(self, capsys):
        code, out, _ = run_cli(
            capsys, "markov", "replay", "--host", "z", "--F=-20:20", "--t", "4"
        )
        assert code == 0
        payload = read_json(out)
        assert payload["upper"] == 4.0
        assert payload["chainLower"] <= payload["markovLhs"] <= payload["upper"]

    def test_replay_wreath(self, capsys):
        code, out, _ = run_cli(
            capsys, "markov", "replay", "--host", "zwrz-trunc", "--F", "1:1:1", "--t", "1"
        )
        assert code == 0
        payload = read_json(out)
        assert payload["coreSize"] == 81
        assert payload["fattenedSize"] == 189


class TestEmbedCommands:
    def test_norms(self, capsys):
        code, out, _ = run_cli(capsys, "embed", "norms", "--alpha", "0.45")
        assert code == 0
        payload = read_json(out)
        assert payload["generators"]["lamp+"]["norm"] == 1.0
        assert payload["lipschitz"] >= 1.0

    def test_pair(self, capsys):
        code, out, _ = run_cli(
            capsys, "embed", "pair", "--a", "0; 0:1", "--b", "0;", "--alpha", "0.45"
        )
        assert code == 0
        payload = read_json(out)
        assert payload["norm"] == 1.0
        assert payload["distance"] == 1

    def test_scan_with_family_sampler(self, capsys, tmp_path):
        out_dir = str(tmp_path / "scan")
        code, out, _ = run_cli(
            capsys, "embed", "scan", "--alpha", "0.45", "--sampler", "ball:3",
            "--count", "100", "--out", out_dir,
        )
        assert code == 0
        payload = read_json(out)
        assert payload["fittedLowerConstant"] > 0
        header = open(os.path.join(out_dir, "compression_observations.csv")).readline().strip()
        assert header == "alpha,distance,norm,errorBound"

    def test_scan_rejects_unknown_sampler(self, capsys, tmp_path):
        code, _, _ = run_cli(
            capsys, "embed", "scan", "--sampler", "mystery", "--out", str(tmp_path / "s")
        )
        assert code == 1

    def test_alpha_out_of_range(self, capsys):
        code, _, err = run_cli(capsys, "embed", "norms", "--alpha", "0.75")
        assert code == 1


class TestPipeline:
    def test_reduced_run(self, capsys, tmp_path):
        out_dir = str(tmp_path / "pipe")
        code, out, _ = run_cli(
            capsys, "pipeline", "--trials", "200", "--tmax", "4096",
            "--seed", "7", "--out", out_dir,
        )
        assert code == 0
        payload = read_json(out)
        assert payload["pass"] is True
        assert all(check["pass"] for check in payload["checks"])
        names = sorted(os.listdir(out_dir))
        assert "pipeline_summary.json" in names
        assert "run_manifest.json" in names
