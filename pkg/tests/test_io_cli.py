import json
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hyperwalk.cli import (EXIT_CONFIG, EXIT_IO, EXIT_MODEL, EXIT_OK, EXIT_USAGE, EXIT_VERIFY, main,
                           resolve_threads)
from hyperwalk.core import SamplePath
from hyperwalk.exceptions import ConfigError, PathFormatError
from hyperwalk.io import (dumps_json, fmt, parse_path, read_csv, read_kernel_csv, read_path, sha256_file,
                          write_kernel_csv, write_path)


def write_config(tmp_path, **overrides):
    config = {"phi": 0.7, "gamma": 0.6, "n": 4, "steps": 10, "latent": {"variant": "definetti", "a": 2, "b": 3}}
    config.update(overrides)
    file = tmp_path / "config.json"
    file.write_text(json.dumps(config))
    return file


class TestIo:
    def test_fmt(self):
        assert fmt(0.1) == "0.10000000000000001"
        assert fmt(None) == "" and fmt(float("nan")) == "" and fmt(True) == "true" and fmt(3) == "3"

    @settings(max_examples=30, deadline=None)
    @given(n=st.integers(1, 12), steps=st.integers(1, 8), form=st.sampled_from(["text", "json"]),
           seed=st.integers(0, 10**6))
    def test_path_round_trip(self, n, steps, form, seed, tmp_path_factory):
        states = np.random.default_rng(seed).integers(0, 2, (steps, n)).astype(np.uint8)
        file = tmp_path_factory.mktemp("p") / "path"
        write_path(file, SamplePath(states), form)
        assert np.array_equal(read_path(file).states, states)

    @pytest.mark.parametrize("text,line", [("0101\n0111\n01a1\n", 3), ("0101\n011\n", 2), ("0101\n\n0101\n", 2),
                                           ('["01", "0x"]', 2)])
    def test_malformed_lines_are_named(self, text, line):
        with pytest.raises(PathFormatError) as info:
            parse_path(text)
        assert info.value.line == line and f"line {line}" in str(info.value)

    def test_empty_path(self):
        with pytest.raises(PathFormatError):
            parse_path("\n\n")

    def test_kernel_csv(self, tmp_path):
        matrix = np.array([[0.25, 0.75], [1 / 3, 2 / 3]])
        file = write_kernel_csv(tmp_path / "k.csv", matrix)
        raw = file.read_bytes()
        assert b"\r" not in raw and raw.endswith(b"\n")
        labels, back = read_kernel_csv(file)
        assert labels == ["0", "1"] and np.array_equal(back, matrix)

    def test_json_is_deterministic(self):
        assert dumps_json({"b": np.float64(0.1), "a": np.arange(2)}) == dumps_json({"a": [0, 1], "b": 0.1})


def test_thread_resolution(monkeypatch):
    monkeypatch.setenv("HYPERWALK_THREADS", "3")
    assert resolve_threads(None) == 3 and resolve_threads(2) == 2
    monkeypatch.setenv("HYPERWALK_THREADS", "x")
    with pytest.raises(ConfigError):
        resolve_threads(None)
    monkeypatch.delenv("HYPERWALK_THREADS")
    assert resolve_threads(None) >= 1


class TestCli:
    def test_kernel_with_verify(self, tmp_path):
        assert main(["kernel", "--config", str(write_config(tmp_path)), "--out", str(tmp_path), "--verify"]) == 0
        verify = json.loads((tmp_path / "verify.json").read_text())
        assert verify["passed"] and verify["max_deviation"] < 1e-12
        header, rows = read_csv(tmp_path / "kernel.csv")
        assert len(rows) == 5 and np.allclose([sum(map(float, r[1:])) for r in rows], 1)

    def test_full_kernel_and_manifest(self, tmp_path):
        cfg = write_config(tmp_path, n=3)
        assert main(["kernel", "--config", str(cfg), "--out", str(tmp_path), "--mode", "full"]) == 0
        manifest = json.loads((tmp_path / "manifest.json").read_text())
        assert manifest["command"] == "kernel"
        for entry in manifest["outputs"]:
            assert sha256_file(tmp_path / entry["file"]) == entry["sha256"]
        labels, matrix = read_kernel_csv(tmp_path / "kernel.csv")
        assert labels[:2] == ["000", "001"] and matrix.shape == (8, 8)

    def test_full_kernel_too_large(self, tmp_path):
        cfg = write_config(tmp_path, n=13)
        assert main(["kernel", "--config", str(cfg), "--out", str(tmp_path), "--mode", "full"]) == EXIT_MODEL

    def test_config_errors(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text("{not json")
        assert main(["kernel", "--config", str(bad), "--out", str(tmp_path)]) == EXIT_CONFIG
        missing = write_config(tmp_path, latent={"variant": "nope"})
        assert main(["kernel", "--config", str(missing), "--out", str(tmp_path)]) == EXIT_CONFIG

    def test_parameter_domain(self, tmp_path):
        assert main(["kernel", "--config", str(write_config(tmp_path)), "--phi", "1.5",
                     "--out", str(tmp_path)]) == EXIT_MODEL

    def test_simulate_requires_seed(self, tmp_path):
        with pytest.raises(SystemExit) as info:
            main(["simulate", "--config", str(write_config(tmp_path)), "--out", str(tmp_path)])
        assert info.value.code == EXIT_USAGE

    def test_simulate_then_estimate(self, tmp_path, capsys):
        cfg = write_config(tmp_path, n=300, steps=60)
        sim = tmp_path / "sim"
        assert main(["simulate", "--config", str(cfg), "--seed", "5", "--out", str(sim)]) == 0
        for name in ("path_000.txt", "hamming_000.csv", "latent_000.csv", "manifest.json"):
            assert (sim / name).exists()
        est = tmp_path / "est"
        assert main(["estimate", str(sim / "path_000.txt"), "--out", str(est), "--reference", "2", "3"]) == 0
        report = json.loads((est / "report.json").read_text())
        assert abs(report["phi_hat"] - 0.7) < 0.05 and len(report["theta_hats"]) == 60
        assert report["ks_distance"] is not None and (est / "histogram.csv").exists()
        assert "phi_hat=" in capsys.readouterr().out

    def test_simulate_threads_are_byte_identical(self, tmp_path):
        cfg = write_config(tmp_path, n=50, steps=20, replicates=5)
        for threads in ("1", "4"):
            assert main(["simulate", "--config", str(cfg), "--seed", "9", "--threads", threads,
                         "--out", str(tmp_path / threads)]) == 0
        for r in range(5):
            for stem in ("path", "hamming", "latent"):
                name = f"{stem}_{r:03d}.{'txt' if stem == 'path' else 'csv'}"
                assert (tmp_path / "1" / name).read_bytes() == (tmp_path / "4" / name).read_bytes()

    def test_estimate_malformed_path(self, tmp_path, capsys):
        path = tmp_path / "p.txt"
        path.write_text("0101\n0110\n01z0\n")
        assert main(["estimate", str(path), "--out", str(tmp_path)]) == EXIT_IO
        assert "line 3" in capsys.readouterr().err

    def test_estimate_missing_file(self, tmp_path):
        assert main(["estimate", str(tmp_path / "nope.txt"), "--out", str(tmp_path)]) == EXIT_IO

    def test_estimate_needs_both_parameters(self, tmp_path):
        path = tmp_path / "p.txt"
        path.write_text("0101\n0110\n1100\n")
        assert main(["estimate", str(path), "--phi", "0.7", "--out", str(tmp_path)]) == EXIT_CONFIG
        assert main(["estimate", str(path), "--phi", "0.7", "--gamma", "0.6", "--out", str(tmp_path)]) == EXIT_OK

    def test_limits(self, tmp_path, capsys):
        cfg = write_config(tmp_path, n=100, c=0.5)
        assert main(["limits", "--config", str(cfg), "--out", str(tmp_path)]) == 0
        report = json.loads(capsys.readouterr().out)
        assert report["stationary_coordinate_prob"] == json.loads((tmp_path / "limits.json").read_text())[
            "stationary_coordinate_prob"]
        header, rows = read_csv(tmp_path / "hermite_density.csv")
        assert header == ["v", "density"] and len(rows) == 201
        header, rows = read_csv(tmp_path / "mean_path.csv")
        assert header == ["t", "mean_from_0", "mean_from_1"] and float(rows[0][2]) == 1.0

    def test_limits_extreme_point(self, tmp_path, capsys):
        cfg = write_config(tmp_path, n=1000, phi=0.6, gamma=0.7, latent={"variant": "extreme", "M": 5})
        assert main(["limits", "--config", str(cfg), "--out", str(tmp_path)]) == 0
        report = json.loads(capsys.readouterr().out)
        assert report["extreme_point"]["poisson_rate"] == pytest.approx(5 / (1 - 0.6 / 0.7))

    def test_verify_and_perturbation(self, tmp_path):
        assert main(["verify", "--suite", "kernel", "--suite", "lumping", "--out", str(tmp_path)]) == 0
        report = json.loads((tmp_path / "verify_report.json").read_text())
        assert report["passed"] and set(report["suites"]) == {"kernel", "lumping"}
        assert main(["verify", "--suite", "reversibility", "--perturb-kappa", "0.01",
                     "--out", str(tmp_path)]) == EXIT_VERIFY


def test_console_script_version():
    result = subprocess.run([sys.executable, "-m", "hyperwalk", "--version"], capture_output=True, text=True)
    assert result.returncode == 0 and "0.1.0" in result.stdout
