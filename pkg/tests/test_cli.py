import json
from pathlib import Path

import pytest

from sidehole.cli import (EXIT_ASSERTION, EXIT_OK, EXIT_USAGE, main)

SINGLE_HOLE = {
    "tube": {"left_end": "open", "right_end": "open"},
    "holes": [{"position_a": 0.7, "delta": 2.0}],
    "alpha": 2.3186,
}

THREE_HOLES = {
    "holes": [{"position_a": 0.4}, {"position_a": 0.55}, {"position_a": 0.7}],
    "alpha": 2.3186,
}


@pytest.fixture()
def cfg_file(tmp_path):
    p = tmp_path / "cfg.json"
    p.write_text(json.dumps(SINGLE_HOLE))
    return str(p)


def test_spectrum_outputs(tmp_path, cfg_file):
    out = tmp_path / "out"
    assert main(["spectrum", "--config", cfg_file, "--out", str(out),
                 "--count", "3"]) == EXIT_OK
    for name in ("spectrum.csv", "spectrum.json", "secular_curve.csv"):
        assert (out / name).exists()
    data = json.loads((out / "spectrum.json").read_text())
    assert len(data["mu"]) == 3
    sha = data["manifest"]["sha256"]
    # every file carries the same manifest hash
    assert (out / "spectrum.csv").read_text().splitlines()[0] \
        == f"# manifest_sha256={sha}"
    assert (out / "secular_curve.csv").read_text().splitlines()[0] \
        == f"# manifest_sha256={sha}"


def test_reproducibility(tmp_path, cfg_file):
    out1, out2 = tmp_path / "a", tmp_path / "b"
    assert main(["spectrum", "--config", cfg_file, "--out", str(out1)]) == EXIT_OK
    assert main(["spectrum", "--config", cfg_file, "--out", str(out2)]) == EXIT_OK
    for name in ("spectrum.csv", "spectrum.json", "secular_curve.csv"):
        assert (out1 / name).read_bytes() == (out2 / name).read_bytes()


def test_usage_errors(tmp_path, cfg_file):
    out = str(tmp_path / "out")
    assert main(["spectrum", "--config", cfg_file, "--out", out,
                 "--count", "0"]) == EXIT_USAGE
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"alpha": 2.0, "mystery": 1}))
    assert main(["spectrum", "--config", str(bad), "--out", out]) == EXIT_USAGE
    invalid = tmp_path / "invalid.json"
    invalid.write_text(json.dumps({"alpha": -1.0}))
    assert main(["spectrum", "--config", str(invalid), "--out", out]) == EXIT_USAGE
    # no subcommand / bad flag goes through argparse -> usage exit code
    assert main(["spectrum", "--nonsense"]) == EXIT_USAGE


def test_flag_overrides_config(tmp_path, cfg_file):
    out = tmp_path / "out"
    assert main(["spectrum", "--config", cfg_file, "--out", str(out),
                 "--alpha", "0.000001", "--count", "2"]) == EXIT_OK
    data = json.loads((out / "spectrum.json").read_text())
    # alpha ~ 0 means kappa ~ 0: the unperturbed spectrum k*pi
    assert abs(data["mu"][0] - 3.141592653589793) < 1e-4


def test_fingering(tmp_path):
    cfg = tmp_path / "three.json"
    cfg.write_text(json.dumps(THREE_HOLES))
    out = tmp_path / "out"
    assert main(["fingering", "--config", str(cfg), "--out", str(out),
                 "--fingering", "xho"]) == EXIT_OK
    data = json.loads((out / "fingering.json").read_text())
    assert data["fingering"] == "xho"
    assert len(data["notes"]) == 4
    assert main(["fingering", "--config", str(cfg), "--out", str(out),
                 "--fingering", "xxq"]) == EXIT_USAGE
    assert main(["fingering", "--config", str(cfg), "--out", str(out),
                 "--fingering", "xx"]) == EXIT_USAGE


def test_oracle1d(tmp_path, cfg_file):
    out = tmp_path / "out"
    assert main(["oracle1d", "--config", cfg_file, "--out", str(out),
                 "--n", "500", "--count", "2"]) == EXIT_OK
    data = json.loads((out / "oracle1d.json").read_text())
    assert data["method"] == "fd_oracle"
    assert abs(data["mu"][0] - 3.73696078) < 1e-5


def test_verify3d_trend_failure_exit_code(tmp_path):
    # no-hole tube on the coarse end of the epsilon range: the k=1 deviation
    # from pi^2 grows from eps=0.4 to eps=0.3, so the trend check must fail
    cfg = tmp_path / "nohole.json"
    cfg.write_text(json.dumps({"alpha": 2.3186}))
    out = tmp_path / "out"
    code = main(["verify3d", "--config", str(cfg), "--out", str(out),
                 "--epsilons", "0.4,0.3", "--m", "1", "--trend-slack", "0"])
    assert code == EXIT_ASSERTION
    assert (out / "sweep.json").exists()


def test_verify3d_usage_errors(tmp_path, cfg_file):
    out = str(tmp_path / "out")
    assert main(["verify3d", "--config", cfg_file, "--out", out,
                 "--epsilons", "0.3,oops"]) == EXIT_USAGE
    assert main(["verify3d", "--config", cfg_file, "--out", out,
                 "--epsilons", "0.3,0.2", "--m", "0"]) == EXIT_USAGE


def test_alpha_cache(tmp_path, monkeypatch):
    cache = tmp_path / "cache.json"
    monkeypatch.setenv("SIDEHOLE_CACHE", str(cache))
    out = tmp_path / "out"
    args = ["alpha", "--ladder-R", "2,4,8", "--ladder-h", "0.25,0.125,0.0625",
            "--no-oracle", "--out", str(out)]
    assert main(args) == EXIT_OK
    assert cache.exists()
    first = (out / "alpha.json").read_text()
    # second run must be a cache hit with identical numbers
    assert main(args) == EXIT_OK
    data = json.loads((out / "alpha.json").read_text())
    assert data["alpha"] == json.loads(first)["alpha"]
    assert data["manifest"]["cache_hit"] is True
    assert main(["alpha", "--ladder-R", "2,4", "--out", str(out)]) == EXIT_USAGE
