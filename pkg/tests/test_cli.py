import json

import numpy as np
import pytest

from bosefinetti import cli
from bosefinetti.cli import main
from bosefinetti.io import operator_from_dict
from bosefinetti.montecarlo import WORKERS_ENV


@pytest.fixture(autouse=True)
def _workers(monkeypatch):
    monkeypatch.setenv(WORKERS_ENV, "1")


def write(tmp_path, obj, name="cfg.json"):
    path = tmp_path / name
    path.write_text(obj if isinstance(obj, str) else json.dumps(obj))
    return str(path)


def manifest(path):
    return json.loads((path.parent / (path.name + ".manifest.json")).read_text())


def test_sweep_uniform_csv(tmp_path):
    cfg = write(tmp_path, {"schema": 1, "ensemble": {"kind": "uniform", "d": 1}, "m": 1, "n_list": [8, 16, 32]})
    out = tmp_path / "sweep.csv"
    assert main(["sweep", cfg, "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert len(lines) == 4
    dists = [float(line.split(",")[4]) for line in lines[1:]]
    assert max(dists) <= 1e-14
    man = manifest(out)
    assert man["truncated"] is False and man["config"]["n_list"] == [8, 16, 32]


def test_limit_uniform_json(tmp_path):
    cfg = write(tmp_path, {"schema": 1, "ensemble": {"kind": "uniform", "d": 1}, "m": 2})
    out = tmp_path / "limit.json"
    assert main(["limit", cfg, "--out", str(out)]) == 0
    rho = operator_from_dict(json.loads(out.read_text())["operator"])
    assert np.allclose(rho, np.eye(3) / 3)


def test_reduce_noninteracting(tmp_path):
    cfg = write(
        tmp_path,
        {"schema": 1, "ensemble": {"kind": "noninteracting", "d": 1, "n": 2, "beta": 2 * np.log(2), "epsilons": [0, 1]}, "m": 1},
    )
    out = tmp_path / "reduce.json"
    assert main(["reduce", cfg, "--out", str(out)]) == 0
    rho = operator_from_dict(json.loads(out.read_text())["operator"])
    assert np.allclose(rho, np.diag([5 / 7, 2 / 7]))


@pytest.mark.parametrize(
    "content",
    [
        "{not json",
        "[1, 2]",
        {"schema": 1, "ensemble": {"kind": "uniform", "d": 1}, "bogus": 1},
        {"schema": 2, "ensemble": {"kind": "uniform", "d": 1}},
        {"schema": 1, "ensemble": {"kind": "noninteracting", "d": 1, "epsilons": [0]}},
        {"schema": 1, "command": "limit", "ensemble": {"kind": "uniform", "d": 1}, "n_list": [4]},
    ],
)
def test_invalid_config_exit_2_without_artifacts(tmp_path, capsys, content):
    cfg = write(tmp_path, content)
    out = tmp_path / "data" / "out.csv"
    assert main(["sweep", cfg, "--out", str(out)]) == 2
    assert not out.exists()
    assert "cfg.json" in capsys.readouterr().err


def test_missing_n_list_is_invalid(tmp_path):
    cfg = write(tmp_path, {"schema": 1, "ensemble": {"kind": "uniform", "d": 1}})
    assert main(["sweep", cfg, "--out", str(tmp_path / "x.csv")]) == 2


def test_capacity_exit_3(tmp_path):
    cfg = write(tmp_path, {"schema": 1, "ensemble": {"kind": "uniform", "d": 12, "n": 40}, "m": 1})
    assert main(["reduce", cfg, "--out", str(tmp_path / "r.json")]) == 3


def test_verify_claim_pass_and_threshold_failure(tmp_path):
    base = {
        "schema": 1,
        "ensemble": {"kind": "meanfield", "d": 1, "T": [[0, 0.2], [0.2, 1]], "V": [[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]]},
        "m": 1,
        "n_list": [4, 6, 8],
    }
    out = tmp_path / "claim.csv"
    assert main(["verify", "claim", write(tmp_path, base), "--out", str(out)]) == 0
    assert manifest(out)["passed"] is True
    failing = dict(base, verify={"j": 0}, tolerances={"claim_j0": -1.0})
    out2 = tmp_path / "claim0.csv"
    assert main(["verify", "claim", write(tmp_path, failing, "f.json"), "--out", str(out2)]) == 4
    assert manifest(out2)["passed"] is False


def test_verify_series_and_free_energy(tmp_path):
    series = {"schema": 1, "ensemble": {"kind": "meanfield", "d": 1, "n": 8, "T": [[0, 0], [0, 1]]}, "m": 1, "verify": {"order": 4, "beta": 0.5}}
    assert main(["verify", "series", write(tmp_path, series), "--out", str(tmp_path / "s.csv")]) == 0
    free = {
        "schema": 1,
        "ensemble": {"kind": "meanfield", "d": 1, "T": [[0, 0], [0, 1]]},
        "verify": {"beta": 1.0, "perturbations": 3},
        "mc": {"samples": 50_000, "seed": 1},
    }
    assert main(["verify", "free-energy", write(tmp_path, free, "f.json"), "--out", str(tmp_path / "f.csv")]) == 0


def test_sample_overrides_and_manifest(tmp_path):
    cfg = write(tmp_path, {"schema": 1, "ensemble": {"kind": "uniform", "d": 1}, "m": 1, "mc": {"samples": 1000, "seed": 1}})
    out = tmp_path / "sample.json"
    assert main(["sample", cfg, "--seed", "5", "--samples", "4000", "--out", str(out)]) == 0
    data = json.loads(out.read_text())
    assert data["seed"] == 5 and data["samples"] == 4000
    man = manifest(out)
    assert man["config"]["mc"] == {"samples": 4000, "seed": 5}
    assert set(man["versions"]) >= {"numpy", "scipy", "python"}

    # The manifest config alone reproduces the data file.
    rerun = tmp_path / "rerun.json"
    rerun.write_text(json.dumps(man["config"]))
    out2 = tmp_path / "sample2.json"
    assert main(["sample", str(rerun), "--out", str(out2)]) == 0
    assert out.read_bytes() == out2.read_bytes()


def test_interrupt_flushes_partial_results(tmp_path, monkeypatch):
    real = cli.iter_sweep

    def interrupted(*args, **kwargs):
        gen = real(*args, **kwargs)
        yield next(gen)
        raise KeyboardInterrupt

    monkeypatch.setattr(cli, "iter_sweep", interrupted)
    cfg = write(tmp_path, {"schema": 1, "ensemble": {"kind": "uniform", "d": 1}, "n_list": [4, 8, 16]})
    out = tmp_path / "partial.csv"
    assert main(["sweep", cfg, "--out", str(out)]) == 130
    assert len(out.read_text().splitlines()) == 2
    assert manifest(out)["truncated"] is True
