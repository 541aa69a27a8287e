import csv
import json

import numpy as np
import pytest

from palmcluster.cli import main
from palmcluster.estimator import ExtremalIndexEstimator, estimate
from palmcluster.experiment import (
    THREADS_ENV,
    ExperimentConfig,
    PalmClusterSimulator,
    default_threads,
    monte_carlo_se,
    plan_experiment,
    run,
    simulate_records,
)
from palmcluster.report import PK_HEADER, load_stats, write_pk_csv


def small_config(tmp_path, **kw):
    base = dict(
        characteristic="inradius-large", replicates=40, subsamples=4, seed=3, window_mode="local", out_dir=str(tmp_path)
    )
    base.update(kw)
    return ExperimentConfig(**base)


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def test_pk_csv_layout(tmp_path):
    run(small_config(tmp_path))
    rows = read_csv(tmp_path / "pk.csv")
    assert rows[0] == PK_HEADER
    assert [r[0] for r in rows[1:]] == [str(k) for k in range(1, 10)] + ["theta"]
    assert all(len(r) == 7 for r in rows)


def test_degenerate_stats_row(tmp_path):
    write_pk_csv(estimate([1] * 10, n_subsamples=5), tmp_path / "pk.csv")
    rows = read_csv(tmp_path / "pk.csv")
    assert [float(x) for x in rows[1]] == [1.0] * 7
    assert [float(x) for x in rows[2][1:]] == [0.0] * 6
    assert [float(x) for x in rows[-1][1:]] == [1.0] * 6


def test_summary_json_round_trip(tmp_path):
    res = run(small_config(tmp_path))
    data = json.loads((tmp_path / "summary.json").read_text())
    assert data["theta_hat"] == res.stats.theta_hat
    assert data["threshold"] == res.plan.v0
    assert data["config"]["characteristic"] == "inradius-large"
    assert set(data["guard_retries"]) >= {"replicates_retried", "total_retries"}
    assert "wall_time_s" in data["timing"]
    assert load_stats(tmp_path / "summary.json") == res.stats


def test_reports_deterministic(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    run(small_config(a, characteristic="circumradius-delaunay", emit_svg=True))
    run(small_config(b, characteristic="circumradius-delaunay", emit_svg=True))
    assert (a / "pk.csv").read_bytes() == (b / "pk.csv").read_bytes()
    assert (a / "boxplots.svg").read_bytes() == (b / "boxplots.svg").read_bytes()
    ja, jb = (json.loads((d / "summary.json").read_text()) for d in (a, b))
    for j in (ja, jb):
        j.pop("timing")
        j["config"].pop("out_dir")
    assert ja == jb


def test_svg_only_on_request(tmp_path):
    run(small_config(tmp_path / "plain"))
    assert not (tmp_path / "plain" / "boxplots.svg").exists()
    run(small_config(tmp_path / "svg", emit_svg=True))
    text = (tmp_path / "svg" / "boxplots.svg").read_text()
    assert text.lstrip().startswith("<?xml") and "<svg" in text


def test_parallel_matches_serial():
    plan = plan_experiment(ExperimentConfig(characteristic="circumradius-voronoi", window_mode="local", seed=5))
    serial = simulate_records(plan, 12, threads=1)
    parallel = simulate_records(plan, 12, threads=2)
    assert [r.cluster_size for r in serial] == [r.cluster_size for r in parallel]
    assert [r.replicate for r in parallel] == list(range(12))
    for r, s in zip(serial, parallel):
        np.testing.assert_array_equal(r.nuclei, s.nuclei)


def test_replicates_independent_of_start():
    plan = plan_experiment(ExperimentConfig(characteristic="circumradius-delaunay", window_mode="local", seed=8))
    whole = simulate_records(plan, 6)
    tail = simulate_records(plan, 3, start=3)
    assert [r.cluster_size for r in whole[3:]] == [r.cluster_size for r in tail]


def test_threads_env(monkeypatch):
    monkeypatch.setenv(THREADS_ENV, "3")
    assert default_threads() == 3
    monkeypatch.setenv(THREADS_ENV, "x")
    assert default_threads() == 1


def test_config_validation():
    with pytest.raises(ValueError):
        ExperimentConfig(replicates=101, subsamples=100)
    with pytest.raises(ValueError):
        ExperimentConfig(window_mode="huge")
    with pytest.raises(ValueError):
        ExperimentConfig(characteristic="volume")


def test_simulator_feeds_estimator():
    sim = PalmClusterSimulator(characteristic="inradius-large", window_mode="local", seed=1)
    sizes = sim.sample(20)
    assert sizes.dtype == np.int64 and np.all(sizes >= 1)
    est = ExtremalIndexEstimator(n_subsamples=4).fit(sizes)
    assert 0 < est.theta_ <= 1
    assert sim.get_params()["characteristic"] == "inradius-large"
    assert monte_carlo_se([1, 1, 1]) == 0.0


def test_cli_success(tmp_path, capsys):
    code = main(
        [
            "--characteristic", "inradius-small",
            "--replicates", "20",
            "--subsamples", "4",
            "--window-mode", "local",
            "--out-dir", str(tmp_path),
        ]
    )
    assert code == 0
    out = capsys.readouterr().out
    assert "theta_hat = 0.500000" in out
    assert (tmp_path / "pk.csv").exists() and (tmp_path / "summary.json").exists()


@pytest.mark.parametrize(
    "argv, code",
    [
        (["--characteristic", "inradius-large", "--replicates", "10", "--subsamples", "3"], 2),
        (["--characteristic", "inradius-large", "--rho-log", "-1"], 2),
        (["--characteristic", "circumradius-voronoi", "--a", "9"], 2),
    ],
)
def test_cli_error_codes(argv, code, tmp_path, capsys):
    assert main(argv + ["--out-dir", str(tmp_path)]) == code
    assert "palmcluster:" in capsys.readouterr().err


def test_cli_unwritable_out_dir(tmp_path, capsys):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    argv = ["--characteristic", "inradius-large", "--replicates", "4", "--subsamples", "2"]
    assert main(argv + ["--window-mode", "local", "--out-dir", str(blocker / "sub")]) == 10


def test_cli_bad_characteristic():
    with pytest.raises(SystemExit) as exc:
        main(["--characteristic", "volume"])
    assert exc.value.code == 2
