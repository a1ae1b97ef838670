import math
import os
import subprocess

import pytest

import fkpam


def test_covariance_examples():
    assert fkpam.covariance(0.5, 3, 2) == pytest.approx(2.0)
    assert fkpam.increment_covariance(0.25, 1, 0, 2, 1) == pytest.approx(0.5 * (math.sqrt(2) - 2))


def test_bad_hurst_raises():
    with pytest.raises(ValueError, match=r"H must be in \(0,1\)"):
        fkpam.covariance(1.2, 1, 1)


def test_exact_draws_have_unit_variance():
    sq = [fkpam.sample_at_times(0.3, [1.0], seed)[0] ** 2 for seed in range(4000)]
    mean = sum(sq) / len(sq)
    se = math.sqrt(sum((x - mean) ** 2 for x in sq) / (len(sq) - 1) / len(sq))
    assert abs(mean - 1.0) <= 3 * se


def test_grid_path_starts_at_zero():
    t, w = fkpam.sample_grid_path(0.7, 1 / 64, 1.0, pad=0.125, seed=3)
    assert len(t) == len(w) == 64 + 16 + 1
    assert w[t.index(0.0)] == 0.0


def test_walk_and_rough_stats():
    p = fkpam.sample_walk(kappa=3.0, seed=5)
    assert len(p["sites"]) == len(p["jump_times"]) + 1
    s = fkpam.rough_stats([0.1, 0.15, 0.9], 0.1)
    assert (s["R"], s["K"]) == (1, 1)
    assert s["L"] == pytest.approx(0.05)


def test_kernels():
    assert fkpam.s2(0.5, 1.0, 0.1)["value"] == pytest.approx(1 - 0.2 / 3)
    assert fkpam.s3(0.25, 1.0, 0.01)["within_bound"]
    assert fkpam.difference_variance([], [[0]], 1.0, 0.5, 0.1) == pytest.approx(0.1 / 3)
    assert fkpam.rho(0.5, 0.5, 0.1) == pytest.approx(0.5)


def test_zero_noise_estimate_is_exact():
    r = fkpam.estimate_quenched(0.5, 0.0125, 0.1, 500, 1, noise=False)
    assert r.mean == 1.0 and r.stderr == 0.0


def test_fk_matches_pde():
    r = fkpam.estimate_quenched(0.5, 0.0125, 0.1, 20000, 11, initial="indicator")
    xs, u = fkpam.solve_mollified(0.5, 0.0125, 0.1, 11, initial="indicator")
    assert abs(r.mean - u[xs.index(0)]) <= 3 * r.stderr + 1e-3


def test_rate_sweep_passes():
    ok, rows = fkpam.rate_sweep([0.5])
    assert ok and len(rows) == 3


def test_criterion_quick():
    r = fkpam.run_criterion(10)
    assert r["pass"], r["detail"]


@pytest.mark.skipif("FKPAM_CLI" not in os.environ, reason="CLI path not provided")
def test_cli_rejects_unknown_kind(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text('{"master_seed": 1, "experiment.name": "x", "experiment.kind": "nope"}')
    rc = subprocess.run([os.environ["FKPAM_CLI"], "experiment", "--config", str(cfg), "--out", str(tmp_path)],
                        capture_output=True, text=True)
    assert rc.returncode == 2
    assert "nope" in rc.stderr
