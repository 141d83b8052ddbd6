import math
import os
import subprocess

import pytest

import mfou


def test_brownian_path_reduces_to_classical_estimator():
    p = mfou.simulate(h=0.5, theta=-1.0, T=10.0, n=500, seed=3)
    x = p["x"]
    dt = 10.0 / 500
    num = sum(x[k - 1] * (x[k] - x[k - 1]) for k in range(1, len(x)))
    den = sum(x[k - 1] ** 2 * dt for k in range(1, len(x)))
    est = mfou.estimate(h=0.5, T=10.0, x=x, oracle=True)
    assert est["theta_hat"] == pytest.approx(num / den, rel=1e-10)
    assert est["theta_oracle"] == pytest.approx(num / den, rel=1e-10)


def test_kernel_identity_and_brownian_bracket():
    k = mfou.kernel(h=0.7, T=5.0, n=200)
    assert max(abs(r) for r in k["identity_residual"]) < 1e-10
    half = mfou.kernel(h=0.5, T=2.0, n=100)
    assert half["bracket"][-1] == pytest.approx(1.0, rel=1e-12)


def test_laplace_routes_agree():
    r = mfou.laplace(mu=1.0, theta=-1.0, h=0.7, T=25.0)
    assert math.log(r["riccati"]) == pytest.approx(math.log(r["logdet"]), abs=1e-6)
    assert r["limit"] == pytest.approx(math.exp(-0.5))
    assert mfou.montecarlo_laplace(0.0, [0.1, 3.0]) == (1.0, 0.0)


def test_campaign_is_deterministic():
    a = mfou.run_campaign(h=0.7, theta=-1.0, T=5.0, n=64, replications=6, seed=4, threads=1)
    b = mfou.run_campaign(h=0.7, theta=-1.0, T=5.0, n=64, replications=6, seed=4, threads=3)
    assert a["csv"] == b["csv"]
    assert len(a["theta_hat"]) == 6


def test_sweeps_and_spectral():
    rows = mfou.run_sweep("laplace", mu_list=[0.0, 1.0], T_list=[10.0, 20.0])
    assert len(rows) == 4
    assert all(r["value"] == 1.0 for r in rows if r["mu"] == 0.0)
    e = mfou.eigen_asymptotics(h=0.7, n=128)
    assert e["max_antisymmetric_average"] < 1e-8
    assert mfou.regression_variance_constant(0.75) > 0.0


def test_errors_map_to_python_exceptions():
    with pytest.raises(ValueError):
        mfou.simulate(h=1.5, theta=-1.0, T=1.0, n=16)
    with pytest.raises(mfou.ValidationError):
        mfou.run_campaign(theta=1.0, T=1.0, n=16, replications=2)
    with pytest.raises(mfou.ValidationError):
        mfou.run_campaign(T=1.0, n=16, replication=2)


cli = os.environ.get("MFOU_CLI")
needs_cli = pytest.mark.skipif(not cli, reason="MFOU_CLI not set")


def run(*args):
    return subprocess.run([cli, *args], capture_output=True, text=True)


@needs_cli
def test_cli_laplace_writes_csv(tmp_path):
    out = tmp_path / "lap"
    r = run("laplace", "--h", "0.5", "--mu", "0,1", "--sweep-T", "10,20", "--out", str(out))
    assert r.returncode == 0, r.stderr
    lines = [l for l in (out / "laplace.csv").read_text().splitlines() if not l.startswith("#")]
    assert lines[0].split(",")[:2] == ["sweep", "h"]
    assert len(lines) == 5


@needs_cli
def test_cli_exit_codes(tmp_path):
    assert run("estimate", "--h", "1.2", "--out", str(tmp_path)).returncode == 1
    assert run("nonsense").returncode == 1
    assert run("laplace", "--mu", "", "--out", str(tmp_path / "empty")).returncode == 1
    assert not (tmp_path / "empty").exists()
    blocker = tmp_path / "file"
    blocker.write_text("x")
    r = run("kernel", "--h", "0.7", "--T", "1", "--n", "16", "--out", str(blocker / "sub"))
    assert r.returncode == 3
