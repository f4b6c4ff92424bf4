import json
import math
import os
import subprocess

import pytest

CLI = os.environ.get("LSRK_CLI")

try:
    import lsrk
except ImportError:  # module not built
    lsrk = None

needs_module = pytest.mark.skipif(lsrk is None, reason="python module not built")
needs_cli = pytest.mark.skipif(not CLI, reason="LSRK_CLI not set")


def run(*args):
    return subprocess.run([CLI, *args], capture_output=True, text=True, timeout=300)


@needs_module
def test_catalog_and_orders():
    aliases = [a for _, a in lsrk.catalog()]
    assert "rk35-3s+fsal" in aliases
    assert len(aliases) == 12
    assert lsrk.orders("bs5") == (5, 4)
    assert lsrk.default_gains("rk35-3s+fsal") == pytest.approx((0.70, -0.23, 0.0))
    for a in aliases:
        assert lsrk.max_order_residual(a) <= 1e-10


@needs_module
def test_ssp43_tableau():
    t = lsrk.butcher("ssp43")
    assert t["b"] == [1 / 6, 1 / 6, 1 / 6, 0.5]
    assert t["c"] == [0.0, 0.5, 1.0, 0.5]


@needs_module
def test_coefficient_round_trip():
    text = lsrk.export_coefficients("ssp33")
    assert lsrk.parse_coefficients(text) == "SSP3(2)3"


@needs_module
def test_pid_algebra():
    assert lsrk.pid_factor((1.0, 1.0, 1.0), (0.6, -0.2, 0.0), 3) == 1.0
    assert lsrk.pid_factor((8.0, 1.0, 1.0), (1.0, 0.0, 0.0), 5, False) == pytest.approx(8.0**0.2, rel=1e-15)
    for x in (-3.0, 0.5, 2.0, 7.0):
        assert lsrk.limiter(x) == pytest.approx(1.0 + math.atan(x - 1.0), abs=1e-15)


@needs_module
def test_integrate_dahlquist():
    r = lsrk.integrate("rk35-3s+", "dahlquist", tol=1e-8, lam=-1.0)
    assert r["error"][0] <= 1e-6
    assert r["t_final"] == 1.0
    assert r["nfe"] >= r["accepted"]


@needs_module
def test_integrate_python_callable():
    r = lsrk.integrate_ode("dp5", lambda t, u: [-u[0]], 0.0, 2.0, [1.0], tol=1e-9)
    assert r["u_final"][0] == pytest.approx(math.exp(-2.0), rel=1e-7)


@needs_module
def test_stability_and_control():
    fe = lsrk.stability("ssp33")
    assert fe["s_eff"] == 3
    bs5 = lsrk.stability("bs5", beta=(0.7, -0.4, 0.0))
    assert bs5["max_rho"] > 1.0
    tuned = lsrk.stability("bs5", beta=(0.28, -0.23, 0.0))
    assert tuned["control_stable"]


@needs_module
def test_single_candidate_search():
    r = lsrk.search(
        "bs3",
        ["source1d"],
        tols=[1e-4],
        beta1=(0.6, 0.6, 1.0),
        beta2=(-0.2, -0.2, 1.0),
        beta3=(0.0, 0.0, 1.0),
        elements=4,
    )
    assert len(r["candidates"]) == 1
    assert r["recommended"] == pytest.approx((0.6, -0.2, 0.0))


@needs_cli
def test_cli_missing_scheme():
    assert run("integrate", "--problem", "dahlquist").returncode == 1


@needs_cli
def test_cli_integrate_json():
    p = run("integrate", "--scheme", "rk35-3s+", "--problem", "dahlquist", "--lambda", "-1", "--tol", "1e-8")
    assert p.returncode == 0
    rep = json.loads(p.stdout)
    assert rep["error"][0] <= 1e-6
    assert rep["rejected"] >= 0 and rep["wall_time"] > 0


@needs_cli
def test_cli_control_map(tmp_path):
    out = tmp_path / "map.csv"
    p = run("stability", "--scheme", "bs5", "--beta", "0.7,-0.4,0", "--control-map", "--map-out", str(out),
            "--out", str(tmp_path / "b.csv"))
    assert p.returncode == 0
    assert json.loads(p.stderr[p.stderr.index("{"):])["max_rho"] > 1.0
    assert out.read_text().splitlines()[0] == "re,im,value"


@needs_cli
def test_cli_empty_stable_set(tmp_path):
    coeffs = {
        "name": "flat-euler", "class": "butcher", "s": 1, "q": 1, "qhat": 1, "fsal": False,
        "A": ["0"], "b": ["1"], "c": ["0"], "bhat": ["1", "0"],
    }
    f = tmp_path / "flat.json"
    f.write_text(json.dumps(coeffs))
    p = run("search", "--coeff-file", str(f), "--problems", "source1d", "--tol", "1e-3", "--elements", "4")
    assert p.returncode == 3
    assert "control-stable" in p.stderr


@needs_cli
def test_cli_sweep_is_byte_stable():
    args = ("sweep", "--scheme", "bs3", "--problem", "source1d", "--elements", "4", "--t-end", "1",
            "--tols", "1e-3,1e-4")
    a, b = run(*args), run(*args)
    assert a.returncode == 0
    assert a.stdout == b.stdout
    assert len(a.stdout.strip().splitlines()) == 3
