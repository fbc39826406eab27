import math

import numpy as np
import pytest

rw = pytest.importorskip("reflectwave")

SHORT = {"sim.t_end": "60u"}


def test_default_config_round_trips():
    ini = rw.default_config()
    assert "[cable]" in ini
    assert rw.config(ini) == ini
    d = rw.derived()
    assert d["z0"] == pytest.approx(50.0)
    assert d["tau"] == pytest.approx(0.35e-6)


def test_simulate_returns_columns():
    tr = rw.simulate(overrides=SHORT, mode="off")
    assert list(tr) == rw.columns()
    n = len(tr["t_s"])
    assert all(isinstance(v, np.ndarray) and v.shape == (n,) for v in tr.values())
    m = rw.metrics(tr, overrides=SHORT)
    assert 1.8 <= m["peak_ratio"] <= 2.0
    assert m["ring_freq_hz"] == pytest.approx(714e3, rel=0.05)


def test_adaptive_reduces_the_peak():
    off = rw.metrics(rw.simulate(overrides=SHORT, mode="off"), overrides=SHORT)
    ad = rw.metrics(rw.simulate(overrides=SHORT), overrides=SHORT)
    assert ad["peak_ratio"] < off["peak_ratio"]
    assert rw.metrics(rw.simulate(overrides=SHORT, mode="static-matched"), overrides=SHORT)["ring_freq_hz"] is None


def test_trace_csv(tmp_path):
    tr = rw.simulate(overrides={"sim.t_end": "2u"})
    p = str(tmp_path / "t.csv")
    rw.write_trace(p, tr)
    back = rw.read_trace(p)
    for k in tr:
        assert np.array_equal(tr[k], back[k])
    (tmp_path / "bad.csv").write_text("nope\n")
    with pytest.raises(ValueError):
        rw.read_trace(str(tmp_path / "bad.csv"))


def test_helpers():
    assert rw.surge_impedance(250e-9, 100e-12) == pytest.approx(50.0)
    mag, ph = rw.z_eq(0.5, 0.0)
    assert mag == pytest.approx(50.0)
    assert ph == 0.0
    assert rw.lyapunov(1.0, 2.0, 1.0) == 1.5
    assert math.isfinite(rw.z_eq(0.3, 714e3)[0])


def test_bad_config_raises():
    with pytest.raises(ValueError):
        rw.simulate(overrides={"cable.length_m": "-1"})
    with pytest.raises(Exception):
        rw.simulate(mode="bogus", overrides=SHORT)
