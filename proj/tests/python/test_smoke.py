import math

import pytest

import zzct


def test_version():
    assert zzct.__version__


def test_event_time_helpers():
    assert zzct.first_event_constant(2.0, math.exp(-1.0)) == pytest.approx(0.5)
    # rate s: integrated hazard t^2/2 = 1 at t = sqrt(2)
    t = zzct.first_event_poly([0.0, 1.0], math.exp(-1.0))
    assert t == pytest.approx(math.sqrt(2.0))
    assert zzct.first_event_poly([-1.0], 0.5) is None


def test_is_weight():
    assert zzct.is_weight(0.0) == pytest.approx(1.0)
    d = 0.7
    assert zzct.is_weight(-d) == pytest.approx(math.exp(d) * zzct.is_weight(d), rel=1e-12)


def test_derive_seed():
    seeds = {zzct.derive_seed(42, i) for i in range(100)}
    assert len(seeds) == 100


def test_run_and_estimates(tmp_path):
    config = {
        "model": {"type": "gaussian", "mu": [1.0, -0.5], "sigma_diag": [2.0, 1.0]},
        "alpha": 1.0,
        "horizon": {"events": 4000},
        "seed": 7,
        "replicates": 2,
    }
    out = zzct.run(config, out_dir=str(tmp_path))
    assert out["aggregate"]["succeeded"] == 2
    mean = out["aggregate"]["mean"]
    assert abs(mean[0] - 1.0) < 0.3 and abs(mean[1] + 0.5) < 0.3
    assert (tmp_path / "summary.json").exists()
    assert (tmp_path / "skeleton_0.csv").exists()
    header = (tmp_path / "skeleton_0.csv").read_text().splitlines()[0]
    assert header == "t,mode,beta,v_beta,x_1,x_2,v_1,v_2,event_kind"


def test_experiment_defaults():
    for name in ("mixture", "spikeslab", "boltzmann"):
        d = zzct.experiment_defaults(name)
        assert d["replicates"] >= 1
    with pytest.raises(Exception):
        zzct.experiment_defaults("pancake")
