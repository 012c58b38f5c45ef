import math

import pytest

import levy_wanpm as lw


def test_gaussian_case_has_variance_two():
    x = lw.stable_samples(2.0, count=50000, seed=3)
    mean = sum(x) / len(x)
    var = sum((v - mean) ** 2 for v in x) / (len(x) - 1)
    assert abs(var - 2.0) < 0.1


def test_samples_are_reproducible():
    assert lw.stable_samples(1.5, count=10, seed=9) == lw.stable_samples(1.5, count=10, seed=9)


def test_frac_multiplier_is_power_of_norm():
    assert lw.frac_multiplier([3.0, 4.0], 1.5) == pytest.approx(5.0**1.5)
    assert lw.frac_multiplier([3.0, 4.0], 2.0) == 25.0


def test_stationary_cf_matches_scale():
    c = lw.fou_stationary_scale(1.5, 1.0)
    cf = lw.stable_cf(1.5, 1.0, 0.0, 1.2)
    assert abs(cf) == pytest.approx(math.exp(-((c * 1.2) ** 1.5)))


def test_robust_summary_of_small_sample():
    s = lw.robust_summary([1.0, 2.0, 3.0])
    assert s.median == 2.0


def test_invalid_alpha_raises():
    with pytest.raises(ValueError):
        lw.stable_samples(2.5, count=1)


def test_unknown_override_raises():
    with pytest.raises(lw.ConfigError):
        lw.resolve_config("harmonic_1d", overrides=["bank.nonsense=1"])


def test_tiny_pipeline(tmp_path):
    cfg = lw.resolve_config(
        "harmonic_1d",
        seed=1,
        overrides=[
            "bank.K=8",
            "batch.M=64",
            "batch.M0=32",
            "batch.MT=32",
            "train.epochs=2",
            "network.hidden_widths=[8]",
            "particles.n_particles=200",
            "evaluation.samples=200",
        ],
    )
    assert lw.simulate(cfg, tmp_path / "p") == 0
    assert lw.train(cfg, tmp_path / "t") == 0
    assert lw.evaluate(cfg, tmp_path / "t", tmp_path / "p", out=tmp_path / "e") == 0
    assert (tmp_path / "e" / "deltas.csv").read_text().startswith("time")
