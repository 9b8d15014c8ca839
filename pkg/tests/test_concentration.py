import math

import numpy as np
import pytest

from convexineq import (
    Ball,
    Cube,
    NotNormalizedError,
    SamplingError,
    concentration,
    corpora,
    geometry,
)


def test_coordinate_functional():
    F = concentration.coordinate_functional(1)
    pts = np.array([[1.0, 2.0], [3.0, -4.0]])
    assert np.allclose(F(pts), [2.0, -4.0])


def test_direction_functional_normalizes():
    F = concentration.direction_functional([3.0, 4.0])
    assert F(np.array([[3.0, 4.0]]))[0] == pytest.approx(5.0)


def test_norm_functional():
    F = concentration.norm_functional()
    assert F(np.array([[3.0, 4.0]]))[0] == pytest.approx(5.0)


def test_profile_tail_oracle():
    """P(|x_1| >= 1/4) on the unit square is exactly 1/2."""
    m = 20_000
    fit = concentration.concentration_profile(
        Cube(1.0, 2), concentration.coordinate_functional(0), t_grid=[0.25], m=m, seed=1
    )
    se = math.sqrt(0.25 / m)
    assert abs(fit.tails[0] - 0.5) <= 3.0 * se


def test_profile_envelope_monotone():
    fit = concentration.concentration_profile(
        Cube(1.0, 2), concentration.norm_functional(), m=20_000, seed=2
    )
    assert np.all(np.diff(fit.envelope) <= 0.0)
    assert np.all(fit.envelope <= fit.tails)


def test_profile_bit_identical_across_calls():
    kwargs = dict(t_grid=None, m=20_000, seed=7)
    a = concentration.concentration_profile(Cube(1.0, 2), concentration.coordinate_functional(0), **kwargs)
    b = concentration.concentration_profile(Cube(1.0, 2), concentration.coordinate_functional(0), **kwargs)
    assert np.array_equal(a.tails, b.tails)
    assert np.array_equal(a.t_grid, b.t_grid)
    assert a.alpha_hat == b.alpha_hat


def test_profile_rejects_small_samples():
    with pytest.raises(SamplingError, match="10\\^4"):
        concentration.concentration_profile(
            Cube(1.0, 2), concentration.coordinate_functional(0), m=999, seed=0
        )


def test_profile_rejects_constant_functional():
    class Flat:
        description = "flat"

        def __call__(self, pts):
            return np.zeros(pts.shape[0])

    with pytest.raises(SamplingError, match="constant"):
        concentration.concentration_profile(Cube(1.0, 2), Flat(), m=10_000, seed=0)


def test_profile_rejects_out_of_range_grid():
    with pytest.raises(SamplingError, match="empty"):
        concentration.concentration_profile(
            Cube(1.0, 2), concentration.coordinate_functional(0), t_grid=[50.0], m=10_000, seed=0
        )


def test_profile_needs_enough_exceedances():
    # threshold just inside the edge, populated by far fewer than 30 points
    with pytest.raises(SamplingError, match="exceedances"):
        concentration.concentration_profile(
            Cube(1.0, 2), concentration.coordinate_functional(0), t_grid=[0.49999], m=10_000, seed=0
        )


def test_alpha_hat_for_uniform_interval():
    # on U(-1/2, 1/2) the two-sided tail at t is exactly 1 - 2t, so the
    # fitted exponent at a single threshold has a closed form
    fit = concentration.concentration_profile(
        geometry.interval(-0.5, 0.5), concentration.coordinate_functional(0), t_grid=[0.4], m=200_000, seed=3
    )
    expected = -math.log(0.2 / 2.0) / 0.4**2
    assert fit.alpha_hat == pytest.approx(expected, rel=0.05)


def test_tau1_proxy_probe_family():
    res = concentration.tau1_proxy(Cube(1.0, 2), m=20_000, seed=4)
    # n coordinates plus the norm
    assert len(res.fits) == 3
    assert res.argmin in {f.functional for f in res.fits}
    assert res.estimate.value == min(f.alpha_hat for f in res.fits)


def test_tau1_proxy_extra_directions():
    res = concentration.tau1_proxy(Cube(1.0, 2), m=20_000, seed=4, extra_directions=2)
    assert len(res.fits) == 5


def test_lemma1_trivial_pair_passes():
    B = geometry.ball_volume_one(2)
    audit = concentration.lemma1_audit(B, B, m=256, seed=3, probe_m=20_000, tau_m=10_000)
    assert audit.passed()
    assert audit.entropy == pytest.approx(0.0, abs=1e-12)
    assert audit.v == pytest.approx(1.0)
    names = [s.name for s in audit.steps]
    assert names == ["triangle", "entropy_vs_transport", "cauchy_schwarz", "borell_ratio", "final"]
    reported = {s.name: s.verdict for s in audit.steps}
    assert reported["entropy_vs_transport"] == "REPORTED"
    assert reported["borell_ratio"] == "REPORTED"
    assert reported["final"] == "REPORTED"


def test_lemma1_rejects_wrong_volume():
    with pytest.raises(NotNormalizedError, match="volume one"):
        concentration.lemma1_audit(Cube(1.0, 2), Cube(2.0, 2), m=64, probe_m=20_000, tau_m=10_000)


def test_lemma1_rejects_anisotropic_reference():
    stretched = geometry.apply_affine(geometry.cube_volume_one(2), np.diag([2.0, 0.5]))
    with pytest.raises(NotNormalizedError, match="isotropic"):
        concentration.lemma1_audit(stretched, stretched, m=64, probe_m=20_000, tau_m=10_000)


def test_lemma1_audit_pair_quantities():
    name, K, B = corpora.audit_pairs()[0]
    audit = concentration.lemma1_audit(K, B, m=512, seed=0, probe_m=50_000, tau_m=50_000)
    assert audit.passed()
    q = audit.quantities
    assert set(q) == {
        "mean_norm_K",
        "w1",
        "tci_term",
        "mean_norm_B",
        "sqrt_n_L_B",
        "borell_ratio",
        "tau_proxy",
        "L_K",
        "c_implied",
    }
    # the implied constant is of order one
    assert 0.05 <= q["c_implied"].value <= 20.0
    obj = audit.to_json()
    assert obj["passed"] is True
    assert len(obj["steps"]) == 5
