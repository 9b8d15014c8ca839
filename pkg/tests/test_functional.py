import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from convexineq import (
    Ball,
    Cube,
    DimensionMismatchError,
    FunctionalDomainError,
    QuadratureUnsupportedError,
    functional,
    geometry,
)

INTERVAL = geometry.interval(0.0, 1.0)
SQUARE = Cube(1.0, 2)


def _positive_trig(seed, dim=2, bump=3.0):
    g = functional.random_trig(dim, seed)
    return functional.trigonometric(g.params["const"] + bump, g.params["terms"], dim)


# -- test function kinds -------------------------------------------------------


def test_polynomial_value_and_gradient():
    f = functional.polynomial([(1.0, (2, 1)), (0.5, (0, 3))], 2)  # x^2 y + y^3 / 2
    pts = np.array([[1.0, 2.0], [0.5, -1.0]])
    assert np.allclose(f.value(pts), [6.0, -0.75])
    assert np.allclose(f.gradient(pts), [[4.0, 7.0], [-1.0, 1.75]])


def test_linear_factory():
    f = functional.linear([2.0, -3.0])
    pts = np.array([[1.0, 1.0]])
    assert f.value(pts)[0] == pytest.approx(-1.0)
    assert np.allclose(f.gradient(pts), [[2.0, -3.0]])


def test_radial_gradient_points_outward():
    f = functional.radial([0.0, 1.0], 2)  # |x|^2
    pts = np.array([[0.3, -0.4]])
    assert f.value(pts)[0] == pytest.approx(0.25)
    assert np.allclose(f.gradient(pts), 2.0 * pts)


def test_from_grid_interpolates():
    f = functional.from_grid([0.0, 1.0], [0.0, 2.0])
    assert not f.analytic_gradient
    assert f.value(np.array([[0.25]]))[0] == pytest.approx(0.5)
    assert f.gradient(np.array([[0.25]]))[0, 0] == pytest.approx(2.0)


def test_from_grid_validation():
    with pytest.raises(FunctionalDomainError):
        functional.from_grid([0.0, 0.0, 1.0], [1.0, 2.0, 3.0])
    with pytest.raises(FunctionalDomainError):
        functional.from_grid([0.0], [1.0])


def test_dimension_mismatch_detected():
    f = functional.linear([1.0, 1.0])
    with pytest.raises(DimensionMismatchError):
        f.value(np.zeros((4, 3)))


def test_random_trig_is_seed_deterministic():
    a = functional.random_trig(2, 42)
    b = functional.random_trig(2, 42)
    c = functional.random_trig(2, 43)
    assert a.fingerprint() == b.fingerprint()
    assert a.fingerprint() != c.fingerprint()


def test_shift_positive_margin():
    v = functional.shift_positive(np.array([-2.0, 0.0, 3.0]), margin=0.1)
    assert v.min() == pytest.approx(0.5)  # 0.1 * spread of 5


@pytest.mark.parametrize(
    "f",
    [
        functional.polynomial([(1.0, (2, 1)), (0.5, (0, 3)), (-0.25, (1, 1))], 2),
        functional.random_trig(2, 3),
        functional.radial([1.0, 2.0, 0.5], 2),
    ],
)
def test_gradient_against_finite_differences(f):
    """Analytic gradients agree with central differences at 1e-6 relative."""
    rng = np.random.default_rng(4)
    pts = rng.uniform(-0.4, 0.4, size=(100, 2))
    h = 1e-5
    analytic = f.gradient(pts)
    numeric = np.zeros_like(analytic)
    for i in range(2):
        e = np.zeros(2)
        e[i] = h
        numeric[:, i] = (f.value(pts + e) - f.value(pts - e)) / (2.0 * h)
    scale = np.abs(analytic).max() + 1.0
    assert np.abs(analytic - numeric).max() / scale <= 1e-6


# -- scalar functionals --------------------------------------------------------


def test_entropy_exponential_oracle():
    # for f = e^x on (0,1): E[f log f] = 1 and E[f] = e - 1
    closed = 1.0 - (math.e - 1.0) * math.log(math.e - 1.0)
    xs = np.linspace(0.0, 1.0, 4097)
    f = functional.from_grid(xs, np.exp(xs))
    est = functional.entropy_functional(f, INTERVAL, ("grid", 4096))
    assert est.value == pytest.approx(closed, abs=1e-7)


def test_entropy_rejects_negative_and_zero():
    with pytest.raises(FunctionalDomainError, match="f >= 0"):
        functional.entropy_functional(functional.linear([-1.0]), geometry.interval(0.5, 1.0), ("grid", 32))
    with pytest.raises(FunctionalDomainError, match="E\\[f\\] = 0"):
        functional.entropy_functional(functional.polynomial([], 1), INTERVAL, ("grid", 32))


def test_variance_oracles():
    assert functional.variance_functional(
        functional.linear([1.0]), INTERVAL, ("grid", 4096)
    ).value == pytest.approx(1.0 / 12.0, abs=1e-7)
    assert functional.variance_functional(
        functional.polynomial([(1.0, (2,))], 1), geometry.interval(-0.5, 0.5), ("grid", 4096)
    ).value == pytest.approx(1.0 / 180.0, abs=1e-8)


def test_rayleigh_first_dirichlet_neumann_mode():
    # cos(pi x) on (0,1) is the first nonconstant Neumann mode, quotient pi^2
    f = functional.trigonometric(0.0, [(1.0, 0.0, (1,))], 1)
    est = functional.rayleigh_quotient(f, INTERVAL, ("grid", 2048))
    assert est.value == pytest.approx(math.pi**2, rel=1e-6)


def test_rayleigh_rejects_constants():
    with pytest.raises(FunctionalDomainError, match="Var"):
        functional.rayleigh_quotient(functional.polynomial([(1.0, (0,))], 1), INTERVAL, ("grid", 64))


def test_lsi_quotient_near_constant_matches_rayleigh():
    f = functional.trigonometric(1.0, [(0.01, 0.0, (1,))], 1)
    est = functional.lsi_quotient(f, INTERVAL, ("grid", 2048))
    assert est.value == pytest.approx(math.pi**2, rel=0.05)


def test_min_lsi_below_min_rayleigh():
    """Linearized perturbations keep the optimal quotients ordered."""
    lsis, rays = [], []
    for i in range(5):
        g = functional.random_trig(2, 200 + i)
        rays.append(functional.rayleigh_quotient(g, SQUARE, ("mc", 20_000), seed=i))
        f = functional.trigonometric(
            1.0 + 0.01 * g.params["const"],
            [(0.01 * a, 0.01 * b, k) for (a, b, k) in g.params["terms"]],
            2,
        )
        lsis.append(functional.lsi_quotient(f, SQUARE, ("mc", 20_000), seed=i))
    rel = max(
        max(e.stderr / e.value for e in lsis),
        max(e.stderr / e.value for e in rays),
    )
    assert min(e.value for e in lsis) <= min(e.value for e in rays) * (1.0 + 4.0 * rel)


def test_kls_quantity_oracles():
    est = functional.kls_quantity(Cube(1.0, 2), m=200_000, seed=1)
    assert abs(est.value - 6.0) <= 4.0 * est.stderr
    est = functional.kls_quantity(Ball(1.0, 2), m=200_000, seed=1)
    assert abs(est.value - 2.0) <= 4.0 * est.stderr


@settings(max_examples=25, deadline=None, derandomize=True)
@given(c=st.floats(0.01, 100.0))
def test_entropy_scale_homogeneity(c):
    """Ent(c f) = c Ent(f) for c > 0."""
    g = _positive_trig(9)
    gc = functional.trigonometric(
        c * g.params["const"], [(c * a, c * b, k) for (a, b, k) in g.params["terms"]], 2
    )
    e1 = functional.entropy_functional(g, SQUARE, ("grid", 32)).value
    e2 = functional.entropy_functional(gc, SQUARE, ("grid", 32)).value
    assert e2 == pytest.approx(c * e1, rel=1e-9)


# -- trace log-Sobolev reports --------------------------------------------------


def test_tlsi_constant_function():
    """f = 1 zeroes the entropy and gradient, leaving the boundary term."""
    one = functional.polynomial([(1.0, (0,))], 1)
    rep = functional.tlsi_verify(INTERVAL, one, 2.0, 24)
    assert rep.verdict == "PASS"
    assert abs(rep.lhs) <= 1e-12
    assert rep.grad_term == 0.0
    assert rep.bdry_term == pytest.approx(1.0, rel=1e-12)
    assert rep.slack == pytest.approx(1.0, rel=1e-9)


def test_tlsi_boundary_vanishes_exactly():
    # x - x^2 is exactly zero at both endpoints in floating point
    f = functional.polynomial([(1.0, (1,)), (-1.0, (2,))], 1)
    rep = functional.tlsi_verify(INTERVAL, f, 2.0, 24)
    assert rep.bdry_term == 0.0
    assert rep.verdict == "PASS"


def test_tlsi_prefactor_continuity_at_p1():
    q, g1, b1 = functional.tlsi_coefficients(1.0, 2, 3.0)
    assert math.isinf(q)
    assert g1 == b1  # prefactor is exactly 1 at p = 1
    _, g2, b2 = functional.tlsi_coefficients(1.0001, 2, 3.0)
    assert abs(g2 - g1) / g1 <= 0.01
    assert b2 == b1


def test_tlsi_scaling_in_f():
    # every term is homogeneous of degree p in f
    f = _positive_trig(9)
    c = 7.5
    fc = functional.trigonometric(
        c * f.params["const"], [(c * a, c * b, k) for (a, b, k) in f.params["terms"]], 2
    )
    r1 = functional.tlsi_verify(SQUARE, f, 2.0, 24)
    r2 = functional.tlsi_verify(SQUARE, fc, 2.0, 24)
    assert r2.lhs / r1.lhs == pytest.approx(c**2, rel=1e-6)
    assert r2.grad_term / r1.grad_term == pytest.approx(c**2, rel=1e-6)
    assert r2.bdry_term / r1.bdry_term == pytest.approx(c**2, rel=1e-6)


def test_tlsi_scaling_in_domain():
    # dilating the domain and composing f with the inverse dilation leaves
    # every term unchanged
    f = functional.radial([1.0, 1.0], 2)
    f_half = functional.radial([1.0, 0.25], 2)
    r1 = functional.tlsi_verify(Cube(1.0, 2), f, 2.0, 24)
    r2 = functional.tlsi_verify(Cube(2.0, 2), f_half, 2.0, 24)
    assert r2.lhs == pytest.approx(r1.lhs, rel=1e-6)
    assert r2.grad_term == pytest.approx(r1.grad_term, rel=1e-6)
    assert r2.bdry_term == pytest.approx(r1.bdry_term, rel=1e-6)


def test_tlsi_tolerance_halves_when_resolution_doubles():
    f = _positive_trig(9)
    for p in (1.0, 2.0):
        t24 = functional.tlsi_verify(SQUARE, f, p, 24).tolerance
        t48 = functional.tlsi_verify(SQUARE, f, p, 48).tolerance
        assert t48 <= 0.5 * t24


def test_tlsi_resolution_floor_and_dim_check():
    f = _positive_trig(9)
    with pytest.raises(QuadratureUnsupportedError):
        functional.tlsi_verify(SQUARE, f, 2.0, 8)
    with pytest.raises(DimensionMismatchError):
        functional.tlsi_verify(INTERVAL, f, 2.0, 24)


def test_tlsi_json_handles_infinite_q():
    one = functional.polynomial([(1.0, (0,))], 1)
    obj = functional.tlsi_verify(INTERVAL, one, 1.0, 16).to_json()
    assert obj["q"] is None
    assert obj["q_infinite"] is True


# -- Dirichlet comparison --------------------------------------------------------


def test_dirichlet_ball_is_sharp():
    c = functional.dirichlet_lsi_constants(Ball(1.0, 2), ("grid", 256))
    assert c.ratio == pytest.approx(1.0, abs=1e-3)


def test_dirichlet_square_ratio():
    c = functional.dirichlet_lsi_constants(Cube(1.0, 2), ("grid", 256))
    assert c.ratio == pytest.approx(3.0 / math.pi, abs=1e-3)


def test_dirichlet_flat_rectangle_is_far_from_sharp():
    rect = geometry.apply_affine(Cube(1.0, 2), np.diag([4.0, 0.25]))
    c = functional.dirichlet_lsi_constants(rect, ("grid", 128))
    assert c.ratio < 0.2


def test_dirichlet_mc_mode_matches_closed_form():
    # cube in dimension 3: ratio = 12 / (5 omega_3^(2/3))
    target = 12.0 / (5.0 * geometry.unit_ball_volume(3) ** (2.0 / 3.0))
    c = functional.dirichlet_lsi_constants(Cube(1.0, 3), ("mc", 50_000), seed=2)
    assert abs(c.ratio - target) <= 4.0 * c.stderr


def test_dirichlet_rejects_off_center_domain():
    shifted = geometry.apply_affine(Cube(1.0, 2), np.eye(2), [0.3, 0.0])
    with pytest.raises(FunctionalDomainError, match="centered"):
        functional.dirichlet_lsi_constants(shifted, ("grid", 64))


# -- one-dimensional chain audit --------------------------------------------------


def test_brenier_target_length():
    assert functional.brenier_target_length(1.0) == pytest.approx(2.0)
    assert functional.brenier_target_length(2.0) == pytest.approx(2.0 * math.sqrt(3.0))


def test_brenier_constant_function_is_exact():
    """f = 1 makes three steps identities and leaves the Young term slack."""
    chain = functional.brenier_chain_check_1d(np.ones(4097), (0.0, 1.0), p=2.0)
    assert chain.passed()
    by_name = {s.name: s for s in chain.steps}
    assert by_name["log_det_bound"].slack == 0.0
    assert by_name["integration_by_parts"].slack == 0.0
    assert by_name["boundary_bound"].slack == 0.0
    # (p-1) R^q / (1+q) with R = sqrt(3), q = 2
    assert by_name["holder_young"].slack == pytest.approx(1.0, rel=1e-9)
    assert chain.tv_error <= 1e-12


def test_brenier_exponential_regression():
    xs = np.linspace(0.0, 1.0, 2049)
    chain = functional.brenier_chain_check_1d(np.exp(xs), (0.0, 1.0), p=2.0)
    assert chain.passed()
    by_name = {s.name: s for s in chain.steps}
    assert by_name["log_det_bound"].slack == pytest.approx(0.16143949079962253, rel=1e-9)
    assert by_name["holder_young"].slack == pytest.approx(1.08333332009104, rel=1e-9)
    assert by_name["log_det_bound"].slack > 0
    assert by_name["holder_young"].slack > 0
    assert chain.tv_error <= 1e-4


def test_brenier_p1_branch():
    xs = np.linspace(0.0, 1.0, 2049)
    chain = functional.brenier_chain_check_1d(np.exp(xs), (0.0, 1.0), p=1.0)
    assert chain.passed()
    assert math.isinf(chain.q)
    assert chain.to_json()["q"] is None
    assert chain.R == pytest.approx(1.0)


def test_brenier_pushforward_tv_small_on_fine_grids():
    xs = np.linspace(0.0, 1.0, 2049)
    vals = functional.shift_positive(np.sin(3.0 * xs) + 0.2 * np.cos(9.0 * xs))
    chain = functional.brenier_chain_check_1d(vals, (0.0, 1.0), p=1.5)
    assert chain.passed()
    assert chain.tv_error <= 1e-3


def test_brenier_input_validation():
    with pytest.raises(FunctionalDomainError, match="at least 9"):
        functional.brenier_chain_check_1d(np.ones(5), (0.0, 1.0))
    with pytest.raises(FunctionalDomainError, match="strictly positive"):
        functional.brenier_chain_check_1d(np.concatenate([np.ones(8), [-1.0]]), (0.0, 1.0))
    with pytest.raises(FunctionalDomainError, match="p >= 1"):
        functional.brenier_chain_check_1d(np.ones(33), (0.0, 1.0), p=0.5)
    with pytest.raises(FunctionalDomainError, match="empty interval"):
        functional.brenier_chain_check_1d(np.ones(33), (1.0, 1.0))


def test_brenier_accepts_body_domain():
    chain = functional.brenier_chain_check_1d(np.ones(33), INTERVAL, p=2.0)
    assert chain.passed()
