import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from revlab import nls, spectral, waves
from revlab.grid import ComplexField, Grid1D, RadialGrid, sample

# frozen oracles, computed once from the continuous ODE and well-known values
TOWNES_PEAK = 2.20620086
TOWNES_POWER = 11.7009
PEAK_1D_KAPPA90 = 14.4626  # sqrt(360 / (1 + sqrt(0.52))), epsilon = 1e-3


@settings(max_examples=30, deadline=None)
@given(st.floats(1.0, 150.0), st.sampled_from([0.0, 1e-3, 1e-4]))
def test_cq_profile_solves_the_ode(kappa, eps):
    g = Grid1D.symmetric(12.0 + 30.0 / np.sqrt(kappa), 4096)
    f = waves.cq_solitary_1d(waves.SolitaryParams(kappa, eps), g)
    res = waves.cq_residual_1d(f, kappa, eps)
    assert np.max(np.abs(res)) < 1e-7 * kappa ** 1.5


def test_cq_profile_cubic_limit_is_sech():
    x = np.linspace(-3, 3, 101)
    kappa = 4.0
    expected = np.sqrt(2 * kappa) / np.cosh(np.sqrt(kappa) * x)
    assert np.allclose(waves.cq_profile(x, kappa, 0.0), expected, rtol=1e-13)


def test_cq_power_against_quadrature():
    kappa, eps = 90.0, 1e-3
    g = Grid1D.symmetric(32 * np.pi, 2**14)
    grid_power = spectral.l2_norm_sq(waves.cq_solitary_1d(kappa, g, eps))
    exact, _ = quad(lambda x: 2 * waves.cq_profile(x, kappa, eps) ** 2, 0, 10, epsabs=1e-13)
    assert grid_power == pytest.approx(exact, rel=1e-12)


def test_cubic_soliton_hamiltonian_closed_form():
    # H = -(4/3) kappa^(3/2) and P = 4 sqrt(kappa) for sqrt(2 kappa) sech(sqrt(kappa) x)
    kappa = 9.0
    g = Grid1D.symmetric(20.0, 2048)
    f = waves.cq_solitary_1d(waves.SolitaryParams(kappa, 0.0), g)
    assert spectral.l2_norm_sq(f) == pytest.approx(4 * np.sqrt(kappa), rel=1e-12)
    assert nls.hamiltonian(f, 0.0) == pytest.approx(-4 / 3 * kappa**1.5, rel=1e-12)


def test_solitary_params_validation():
    with pytest.raises(ValueError):
        waves.SolitaryParams(-1.0)
    with pytest.raises(ValueError):
        waves.SolitaryParams(200.0, 1e-3)
    with pytest.raises(ValueError):
        waves.SolitaryParams(1.0, 0.0, dimension=3)


def test_fusion_ic_shape_and_domain_check():
    g = Grid1D.symmetric(32 * np.pi, 2**14)
    f = waves.fusion_ic(grid=g)
    peaks = g.x[np.argsort(f.intensity)[-1]]
    assert abs(abs(peaks) - 2.0) < g.dx
    # both beams carry e^{-+i theta x}, so the input is even in x
    assert np.allclose(f.values[1:], f.values[1:][::-1], atol=1e-12)
    with pytest.raises(ValueError):
        waves.fusion_ic(grid=Grid1D.symmetric(3.0, 1024))


def test_radial_operator_symmetric_under_weights():
    g = RadialGrid(6.0, 64)
    lower, diag, upper = waves.radial_operator(g)
    a = np.diag(diag) + np.diag(upper[:-1], 1) + np.diag(lower[1:], -1)
    w = g.weights
    assert np.allclose(w[:, None] * a, (w[:, None] * a).T, rtol=1e-12)


def test_radial_operator_second_order_on_gaussian():
    errs = []
    for n in (400, 800):
        g = RadialGrid(8.0, n)
        r = g.r
        f = np.exp(-r**2)
        exact = (4 * r**2 - 4) * np.exp(-r**2)
        errs.append(np.max(np.abs(waves.apply_radial_operator(f, g) - exact)[: n // 2]))
    assert 3.5 < errs[0] / errs[1] < 4.5


def test_townes_profile_frozen_oracle():
    g = RadialGrid(40.0, 2**14)
    gs = waves.solitary_2d_shoot(waves.SolitaryParams(1.0, 0.0, dimension=2), g)
    assert gs.values[0].real == pytest.approx(TOWNES_PEAK, rel=1e-5)
    assert nls.critical_power(g) == pytest.approx(TOWNES_POWER, rel=1e-4)
    assert np.max(np.abs(waves.radial_residual(gs.values.real, 1.0, 0.0, g))) < 1e-9


def test_shooting_two_routes_agree():
    # finite-volume shooting + Newton against RK4 on the continuous ODE
    kappa, eps = 90.0, 1e-3
    width = 1.0 / np.sqrt(kappa)
    g = RadialGrid(40 * width, 8192)
    fv = waves.solitary_2d_shoot(waves.SolitaryParams(kappa, eps, dimension=2), g).values[0].real
    ode = waves.rk4_ground_state(kappa, eps, 12 * width, 1500)
    assert fv == pytest.approx(ode, rel=2e-4)


def test_1d_peak_frozen_oracle():
    g = Grid1D.symmetric(32 * np.pi, 2**14)
    f = waves.cq_solitary_1d(90.0, g, 1e-3)
    assert np.max(np.abs(f.values)) == pytest.approx(PEAK_1D_KAPPA90, rel=1e-5)


def test_shooting_bracket_failure():
    with pytest.raises(waves.BracketError):
        waves.solitary_2d_shoot(waves.SolitaryParams(300.0, 1e-3, dimension=2), RadialGrid(2.0, 512))


@pytest.mark.parametrize("kappa", [20.0, 90.0, 150.0])
def test_fit_kappa_inverts_1d_family(kappa):
    g = Grid1D.symmetric(32 * np.pi, 2**14)
    assert waves.fit_kappa(waves.cq_solitary_1d(kappa, g, 1e-3), 1e-3) == pytest.approx(kappa, rel=1e-8)


def test_fit_kappa_radial_and_cubic():
    g = RadialGrid(4.0, 4096)
    f = waves.solitary_2d_shoot(waves.SolitaryParams(100.0, 1e-3, dimension=2), g)
    assert waves.fit_kappa(f, 1e-3) == pytest.approx(100.0, rel=2e-3)
    g1 = Grid1D.symmetric(10.0, 1024)
    assert waves.fit_kappa(waves.cq_solitary_1d(3.0, g1, 0.0), 0.0) == pytest.approx(3.0, rel=1e-12)
    with pytest.raises(ValueError):
        waves.fit_kappa(ComplexField(g1, np.full(1024, 100.0)), 1e-3)


def test_kink_energy_closed_form():
    from revlab import phi4
    g = Grid1D.symmetric(30.0, 4096)
    for v in (0.0, 0.5):
        params = waves.KinkParams(0.0, v)
        phi = waves.kink_field(params, g)
        pi = sample(g, lambda x: waves.kink_velocity(x, 0.0, params), real=True)
        state = phi4.KleinGordonState(phi, pi, 0.0, periodic=False)
        # static kink energy 2 sqrt(2)/3, boosted by gamma
        expected = 2 * np.sqrt(2) / 3 / np.sqrt(1 - v**2)
        assert phi4.energy(state) == pytest.approx(expected, rel=1e-4)


def test_kink_velocity_is_time_derivative():
    params = waves.KinkParams(1.0, 0.3, -1)
    x = np.linspace(-5, 5, 41)
    h = 1e-6
    fd = (waves.kink_profile(x, h, params) - waves.kink_profile(x, -h, params)) / (2 * h)
    assert np.allclose(fd, waves.kink_velocity(x, 0.0, params), atol=1e-8)
    with pytest.raises(ValueError):
        waves.KinkParams(v=1.0)


def test_kink_antikink_vacua():
    g = Grid1D.symmetric(32.0, 4096)
    st_ = waves.kink_antikink_ic(0.2, 8.0, g)
    assert st_.phi.values[0] == pytest.approx(-1.0, abs=1e-9)
    assert st_.phi.values[g.n // 2] == pytest.approx(1.0, abs=1e-4)
    assert np.allclose(st_.phi.values[1:], st_.phi.values[1:][::-1], atol=1e-12)


def test_galilean_boost_preserves_power_and_shifts():
    g = Grid1D.symmetric(16 * np.pi, 1024)
    f = sample(g, lambda x: np.exp(-x**2))
    c = 0.5  # c L / (4 pi) = 4
    b = waves.galilean(f, c, t=2.0)
    assert spectral.l2_norm_sq(b) == pytest.approx(spectral.l2_norm_sq(f), rel=1e-12)
    assert g.x[np.argmax(b.intensity)] == pytest.approx(1.0, abs=g.dx)
    with pytest.raises(ValueError):
        waves.galilean(f, 0.3, t=1.0)


def test_galilean_callable_matches_grid_version():
    g = Grid1D.symmetric(16 * np.pi, 1024)
    f0 = lambda t, x: np.exp(-x**2) + 0j  # noqa: E731
    boosted = waves.galilean_callable(f0, 0.5)(1.5, g.x)
    grid_version = waves.galilean(sample(g, lambda x: f0(0, x)), 0.5, t=1.5).values
    assert np.max(np.abs(boosted - grid_version)) < 1e-12


def test_explicit_blowup_conserves_power():
    g = RadialGrid(20.0, 4096)
    p = waves.BlowupParams(1.0)
    p0 = spectral.l2_norm_sq(waves.explicit_blowup(p, 0.0, g))
    p1 = spectral.l2_norm_sq(waves.explicit_blowup(p, 0.5, g))
    assert p0 == pytest.approx(nls.critical_power(), rel=1e-3)
    assert p1 == pytest.approx(p0, rel=1e-3)
    with pytest.raises(ValueError):
        waves.explicit_blowup(p, 1.0, g)
