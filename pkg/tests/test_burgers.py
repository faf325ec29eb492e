from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from revlab import burgers
from revlab.grid import Grid1D


def test_step_shock_moves_at_half_speed():
    for t in (F(1, 3), F(1), F(7, 2)):
        p = burgers.evolve_exact(burgers.step_down(), t)
        assert p.breakpoints == (t / 2,)
        assert burgers.shock_positions(p) == [t / 2]
        assert p.t == t


def test_ramp_steepens_into_shock_at_t1():
    r = burgers.ramp_down()
    half = burgers.evolve_exact(r, F(1, 2))
    assert half.breakpoints == (F(1, 2), F(1))
    assert half.slopes[0] == -2
    assert burgers.shock_positions(half) == []
    at_one = burgers.evolve_exact(r, 1)
    assert at_one.breakpoints == (F(1),) and at_one.left == (1,) and at_one.right == (0,)


@pytest.mark.parametrize("t", [F(1), F(5, 4), F(2), F(10)])
def test_two_inputs_identical_after_t1(t):
    a = burgers.evolve_exact(burgers.step_down(), t)
    b = burgers.evolve_exact(burgers.ramp_down(F(-1, 2)), t)
    assert a == b


@pytest.mark.parametrize("t", [F(1, 10), F(1, 2), F(99, 100)])
def test_inputs_differ_before_t1(t):
    a = burgers.evolve_exact(burgers.step_down(), t)
    b = burgers.evolve_exact(burgers.ramp_down(F(-1, 2)), t)
    assert a != b


def test_rarefaction_fan():
    up = burgers.PiecewiseProfile.from_pieces([(0, 0, 1)])
    p = burgers.evolve_exact(up, 2)
    x = np.array([-1.0, 0.5, 1.0, 1.5, 3.0])
    assert np.allclose(p(x), [0.0, 0.25, 0.5, 0.75, 1.0])


decreasing = st.lists(st.integers(-5, 5), min_size=2, max_size=6, unique=True).map(
    lambda v: sorted(v, reverse=True))


@settings(max_examples=40, deadline=None)
@given(decreasing, st.fractions(F(0), F(6), max_denominator=12))
def test_shock_fronts_conserve_mass_exactly(values, t):
    # breakpoints at 0, 1, 2, ...; only downward jumps, so every front is a shock
    nodes = [(i, a, b) for i, (a, b) in enumerate(zip(values, values[1:]))]
    p = burgers.PiecewiseProfile.from_pieces(nodes)
    q = burgers.evolve_exact(p, t)
    lo, hi = F(-40), F(40)
    flux = (F(values[0]) ** 2 - F(values[-1]) ** 2) / 2
    assert q.integral(lo, hi) == p.integral(lo, hi) + t * flux


@settings(max_examples=30, deadline=None)
@given(decreasing, st.fractions(F(0), F(3), max_denominator=8), st.fractions(F(0), F(3), max_denominator=8))
def test_evolution_is_a_semigroup(values, t1, t2):
    nodes = [(i, a, b) for i, (a, b) in enumerate(zip(values, values[1:]))]
    p = burgers.PiecewiseProfile.from_pieces(nodes)
    two = burgers.evolve_exact(burgers.evolve_exact(p, t1), t2)
    one = burgers.evolve_exact(p, t1 + t2)
    assert two == one


def test_shock_next_to_slope_is_rejected():
    p = burgers.PiecewiseProfile.from_pieces([(0, 2, 1), (1, 0, 0)])
    with pytest.raises(burgers.TrackingError):
        burgers.evolve_exact(p, 1)


def test_profile_validation_and_integral():
    with pytest.raises(ValueError):
        burgers.PiecewiseProfile((1, 0), (0, 0), (0, 0))
    with pytest.raises(ValueError):
        burgers.PiecewiseProfile((), (), ())
    r = burgers.ramp_down()
    assert r.integral(-1, 2) == F(3, 2)
    assert r.integral(F(1, 2), F(1, 2)) == 0
    with pytest.raises(ValueError):
        r.integral(1, 0)
    with pytest.raises(ValueError):
        burgers.evolve_exact(r, -1)
    assert burgers.evolve_exact(r, 0) is r


def test_profile_csv(tmp_path):
    burgers.ramp_down().write_csv(tmp_path / "p.csv")
    assert (tmp_path / "p.csv").read_text().splitlines() == [
        "x,u_left,u_right,slope_right", "0,1,1,-1", "1,0,0,0"]


def test_sample_profile_cell_averages():
    g = Grid1D(-4.0, 4.0, 8)  # cells of width 1 centred at -4, -3, ..., 3
    avg = burgers.sample_profile(burgers.ramp_down(F(1, 2)), g).values
    # ramp from 1 at x=1/2 to 0 at x=3/2; cell [0.5, 1.5] averages 1/2
    assert np.allclose(avg, [1, 1, 1, 1, 1, 0.5, 0, 0])
    step = burgers.sample_profile(burgers.step_down().shifted(F(1, 4)), g).values
    assert np.allclose(step, [1, 1, 1, 1, 0.75, 0, 0, 0])


def test_godunov_first_order_convergence():
    exact = burgers.evolve_exact(burgers.step_down(), 2)
    errs = []
    for n in (256, 512, 1024, 2048):
        g = Grid1D(-2.0, 4.0, n)
        u = burgers.evolve_godunov(burgers.sample_profile(burgers.step_down(), g), 2.0)
        errs.append(burgers.l1_distance(exact, u))
    orders = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert np.all((orders > 0.8) & (orders < 1.2))


def test_godunov_conserves_mass_and_respects_cfl():
    g = Grid1D(-2.0, 4.0, 512)
    u0 = burgers.sample_profile(burgers.ramp_down(), g)
    u = burgers.evolve_godunov(u0, 1.5)
    # outflow ends: inflow 1/2 per unit time on the left, none on the right
    assert g.dx * u.values.sum() == pytest.approx(g.dx * u0.values.sum() + 0.75, rel=1e-12)
    assert u.t == 1.5
    with pytest.raises(burgers.CflError):
        burgers.evolve_godunov(u0, 1.0, cfl=1.5)
    assert burgers.evolve_godunov(u0, 0.0) is u0
