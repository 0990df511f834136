import numpy as np
import pytest
from hypothesis import given, strategies as st

from femhd import fv
from femhd.cases import get_case, init_case
from femhd.mesh import EDGE, NODE, PERIODIC, TRANSMISSIVE, build_grid
from femhd.operators import StateError
from femhd.physics import Params, make_state


def uniform_state(g, u=(0.3, -0.2, 0.1), p=1.5, b=(0.4, 0.1, -0.2), closure="total"):
    U = np.ones((3,) + g.shape) * np.array(u).reshape(3, 1, 1, 1)
    B = np.ones((3,) + g.shape) * np.array(b).reshape(3, 1, 1, 1)
    return make_state(g, Params(), 1.2, U, p, B, closure)


def random_state(g, seed=0, closure="total"):
    r = np.random.default_rng(seed)
    rho = 1.0 + 0.3 * r.random(g.shape)
    u = 0.3 * r.standard_normal((3,) + g.shape)
    p = 1.0 + 0.3 * r.random(g.shape)
    B = 0.2 * r.standard_normal((3,) + g.shape)
    return make_state(g, Params(), rho, u, p, B, closure)


def test_minmod():
    a = np.array([1.0, -1.0, 2.0, 0.5, 0.0])
    b = np.array([2.0, -3.0, -1.0, 0.4, 1.0])
    np.testing.assert_array_equal(fv.minmod(a, b), [1.0, -1.0, 0.0, 0.4, 0.0])


def test_muscl_slopes():
    g = build_grid(3, 1, 1)
    Q = np.zeros((5,) + g.shape)
    Q[0] = np.array([1.0, 3.0, 1.0]).reshape(g.shape)
    Q[4] = 1.0
    qL, qR = fv.muscl_reconstruct(g, Q, 0.0)[0]
    assert qL[0][1, 0, 0] == qR[0][1, 0, 0] == 3.0  # extremum: zero slope
    g = build_grid(8, 1, 1, (1.0, 1.0, 1.0), TRANSMISSIVE)
    Q = np.zeros((5,) + g.shape)
    Q[0] = 1.0 + g.mesh(NODE)[0]
    Q[4] = 1.0
    qL, qR = fv.muscl_reconstruct(g, Q, 0.0)[0]
    np.testing.assert_allclose((qR - qL)[0][1:-1], g.dx, rtol=1e-12)


def test_constant_data_has_no_jumps():
    g = build_grid(6, 5, 1)
    Q = fv.pack(uniform_state(g))
    for kind in ("muscl", "muscl_central", "feec", "none"):
        for qL, qR in fv.reconstruct(g, Q, 0.01, kind).values():
            np.testing.assert_allclose(qL, Q, rtol=1e-14)
            np.testing.assert_allclose(qR, Q, rtol=1e-14)
    with pytest.raises(ValueError):
        fv.reconstruct(g, Q, 0.01, "weno")


def test_feec_jumps_shrink_quadratically():
    jumps = []
    for n in (32, 64, 128):
        g = build_grid(n, 1, 1)
        x = g.mesh(NODE)[0]
        Q = np.zeros((5,) + g.shape)
        Q[0] = 1.0 + 0.2 * np.sin(2 * np.pi * x)
        Q[4] = 1.0
        qL, qR = fv.feec_reconstruct(g, Q)[0]
        jumps.append(np.max(np.abs(g.sp(qL, 0) - qR)))
    assert jumps[0] / jumps[1] > 3.5 and jumps[1] / jumps[2] > 3.5


def test_feec_jump_at_rp1_interface():
    spec = get_case("rp1")
    g = spec.grid(20)
    s = init_case(spec, g)
    Q = fv.pack(s)
    qL, qR = fv.feec_reconstruct(g, Q)[0]
    i = 9  # last left node; the interface is its right dual face
    assert Q[0][i, 0, 0] == 1.0 and Q[0][i + 1, 0, 0] == 0.125
    # the one-sided extrapolations on both sides keep the constant states
    assert qR[0][i, 0, 0] == 1.0 and qL[0][i + 1, 0, 0] == 0.125


def test_flux_consistency():
    rng = np.random.default_rng(4)
    w = np.concatenate([[1.0 + rng.random()], rng.standard_normal(3), [2.0 + rng.random()]])
    w = w.reshape(5, 1)
    for axis in range(3):
        f = fv.physical_flux(w, axis)
        np.testing.assert_allclose(fv.flux_rusanov(w, w, axis, 3.0), f)
        np.testing.assert_allclose(fv.flux_upwind(w, w, axis), f)


def test_upwind_limits():
    wm = np.array([1.0, 50.0, 0.0, 0.0, 1300.0]).reshape(5, 1)
    wp = np.array([1.1, 55.0, 0.0, 0.0, 1400.0]).reshape(5, 1)
    np.testing.assert_allclose(fv.flux_upwind(wm, wp, 0), fv.physical_flux(wm, 0), rtol=1e-12)
    wm0 = np.array([1.0, 0.0, 0.3, 0.0, 2.0]).reshape(5, 1)
    wp0 = np.array([2.0, 0.0, -0.1, 0.0, 3.0]).reshape(5, 1)
    central = 0.5 * (fv.physical_flux(wm0, 0) + fv.physical_flux(wp0, 0))
    np.testing.assert_allclose(fv.flux_upwind(wm0, wp0, 0), central)


def test_rusanov_vanishes_on_stationary_contact():
    wm = np.array([1.0, 0.0, 0.0, 0.0, 1500.0]).reshape(5, 1)
    wp = np.array([0.125, 0.0, 0.0, 0.0, 1500.0]).reshape(5, 1)
    assert np.all(fv.flux_rusanov(wm, wp, 0, 0.0) == 0.0)


def test_diffusive_flux():
    g = build_grid(4, 8, 1, (1.0, 1.0, 1.0), (PERIODIC, TRANSMISSIVE, PERIODIC))
    u = np.zeros((3,) + g.shape)
    u[0] = g.mesh(NODE)[1]
    T = np.ones(g.shape)
    assert np.all(fv.diffusive_flux(g, u, T, 0.0, 0.0, 1) == 0.0)
    out = fv.diffusive_flux(g, u, T, 1.0, 0.0, 1)
    np.testing.assert_allclose(out[1][:, :-1], -1.0, rtol=1e-12)  # -tau_xy
    out = fv.diffusive_flux(g, 0 * u, T, 0.0, 2.0, 0)
    assert np.all(out == 0.0)


@pytest.mark.parametrize("bc", [PERIODIC, TRANSMISSIVE])
@pytest.mark.parametrize("rec", ["muscl", "feec", "none"])
def test_uniform_state_is_preserved(bc, rec):
    g = build_grid(6, 5, 1, (1.0, 1.0, 1.0), bc)
    s = uniform_state(g)
    new = fv.fv_step(s, 0.01, rec_kind=rec)
    np.testing.assert_allclose(new.rho, s.rho, rtol=1e-14)
    np.testing.assert_allclose(new.mom, s.mom, rtol=1e-13, atol=1e-15)
    np.testing.assert_allclose(new.energy, s.energy, rtol=1e-14)


@given(seed=st.integers(0, 2**31 - 1), flux=st.sampled_from(["rusanov", "upwind"]),
       rec=st.sampled_from(["muscl", "muscl_central", "feec"]))
def test_fv_step_conserves_on_periodic_grids(seed, flux, rec):
    g = build_grid(6, 5, 4, (1.0, 1.0, 1.0))
    s = random_state(g, seed)
    s = make_state(g, Params(mu=0.01, kappa=0.02), s.rho, s.u, s.p, s.B)
    new = fv.fv_step(s, 1e-3, flux, rec)
    t0, t1 = s.totals(), new.totals()
    for k in ("mass", "mom_x", "mom_y", "mom_z", "E_total"):
        scale = max(abs(t0[k]), t0["mass"])
        assert abs(t1[k] - t0[k]) <= 1e-12 * scale


def test_rp0_contact_is_exactly_stationary():
    spec = get_case("rp0")
    s = init_case(spec)
    new = s
    for _ in range(5):
        new = fv.fv_step(new, 1.0)
    assert np.array_equal(new.rho, s.rho)
    assert np.array_equal(new.mom, s.mom)
    assert np.array_equal(new.energy, s.energy)


def test_negative_density_is_reported():
    g = build_grid(8, 1, 1)
    s = random_state(g)
    s.mom[0] = 50.0
    with pytest.raises(StateError, match="non-positive density"):
        fv.fv_step(s, 1.0, rec_kind="none")


def test_conservative_corrector():
    g = build_grid(6, 5, 4)
    s = uniform_state(g, u=(0, 0, 0))
    new = fv.conservative_corrector(s, 0.1, energy_flux=np.zeros((3,) + g.shape), stress_field=s.B)
    np.testing.assert_allclose(new.mom, s.mom, atol=1e-15)
    np.testing.assert_allclose(new.energy, s.energy)
    r = random_state(g, 7)
    F = np.random.default_rng(1).standard_normal((3,) + g.shape)
    new = fv.conservative_corrector(r, 0.1, energy_flux=F, stress_field=r.B)
    assert np.sum(new.energy) == pytest.approx(np.sum(r.energy), rel=1e-13)
    np.testing.assert_allclose(new.mom.reshape(3, -1).sum(1), r.mom.reshape(3, -1).sum(1), atol=1e-12)


def test_maxwell_stress_of_uniform_field_vanishes_at_open_boundaries():
    g = build_grid(6, 5, 1, (1.0, 1.0, 1.0), (TRANSMISSIVE, TRANSMISSIVE, PERIODIC))
    b = np.ones((3,) + g.shape) * np.array([0.3, -0.7, 0.2]).reshape(3, 1, 1, 1)
    assert np.max(np.abs(fv.maxwell_stress_divergence(g, b))) < 1e-14


def test_edge_momentum_update_preserves_totals():
    g = build_grid(6, 5, 1)
    s = random_state(g, 2)
    dq = np.random.default_rng(5).standard_normal(g.shape)
    moved = g.to_pos(dq, NODE, EDGE[0])
    assert np.sum(moved) == pytest.approx(np.sum(dq))
