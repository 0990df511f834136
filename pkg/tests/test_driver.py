import numpy as np
import pytest

from femhd import operators as ops
from femhd.acoustic import solve_acoustic_step
from femhd.alfven import solve_alfven_step
from femhd.cases import get_case, init_case
from femhd.driver import (SolverConfig, advance_step, cfl_denominator, compute_dt,
                          effective_courant, run_simulation)
from femhd.fv import fv_step
from femhd.mesh import ConfigurationError, build_grid
from femhd.operators import StateError
from femhd.physics import Params, make_state


@pytest.mark.parametrize("bad", [dict(cfl=0.0), dict(cfl=1.5), dict(theta_b=1.2), dict(R=0),
                                 dict(S_p=0), dict(S_b=-1), dict(dt_kind="q"), dict(flux="hllc"),
                                 dict(reconstruction="weno"), dict(c_h=-1.0), dict(t_end=-1.0)])
def test_config_validation(bad):
    with pytest.raises(ConfigurationError):
        SolverConfig(**bad)


def test_defaults():
    cfg = SolverConfig()
    assert (cfg.theta_p, cfg.theta_b, cfg.R, cfg.S_p, cfg.S_b) == (1.0, 1.0, 1, 1, 0)
    assert cfg.cg_options.rel_tol == 1e-12 and cfg.cg_options.max_iter == 10_000


def _state_1d(n=100, u=0.0, mu=0.0, p=1.0):
    g = build_grid(n, 1, 1)
    return make_state(g, Params(mu=mu), 1.0, np.array([u, 0, 0]).reshape(3, 1, 1, 1), p, 0.0)


def test_compute_dt_examples():
    s = _state_1d()
    assert compute_dt(s, SolverConfig(t_end=3.0, first_step_kind=None)) == 3.0
    s = _state_1d(u=1.0)
    assert compute_dt(s, SolverConfig(t_end=1.0)) == pytest.approx(0.009)
    mu = 0.01
    s = _state_1d(mu=mu)
    dt = compute_dt(s, SolverConfig(t_end=1.0, first_step_kind=None))
    assert dt == pytest.approx(0.9 * 0.01**2 / (2 * 4.0 / 3.0 * mu * 1))
    s = _state_1d(u=1.0)
    assert compute_dt(s, SolverConfig(t_end=1.0), prev_dt=0.001) == pytest.approx(0.0011)
    s.t = 0.995
    assert compute_dt(s, SolverConfig(t_end=1.0)) == pytest.approx(0.005)


def test_first_step_uses_the_fallback_speed():
    s = _state_1d()
    dt = compute_dt(s, SolverConfig(t_end=10.0))
    assert dt == pytest.approx(0.9 * 0.01 / np.sqrt(5.0 / 3.0))


def test_effective_courant_consistency():
    s = _state_1d(u=0.5)
    cfg = SolverConfig(t_end=1.0)
    dt = compute_dt(s, cfg)
    assert effective_courant(s, dt, cfg.cfl) == pytest.approx(
        dt * cfl_denominator(s, "MHD") / cfg.cfl)


def test_uniform_state_is_stationary():
    g = build_grid(8, 6, 1)
    s = make_state(g, Params(eta=0.01), 1.3, np.array([0.2, -0.1, 0.05]).reshape(3, 1, 1, 1), 2.0,
                   np.array([0.3, 0.4, 0.1]).reshape(3, 1, 1, 1))
    new, _ = advance_step(s, SolverConfig(c_eta=0.01, theta_b=0.5, R=2), 0.05)
    np.testing.assert_allclose(new.rho, s.rho, rtol=1e-13)
    np.testing.assert_allclose(new.mom, s.mom, rtol=1e-12, atol=1e-14)
    np.testing.assert_allclose(new.B, s.B, rtol=1e-13)
    np.testing.assert_allclose(new.p, s.p, rtol=1e-12)


def test_orszag_tang_step_conserves():
    spec = get_case("ot_ideal")
    s = init_case(spec, spec.grid(64, 64))
    new, info = advance_step(s, SolverConfig(), compute_dt(s, SolverConfig(t_end=2.0)))
    t0, t1 = s.totals(), new.totals()
    mscale = float(np.sum(np.abs(s.mom)) * s.grid.vol)
    for k in ("mass", "E_total"):
        assert abs(t1[k] - t0[k]) <= 1e-12 * abs(t0[k])
    for k in ("mom_x", "mom_y", "mom_z"):
        assert abs(t1[k] - t0[k]) <= 1e-12 * mscale
    assert info.cg_iters_b > 0 and info.cg_iters_p > 0


def test_ideal_step_is_the_plain_composition():
    spec = get_case("ot_ideal")
    s = init_case(spec, spec.grid(16, 16))
    cfg = SolverConfig()
    dt = 0.01
    new, _ = advance_step(s, cfg, dt)
    a = solve_alfven_step(fv_step(s, dt), dt, 1.0, cfg.picard, True, cfg.cg_options,
                          fv_step(s, dt).p)
    manual = solve_acoustic_step(a.state, dt, 1.0, 1, 0.0, cfg.cg_options).state
    assert np.array_equal(new.B, manual.B)
    assert np.array_equal(new.mom, manual.mom)
    assert np.array_equal(new.energy, manual.energy)


def test_run_records_and_zero_length_run():
    spec = get_case("ot_ideal")
    s = init_case(spec, spec.grid(16, 16))
    res = run_simulation(s, SolverConfig(t_end=0.0))
    assert res.steps == 0 and len(res.records) == 1
    seen = []
    res = run_simulation(s, SolverConfig(t_end=0.6, helicity_every=2),
                         on_step=lambda st, rec: seen.append(rec.t))
    assert res.state.t == 0.6 and res.steps >= 3
    assert len(seen) == res.steps == len(res.records) - 1
    assert res.records[0].helicity is not None
    assert res.records[1].helicity is None and res.records[2].helicity is not None
    for rec in res.records[1:]:
        assert rec.divB_Linf < 1e-11
        assert rec.cg_iters_b > 0


def test_phase_annotation_on_failure():
    g = build_grid(8, 1, 1)
    s = make_state(g, Params(), 1.0, 0.0, 1.0, 0.0)
    s.mom[0][3] = 40.0
    with pytest.raises(StateError, match=r"\[convection\]"):
        advance_step(s, SolverConfig(reconstruction="none"), 1.0)


def test_max_steps_stops_early():
    spec = get_case("rp1")
    s = init_case(spec, spec.grid(50))
    res = run_simulation(s, SolverConfig(t_end=0.1, max_steps=3))
    assert res.steps == 3 and res.state.t < 0.1
