import numpy as np
import pytest

from fracalign import oracle
from fracalign.hydro import (
    HydroState,
    NonFiniteState,
    SolverAbort,
    SolverConfig,
    VacuumBreach,
    cfl_dt,
    e_quantity,
    initial_state,
    rhs,
    run,
    step_ssprk3,
)
from fracalign.spectral import RealField, frac_constant, make_grid


def make_state(grid, rho, u, t=0.0):
    x = grid.nodes
    r = rho(x) if callable(rho) else np.full(grid.n, float(rho))
    v = u(x) if callable(u) else np.full(grid.n, float(u))
    return HydroState(RealField(r, grid), RealField(v, grid), t)


def observed_order(errors):
    return [np.log2(errors[i] / errors[i + 1]) for i in range(len(errors) - 1)]


def halving_study(n=64, alpha=0.5, t_final=0.4, dt0=0.04, levels=5):
    """Successive differences of fixed-step solutions with dt halved each level."""
    start = initial_state(SolverConfig(n=n, alpha=alpha))
    finals = []
    for level in range(levels):
        dt = dt0 / 2**level
        s = start
        for _ in range(int(round(t_final / dt))):
            s = step_ssprk3(s, dt, alpha)
        finals.append(np.concatenate([s.rho.samples, s.u.samples]))
    return [float(np.max(np.abs(finals[i] - finals[i + 1]))) for i in range(levels - 1)]


class TestHydroState:
    def test_rejects_nonpositive_density(self, grid256):
        with pytest.raises(VacuumBreach):
            make_state(grid256, np.cos, 0.0)

    def test_rejects_nan(self, grid256):
        with pytest.raises(NonFiniteState):
            make_state(grid256, 1.0, lambda x: np.where(x > 1, np.nan, 0.0))

    def test_rejects_grid_mismatch(self):
        a, b = make_grid(64), make_grid(128)
        with pytest.raises(ValueError):
            HydroState(RealField.constant(1.0, a), RealField.constant(0.0, b))


class TestSolverConfig:
    def test_defaults(self):
        c = SolverConfig()
        assert (c.alpha, c.n, c.t_end, c.preset) == (0.5, 512, 20.0, "paper-like")

    @pytest.mark.parametrize("kwargs", [
        {"alpha": 2.0}, {"alpha": 0.0}, {"n": 100}, {"t_end": -1.0}, {"cfl_safety": 0.0},
        {"output_stride": 0}, {"preset": "nope"}, {"preset_params": {"u_drift": 1.0}},
    ])
    def test_rejects(self, kwargs):
        with pytest.raises(ValueError):
            SolverConfig(**kwargs)

    def test_presets(self):
        x = make_grid(64).nodes
        s = initial_state(SolverConfig(n=64))
        np.testing.assert_allclose(s.rho.samples, 1 + 0.5 * np.cos(x))
        np.testing.assert_allclose(s.u.samples, 0.2 * np.sin(x))
        sharp = initial_state(SolverConfig(n=64, preset="sharp"))
        assert np.min(sharp.rho.samples) == pytest.approx(0.1)
        drift = initial_state(SolverConfig(n=64, preset="multiwave", preset_params={"u_drift": 0.4}))
        assert np.mean(drift.u.samples) == pytest.approx(0.4, abs=1e-14)


class TestRhs:
    def test_zero_velocity_is_stationary(self, grid256):
        s = make_state(grid256, lambda x: 1 + 0.5 * np.cos(x) + 0.1 * np.sin(3 * x), 0.0)
        drho, du = rhs(s, 0.5)
        assert np.max(np.abs(drho.samples)) < 1e-14
        assert np.max(np.abs(du.samples)) < 1e-14

    def test_flocking_state_is_stationary(self, grid256):
        s = make_state(grid256, 1.0, 0.7)
        drho, du = rhs(s, 0.5)
        assert np.max(np.abs(drho.samples)) < 1e-14
        assert np.max(np.abs(du.samples)) < 1e-14

    def test_density_flux_integrates_to_zero(self, grid256):
        s = make_state(grid256, lambda x: 1 + 0.5 * np.cos(x), lambda x: 0.1 * np.sin(x))
        drho, _ = rhs(s, 0.5)
        assert abs(drho.integral()) < 1e-12

    def test_linear_momentum_balance(self, grid256):
        # d/dt int rho u = int (rho du + u drho) vanishes for the flux/commutator pair.
        s = make_state(grid256, lambda x: 1 + 0.4 * np.cos(x), lambda x: np.sin(x) + 0.2 * np.cos(2 * x))
        drho, du = rhs(s, 0.75)
        dp = RealField(s.rho.samples * du.samples + s.u.samples * drho.samples, grid256).integral()
        assert abs(dp) < 1e-12


class TestEQuantity:
    def test_flocking_state(self, grid256):
        e = e_quantity(make_state(grid256, 1.0, 0.3), 0.5)
        assert np.max(np.abs(e.samples)) < 1e-14

    def test_unit_density(self, grid256):
        e = e_quantity(make_state(grid256, 1.0, np.sin), 0.5)
        np.testing.assert_allclose(e.samples, np.cos(grid256.nodes), atol=1e-13)

    @pytest.mark.parametrize("alpha", [0.5, 1.5])
    def test_cosine_density(self, grid256, alpha):
        s = make_state(grid256, lambda x: 1 + 0.3 * np.cos(x), 0.0)
        e = e_quantity(s, alpha)
        expected = -frac_constant(alpha) * 0.3 * np.cos(grid256.nodes)
        assert np.max(np.abs(e.samples - expected)) < 1e-12
        quad = -oracle.quad_fractional_laplacian(s.rho, alpha)
        assert np.max(np.abs(e.samples - quad)) < 1e-8


class TestCflDt:
    def test_diffusion_bound(self, grid256):
        s = make_state(grid256, 1.0, 0.0)
        expected = min(grid256.dx**0.5 / frac_constant(0.5), 1e-2)
        assert cfl_dt(s, 0.5, 1.0) == pytest.approx(expected, rel=1e-14)

    def test_transport_bound(self, grid256):
        s = make_state(grid256, 1.0, np.sin)
        assert cfl_dt(s, 0.5, 1.0, dt_cap=np.inf) == pytest.approx(grid256.dx, rel=1e-11)

    def test_doubling_n_halves_transport_bound(self):
        # Fast flow so the transport bound is the active one on both grids.
        a = cfl_dt(make_state(make_grid(128), 1.0, 100.0), 0.5, 1.0, dt_cap=np.inf)
        b = cfl_dt(make_state(make_grid(256), 1.0, 100.0), 0.5, 1.0, dt_cap=np.inf)
        assert a == pytest.approx(2 * b, rel=1e-14)

    def test_safety_scales(self, grid256):
        s = make_state(grid256, 1.0, np.sin)
        assert cfl_dt(s, 0.5, 0.5) == pytest.approx(0.5 * cfl_dt(s, 0.5, 1.0), rel=1e-15)


class TestStep:
    def test_stationary_state(self, grid256):
        s = make_state(grid256, 1.0, 0.4, t=1.5)
        out = step_ssprk3(s, 0.01, 0.5)
        assert out.t == pytest.approx(1.51, abs=1e-15)
        assert np.max(np.abs(out.rho.samples - 1.0)) < 1e-14
        assert np.max(np.abs(out.u.samples - 0.4)) < 1e-14

    @pytest.mark.parametrize("dt", [0.0, -1e-3])
    def test_rejects_nonpositive_dt(self, grid256, dt):
        with pytest.raises(ValueError):
            step_ssprk3(make_state(grid256, 1.0, 0.0), dt, 0.5)

    def test_vacuum_breach_reports_time(self):
        # A huge step drives the density negative in the first stage.
        s = initial_state(SolverConfig(n=64, preset="sharp", preset_params={"u_amplitude": 5.0}))
        with pytest.raises(VacuumBreach) as info:
            step_ssprk3(s, 0.5, 0.5)
        assert info.value.t == 0.0
        assert isinstance(info.value, SolverAbort)

    @pytest.mark.parametrize("alpha", [0.5, 1.0])
    def test_third_order(self, alpha):
        orders = observed_order(halving_study(alpha=alpha, dt0=0.04 if alpha < 1 else 0.02))
        assert min(orders) >= 2.7


class TestRun:
    def test_zero_time(self):
        final, records = run(SolverConfig(n=64, t_end=0.0))
        assert len(records) == 1
        assert final.t == 0.0

    def test_deterministic(self):
        cfg = SolverConfig(n=64, t_end=0.5, output_stride=7)
        _, a = run(cfg)
        _, b = run(cfg)
        assert [r.as_tuple() for r in a] == [r.as_tuple() for r in b]

    def test_records_cadence(self):
        # dt is capped at 0.005 here, so 101 steps with stride 10 gives records 0,10,...,100,101.
        _, records = run(SolverConfig(n=64, t_end=0.505, output_stride=10))
        assert len(records) == 12
        assert records[-1].t == pytest.approx(0.505, abs=1e-12)

    def test_snapshots(self):
        snaps = []
        run(SolverConfig(n=64, t_end=0.1, snapshot_stride=5), on_snapshot=snaps.append)
        assert [s.t for s in snaps] == pytest.approx([0.0, 0.025, 0.05, 0.075, 0.1], abs=1e-12)

    def test_bad_config_aborts(self):
        cfg = SolverConfig(n=64, t_end=1.0, cfl_safety=1.0, preset="sharp",
                           preset_params={"rho_amplitude": 0.999, "u_amplitude": 40.0})
        with pytest.raises(SolverAbort) as info:
            run(cfg)
        assert 0.0 <= info.value.t < 1.0


class TestPaperLikeInvariants:
    """Invariants of the reference run (alpha=0.5, n=512, t_end=20)."""

    def test_mass(self, paper_run):
        _, records, _ = paper_run
        m0 = records[0].M
        assert m0 == pytest.approx(2 * np.pi, rel=1e-14)
        assert max(abs(r.M - m0) for r in records) <= 1e-10 * m0

    def test_momentum(self, paper_run):
        _, records, _ = paper_run
        p0 = records[0].P
        assert abs(p0) < 1e-14
        assert max(abs(r.P - p0) for r in records) <= 1e-8 * max(1.0, abs(p0))

    def test_e_mass(self, paper_run):
        _, records, _ = paper_run
        e0 = records[0].e_mass
        assert max(abs(r.e_mass - e0) for r in records) <= 1e-8

    def test_transported_ratio(self, paper_run):
        _, records, _ = paper_run
        first = records[0]
        spread = first.er_max - first.er_min
        early = [r for r in records if r.t <= 10.0 + 1e-9]
        assert max(abs(r.er_max - first.er_max) for r in early) <= 1e-3 * spread
        assert max(abs(r.er_min - first.er_min) for r in early) <= 1e-3 * spread

    def test_pointwise_e_bound(self, paper_run):
        _, _, states = paper_run
        first = states[0]
        ratio0 = np.max(np.abs(e_quantity(first, 0.5).samples / first.rho.samples))
        for s in states:
            e = e_quantity(s, 0.5)
            assert np.max(np.abs(e.samples)) <= ratio0 * np.max(s.rho.samples) * (1 + 1e-3)

    def test_density_floor(self, paper_run):
        _, records, _ = paper_run
        quarter = [r.rho_min for r in records if r.t <= 5.0 + 1e-9]
        assert min(r.rho_min for r in records) >= 0.5 * min(quarter)
        assert max(r.rho_max for r in records) < np.inf

    def test_amplitude_decreasing_after_one(self, paper_run):
        _, records, _ = paper_run
        v = [r.V for r in records if r.t >= 1.0]
        assert all(b <= a for a, b in zip(v, v[1:]))
        # Strict until V reaches the fit truncation floor; beyond ~1e-30 it can stall.
        live = [x for x in v if x >= 1e-14]
        assert len(live) > 40
        assert all(b < a for a, b in zip(live, live[1:]))

    def test_final_state_is_reported(self, paper_run):
        final, records, states = paper_run
        assert final.t == pytest.approx(20.0, abs=1e-9)
        assert records[-1].t == final.t
        assert states[-1] is final
