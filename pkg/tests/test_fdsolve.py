"""Solver fixed points, discrete consistency, validation against exact
solutions, snapshots, and failure modes."""

import math

import numpy as np
import pytest

from burgers_hierarchy.fdsolve import (
    CFLError,
    Grid1D,
    GridField,
    SolverBlowupError,
    _apply_diffusion,
    _central_dx,
    convergence_study,
    error_norms,
    field_from_exact,
    make_boundary,
    solve_ivp,
    step,
)
from burgers_hierarchy.hopfcole import (
    HeatSolution,
    heat_constant,
    heat_exponential,
    heat_polynomial,
    heat_sum,
    solve_exact,
)
from burgers_hierarchy.symcore import X


def traveling_wave():
    v = heat_sum([(1, heat_constant(1)), (1, heat_exponential(1, sign=-1))])
    return solve_exact(1, [v])


def rational_pair():
    return solve_exact(2, [HeatSolution(X, label="x"), heat_polynomial(2)])


class TestFixedPoints:
    def test_zero_state(self):
        grid = Grid1D(0.0, 1.0, 16, 1e-3, 0.01, boundary="periodic")
        state = GridField(np.zeros((3, 16)), 0.0)
        out = step(state, grid)
        assert np.allclose(out.values, 0.0)
        assert out.time == pytest.approx(1e-3)

    def test_constant_state(self):
        grid = Grid1D(0.0, 1.0, 16, 1e-3, 0.01, boundary="periodic")
        vals = np.vstack([np.full(16, 2.0), np.zeros(16)])
        out = step(GridField(vals, 0.0), grid)
        assert np.allclose(out.values, vals, atol=1e-13)

    def test_input_not_mutated(self):
        grid = Grid1D(0.0, 1.0, 16, 1e-3, 0.01, boundary="periodic")
        vals = np.vstack([np.linspace(0, 1, 16)])
        state = GridField(vals.copy(), 0.0)
        step(state, grid)
        assert np.array_equal(state.values, vals)


class TestDiscreteConsistency:
    def test_spatial_operator_second_order(self):
        # apply the discrete operators to samples of a smooth function and
        # compare with the analytic derivatives on a refinement ladder
        errors = []
        for nx in (64, 128, 256):
            xs = np.linspace(0.0, 1.0, nx)
            dx = xs[1] - xs[0]
            u = np.sin(2 * np.pi * xs)
            d1 = _central_dx(u, dx, periodic=False)[1:-1]
            d2 = _apply_diffusion(u, dx, periodic=False)[1:-1]
            e1 = np.max(np.abs(d1 - 2 * np.pi * np.cos(2 * np.pi * xs)[1:-1]))
            e2 = np.max(np.abs(d2 + (2 * np.pi) ** 2 * np.sin(2 * np.pi * xs)[1:-1]))
            errors.append(max(e1, e2))
        orders = [math.log2(a / b) for a, b in zip(errors, errors[1:])]
        assert all(1.8 < p < 2.2 for p in orders)

    def test_interpolation_only_when_no_steps(self):
        sol = traveling_wave()
        grid = Grid1D(-5.0, 5.0, 64, 1e-3, 0.0)
        init = field_from_exact(sol, grid, 0.0)
        out = solve_ivp(1, init, grid, [0.0], make_boundary(sol, grid))
        assert np.array_equal(out[-1].values, init.values)


class TestValidation:
    def test_traveling_wave_linf(self):
        sol = traveling_wave()
        grid = Grid1D(-10.0, 10.0, 200, 5e-4, 0.1)
        init = field_from_exact(sol, grid, 0.0)
        final = solve_ivp(1, init, grid, [0.1], make_boundary(sol, grid))[-1]
        target = field_from_exact(sol, grid, 0.1)
        _, linf = error_norms(final, target, grid.dx)
        assert linf < 5e-4

    def test_pair_error_decreases_with_refinement(self):
        sol = rational_pair()
        errs = []
        for nx in (50, 100, 200):
            dx = 2.0 / (nx - 1)
            grid = Grid1D(2.0, 4.0, nx, 0.25 * dx * dx, 0.05)
            init = field_from_exact(sol, grid, 0.0)
            final = solve_ivp(2, init, grid, [0.05], make_boundary(sol, grid))[-1]
            target = field_from_exact(sol, grid, 0.05)
            errs.append(error_norms(final, target, grid.dx)[0])
        assert errs[0] > errs[1] > errs[2]

    def test_three_components_from_heat_polynomials(self):
        sol = solve_exact(3, [heat_polynomial(n) for n in (1, 2, 3)])
        grid = Grid1D(3.0, 5.0, 128, 2e-5, 0.05)
        init = field_from_exact(sol, grid, 0.0)
        final = solve_ivp(3, init, grid, [0.05], make_boundary(sol, grid))[-1]
        l2, _ = error_norms(final, field_from_exact(sol, grid, 0.05), grid.dx)
        assert l2 < 1e-2

    def test_zero_data_zero_trajectory(self):
        grid = Grid1D(0.0, 1.0, 16, 1e-3, 0.01, boundary="periodic")
        states = solve_ivp(2, GridField(np.zeros((2, 16)), 0.0), grid,
                           [0.005, 0.01])
        assert all(np.allclose(s.values, 0.0) for s in states)

    def test_snapshot_times_hit_exactly(self):
        sol = traveling_wave()
        grid = Grid1D(-5.0, 5.0, 32, 7e-3, 0.02)  # dt does not divide targets
        init = field_from_exact(sol, grid, 0.0)
        out = solve_ivp(1, init, grid, [0.01, 0.02], make_boundary(sol, grid))
        assert [s.time for s in out] == pytest.approx([0.01, 0.02])


class TestConvergence:
    def test_single_component_order_two(self):
        report = convergence_study(1, traveling_wave(), [50, 100, 200],
                                   -10.0, 10.0, 0.1)
        assert all(1.8 <= p <= 2.2 for p in report.orders_l2)
        assert report.monotone

    def test_needs_three_levels(self):
        with pytest.raises(ValueError):
            convergence_study(1, traveling_wave(), [50, 100], -5.0, 5.0, 0.1)

    def test_report_json(self):
        report = convergence_study(1, traveling_wave(), [50, 100, 200],
                                   -10.0, 10.0, 0.05)
        doc = report.to_json_dict()
        assert len(doc["entries"]) == 3
        assert len(doc["orders_L2"]) == 2


class TestFailureModes:
    def test_blowup_detected(self):
        grid = Grid1D(0.0, 1.0, 16, 1e-3, 0.01, boundary="periodic")
        vals = np.vstack([np.full(16, 1e200)])
        state = GridField(vals, 0.0)
        state.values[0, 3] = np.inf
        with pytest.raises(SolverBlowupError):
            step(state, grid)

    def test_cfl_substep_limit(self):
        grid = Grid1D(0.0, 1.0, 16, dt=10.0, t_end=10.0, boundary="periodic",
                      max_substeps=4)
        vals = np.vstack([np.full(16, 100.0)])
        with pytest.raises(CFLError):
            step(GridField(vals, 0.0), grid)

    def test_cfl_substepping_succeeds(self):
        # the same configuration with an adequate budget just substeps
        grid = Grid1D(0.0, 1.0, 16, dt=0.05, t_end=0.05, boundary="periodic")
        vals = np.vstack([np.sin(np.linspace(0, 2 * np.pi, 16)) * 5.0])
        out = step(GridField(vals, 0.0), grid)
        assert np.all(np.isfinite(out.values))

    def test_dirichlet_needs_boundary(self):
        grid = Grid1D(0.0, 1.0, 16, 1e-3, 0.01)
        with pytest.raises(ValueError):
            step(GridField(np.zeros((1, 16)), 0.0), grid)

    def test_grid_validation(self):
        with pytest.raises(ValueError):
            Grid1D(0.0, 1.0, 4, 1e-3, 0.01)
        with pytest.raises(ValueError):
            Grid1D(0.0, 1.0, 16, -1e-3, 0.01)
        with pytest.raises(ValueError):
            Grid1D(0.0, 1.0, 16, 1e-3, 0.01, boundary="mirror")


class TestPeriodic:
    def test_periodic_diffusion_conserves_mass(self):
        grid = Grid1D(0.0, 1.0, 64, 1e-4, 0.01, boundary="periodic")
        xs = np.linspace(0.0, 1.0, 64)
        vals = np.vstack([0.1 * np.sin(2 * np.pi * xs)])
        state = GridField(vals, 0.0)
        total0 = state.values.sum()
        for _ in range(20):
            state = step(state, grid)
        assert state.values.sum() == pytest.approx(total0, abs=1e-9)
