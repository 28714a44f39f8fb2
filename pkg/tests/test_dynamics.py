import numpy as np
import pytest

from evopoisson import (ParameterError, StepFamily, StepSchedule,
                        discrete_replicator, integrate_replicator,
                        replicator_rhs, solve_equilibrium)

INV_N = StepSchedule(StepFamily.INV_N)


@pytest.mark.parametrize("family,flags", [
    (StepFamily.INV_N, (True, True, False)),
    (StepFamily.INV_N_LOG_N, (True, True, True)),
    (StepFamily.INV_N_SQ, (False, True, None)),
    (StepFamily.CONSTANT, (True, False, False)),
])
def test_schedule_flags(family, flags):
    sched = StepSchedule(family, h=0.1)
    assert (sched.sums_to_infinity, sched.square_summable,
            sched.slower_than_inv_n) == flags


def test_schedule_steps():
    assert INV_N.step(1) == 1.0
    assert INV_N.step(4) == 0.25
    assert StepSchedule(StepFamily.INV_N_LOG_N).step(1) == 1.0
    assert StepSchedule(StepFamily.INV_N_SQ).step(3) == pytest.approx(1 / 9)
    assert StepSchedule(StepFamily.CONSTANT, h=0.05).step(17) == 0.05
    with pytest.raises(ParameterError):
        INV_N.step(0)
    with pytest.raises(ParameterError):
        StepSchedule(StepFamily.CONSTANT)


def test_rhs_boundaries(low_spread_engine):
    assert replicator_rhs(low_spread_engine, 0.0) == 0.0
    assert replicator_rhs(low_spread_engine, 1.0) == 0.0


def test_rhs_vanishes_at_equilibrium(low_spread_engine):
    p_star = solve_equilibrium(low_spread_engine).p_star
    assert abs(replicator_rhs(low_spread_engine, p_star)) < 1e-8


def test_rhs_sign_below_equilibrium(low_spread_engine):
    # cost of staying unprotected at p=0.3 is below the price, so the
    # unprotected share keeps growing toward the rest point
    assert low_spread_engine.expected_cost_off(0.3) < 4.0
    assert replicator_rhs(low_spread_engine, 0.3) > 0.0


def test_rhs_epsilon_scaling(low_spread_engine):
    base = replicator_rhs(low_spread_engine, 0.4, epsilon=1.0)
    assert replicator_rhs(low_spread_engine, 0.4, epsilon=0.1) == pytest.approx(
        10.0 * base, rel=1e-12)


def test_integrate_converges_both_starts(low_spread_engine_lam20):
    eng = low_spread_engine_lam20
    p_star = solve_equilibrium(eng).p_star
    finals = []
    for p0 in (0.3, 0.7):
        traj = integrate_replicator(eng, p0, tol=1e-10)
        assert traj.converged
        assert abs(traj.final - p_star) < 1e-4
        finals.append(traj.final)
    assert abs(finals[0] - finals[1]) < 1e-4
    assert p_star == pytest.approx(0.44, abs=0.03)


def test_integrate_fixed_points(low_spread_engine):
    assert integrate_replicator(low_spread_engine, 0.0).final == 0.0
    p_star = solve_equilibrium(low_spread_engine).p_star
    traj = integrate_replicator(low_spread_engine, p_star, tol=1e-9)
    assert abs(traj.final - p_star) < 1e-6


def test_integrate_lyapunov_monotone(low_spread_engine):
    p_star = solve_equilibrium(low_spread_engine).p_star
    for p0 in (0.15, 0.5, 0.95):
        traj = integrate_replicator(low_spread_engine, p0, tol=1e-10)
        gaps = np.abs(traj.values - p_star)
        assert np.all(np.diff(gaps) <= 1e-12)


def test_integrate_epsilon_invariant_limit(low_spread_engine):
    finals = []
    for eps in (0.1, 1.0, 10.0):
        traj = integrate_replicator(low_spread_engine, 0.4, epsilon=eps,
                                    t_max=4000.0 * eps, tol=1e-10)
        assert traj.converged
        finals.append(traj.final)
    assert max(finals) - min(finals) < 1e-6


def test_integrate_rejects_bad_params(low_spread_engine):
    with pytest.raises(ParameterError):
        integrate_replicator(low_spread_engine, 0.5, dt=-0.1)
    with pytest.raises(ParameterError):
        integrate_replicator(low_spread_engine, 0.5, t_max=0.0)
    with pytest.raises(ParameterError):
        integrate_replicator(low_spread_engine, 1.5)


def test_discrete_converges_to_bisection(low_spread_engine):
    p_star = solve_equilibrium(low_spread_engine).p_star
    traj = discrete_replicator(low_spread_engine, 0.5, INV_N,
                               n_max=50_000_000, tol=2e-5)
    assert traj.converged
    assert abs(traj.final - p_star) < 1e-4


def test_discrete_boundary_starts_fixed(low_spread_engine):
    for p0 in (0.0, 1.0):
        traj = discrete_replicator(low_spread_engine, p0, INV_N)
        assert traj.final == p0
        assert traj.converged


def test_discrete_square_summable_stalls(low_spread_engine):
    p_star = solve_equilibrium(low_spread_engine).p_star
    with pytest.warns(UserWarning):
        traj = discrete_replicator(low_spread_engine, 0.5,
                                   StepSchedule(StepFamily.INV_N_SQ),
                                   n_max=200_000, tol=1e-9)
    assert not traj.converged
    assert traj.final < p_star - 1e-3  # finite total step mass parks short


def test_discrete_constant_schedule_warns(low_spread_engine):
    with pytest.warns(UserWarning):
        discrete_replicator(low_spread_engine, 0.5,
                            StepSchedule(StepFamily.CONSTANT, h=0.01),
                            n_max=1000, tol=1e-12)


def test_discrete_continuous_agreement(low_spread_engine):
    ode = integrate_replicator(low_spread_engine, 0.35, tol=1e-10)
    disc = discrete_replicator(low_spread_engine, 0.35, INV_N,
                               n_max=50_000_000, tol=2e-5)
    assert abs(ode.final - disc.final) < 1e-4


def test_trajectory_shape(low_spread_engine):
    traj = integrate_replicator(low_spread_engine, 0.25, tol=1e-10)
    assert np.all(np.diff(traj.times) > 0.0)
    assert np.all((traj.values >= 0.0) & (traj.values <= 1.0))
    assert traj.rest_point is not None
