import csv
import io

import numpy as np
import pytest

from gridprice.dcopf import DispatchModel
from gridprice.dynamics import RunConfig, RunStatus, Trajectory, lyapunov_series, run, step
from gridprice.experiment import cluster_values, initial_prices
from gridprice.grid import Generator, GridCase, User, build_ptdf
from gridprice.users import UserSet


def scalar_prices(p0, alpha, k):
    """Closed form of p_{k+1} = p_k + alpha (10 - p_k)."""
    return 10.0 - (10.0 - p0) * (1 - alpha) ** np.asarray(k)


def scalar_cost(p):
    # x = 8 - p/2;  C = (x - 8)^2 + 10 x
    return p**2 / 4 + 80 - 5 * p


def test_step_arithmetic(one_bus):
    p_next, rec = step(one_bus.case, one_bus.ptdf, one_bus.users, [5.0], 0.1)
    np.testing.assert_allclose(rec.lmp, [10.0])
    np.testing.assert_allclose(p_next, [5.5])
    assert rec.residual == pytest.approx(5.0)
    np.testing.assert_allclose(rec.x, [5.5])


def test_step_fixed_point(one_bus):
    p_next, rec = step(one_bus.case, one_bus.ptdf, one_bus.users, [10.0], 0.05)
    np.testing.assert_array_equal(p_next, [10.0])
    assert rec.residual == 0.0


def test_scalar_geometric_convergence(one_bus):
    alpha = 0.05
    traj = run(one_bus.case, one_bus.ptdf, one_bus.users, [5.0], RunConfig(alpha=alpha))
    assert traj.status is RunStatus.CONVERGED
    k = np.arange(len(traj))
    np.testing.assert_allclose(traj.prices[:, 0], scalar_prices(5.0, alpha, k), atol=1e-9)
    np.testing.assert_allclose(traj.demands[:, 0], 8 - scalar_prices(5.0, alpha, k) / 2, atol=1e-9)
    expected_steps = int(np.argmax(5.0 * (1 - alpha) ** np.arange(1000) <= 1e-6)) + 1
    assert traj.iterations == expected_steps
    np.testing.assert_allclose(traj.terminal.p, [10.0], atol=1e-6)
    np.testing.assert_allclose(traj.terminal.x, [3.0], atol=1e-6)


def test_start_at_equilibrium_converges_in_one_step(one_bus):
    traj = run(one_bus.case, one_bus.ptdf, one_bus.users, [10.0])
    assert traj.status is RunStatus.CONVERGED
    assert traj.iterations == 1
    np.testing.assert_array_equal(lyapunov_series(traj), [0.0])


def test_scalar_lyapunov_matches_closed_form(one_bus):
    traj = run(one_bus.case, one_bus.ptdf, one_bus.users, [5.0])
    V = lyapunov_series(traj)
    p = traj.prices[:, 0]
    np.testing.assert_allclose(V, scalar_cost(p) - scalar_cost(p[-1]), atol=1e-9)
    assert V[-1] == 0.0
    assert np.all(np.diff(V) < 0)


def test_constant_trajectory_has_zero_lyapunov(one_bus):
    traj = Trajectory()
    for k in range(5):
        _, rec = step(one_bus.case, one_bus.ptdf, one_bus.users, [10.0], 0.05)
        rec.k = k
        traj.records.append(rec)
    traj.status = RunStatus.CONVERGED
    np.testing.assert_array_equal(lyapunov_series(traj), 0.0)


def test_lyapunov_without_convergence_uses_minimum(one_bus):
    traj = run(one_bus.case, one_bus.ptdf, one_bus.users, [5.0], RunConfig(max_iters=5))
    assert traj.status is RunStatus.MAX_ITERS
    assert traj.iterations == 5
    V = lyapunov_series(traj)
    assert V.min() == 0.0
    np.testing.assert_allclose(V, traj.C - traj.C.min())
    with pytest.raises(ValueError):
        lyapunov_series(Trajectory())


def test_ieee14_converges_and_clusters(ieee14):
    p0 = initial_prices(14, seed=11)
    traj = run(ieee14.case, ieee14.ptdf, ieee14.users, p0, model=ieee14.model)
    assert traj.status is RunStatus.CONVERGED
    assert traj.iterations <= 20000
    assert traj.terminal.residual <= 1e-6
    assert len(cluster_values(traj.terminal.lmp, 1e-4)) <= 14


def test_two_seeds_reach_the_same_prices(ieee14):
    ends = []
    for seed in (1, 2):
        traj = run(ieee14.case, ieee14.ptdf, ieee14.users, initial_prices(14, seed=seed), model=ieee14.model)
        assert traj.converged
        ends.append(traj.terminal.p)
    assert np.max(np.abs(ends[0] - ends[1])) <= 1e-3


def test_ieee14_descent_and_alignment(ieee14):
    cfg = RunConfig()
    traj = run(ieee14.case, ieee14.ptdf, ieee14.users, initial_prices(14, seed=5), cfg, model=ieee14.model)
    V = lyapunov_series(traj)
    assert np.mean(np.diff(V) > 1e-9) < 0.01
    t = traj.terminal
    align = np.max(np.abs(t.lmp + ieee14.users.grad(t.x)))
    assert align <= cfg.residual_tol + cfg.alpha * np.max(np.abs(t.lmp - t.p))
    np.testing.assert_allclose(ieee14.users.grad(t.x), -t.p, atol=1e-12)


def test_record_every_keeps_terminal(one_bus):
    traj = run(one_bus.case, one_bus.ptdf, one_bus.users, [5.0], RunConfig(record_every=50))
    ks = [r.k for r in traj.records]
    assert ks[:-1] == list(range(0, traj.iterations - 1, 50))[: len(ks) - 1]
    assert ks[-1] == traj.iterations - 1
    assert traj.terminal.residual <= 1e-6


def capped_case(pmax):
    return GridCase([0], 0, [], [Generator(0, 10.0, pmax)], [User(0, 8.0)])


def test_unservable_mid_run_reports_error():
    case = capped_case(2.5)
    users = UserSet.from_case(case)
    traj = run(case, build_ptdf(case), users, [14.0])
    assert traj.status is RunStatus.ERROR
    assert "unservable" in traj.message
    assert traj.terminal.x[0] <= 2.5
    assert traj.iterations == len(traj)


def test_chattering_guard_at_a_kink_equilibrium():
    """With VOLL the equilibrium sits on the capacity kink x = 2.5, p = 2 (8 - 2.5) = 11.

    The LP returns a vertex LMP (10 or 30), never 11, so the residual cannot
    vanish; the guard must still shrink the step and hold the price near 11.
    """
    case = capped_case(2.5)
    users = UserSet.from_case(case)
    cfg = RunConfig(voll=30.0, max_iters=3000, chatter_window=100)
    traj = run(case, build_ptdf(case), users, [14.0], cfg)
    assert traj.status is RunStatus.MAX_ITERS
    assert 1 <= traj.halvings <= cfg.max_halvings
    assert traj.terminal.alpha == pytest.approx(cfg.alpha / 2**traj.halvings)
    assert abs(traj.terminal.p[0] - 11.0) < 0.05


def test_csv_schema_and_determinism(two_bus):
    def once():
        traj = run(two_bus.case, two_bus.ptdf, two_bus.users, [7.0, 9.0])
        return traj, traj.to_csv()

    traj, text = once()
    assert text == once()[1]
    rows = list(csv.reader(io.StringIO(text)))
    assert rows[0] == ["k", "p_0", "p_1", "x_0", "x_1", "J", "C", "V", "residual"]
    assert len(rows) == len(traj) + 1
    assert float(rows[-1][7]) == 0.0
    assert float(rows[1][1]) == 7.0


@pytest.mark.parametrize("kwargs", [{"alpha": 0.0}, {"max_iters": 0}, {"residual_tol": 0.0}, {"record_every": 0}])
def test_bad_config(kwargs):
    with pytest.raises(ValueError):
        RunConfig(**kwargs)


def test_bad_initial_prices(two_bus):
    with pytest.raises(ValueError):
        run(two_bus.case, two_bus.ptdf, two_bus.users, [1.0])
    with pytest.raises(ValueError):
        run(two_bus.case, two_bus.ptdf, two_bus.users, [1.0, np.inf])


def test_chattering_guard_stops_after_max_halvings():
    case = capped_case(2.5)
    users = UserSet.from_case(case)
    cfg = RunConfig(voll=30.0, max_iters=2000, chatter_window=20)
    traj = run(case, build_ptdf(case), users, [14.0], cfg)
    assert traj.halvings == cfg.max_halvings
    assert traj.terminal.alpha == pytest.approx(cfg.alpha / 2**cfg.max_halvings)
