import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from coplan.errors import ConfigError, PlanInfeasibleError
from coplan.netsim import LinkProfile
from coplan.planner import (
    TIME_ONLY,
    DeviceProfile,
    Mode,
    TaskSpec,
    augment_with_transfer,
    build_cost_time_lp,
    build_energy_time_lp,
    check_plan,
    pareto_sweep,
    plan,
    plan_even_split,
)
from oracles import grid_allocation_optimum


def s1_fleet(trusted=True):
    return [
        DeviceProfile("d0", e=3, f=2, c=0, kind="initiator"),
        DeviceProfile("d1", e=1, f=2, c=1, b=100, trusted=trusted, link="bt"),
        DeviceProfile("d2", e=4, f=0.5, c=1, b=100, trusted=trusted, link="bt"),
    ]


def test_s1_energy_only():
    p = plan(TaskSpec(4, gamma=0), s1_fleet())
    assert p.shares == pytest.approx([0, 4, 0])
    assert p.energy == pytest.approx(4)
    assert p.completion_time == pytest.approx(8)


def test_s1_time_only():
    p = plan(TaskSpec(4, gamma=TIME_ONLY), s1_fleet())
    assert p.shares == pytest.approx([2 / 3, 2 / 3, 8 / 3])
    assert p.completion_time == pytest.approx(4 / 3, abs=1e-9)
    assert p.energy == pytest.approx(40 / 3)


def test_s1_balanced_tie_break():
    p = plan(TaskSpec(4, gamma=1), s1_fleet())
    assert p.scalarized_objective == pytest.approx(12, abs=1e-9)
    assert p.completion_time == pytest.approx(4, abs=1e-9)
    assert p.shares == pytest.approx([2, 2, 0])
    assert p.energy == pytest.approx(8)


def test_s1_lp_structure():
    lp = build_energy_time_lp(TaskSpec(4, gamma=1), s1_fleet())
    assert lp.variable_count == 4
    # d0 has no budget, so only two budget rows accompany the three time rows
    assert lp.A_ub.shape == (5, 4)
    assert lp.A_eq.shape == (1, 4)
    np.testing.assert_allclose(lp.objective, [3, 1, 4, 1])
    lp = build_energy_time_lp(TaskSpec(4, gamma=1, payment_budget=3), s1_fleet())
    assert lp.A_ub.shape == (6, 4)
    np.testing.assert_allclose(lp.A_ub[-1], [0, 1, 1, 0])


def test_single_device_only_point():
    p = plan(TaskSpec(4, gamma=0.3), [DeviceProfile("a", e=2, f=1, kind="initiator")])
    assert p.shares == pytest.approx([4])
    assert p.completion_time == pytest.approx(4)


def test_fully_sensitive_task():
    fleet = s1_fleet(trusted=False)
    fleet[1] = DeviceProfile("d1", e=1, f=2, c=1, b=100, trusted=True, link="bt")
    p = plan(TaskSpec(4, sensitive=4, gamma=0), fleet)
    assert p.shares == pytest.approx([0, 0, 0])
    assert p.sensitive_shares.sum() == pytest.approx(4)
    assert p.sensitive_shares[2] == 0.0


def test_privacy_bus_scenario():
    task = TaskSpec(4, sensitive=1.5, gamma=TIME_ONLY)
    p = plan(task, s1_fleet(trusted=False))
    assert p.completion_time == pytest.approx(3.0, abs=1e-9)
    assert p.sensitive_shares.tolist() == [1.5, 0.0, 0.0]
    # time first, then energy: d1 is the cheapest device that still finishes by t=3
    assert p.shares == pytest.approx([0, 1.5, 1.0])
    assert check_plan(p, task, s1_fleet(trusted=False)) == []


def test_privacy_without_trusted_device():
    fleet = [DeviceProfile("a", e=1, f=1, kind="peer"), DeviceProfile("b", e=1, f=1)]
    with pytest.raises(PlanInfeasibleError) as err:
        plan(TaskSpec(2, sensitive=1), fleet)
    assert err.value.binding == "privacy"


def test_cost_time_free_device():
    fleet = [DeviceProfile("a", e=1, f=1, c=0, kind="initiator"), DeviceProfile("b", e=1, f=1, c=1)]
    p = plan(TaskSpec(2, gamma=0, mode="cost_time"), fleet)
    assert p.shares == pytest.approx([2, 0])
    assert p.payment == pytest.approx(0)


def test_cost_time_budget_forces_split():
    fleet = [DeviceProfile("a", e=1, f=1, c=0, b=1, kind="initiator"), DeviceProfile("b", e=1, f=1, c=1)]
    p = plan(TaskSpec(2, gamma=0, mode="cost_time"), fleet)
    assert p.shares == pytest.approx([1, 1])
    assert p.payment == pytest.approx(1)
    lp = build_cost_time_lp(TaskSpec(2, gamma=0, mode="cost_time", payment_budget=0.5), fleet)
    # payment is the objective, so there is no payment row
    assert lp.A_ub.shape[0] == 1 + 2


def test_cost_time_single_free_device():
    for g in (0, 1, TIME_ONLY):
        p = plan(TaskSpec(3, gamma=g, mode="cost_time"), [DeviceProfile("a", e=1, f=1, kind="initiator")])
        assert p.payment == 0


def test_infeasible_energy_budgets():
    fleet = [DeviceProfile("a", e=1, f=1, b=1, kind="initiator"), DeviceProfile("b", e=1, f=1, b=1)]
    with pytest.raises(PlanInfeasibleError) as err:
        plan(TaskSpec(4), fleet)
    assert err.value.binding == "energy_budgets"


def test_infeasible_payment_budget():
    fleet = [DeviceProfile("a", e=1, f=1, b=1, kind="initiator"), DeviceProfile("b", e=1, f=1, c=2)]
    with pytest.raises(PlanInfeasibleError) as err:
        plan(TaskSpec(4, payment_budget=1), fleet)
    assert err.value.binding == "payment_budget"


def test_even_split():
    p = plan_even_split(TaskSpec(4, gamma=0), s1_fleet())
    assert p.shares == pytest.approx([4 / 3] * 3)
    assert p.energy == pytest.approx(32 / 3)
    assert p.completion_time == pytest.approx(8 / 3)
    assert p.violations == ()
    p = plan_even_split(TaskSpec(4, sensitive=1.5), s1_fleet(trusted=False))
    assert p.sensitive_shares.tolist() == [1.5, 0, 0]


def test_even_split_reports_violations():
    fleet = [DeviceProfile("a", e=1, f=1, kind="initiator"), DeviceProfile("b", e=3, f=1, b=1)]
    p = plan_even_split(TaskSpec(2), fleet)
    assert p.violations == ("energy budget of b",)


def test_sweep_s1():
    rows = pareto_sweep(TaskSpec(4), s1_fleet(), [0, 1, TIME_ONLY])
    t = [p.completion_time for _, p in rows]
    e = [p.energy for _, p in rows]
    assert t == pytest.approx([8, 4, 4 / 3])
    assert e == pytest.approx([4, 8, 40 / 3])


def test_sweep_repeated_gamma_gives_identical_plans():
    rows = pareto_sweep(TaskSpec(4), s1_fleet(), [1, 1])
    np.testing.assert_array_equal(rows[0][1].shares, rows[1][1].shares)
    with pytest.raises(ValueError):
        pareto_sweep(TaskSpec(4), s1_fleet(), [1, 0])


def test_augment_with_transfer():
    links = [LinkProfile("bt", 2.1, 0.44, 0.44), LinkProfile("wifi", 8.0, 1.5, 0.0)]
    fleet = s1_fleet() + [DeviceProfile("cl", e=2, f=0.1, kind="cloud", link="wifi")]
    eff = augment_with_transfer(fleet, links)
    d0, d1, _, cl = eff.devices
    assert d0.f == 2 and d0.e == 3
    assert d1.f == pytest.approx(2 + 8 / 2.1)
    assert d1.e == pytest.approx(1 + 0.88 * 8 / 2.1)
    assert cl.f == pytest.approx(1.1)
    assert cl.e == pytest.approx(1.5)
    with pytest.raises(ConfigError):
        augment_with_transfer([DeviceProfile("x", e=1, f=1, link="nope")], links)


def test_cloud_energy_excluded_from_objective():
    fleet = [DeviceProfile("p", e=1, f=1, kind="initiator"), DeviceProfile("cl", e=5, f=1, b=100, kind="cloudlet")]
    p = plan(TaskSpec(4, gamma=0), fleet)
    assert p.shares == pytest.approx([0, 4])
    assert p.energy == 0


def test_task_validation():
    with pytest.raises(ConfigError):
        TaskSpec(0)
    with pytest.raises(ConfigError):
        TaskSpec(1, sensitive=2)
    with pytest.raises(ConfigError):
        TaskSpec(1, gamma=-1)
    with pytest.raises(ConfigError):
        DeviceProfile("a", e=1, f=0)


def random_fleet(rng, n):
    fleet = []
    for i in range(n):
        e = float(rng.uniform(0.1, 5))
        b = float(rng.uniform(2, 30)) if rng.random() < 0.5 else math.inf
        kind = "initiator" if i == 0 else ("cloudlet" if rng.random() < 0.15 else "peer")
        fleet.append(DeviceProfile(f"d{i}", e=e, f=float(rng.uniform(0.1, 5)), c=float(rng.uniform(0, 2)),
                                   b=b, trusted=bool(rng.random() < 0.5), kind=kind))
    return fleet


@settings(max_examples=80, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), n=st.integers(1, 6),
       gamma=st.sampled_from([0, 0.1, 1, 10, TIME_ONLY]), mode=st.sampled_from(list(Mode)),
       u=st.floats(0, 1))
def test_plans_satisfy_invariants(seed, n, gamma, mode, u):
    rng = np.random.default_rng(seed)
    fleet = random_fleet(rng, n)
    task = TaskSpec(4, sensitive=4 * u, gamma=gamma, mode=mode)
    try:
        p = plan(task, fleet)
    except PlanInfeasibleError as exc:
        assert exc.binding in ("payment_budget", "privacy", "energy_budgets")
        return
    assert check_plan(p, task, fleet, tol=1e-7) == []


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), n=st.integers(2, 6), gamma=st.sampled_from([0, 1, TIME_ONLY]))
def test_plan_invariant_under_permutation(seed, n, gamma):
    rng = np.random.default_rng(seed)
    fleet = random_fleet(rng, n)
    task = TaskSpec(3, gamma=gamma)
    try:
        a = plan(task, fleet)
    except PlanInfeasibleError:
        return
    perm = rng.permutation(n)
    b = plan(task, [fleet[i] for i in perm])
    assert b.loads() == pytest.approx(a.loads(), abs=1e-9)
    assert b.scalarized_objective == pytest.approx(a.scalarized_objective, abs=1e-9)


def test_grid_oracle_agrees_on_s1():
    fleet = s1_fleet()
    e = [3, 1, 4]
    for gamma in (0, 1, TIME_ONLY):
        ref, _ = grid_allocation_optimum(e, e, [2, 2, 0.5], [math.inf, 100, 100], 4, gamma)
        p = plan(TaskSpec(4, gamma=gamma), fleet)
        assert p.scalarized_objective <= ref + 1e-9
        slack = 0.01 * 2 if math.isinf(gamma) else 0.01 * (sum(e) + gamma * 2)
        assert ref - p.scalarized_objective <= slack


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), n=st.integers(1, 10), gamma=st.sampled_from([0, 1, TIME_ONLY]))
def test_backends_give_identical_plans(seed, n, gamma):
    rng = np.random.default_rng(seed)
    fleet = random_fleet(rng, n)
    task = TaskSpec(5, sensitive=1.0, gamma=gamma)
    try:
        a = plan(task, fleet, backend="numba")
    except PlanInfeasibleError:
        with pytest.raises(PlanInfeasibleError):
            plan(task, fleet, backend="numpy")
        return
    b = plan(task, fleet, backend="numpy")
    np.testing.assert_allclose(a.shares, b.shares, atol=1e-12)
    np.testing.assert_allclose(a.sensitive_shares, b.sensitive_shares, atol=1e-12)
