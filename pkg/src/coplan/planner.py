"""Workload allocation across an initiator, peers, cloudlets and cloud.

Decision variables, in device order::

    x_1..x_n    insensitive MB per device
    y_1..y_m    sensitive MB per trusted device (only when the task has any)
    t           completion time bound, f_i (x_i + y_i) <= t

Two scalarized programs are built: energy + gamma * t (with an optional
payment cap) and payment + gamma * t. ``gamma = inf`` is a separate
time-first mode rather than a large weight.
"""
import math
from dataclasses import dataclass, replace
from enum import Enum
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from .errors import ConfigError, PlanInfeasibleError
from .lp import LinearProgram, Status, solve_lexicographic
from .netsim import LinkProfile

TIME_ONLY = math.inf
INF = math.inf


class DeviceKind(str, Enum):
    INITIATOR = "initiator"
    PEER = "peer"
    CLOUDLET = "cloudlet"
    CLOUD = "cloud"

    @property
    def mobile(self) -> bool:
        return self in (DeviceKind.INITIATOR, DeviceKind.PEER)


class Mode(str, Enum):
    ENERGY_TIME = "energy_time"
    COST_TIME = "cost_time"


@dataclass(frozen=True)
class DeviceProfile:
    """Per-MB costs and limits of one device.

    ``e`` J/MB, ``f`` s/MB, ``c`` payment units/MB, ``b`` energy budget in J
    (``inf`` when unbounded). The initiator always counts as trusted.
    ``overhead_time``/``overhead_energy`` are fixed per-delegation costs used
    only by the simulator. ``services=None`` means every service is installed.
    """

    id: str
    e: float
    f: float
    c: float = 0.0
    b: float = INF
    trusted: bool = False
    kind: DeviceKind = DeviceKind.PEER
    link: Optional[str] = None
    overhead_time: float = 0.0
    overhead_energy: float = 0.0
    services: Optional[Tuple[str, ...]] = None

    def __post_init__(self):
        object.__setattr__(self, "kind", DeviceKind(self.kind))
        if self.services is not None:
            object.__setattr__(self, "services", tuple(self.services))
        bad = []
        if not self.e >= 0:
            bad.append("e >= 0")
        if not self.f > 0:
            bad.append("f > 0")
        if not self.c >= 0:
            bad.append("c >= 0")
        if not self.b >= 0:
            bad.append("b >= 0")
        if self.overhead_time < 0 or self.overhead_energy < 0:
            bad.append("overheads >= 0")
        if bad:
            raise ConfigError(f"device {self.id!r} violates {', '.join(bad)}")

    @property
    def is_trusted(self) -> bool:
        return self.trusted or self.kind is DeviceKind.INITIATOR

    @property
    def mobile_e(self) -> float:
        """Energy per MB counted toward the mobile total."""
        return self.e if self.kind.mobile else 0.0

    def offers(self, service: str) -> bool:
        return self.services is None or service in self.services


@dataclass(frozen=True)
class TaskSpec:
    workload: float
    sensitive: float = 0.0
    payment_budget: float = INF
    gamma: float = 0.0
    mode: Mode = Mode.ENERGY_TIME
    service: str = "task"

    def __post_init__(self):
        object.__setattr__(self, "mode", Mode(self.mode))
        if not self.workload > 0:
            raise ConfigError("workload must be positive")
        if not 0 <= self.sensitive <= self.workload:
            raise ConfigError("sensitive workload must lie in [0, workload]")
        if not self.gamma >= 0:
            raise ConfigError("gamma must be >= 0 (inf for time-only)")
        if not self.payment_budget >= 0:
            raise ConfigError("payment budget must be >= 0")

    @property
    def time_only(self) -> bool:
        return math.isinf(self.gamma)


@dataclass(frozen=True)
class EffectiveDevice:
    device: DeviceProfile
    e: float  # mobile J/MB including transfer
    f: float  # s/MB including transfer
    note: str = ""

    @property
    def id(self):
        return self.device.id

    @property
    def c(self):
        return self.device.c


@dataclass(frozen=True)
class EffectiveFleet:
    devices: Tuple[EffectiveDevice, ...]

    def __iter__(self):
        return iter(self.devices)

    def __len__(self):
        return len(self.devices)

    def __getitem__(self, i):
        return self.devices[i]


Fleet = Union[Sequence[DeviceProfile], EffectiveFleet]


@dataclass(frozen=True, eq=False)
class AllocationPlan:
    device_ids: Tuple[str, ...]
    shares: np.ndarray
    sensitive_shares: np.ndarray
    completion_time: float
    energy: float
    payment: float
    scalarized_objective: float
    status: str = "optimal"
    gamma: float = 0.0
    mode: Mode = Mode.ENERGY_TIME
    violations: Tuple[str, ...] = ()
    transfer_augmented: bool = False

    @property
    def load(self) -> np.ndarray:
        return self.shares + self.sensitive_shares

    def share_of(self, device_id) -> float:
        return float(self.load[self.device_ids.index(device_id)])

    def loads(self) -> Dict[str, float]:
        return {d: float(v) for d, v in zip(self.device_ids, self.load)}


@dataclass
class _Coeffs:
    ids: List[str]
    e_obj: np.ndarray
    e_budget: np.ndarray
    f: np.ndarray
    c: np.ndarray
    b: np.ndarray
    trusted: np.ndarray
    augmented: bool


def _coeffs(fleet: Fleet) -> _Coeffs:
    items = list(fleet)
    if not items:
        raise ConfigError("fleet must contain at least one device")
    if isinstance(fleet, EffectiveFleet):
        devs = [it.device for it in items]
        e_obj = [it.e for it in items]
        f = [it.f for it in items]
        augmented = True
    else:
        devs = items
        e_obj = [d.mobile_e for d in devs]
        f = [d.f for d in devs]
        augmented = False
    ids = [d.id for d in devs]
    if len(set(ids)) != len(ids):
        raise ConfigError("device ids must be unique")
    return _Coeffs(
        ids=ids,
        e_obj=np.array(e_obj, dtype=float),
        e_budget=np.array([d.e for d in devs], dtype=float),
        f=np.array(f, dtype=float),
        c=np.array([d.c for d in devs], dtype=float),
        b=np.array([d.b for d in devs], dtype=float),
        trusted=np.array([d.is_trusted for d in devs], dtype=bool),
        augmented=augmented,
    )


@dataclass
class _Layout:
    n: int
    trusted_idx: np.ndarray
    t_col: int

    @property
    def size(self):
        return self.t_col + 1

    def load_matrix(self):
        """Map z to per-device load x_i + y_i."""
        L = np.zeros((self.n, self.size))
        L[np.arange(self.n), np.arange(self.n)] = 1.0
        for k, i in enumerate(self.trusted_idx):
            L[i, self.n + k] = 1.0
        return L


def _build(task: TaskSpec, co: _Coeffs, mode: Mode, payment_row=True, budget_rows=True, privacy=True):
    n = len(co.ids)
    u = task.sensitive if privacy else 0.0
    trusted_idx = np.flatnonzero(co.trusted) if u > 0 else np.array([], dtype=int)
    if u > 0 and trusted_idx.size == 0:
        raise PlanInfeasibleError("privacy", "sensitive workload but no trusted device")
    lay = _Layout(n, trusted_idx, n + trusted_idx.size)
    L = lay.load_matrix()

    ub_rows, ub_rhs = [], []
    if budget_rows:
        for i in range(n):
            if math.isfinite(co.b[i]):
                ub_rows.append(co.e_budget[i] * L[i])
                ub_rhs.append(co.b[i])
    for i in range(n):
        row = co.f[i] * L[i]
        row[lay.t_col] = -1.0
        ub_rows.append(row)
        ub_rhs.append(0.0)
    if mode is Mode.ENERGY_TIME and payment_row and math.isfinite(task.payment_budget):
        ub_rows.append(co.c @ L)
        ub_rhs.append(task.payment_budget)

    eq_rows, eq_rhs = [], []
    row = np.zeros(lay.size)
    row[:n] = 1.0
    eq_rows.append(row)
    eq_rhs.append(task.workload - u)
    if u > 0:
        row = np.zeros(lay.size)
        row[n:lay.t_col] = 1.0
        eq_rows.append(row)
        eq_rhs.append(u)

    t_vec = np.zeros(lay.size)
    t_vec[lay.t_col] = 1.0
    objectives = {
        "energy": co.e_obj @ L,
        "payment": co.c @ L,
        "time": t_vec,
    }
    primary_key = "energy" if mode is Mode.ENERGY_TIME else "payment"
    if task.time_only:
        primary = t_vec
    else:
        primary = objectives[primary_key] + task.gamma * t_vec
    lp = LinearProgram(primary, np.array(ub_rows), np.array(ub_rhs), np.array(eq_rows), np.array(eq_rhs))
    return lp, lay, objectives


def build_energy_time_lp(task: TaskSpec, fleet: Fleet) -> LinearProgram:
    """Energy + gamma * t program (objective is t alone when gamma is inf)."""
    return _build(task, _coeffs(fleet), Mode.ENERGY_TIME)[0]


def build_cost_time_lp(task: TaskSpec, fleet: Fleet) -> LinearProgram:
    """Payment + gamma * t program; no payment cap row."""
    return _build(task, _coeffs(fleet), Mode.COST_TIME)[0]


def _cascade(task: TaskSpec, objectives):
    """Objectives in tie-breaking order for the task's mode and gamma."""
    primary = "energy" if task.mode is Mode.ENERGY_TIME else "payment"
    other = "payment" if task.mode is Mode.ENERGY_TIME else "energy"
    if task.time_only:
        return [objectives["time"], objectives[primary], objectives[other]]
    scal = objectives[primary] + task.gamma * objectives["time"]
    return [scal, objectives["time"], objectives[other]]


def _diagnose(task: TaskSpec, co: _Coeffs) -> str:
    def feasible(**kw):
        try:
            lp, _, _ = _build(task, co, task.mode, **kw)
        except PlanInfeasibleError:
            return False
        return solve_lexicographic(lp, [lp.objective]).status is Status.OPTIMAL

    if task.mode is Mode.ENERGY_TIME and math.isfinite(task.payment_budget) and feasible(payment_row=False):
        return "payment_budget"
    if task.sensitive > 0 and feasible(payment_row=False, privacy=False):
        return "privacy"
    return "energy_budgets"


def _order(co: _Coeffs):
    return sorted(range(len(co.ids)), key=lambda i: co.ids[i])


def _permute(co: _Coeffs, order) -> _Coeffs:
    return _Coeffs(
        ids=[co.ids[i] for i in order],
        e_obj=co.e_obj[order], e_budget=co.e_budget[order], f=co.f[order],
        c=co.c[order], b=co.b[order], trusted=co.trusted[order], augmented=co.augmented,
    )


def plan(task: TaskSpec, fleet: Fleet, backend=None) -> AllocationPlan:
    """Scalarized optimum with a fixed tie-breaking cascade.

    Finite gamma: primary (+ gamma t), then t, then the remaining cost.
    Time-only: t, then the primary cost, then the remaining cost. Devices are
    processed in id order, so the result does not depend on fleet order.
    """
    co_in = _coeffs(fleet)
    order = _order(co_in)
    co = _permute(co_in, order)
    lp, lay, objectives = _build(task, co, task.mode)
    sol = solve_lexicographic(lp, _cascade(task, objectives), backend=backend)
    if sol.status is not Status.OPTIMAL:
        raise PlanInfeasibleError(_diagnose(task, co))

    z = sol.point
    n = lay.n
    x_sorted = z[:n]
    y_sorted = np.zeros(n)
    y_sorted[lay.trusted_idx] = z[n:lay.t_col]
    x = np.empty(n)
    y = np.empty(n)
    x[order] = x_sorted
    y[order] = y_sorted
    load = x + y
    return AllocationPlan(
        device_ids=tuple(co_in.ids),
        shares=x,
        sensitive_shares=y,
        completion_time=float(z[lay.t_col]),
        energy=float(co_in.e_obj @ load),
        payment=float(co_in.c @ load),
        scalarized_objective=float(sol.objective_value),
        status="optimal",
        gamma=task.gamma,
        mode=task.mode,
        transfer_augmented=co_in.augmented,
    )


def plan_even_split(task: TaskSpec, fleet: Fleet) -> AllocationPlan:
    """Naive baseline: equal insensitive shares, sensitive part evenly over trusted devices.

    Budgets are not enforced; violations are listed on the plan.
    """
    co = _coeffs(fleet)
    n = len(co.ids)
    x = np.full(n, (task.workload - task.sensitive) / n)
    y = np.zeros(n)
    if task.sensitive > 0:
        if not co.trusted.any():
            raise PlanInfeasibleError("privacy", "sensitive workload but no trusted device")
        y[co.trusted] = task.sensitive / co.trusted.sum()
    load = x + y
    t = float(np.max(co.f * load))
    energy = float(co.e_obj @ load)
    payment = float(co.c @ load)
    violations = []
    for i in range(n):
        if co.e_budget[i] * load[i] > co.b[i] + 1e-9:
            violations.append(f"energy budget of {co.ids[i]}")
    if task.mode is Mode.ENERGY_TIME and payment > task.payment_budget + 1e-9:
        violations.append("payment budget")
    primary = energy if task.mode is Mode.ENERGY_TIME else payment
    objective = t if task.time_only else primary + task.gamma * t
    return AllocationPlan(
        device_ids=tuple(co.ids), shares=x, sensitive_shares=y, completion_time=t,
        energy=energy, payment=payment, scalarized_objective=objective, status="baseline",
        gamma=task.gamma, mode=task.mode, violations=tuple(violations),
        transfer_augmented=co.augmented,
    )


def pareto_sweep(task: TaskSpec, fleet: Fleet, gammas: Iterable[float]) -> List[Tuple[float, AllocationPlan]]:
    gammas = [float(g) for g in gammas]
    for a, b in zip(gammas, gammas[1:]):
        if b < a:
            raise ValueError("gammas must be non-decreasing")
    if any(not g >= 0 for g in gammas):
        raise ValueError("gammas must be >= 0")
    return [(g, plan(replace(task, gamma=g), fleet)) for g in gammas]


def augment_with_transfer(fleet: Sequence[DeviceProfile], links) -> EffectiveFleet:
    """Fold input-shipping cost into per-MB time and energy.

    A remote device on link L gains 8/rate s/MB. Transfer energy per MB is
    (tx + rx) power x 8/rate between two mobiles, and tx power only when the
    remote end is a cloudlet or cloud. Result payloads are not charged.
    """
    table = links if isinstance(links, dict) else {lk.id: lk for lk in links}
    out = []
    for d in fleet:
        if d.kind is DeviceKind.INITIATOR:
            out.append(EffectiveDevice(d, d.mobile_e, d.f, "local"))
            continue
        link: Optional[LinkProfile] = table.get(d.link)
        if link is None:
            raise ConfigError(f"device {d.id!r}: unknown link {d.link!r}")
        spm = link.seconds_per_mb
        if d.kind.mobile:
            e_tx = (link.tx_power + link.rx_power) * spm
            note = f"via {link.id}: +{spm:.6g} s/MB, +{e_tx:.6g} J/MB (tx+rx)"
        else:
            e_tx = link.tx_power * spm
            note = f"via {link.id}: +{spm:.6g} s/MB, +{e_tx:.6g} J/MB (initiator tx)"
        out.append(EffectiveDevice(d, d.mobile_e + e_tx, d.f + spm, note))
    return EffectiveFleet(tuple(out))


def check_plan(plan_: AllocationPlan, task: TaskSpec, fleet: Fleet, tol=1e-9) -> List[str]:
    """List violated AllocationPlan invariants (empty when all hold)."""
    co = _coeffs(fleet)
    bad = []
    x, y = plan_.shares, plan_.sensitive_shares
    if abs(x.sum() - (task.workload - task.sensitive)) > tol:
        bad.append("insensitive shares do not sum to w - u")
    if abs(y.sum() - task.sensitive) > tol:
        bad.append("sensitive shares do not sum to u")
    if np.any(y[~co.trusted] != 0.0):
        bad.append("sensitive work on an untrusted device")
    if np.any(x < -1e-12) or np.any(y < -1e-12):
        bad.append("negative share")
    load = x + y
    if np.any(co.e_budget * load > co.b + tol):
        bad.append("energy budget exceeded")
    if task.mode is Mode.ENERGY_TIME and plan_.payment > task.payment_budget + tol:
        bad.append("payment budget exceeded")
    if np.any(co.f * load > plan_.completion_time + tol):
        bad.append("device finishes after completion_time")
    return bad
