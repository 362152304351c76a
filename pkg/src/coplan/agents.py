"""Initiator and collaborator behaviour on top of the event engine.

The initiator discovers peers, plans, ships work and gathers results.
Collaborators are pure state machines driven by delivered events. Divisible
tasks are planned by :mod:`coplan.planner`; pipelines are placed by
exhaustive enumeration.
"""
import logging
import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Dict, FrozenSet, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from . import kernels
from .errors import ConfigError, PlanInfeasibleError
from .netsim import PROTOCOL_MSG_MB, Event, EventKind, LinkProfile, Simulator, account_energy, transfer_cost
from .planner import DeviceKind, DeviceProfile, TaskSpec, augment_with_transfer, plan
from .report import CollaborationReport, compute_gains

log = logging.getLogger(__name__)

# delegated chunks progress in units of this size (MB)
UNIT_MB = 0.5


# ---------------------------------------------------------------------------
# task structures


@dataclass(frozen=True)
class PipelineStage:
    name: str
    costs: Mapping[str, Tuple[float, float]]  # device id -> (seconds, joules) per run
    output_payload: float = 0.0  # MB
    conditional_probability: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "costs", {k: (float(v[0]), float(v[1])) for k, v in dict(self.costs).items()})
        if not 0.0 <= self.conditional_probability <= 1.0:
            raise ConfigError(f"stage {self.name!r}: probability outside [0, 1]")
        if self.output_payload < 0:
            raise ConfigError(f"stage {self.name!r}: negative output payload")
        for dev, (t, e) in self.costs.items():
            if t < 0 or e < 0:
                raise ConfigError(f"stage {self.name!r}: negative cost for {dev!r}")


@dataclass(frozen=True)
class PipelineSpec:
    """Sequential stages; the first (sensing) stage always runs on the initiator."""

    stages: Tuple[PipelineStage, ...]
    gamma: float = 0.0
    service: str = "pipeline"
    placement: Optional[Tuple[str, ...]] = None  # fixed assignment; skips the search

    def __post_init__(self):
        object.__setattr__(self, "stages", tuple(self.stages))
        if self.placement is not None:
            object.__setattr__(self, "placement", tuple(self.placement))
        if not self.stages:
            raise ConfigError("pipeline needs at least one stage")
        if self.stages[0].conditional_probability != 1.0:
            raise ConfigError("the sensing stage must always run")
        if not self.gamma >= 0:
            raise ConfigError("gamma must be >= 0")

    def run_probabilities(self) -> np.ndarray:
        return np.cumprod([s.conditional_probability for s in self.stages])


class Strategy(str, Enum):
    MIGRATE_PARTIAL = "migrate_partial"
    REPROCESS_ALL = "reprocess_all"


@dataclass(frozen=True)
class DepartureEvent:
    device: str
    motion_onset: float
    detection_delay: float = 0.0
    strategy: Strategy = Strategy.MIGRATE_PARTIAL

    def __post_init__(self):
        object.__setattr__(self, "strategy", Strategy(self.strategy))
        if self.motion_onset < 0 or self.detection_delay < 0:
            raise ConfigError("departure times must be non-negative")

    @property
    def detect_time(self) -> float:
        return self.motion_onset + self.detection_delay


# ---------------------------------------------------------------------------
# discovery


@dataclass(frozen=True)
class ScanState:
    interval: float
    last_peer_set: FrozenSet[str] = frozenset()
    min_interval: float = 1.0
    max_interval: float = 16.0

    def __post_init__(self):
        object.__setattr__(self, "last_peer_set", frozenset(self.last_peer_set))
        if not 0 < self.min_interval <= self.interval <= self.max_interval:
            raise ValueError("scan interval must lie in [min_interval, max_interval]")


def adaptive_scan_step(state: ScanState, observed) -> ScanState:
    """Back off while the neighbourhood is stable; rescan fast when it changes."""
    observed = frozenset(observed)
    if observed != state.last_peer_set:
        interval = state.min_interval
    else:
        interval = min(2.0 * state.interval, state.max_interval)
    return replace(state, interval=interval, last_peer_set=observed)


# ---------------------------------------------------------------------------
# collaborator


@dataclass(frozen=True)
class CollaboratorState:
    profile: DeviceProfile
    initiator: str
    busy_until: float = 0.0
    delegations_served: int = 0


def collaborator_step(state: CollaboratorState, event: Event):
    """React to one delivered event; returns ``(new_state, outgoing_events)``.

    Outgoing transfer events carry their ready time as timestamp; the engine
    assigns the actual radio slot.
    """
    me = state.profile
    if event.dst != me.id:
        raise ValueError(f"event addressed to {event.dst!r}, not {me.id!r}")
    service = event.note
    if event.kind is EventKind.INQUIRY:
        if not me.offers(service):
            return state, []
        return state, [Event(event.timestamp, EventKind.INQUIRY_REPLY, me.id, state.initiator,
                             PROTOCOL_MSG_MB, note=service)]
    if event.kind is EventKind.DELEGATE:
        if not me.offers(service):
            return state, [Event(event.timestamp, EventKind.NACK, me.id, state.initiator,
                                 PROTOCOL_MSG_MB, note=service)]
        size = event.payload_size
        start = max(event.timestamp, state.busy_until)
        dur = me.f * size + me.overhead_time
        energy = me.e * size + me.overhead_energy
        out = [
            Event(start, EventKind.COMPUTE_START, me.id, me.id, 0.0, dur, {me.id: energy}, note=service),
            Event(start + dur, EventKind.COMPUTE_END, me.id, me.id, note=service),
            Event(start + dur, EventKind.RESULT, me.id, state.initiator, PROTOCOL_MSG_MB, note=service),
        ]
        return replace(state, busy_until=start + dur, delegations_served=state.delegations_served + 1), out
    return state, []


# ---------------------------------------------------------------------------
# mobility


@dataclass
class Delegation:
    device: str
    size: float
    unit_time: float  # s per UNIT_MB
    overhead_time: float = 0.0
    compute_start: Optional[float] = None
    compute_end: Optional[float] = None
    start_event: Optional[Event] = None

    @property
    def units_total(self) -> int:
        return int(math.ceil(self.size / UNIT_MB - 1e-9))


@dataclass(frozen=True)
class Recovery:
    device: str
    strategy: Strategy
    detect_time: float
    units_completed: int
    migrated_mb: float
    reprocess_mb: float
    warning: str = ""

    @property
    def noop(self) -> bool:
        return self.reprocess_mb == 0.0 and self.migrated_mb == 0.0


def handle_departure(delegations: Mapping[str, Delegation], event: DepartureEvent) -> Recovery:
    """Decide what the initiator must redo when a collaborator leaves.

    Only whole units finished by the detection time count as done. With
    MigratePartial those are returned and the rest is recomputed locally;
    with ReprocessAll the whole chunk is recomputed.
    """
    td = event.detect_time
    dlg = delegations.get(event.device)
    if dlg is None:
        msg = f"departure of {event.device!r} without an active delegation ignored"
        log.warning(msg)
        return Recovery(event.device, event.strategy, td, 0, 0.0, 0.0, msg)
    if dlg.compute_end is not None and td >= dlg.compute_end:
        msg = f"{event.device!r} departed after finishing its chunk"
        log.warning(msg)
        return Recovery(event.device, event.strategy, td, dlg.units_total, 0.0, 0.0, msg)

    units = 0
    if dlg.compute_start is not None and dlg.unit_time > 0:
        progress = td - dlg.compute_start - dlg.overhead_time
        units = int(math.floor(max(0.0, progress) / dlg.unit_time + 1e-9))
        units = min(units, dlg.units_total)
    done = min(dlg.size, units * UNIT_MB)
    if event.strategy is Strategy.MIGRATE_PARTIAL:
        return Recovery(event.device, event.strategy, td, units, done, dlg.size - done)
    return Recovery(event.device, event.strategy, td, units, 0.0, dlg.size)


# ---------------------------------------------------------------------------
# pipeline placement


@dataclass(frozen=True, eq=False)
class PipelinePlacement:
    assignment: Tuple[str, ...]
    stage_names: Tuple[str, ...]
    expected_time: float
    expected_energy: float
    expected_initiator_energy: float
    objective: float
    index: int
    times: np.ndarray = field(repr=False, default=None)
    energies: np.ndarray = field(repr=False, default=None)
    objectives: np.ndarray = field(repr=False, default=None)


def _hop_costs(a: DeviceProfile, b: DeviceProfile, size: float, init_id: str, links: Mapping[str, LinkProfile]):
    """(time, mobile energy, initiator energy) for moving ``size`` MB from a to b."""
    if a.id == b.id:
        return 0.0, 0.0, 0.0
    hops = [(a, b)]
    if a.id != init_id and b.id != init_id:
        hops = [(a, None), (None, b)]
    t = e = ei = 0.0
    for src, dst in hops:
        remote = dst if (src is None or src.id == init_id) else src
        link = links.get(remote.link)
        if link is None:
            raise ConfigError(f"device {remote.id!r}: unknown link {remote.link!r}")
        dur, tx, rx = transfer_cost(link, size)
        t += dur
        src_mobile = src is None or src.kind.mobile
        dst_mobile = dst is None or dst.kind.mobile
        e += (tx if src_mobile else 0.0) + (rx if dst_mobile else 0.0)
        if src is None or src.id == init_id:
            ei += tx
        if dst is None or dst.id == init_id:
            ei += rx
    return t, e, ei


def _pipeline_table(pipeline: PipelineSpec, fleet: Sequence[DeviceProfile], links, backend=None):
    table = links if isinstance(links, dict) else {lk.id: lk for lk in links}
    inits = [d for d in fleet if d.kind is DeviceKind.INITIATOR]
    if len(inits) != 1:
        raise ConfigError("fleet must contain exactly one initiator")
    init = inits[0]
    devs = [init] + [d for d in fleet if d.kind is not DeviceKind.INITIATOR]
    n = len(devs)
    K = len(pipeline.stages)

    comp_t = np.zeros((K, n))
    comp_e = np.zeros((K, n))
    comp_ei = np.zeros((K, n))
    for k, st in enumerate(pipeline.stages):
        candidates = [0] if k == 0 else range(n)
        for j in candidates:
            if devs[j].id not in st.costs:
                raise ConfigError(f"stage {st.name!r} has no cost entry for device {devs[j].id!r}")
            t, e = st.costs[devs[j].id]
            comp_t[k, j] = t
            comp_e[k, j] = e if devs[j].kind.mobile else 0.0
            comp_ei[k, j] = e if j == 0 else 0.0
    tr_t = np.zeros((K, n, n))
    tr_e = np.zeros((K, n, n))
    tr_ei = np.zeros((K, n, n))
    for k, st in enumerate(pipeline.stages):
        for a in range(n):
            for b in range(n):
                tr_t[k, a, b], tr_e[k, a, b], tr_ei[k, a, b] = _hop_costs(devs[a], devs[b], st.output_payload,
                                                                         init.id, table)

    times, energies, init_e = kernels.enumerate_pipeline(
        comp_t, comp_e, comp_ei, tr_t, tr_e, tr_ei, pipeline.run_probabilities(), backend=backend)
    return devs, times, energies, init_e


def _placement(pipeline, devs, times, energies, init_e, gamma, idx=None) -> PipelinePlacement:
    if math.isinf(gamma):
        primary, secondary = times, energies
    else:
        primary, secondary = energies + gamma * times, np.zeros_like(energies)
    if idx is None:
        best = primary.min()
        tied = np.flatnonzero(primary <= best + 1e-12 * max(1.0, abs(best)))
        sec = secondary[tied]
        idx = int(tied[np.flatnonzero(sec <= sec.min() + 1e-12 * max(1.0, abs(sec.min())))[0]])
    n, K = len(devs), len(pipeline.stages)
    assign = kernels.decode_assignment(idx, n, K)
    return PipelinePlacement(
        assignment=tuple(devs[j].id for j in assign),
        stage_names=tuple(s.name for s in pipeline.stages),
        expected_time=float(times[idx]),
        expected_energy=float(energies[idx]),
        expected_initiator_energy=float(init_e[idx]),
        objective=float(primary[idx]),
        index=idx,
        times=times,
        energies=energies,
        objectives=primary,
    )


def place_pipeline(pipeline: PipelineSpec, fleet: Sequence[DeviceProfile], links, gamma: Optional[float] = None,
                   backend=None) -> PipelinePlacement:
    """Enumerate every stage->device assignment and return the cheapest.

    Objective is expected mobile energy + gamma x expected completion time
    (completion time first, then energy, when gamma is inf). Ties go to the
    lexicographically first assignment in fleet order with the initiator first.
    """
    gamma = pipeline.gamma if gamma is None else gamma
    devs, times, energies, init_e = _pipeline_table(pipeline, fleet, links, backend)
    return _placement(pipeline, devs, times, energies, init_e, gamma)


def evaluate_assignment(pipeline: PipelineSpec, fleet: Sequence[DeviceProfile], links, assignment,
                        gamma: Optional[float] = None) -> PipelinePlacement:
    """Expected costs of a fixed stage->device assignment."""
    gamma = pipeline.gamma if gamma is None else gamma
    devs, times, energies, init_e = _pipeline_table(pipeline, fleet, links)
    pos = {d.id: j for j, d in enumerate(devs)}
    assignment = tuple(assignment)
    if len(assignment) != len(pipeline.stages) or assignment[0] != devs[0].id:
        raise ConfigError("assignment must cover every stage and start on the initiator")
    idx = 0
    for dev in assignment[1:]:
        if dev not in pos:
            raise ConfigError(f"assignment names unknown or unavailable device {dev!r}")
        idx = idx * len(devs) + pos[dev]
    return _placement(pipeline, devs, times, energies, init_e, gamma, idx)


# ---------------------------------------------------------------------------
# initiator


class _Run:
    """State of one initiator-driven simulation."""

    def __init__(self, scenario):
        self.sc = scenario
        devices = list(scenario.devices)
        inits = [d for d in devices if d.kind is DeviceKind.INITIATOR]
        if len(inits) != 1:
            raise ConfigError("scenario needs exactly one initiator")
        self.init = inits[0]
        self.devices = {d.id: d for d in devices}
        self.link_table = {lk.id: lk for lk in scenario.links}
        dev_links = {}
        for d in devices:
            if d.kind is DeviceKind.INITIATOR:
                continue
            if d.link not in self.link_table:
                raise ConfigError(f"device {d.id!r}: unknown link {d.link!r}")
            dev_links[d.id] = self.link_table[d.link]
        self.sim = Simulator(self.init.id, dev_links, {d.id: d.kind.value for d in devices})
        self.states = {d.id: CollaboratorState(d, self.init.id) for d in devices if d.kind is not DeviceKind.INITIATOR}
        self.rng = np.random.default_rng(scenario.seed)
        self.task = scenario.task
        self.service = getattr(self.task, "service", "task")
        self.responders: List[str] = []
        self.pending = 0
        self.cpu_free = 0.0
        self.finish = 0.0
        self.discovery_end = 0.0
        self.status = "ok"
        self.binding = None
        self.plan = None
        self.delegations: Dict[str, Delegation] = {}
        self.departed = set()
        self.recoveries: List[Recovery] = []
        self.warnings: List[str] = []
        self.processed: Dict[str, float] = {}

    # discovery ------------------------------------------------------------
    def start(self):
        sim = self.sim
        t0 = 0.0
        opts = self.sc.options
        if opts.scan_time > 0:
            sim.record(0.0, "scan", self.init.id, self.init.id, 0.0, opts.scan_time,
                       {self.init.id: opts.scan_power * opts.scan_time})
            t0 = opts.scan_time
        sim.schedule(t0, self._discover)

    def _discover(self):
        remotes = sorted(self.states)
        if not remotes:
            self._discovery_done()
            return
        self.pending = len(remotes)
        for dev in remotes:
            self.sim.transmit("inquiry", self.init.id, dev, PROTOCOL_MSG_MB,
                              on_arrival=lambda t, dev=dev: self._deliver_inquiry(dev, t), note=self.service)

    def _deliver_inquiry(self, dev, t):
        ev = Event(t, EventKind.INQUIRY, self.init.id, dev, PROTOCOL_MSG_MB, note=self.service)
        self.states[dev], out = collaborator_step(self.states[dev], ev)
        if not out:
            self._one_answered()
        for o in out:
            self.sim.transmit(o.kind.value, o.src, o.dst, o.payload_size,
                              on_arrival=lambda ta, dev=dev: self._reply(dev), note=self.service)

    def _reply(self, dev):
        self.responders.append(dev)
        self._one_answered()

    def _one_answered(self):
        self.pending -= 1
        if self.pending == 0:
            self._discovery_done()

    def _discovery_done(self):
        self.discovery_end = self.sim.now
        self.cpu_free = self.sim.now
        fleet = [self.init] + [self.devices[d] for d in sorted(self.responders)]
        if isinstance(self.task, PipelineSpec):
            self._run_pipeline(fleet)
        else:
            self._run_parallel(fleet)

    # divisible task -------------------------------------------------------
    def _run_parallel(self, fleet):
        task: TaskSpec = self.task
        planning_fleet = fleet
        if self.sc.options.use_transfer_augmentation and len(fleet) > 1:
            planning_fleet = augment_with_transfer(fleet, self.link_table)
        try:
            self.plan = plan(task, planning_fleet)
        except PlanInfeasibleError as exc:
            self.status = "infeasible"
            self.binding = exc.binding
            return
        loads = self.plan.loads()
        now = self.sim.now
        for dev in sorted(loads):
            size = loads[dev]
            if dev == self.init.id or size <= 0:
                continue
            prof = self.devices[dev]
            self.delegations[dev] = Delegation(dev, size, prof.f * UNIT_MB, prof.overhead_time)
            self.sim.transmit("delegate", self.init.id, dev, size,
                              on_arrival=lambda t, dev=dev, size=size: self._deliver_delegate(dev, size, t),
                              note=self.service)
        local = loads.get(self.init.id, 0.0)
        if local > 0:
            self._local_compute(local, now, "local share")
        for dep in getattr(self.sc, "departures", ()):
            self.sim.schedule(max(dep.detect_time, now), lambda dep=dep: self._depart(dep))

    def _local_compute(self, size, ready, note):
        d = self.init
        start = max(ready, self.cpu_free)
        end = self.sim.compute(d.id, start, d.f * size + d.overhead_time, d.e * size + d.overhead_energy, note)
        self.cpu_free = end
        self.finish = max(self.finish, end)
        self.processed[d.id] = self.processed.get(d.id, 0.0) + size

    def _deliver_delegate(self, dev, size, t):
        if dev in self.departed:
            return
        ev = Event(t, EventKind.DELEGATE, self.init.id, dev, size, note=self.service)
        self.states[dev], out = collaborator_step(self.states[dev], ev)
        dlg = self.delegations[dev]
        for o in out:
            if o.kind is EventKind.COMPUTE_START:
                dlg.compute_start = o.timestamp
                dlg.compute_end = o.end
                dlg.start_event = self.sim.record(o.timestamp, o.kind.value, dev, dev, 0.0, o.duration,
                                                  o.energy_by_device, o.note)
            elif o.kind is EventKind.COMPUTE_END:
                self.sim.schedule(o.timestamp, lambda o=o, dev=dev: self._compute_end(dev, o))
            elif o.kind is EventKind.NACK:
                self.sim.transmit("nack", dev, self.init.id, o.payload_size,
                                  on_arrival=lambda ta, dev=dev, size=size: self._local_compute(size, ta, "after nack"),
                                  note=self.service)

    def _compute_end(self, dev, o):
        if dev in self.departed:
            return
        self.sim.record(o.timestamp, "compute_end", dev, dev, 0.0, 0.0, {}, o.note)
        size = self.delegations[dev].size
        self.sim.transmit("result", dev, self.init.id, PROTOCOL_MSG_MB,
                          on_arrival=lambda ta, dev=dev, size=size: self._result(dev, size, ta), note=self.service)

    def _result(self, dev, size, t):
        self.finish = max(self.finish, t)
        self.processed[dev] = self.processed.get(dev, 0.0) + size

    def _depart(self, dep: DepartureEvent):
        rec = handle_departure(self.delegations, dep)
        if rec.noop:
            if rec.warning:
                self.warnings.append(rec.warning)
            return
        self.recoveries.append(rec)
        dev = dep.device
        self.departed.add(dev)
        dlg = self.delegations[dev]
        now = self.sim.now
        if dlg.compute_start is not None and now < dlg.compute_end:
            # cut the running computation short at the detection time
            ev = dlg.start_event
            frac = (now - ev.timestamp) / ev.duration if ev.duration > 0 else 1.0
            self.sim.amend(ev, duration=now - ev.timestamp,
                           energy_by_device={dev: ev.energy_by_device.get(dev, 0.0) * frac})
            self.sim.record(now, "compute_end", dev, dev, 0.0, 0.0, {}, "interrupted")
        self.sim.transmit("depart_notice", dev, self.init.id, PROTOCOL_MSG_MB, note=self.service)
        if rec.migrated_mb > 0:
            self.processed[dev] = self.processed.get(dev, 0.0) + rec.migrated_mb
            self.sim.transmit("partial_result", dev, self.init.id, PROTOCOL_MSG_MB,
                              on_arrival=lambda ta, rec=rec: self._recover(rec, ta), note=self.service)
        else:
            # the notice was just queued; recovery starts once it is delivered
            self.sim.schedule(self.sim.radio_free, lambda rec=rec: self._recover(rec, self.sim.now))

    def _recover(self, rec: Recovery, t):
        self.finish = max(self.finish, t)
        if rec.reprocess_mb > 0:
            self._local_compute(rec.reprocess_mb, t, f"recover {rec.device}")

    # pipeline -------------------------------------------------------------
    def _run_pipeline(self, fleet):
        pipe: PipelineSpec = self.task
        if getattr(self.sc, "departures", ()):
            self.warnings.append("departures are not modelled for pipeline tasks")
        if pipe.placement is not None:
            self.plan = evaluate_assignment(pipe, fleet, self.link_table, pipe.placement)
        else:
            self.plan = place_pipeline(pipe, fleet, self.link_table)
        self._stage(0, self.sim.now)

    def _stage(self, k, ready):
        pipe: PipelineSpec = self.task
        st = pipe.stages[k]
        dev = self.plan.assignment[k]
        t, e = st.costs[dev]
        end = self.sim.compute(dev, ready, t, e, st.name)
        self.sim.schedule(end, lambda: self._stage_done(k))

    def _stage_done(self, k):
        pipe: PipelineSpec = self.task
        dev = self.plan.assignment[k]
        st = pipe.stages[k]
        nxt = k + 1
        if nxt < len(pipe.stages):
            p = pipe.stages[nxt].conditional_probability
            runs = True if p >= 1.0 else (False if p <= 0.0 else bool(self.rng.random() < p))
            if runs:
                to = self.plan.assignment[nxt]
                self.sim.transmit("delegate", dev, to, st.output_payload,
                                  on_arrival=lambda ta: self._stage(nxt, ta), note=pipe.stages[nxt].name)
                return
        if dev == self.init.id:
            self.finish = max(self.finish, self.sim.now)
        else:
            self.sim.transmit("result", dev, self.init.id, st.output_payload,
                              on_arrival=lambda ta: self._pipeline_result(ta), note=st.name)

    def _pipeline_result(self, t):
        self.finish = max(self.finish, t)

    # ----------------------------------------------------------------------
    def report(self) -> CollaborationReport:
        trace = self.sim.trace()
        acct = account_energy(trace)
        discovery = sum(
            sum(ev.energy_by_device.values()) for ev in trace.events
            if ev.kind in (EventKind.SCAN, EventKind.INQUIRY, EventKind.INQUIRY_REPLY)
        )
        payment = 0.0
        if not isinstance(self.task, PipelineSpec):
            for dev, mb in sorted(self.processed.items()):
                payment += self.devices[dev].c * mb
        completion = self.finish if self.status == "ok" else float("nan")
        return CollaborationReport(
            status=self.status,
            completion_time=completion,
            per_device_energy=dict(acct.per_device),
            mobile_total_energy=acct.mobile_total,
            initiator_energy=acct.of(self.init.id),
            discovery_energy=discovery,
            total_payment=payment,
            plan=self.plan,
            binding=self.binding,
            trace=trace,
            recoveries=tuple(self.recoveries),
            warnings=tuple(self.warnings),
        )


def initiator_run(scenario) -> CollaborationReport:
    """Discover, plan, delegate and gather for one scenario."""
    if scenario.task is None:
        run = _Run(scenario)
        return run.report()
    run = _Run(scenario)
    run.start()
    run.sim.run()
    report = run.report()
    if scenario.options.report_gain_vs_local and report.status == "ok":
        base = initiator_run(local_only(scenario))
        if base.completion_time > 0 and base.mobile_total_energy > 0:
            report.gains = compute_gains(report, base)
    return report


def local_only(scenario):
    """The same scenario with the initiator working alone."""
    init = [d for d in scenario.devices if d.kind is DeviceKind.INITIATOR]
    task = scenario.task
    if isinstance(task, PipelineSpec):
        stages = tuple(replace(s, costs={k: v for k, v in s.costs.items() if k == init[0].id}) for s in task.stages)
        task = replace(task, stages=stages, placement=None)
    opts = replace(scenario.options, report_gain_vs_local=False, scan_time=0.0)
    return replace(scenario, devices=tuple(init), departures=(), task=task, options=opts)
