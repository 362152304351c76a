"""Deterministic discrete-event engine for collaboration runs.

The initiator's radio is one serialized resource: every transfer touches the
initiator (star topology), so transfers queue behind each other while remote
computation overlaps freely. Energy is attributed per event and device.
"""
import csv
import heapq
import io
import itertools
import json
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Callable, Dict, List, Optional

from .errors import ConfigError

# inquiry / reply / notice payloads (1 KB)
PROTOCOL_MSG_MB = 0.001

CSV_COLUMNS = ("seq", "timestamp", "kind", "src", "dst", "payload_mb", "duration_s", "energy_json")


class EventKind(str, Enum):
    SCAN = "scan"
    INQUIRY = "inquiry"
    INQUIRY_REPLY = "inquiry_reply"
    DELEGATE = "delegate"
    COMPUTE_START = "compute_start"
    COMPUTE_END = "compute_end"
    RESULT = "result"
    DEPART_NOTICE = "depart_notice"
    PARTIAL_RESULT = "partial_result"
    NACK = "nack"


@dataclass(frozen=True)
class LinkProfile:
    id: str
    rate: float  # Mb/s; math.inf models an ideal link
    tx_power: float = 0.0  # W
    rx_power: float = 0.0  # W
    setup_latency: float = 0.0  # s

    def __post_init__(self):
        if not self.rate > 0:
            raise ConfigError(f"link {self.id!r}: rate must be positive")
        if self.tx_power < 0 or self.rx_power < 0 or self.setup_latency < 0:
            raise ConfigError(f"link {self.id!r}: powers and setup latency must be non-negative")

    @property
    def seconds_per_mb(self) -> float:
        return 8.0 / self.rate


def transfer_cost(link: LinkProfile, size: float):
    """Return ``(time_s, tx_energy_j, rx_energy_j)`` for moving ``size`` MB."""
    if size < 0:
        raise ValueError("transfer size must be non-negative")
    time = link.setup_latency + 8.0 * size / link.rate
    return time, link.tx_power * time, link.rx_power * time


@dataclass(frozen=True)
class Event:
    timestamp: float
    kind: EventKind
    src: str
    dst: str
    payload_size: float = 0.0
    duration: float = 0.0
    energy_by_device: Dict[str, float] = field(default_factory=dict)
    seq: int = 0
    note: str = ""

    @property
    def end(self) -> float:
        return self.timestamp + self.duration

    @property
    def is_transfer(self) -> bool:
        return self.kind not in (EventKind.COMPUTE_START, EventKind.COMPUTE_END, EventKind.SCAN)


@dataclass(frozen=True)
class Trace:
    events: tuple
    end_time: float
    device_kinds: Dict[str, str] = field(default_factory=dict)

    def __len__(self):
        return len(self.events)

    def of_kind(self, kind) -> List[Event]:
        return [ev for ev in self.events if ev.kind == kind]

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for ev in self.events:
            energy = {k: float(f"{v:.9g}") for k, v in ev.energy_by_device.items()}
            writer.writerow([
                ev.seq, f"{ev.timestamp:.9g}", ev.kind.value, ev.src, ev.dst,
                f"{ev.payload_size:.9g}", f"{ev.duration:.9g}",
                json.dumps(energy, sort_keys=True),
            ])
        return buf.getvalue()

    def write_csv(self, path):
        with open(path, "w", newline="") as fh:
            fh.write(self.to_csv())


@dataclass(frozen=True)
class EnergyAccount:
    per_device: Dict[str, float]
    mobile_total: float
    total: float

    def of(self, device_id) -> float:
        return self.per_device.get(device_id, 0.0)


MOBILE_KINDS = ("initiator", "peer")


def account_energy(trace: Trace) -> EnergyAccount:
    """Sum event energies per device; the mobile total skips cloudlet/cloud."""
    per = {dev: 0.0 for dev in trace.device_kinds}
    for ev in trace.events:
        for dev, joules in ev.energy_by_device.items():
            per[dev] = per.get(dev, 0.0) + joules
    mobile = 0.0
    for dev in sorted(per):
        if trace.device_kinds.get(dev, "peer") in MOBILE_KINDS:
            mobile += per[dev]
    return EnergyAccount(per, mobile, sum(per[d] for d in sorted(per)))


class Simulator:
    """Event queue plus the initiator radio.

    ``links`` maps each non-initiator device id to its LinkProfile.
    """

    def __init__(self, initiator: str, links: Dict[str, LinkProfile], device_kinds: Dict[str, str]):
        self.initiator = initiator
        self.links = links
        self.device_kinds = dict(device_kinds)
        self.now = 0.0
        self.radio_free = 0.0
        self._queue = []
        self._seq = itertools.count()
        self._events = []

    def schedule(self, time: float, fn: Callable[[], None]):
        if time < self.now:
            raise ValueError("cannot schedule into the past")
        heapq.heappush(self._queue, (time, next(self._seq), fn))

    def record(self, timestamp, kind, src, dst, payload=0.0, duration=0.0, energy=None, note="") -> Event:
        ev = Event(timestamp, EventKind(kind), src, dst, payload, duration, dict(energy or {}), next(self._seq), note)
        self._events.append(ev)
        return ev

    def link_for(self, device: str) -> LinkProfile:
        try:
            return self.links[device]
        except KeyError:
            raise ConfigError(f"device {device!r} has no link to the initiator") from None

    def transmit(self, kind, src, dst, size, on_arrival: Optional[Callable[[float], None]] = None, note=""):
        """Send ``size`` MB from src to dst starting no earlier than ``now``.

        Peer-to-peer traffic is relayed through the initiator as two hops.
        ``on_arrival`` is scheduled with the delivery time.
        """
        if src == dst:
            if on_arrival is not None:
                self.schedule(self.now, lambda: on_arrival(self.now))
            return self.now
        hops = [(src, dst)]
        if src != self.initiator and dst != self.initiator:
            hops = [(src, self.initiator), (self.initiator, dst)]
        t = self.now
        for a, b in hops:
            remote = b if a == self.initiator else a
            dur, tx, rx = transfer_cost(self.link_for(remote), size)
            start = max(t, self.radio_free)
            self.record(start, kind, a, b, size, dur, {a: tx, b: rx}, note)
            self.radio_free = start + dur
            t = start + dur
        if on_arrival is not None:
            self.schedule(t, lambda: on_arrival(t))
        return t

    def amend(self, event: Event, **changes) -> Event:
        """Replace a recorded event (used when a computation is cut short)."""
        for i, ev in enumerate(self._events):
            if ev is event:
                self._events[i] = replace(ev, **changes)
                return self._events[i]
        raise KeyError("event was not recorded by this simulator")

    def compute(self, device, start, duration, energy, note="") -> float:
        self.record(start, "compute_start", device, device, 0.0, duration, {device: energy}, note)
        self.record(start + duration, "compute_end", device, device, 0.0, 0.0, {}, note)
        return start + duration

    def run(self):
        while self._queue:
            t, _, fn = heapq.heappop(self._queue)
            self.now = t
            fn()

    def trace(self) -> Trace:
        ordered = sorted(self._events, key=lambda ev: (ev.timestamp, ev.seq))
        events = tuple(
            Event(ev.timestamp, ev.kind, ev.src, ev.dst, ev.payload_size, ev.duration,
                  ev.energy_by_device, i, ev.note)
            for i, ev in enumerate(ordered)
        )
        end = max((ev.end for ev in events), default=0.0)
        return Trace(events, end, self.device_kinds)


def initiator_transfers_overlap(trace: Trace) -> bool:
    spans = sorted((ev.timestamp, ev.end) for ev in trace.events if ev.is_transfer and ev.src == _initiator_of(trace))
    return any(b_start < a_end - 1e-12 for (_, a_end), (b_start, _) in zip(spans, spans[1:]))


def _initiator_of(trace: Trace) -> Optional[str]:
    for dev, kind in trace.device_kinds.items():
        if kind == "initiator":
            return dev
    return None


def run(scenario) -> Trace:
    """Replay ``scenario`` and return its trace."""
    from .agents import initiator_run

    return initiator_run(scenario).trace

