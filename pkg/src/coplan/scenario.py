"""Scenario files: one JSON document per experiment.

Top-level keys: ``seed``, ``devices``, ``links``, ``task``, ``observations``,
``departures``, ``options``. Unbounded quantities (budgets, gamma, link
rate) are written as the string ``"inf"``. Devices may omit ``e``/``f`` when
observations for the task's service exist; slopes of the fitted models fill
them in and intercepts become per-delegation overheads.
"""
import json
import math
from dataclasses import dataclass, field
from typing import Tuple, Union

from .agents import DepartureEvent, PipelineSpec, PipelineStage, Strategy
from .errors import ConfigError
from .netsim import LinkProfile
from .planner import DeviceKind, DeviceProfile, Mode, TaskSpec
from .profiler import Observation, ObservationStore, ProfileError, fit


class ScenarioError(ConfigError):
    def __init__(self, where: str, message: str):
        self.field = where
        super().__init__(f"{where}: {message}" if where else message)


@dataclass(frozen=True)
class ScenarioOptions:
    use_transfer_augmentation: bool = False
    report_gain_vs_local: bool = False
    scan_time: float = 0.0
    scan_power: float = 0.0


@dataclass(frozen=True)
class Scenario:
    devices: Tuple[DeviceProfile, ...]
    links: Tuple[LinkProfile, ...] = ()
    task: Union[TaskSpec, PipelineSpec, None] = None
    observations: Tuple[Observation, ...] = ()
    departures: Tuple[DepartureEvent, ...] = ()
    seed: int = 0
    options: ScenarioOptions = field(default_factory=ScenarioOptions)

    @property
    def initiator(self) -> DeviceProfile:
        return next(d for d in self.devices if d.kind is DeviceKind.INITIATOR)


# ---------------------------------------------------------------------------
# parsing helpers


def _num(obj, key, where, default=None, allow_inf=False):
    if key not in obj:
        if default is None:
            raise ScenarioError(f"{where}.{key}", "missing required field")
        return default
    v = obj[key]
    if isinstance(v, str) and allow_inf and v.strip().lower() in ("inf", "infinity"):
        return math.inf
    if v is None and allow_inf:
        return math.inf
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ScenarioError(f"{where}.{key}", f"expected a number, got {v!r}")
    v = float(v)
    if math.isnan(v) or (math.isinf(v) and not allow_inf):
        raise ScenarioError(f"{where}.{key}", "must be finite")
    return v


def _str(obj, key, where, default=None):
    if key not in obj or obj[key] is None:
        if default is None:
            raise ScenarioError(f"{where}.{key}", "missing required field")
        return default
    v = obj[key]
    if not isinstance(v, str):
        raise ScenarioError(f"{where}.{key}", f"expected a string, got {v!r}")
    return v


def _list(obj, key, where):
    v = obj.get(key, [])
    if v is None:
        return []
    if not isinstance(v, list):
        raise ScenarioError(f"{where}{key}", "expected a list")
    return v


def _enum(cls, obj, key, where, default):
    raw = obj.get(key, default)
    try:
        return cls(raw)
    except ValueError:
        choices = ", ".join(m.value for m in cls)
        raise ScenarioError(f"{where}.{key}", f"{raw!r} is not one of {choices}") from None


def _wrap(where, fn, *args, **kw):
    try:
        return fn(*args, **kw)
    except ScenarioError:
        raise
    except (ConfigError, ProfileError, ValueError, TypeError) as exc:
        raise ScenarioError(where, str(exc)) from None


# ---------------------------------------------------------------------------


def parse_scenario(data: dict) -> Scenario:
    if not isinstance(data, dict):
        raise ScenarioError("", "scenario must be a JSON object")

    links = []
    for i, raw in enumerate(_list(data, "links", "")):
        w = f"links[{i}]"
        links.append(_wrap(w, LinkProfile,
                           id=_str(raw, "id", w),
                           rate=_num(raw, "rate", w, allow_inf=True),
                           tx_power=_num(raw, "tx_power", w, 0.0),
                           rx_power=_num(raw, "rx_power", w, 0.0),
                           setup_latency=_num(raw, "setup_latency", w, 0.0)))
    link_ids = [lk.id for lk in links]
    if len(set(link_ids)) != len(link_ids):
        raise ScenarioError("links", "duplicate link id")

    observations = []
    for i, raw in enumerate(_list(data, "observations", "")):
        w = f"observations[{i}]"
        observations.append(_wrap(w, Observation,
                                  service=_str(raw, "service", w),
                                  size=_num(raw, "size", w),
                                  time=_num(raw, "time", w),
                                  energy=_num(raw, "energy", w),
                                  device=raw.get("device")))
    store = ObservationStore(observations)

    task_raw = data.get("task")
    task = None
    service = "task"
    if task_raw is not None:
        if not isinstance(task_raw, dict):
            raise ScenarioError("task", "expected an object")
        service = _str(task_raw, "service", "task", "task" if task_raw.get("type", "parallel") == "parallel"
                       else "pipeline")

    devices = []
    raw_devices = _list(data, "devices", "")
    if not raw_devices:
        raise ScenarioError("devices", "at least one device is required")
    for i, raw in enumerate(raw_devices):
        w = f"devices[{i}]"
        if not isinstance(raw, dict):
            raise ScenarioError(w, "expected an object")
        dev_id = _str(raw, "id", w)
        kind = _enum(DeviceKind, raw, "kind", w, "peer")
        e = raw.get("e")
        f = raw.get("f")
        overhead_t = _num(raw, "overhead_time", w, 0.0)
        overhead_e = _num(raw, "overhead_energy", w, 0.0)
        if e is None or f is None:
            if not store.for_service(service, dev_id):
                missing = "e" if e is None else "f"
                raise ScenarioError(f"{w}.{missing}", "missing and no observations to derive it from")
            tm, em = _wrap(f"observations[{dev_id}]", fit, store, service, dev_id)
            if f is None:
                f = tm.slope
                if "overhead_time" not in raw:
                    overhead_t = max(0.0, tm.intercept)
            if e is None:
                e = em.slope
                if "overhead_energy" not in raw:
                    overhead_e = max(0.0, em.intercept)
        e = _num({"e": e}, "e", w)
        f = _num({"f": f}, "f", w)
        link = raw.get("link")
        if kind is not DeviceKind.INITIATOR:
            if link is None:
                raise ScenarioError(f"{w}.link", "non-initiator devices need a link")
            if link not in link_ids:
                raise ScenarioError(f"{w}.link", f"unknown link id {link!r}")
        services = raw.get("services")
        if services is not None and not (isinstance(services, list) and all(isinstance(s, str) for s in services)):
            raise ScenarioError(f"{w}.services", "expected a list of service names")
        devices.append(_wrap(w, DeviceProfile,
                             id=dev_id, e=e, f=f,
                             c=_num(raw, "c", w, 0.0),
                             b=_num(raw, "b", w, math.inf, allow_inf=True),
                             trusted=bool(raw.get("trusted", False)),
                             kind=kind, link=link,
                             overhead_time=overhead_t, overhead_energy=overhead_e,
                             services=tuple(services) if services is not None else None))
    ids = [d.id for d in devices]
    if len(set(ids)) != len(ids):
        raise ScenarioError("devices", "duplicate device id")
    n_init = sum(d.kind is DeviceKind.INITIATOR for d in devices)
    if n_init != 1:
        raise ScenarioError("devices", f"exactly one initiator required, found {n_init}")

    if task_raw is not None:
        task = _parse_task(task_raw, service, set(ids))

    departures = []
    for i, raw in enumerate(_list(data, "departures", "")):
        w = f"departures[{i}]"
        dev = _str(raw, "device", w)
        if dev not in ids:
            raise ScenarioError(f"{w}.device", f"unknown device id {dev!r}")
        departures.append(_wrap(w, DepartureEvent, dev,
                                _num(raw, "motion_onset", w),
                                _num(raw, "detection_delay", w, 0.0),
                                _enum(Strategy, raw, "strategy", w, "migrate_partial")))

    opts_raw = data.get("options", {}) or {}
    if not isinstance(opts_raw, dict):
        raise ScenarioError("options", "expected an object")
    known = {"use_transfer_augmentation", "report_gain_vs_local", "scan_time", "scan_power"}
    unknown = set(opts_raw) - known
    if unknown:
        raise ScenarioError(f"options.{sorted(unknown)[0]}", "unknown option")
    options = ScenarioOptions(
        use_transfer_augmentation=bool(opts_raw.get("use_transfer_augmentation", False)),
        report_gain_vs_local=bool(opts_raw.get("report_gain_vs_local", False)),
        scan_time=_num(opts_raw, "scan_time", "options", 0.0),
        scan_power=_num(opts_raw, "scan_power", "options", 0.0),
    )
    seed = data.get("seed", 0)
    if isinstance(seed, bool) or not isinstance(seed, int):
        raise ScenarioError("seed", "expected an integer")
    return Scenario(tuple(devices), tuple(links), task, tuple(observations), tuple(departures), seed, options)


def _parse_task(raw, service, device_ids) -> Union[TaskSpec, PipelineSpec]:
    kind = raw.get("type", "parallel")
    if kind == "parallel":
        return _wrap("task", TaskSpec,
                     workload=_num(raw, "workload", "task"),
                     sensitive=_num(raw, "sensitive", "task", 0.0),
                     payment_budget=_num(raw, "payment_budget", "task", math.inf, allow_inf=True),
                     gamma=_num(raw, "gamma", "task", 0.0, allow_inf=True),
                     mode=_enum(Mode, raw, "mode", "task", "energy_time"),
                     service=service)
    if kind == "pipeline":
        stages = []
        for i, st in enumerate(_list(raw, "stages", "task.")):
            w = f"task.stages[{i}]"
            costs = st.get("costs")
            if not isinstance(costs, dict) or not costs:
                raise ScenarioError(f"{w}.costs", "expected a non-empty object of device costs")
            parsed = {}
            for dev, c in costs.items():
                cw = f"{w}.costs.{dev}"
                if dev not in device_ids:
                    raise ScenarioError(cw, f"unknown device id {dev!r}")
                if not isinstance(c, dict):
                    raise ScenarioError(cw, "expected {time, energy}")
                parsed[dev] = (_num(c, "time", cw), _num(c, "energy", cw))
            stages.append(_wrap(w, PipelineStage,
                                name=_str(st, "name", w),
                                costs=parsed,
                                output_payload=_num(st, "output_payload", w, 0.0),
                                conditional_probability=_num(st, "conditional_probability", w, 1.0)))
        placement = raw.get("placement")
        if placement is not None:
            if not (isinstance(placement, list) and all(isinstance(p, str) for p in placement)):
                raise ScenarioError("task.placement", "expected a list of device ids")
            for p in placement:
                if p not in device_ids:
                    raise ScenarioError("task.placement", f"unknown device id {p!r}")
            placement = tuple(placement)
        return _wrap("task", PipelineSpec, tuple(stages),
                     gamma=_num(raw, "gamma", "task", 0.0, allow_inf=True), service=service,
                     placement=placement)
    raise ScenarioError("task.type", f"unknown task type {kind!r}")


def load_scenario(path) -> Scenario:
    with open(path) as fh:
        text = fh.read()
    return loads_scenario(text)


def loads_scenario(text: str) -> Scenario:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"line {exc.lineno} column {exc.colno}", exc.msg) from None
    return parse_scenario(data)


# ---------------------------------------------------------------------------
# writing


def _out(x):
    return "inf" if isinstance(x, float) and math.isinf(x) else x


def scenario_to_dict(sc: Scenario) -> dict:
    devices = []
    for d in sc.devices:
        row = {"id": d.id, "kind": d.kind.value, "e": d.e, "f": d.f, "c": d.c, "b": _out(d.b),
               "trusted": d.trusted, "overhead_time": d.overhead_time, "overhead_energy": d.overhead_energy}
        if d.link is not None:
            row["link"] = d.link
        if d.services is not None:
            row["services"] = list(d.services)
        devices.append(row)
    out = {
        "seed": sc.seed,
        "devices": devices,
        "links": [{"id": lk.id, "rate": _out(lk.rate), "tx_power": lk.tx_power, "rx_power": lk.rx_power,
                   "setup_latency": lk.setup_latency} for lk in sc.links],
    }
    t = sc.task
    if isinstance(t, TaskSpec):
        out["task"] = {"type": "parallel", "service": t.service, "workload": t.workload, "sensitive": t.sensitive,
                       "payment_budget": _out(t.payment_budget), "gamma": _out(t.gamma), "mode": t.mode.value}
    elif isinstance(t, PipelineSpec):
        out["task"] = {"type": "pipeline", "service": t.service, "gamma": _out(t.gamma), "stages": [
            {"name": s.name, "output_payload": s.output_payload,
             "conditional_probability": s.conditional_probability,
             "costs": {dev: {"time": c[0], "energy": c[1]} for dev, c in s.costs.items()}}
            for s in t.stages]}
        if t.placement is not None:
            out["task"]["placement"] = list(t.placement)
    if sc.observations:
        out["observations"] = [{"service": o.service, "device": o.device, "size": o.size, "time": o.time,
                                "energy": o.energy} for o in sc.observations]
    if sc.departures:
        out["departures"] = [{"device": d.device, "motion_onset": d.motion_onset,
                              "detection_delay": d.detection_delay, "strategy": d.strategy.value}
                             for d in sc.departures]
    o = sc.options
    out["options"] = {"use_transfer_augmentation": o.use_transfer_augmentation,
                      "report_gain_vs_local": o.report_gain_vs_local,
                      "scan_time": o.scan_time, "scan_power": o.scan_power}
    return out


def dumps_scenario(sc: Scenario) -> str:
    return json.dumps(scenario_to_dict(sc), indent=2)


def write_scenario(sc: Scenario, path):
    with open(path, "w") as fh:
        fh.write(dumps_scenario(sc) + "\n")
