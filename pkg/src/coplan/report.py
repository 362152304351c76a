"""Run reports and gains against local execution."""
import math
from dataclasses import dataclass, field
from typing import Any, Dict, Optional, Tuple


@dataclass(frozen=True)
class Gains:
    gain_time: float
    gain_energy: float
    combined_gain: float


def combine_gains(gain_time: float, gain_energy: float) -> Gains:
    return Gains(gain_time, gain_energy, (gain_time + gain_energy) / 2.0)


def compute_gains(report, local_baseline) -> Gains:
    """Relative improvement of ``report`` over ``local_baseline``.

    Each gain is ``1 - collaborative / local`` using completion time and
    mobile energy; the combined gain weights the two equally.
    """
    lt = local_baseline.completion_time
    le = local_baseline.mobile_total_energy
    if not (lt > 0 and le > 0):
        raise ValueError("local baseline needs positive time and energy")
    return combine_gains(1.0 - report.completion_time / lt, 1.0 - report.mobile_total_energy / le)


@dataclass
class CollaborationReport:
    status: str  # "ok" or "infeasible"
    completion_time: float = math.nan
    per_device_energy: Dict[str, float] = field(default_factory=dict)
    mobile_total_energy: float = math.nan
    initiator_energy: float = math.nan
    discovery_energy: float = 0.0
    total_payment: float = 0.0
    plan: Any = None
    binding: Optional[str] = None
    gains: Optional[Gains] = None
    trace: Any = None
    recoveries: Tuple = ()
    warnings: Tuple[str, ...] = ()

    def to_dict(self) -> dict:
        out = {
            "status": self.status,
            "completion_time": self.completion_time,
            "per_device_energy": dict(sorted(self.per_device_energy.items())),
            "mobile_total_energy": self.mobile_total_energy,
            "initiator_energy": self.initiator_energy,
            "discovery_energy": self.discovery_energy,
            "total_payment": self.total_payment,
        }
        if self.binding is not None:
            out["binding"] = self.binding
        if self.plan is not None:
            out["plan"] = _plan_dict(self.plan)
        if self.gains is not None:
            out["gain_time"] = self.gains.gain_time
            out["gain_energy"] = self.gains.gain_energy
            out["combined_gain"] = self.gains.combined_gain
        if self.recoveries:
            out["recoveries"] = [
                {"device": r.device, "strategy": r.strategy.value, "units_completed": r.units_completed,
                 "migrated_mb": r.migrated_mb, "reprocess_mb": r.reprocess_mb}
                for r in self.recoveries
            ]
        if self.warnings:
            out["warnings"] = list(self.warnings)
        return _jsonable(out)


def _plan_dict(p) -> dict:
    if hasattr(p, "shares"):
        return {
            "shares": {d: float(v) for d, v in zip(p.device_ids, p.shares)},
            "sensitive_shares": {d: float(v) for d, v in zip(p.device_ids, p.sensitive_shares)},
            "completion_time": p.completion_time,
            "energy": p.energy,
            "payment": p.payment,
            "scalarized_objective": p.scalarized_objective,
            "gamma": p.gamma,
            "transfer_augmented": p.transfer_augmented,
        }
    return {
        "assignment": list(p.assignment),
        "stages": list(p.stage_names),
        "expected_time": p.expected_time,
        "expected_energy": p.expected_energy,
        "objective": p.objective,
    }


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, float) and not math.isfinite(obj):
        return "inf" if obj > 0 else ("-inf" if obj < 0 else "nan")
    return obj
