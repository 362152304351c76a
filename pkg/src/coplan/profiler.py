"""Size-based linear models of service execution time and energy."""
from dataclasses import dataclass
from typing import List, Optional, Tuple


class ProfileError(ValueError):
    pass


@dataclass(frozen=True)
class Observation:
    service: str
    size: float  # MB
    time: float  # s
    energy: float  # J
    device: Optional[str] = None

    def __post_init__(self):
        if not self.size > 0:
            raise ProfileError(f"observation size must be positive, got {self.size}")
        if not self.time >= 0 or not self.energy >= 0:
            raise ProfileError("observation time and energy must be non-negative")


@dataclass(frozen=True)
class RegressionModel:
    slope: float
    intercept: float
    sample_count: int
    residual_sse: float

    def predict(self, size: float) -> float:
        return predict(self, size)


class ObservationStore:
    """Append-only log of past invocations. Callers serialize mutation."""

    def __init__(self, observations=()):
        self._obs: List[Observation] = list(observations)

    def __len__(self):
        return len(self._obs)

    def __iter__(self):
        return iter(self._obs)

    def for_service(self, service: str, device: Optional[str] = None) -> List[Observation]:
        return [o for o in self._obs if o.service == service and (device is None or o.device == device)]


def record(store: ObservationStore, obs: Observation) -> ObservationStore:
    if not isinstance(obs, Observation):
        raise ProfileError("expected an Observation")
    store._obs.append(obs)
    return store


def _ols(xs, ys) -> RegressionModel:
    n = len(xs)
    sx = sum(xs)
    sy = sum(ys)
    sxx = sum(x * x for x in xs)
    sxy = sum(x * y for x, y in zip(xs, ys))
    det = n * sxx - sx * sx
    # det is n * sum((x - mean)^2); compare against the spread itself
    mean = sx / n
    spread = sum((x - mean) ** 2 for x in xs)
    if spread <= 1e-12 * max(1.0, sxx):
        raise ProfileError("all observation sizes are equal; slope is undetermined")
    slope = (n * sxy - sx * sy) / det
    intercept = (sy - slope * sx) / n
    sse = sum((y - (slope * x + intercept)) ** 2 for x, y in zip(xs, ys))
    return RegressionModel(slope, intercept, n, sse)


def fit(store: ObservationStore, service: str, device: Optional[str] = None) -> Tuple[RegressionModel, RegressionModel]:
    """Ordinary least squares of time and energy on input size."""
    obs = sorted(store.for_service(service, device), key=lambda o: (o.size, o.time, o.energy))
    if len(obs) < 2:
        raise ProfileError(f"need at least 2 observations for {service!r}, have {len(obs)}")
    sizes = [o.size for o in obs]
    return _ols(sizes, [o.time for o in obs]), _ols(sizes, [o.energy for o in obs])


def predict(model: RegressionModel, size: float) -> float:
    if size < 0:
        raise ValueError("size must be non-negative")
    return max(0.0, model.slope * size + model.intercept)
